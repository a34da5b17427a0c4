"""Configuration-driven scenario runner.

`descriptorlq run` executes a synthesis + simulation scenario described by a
JSON config (or a built-in named scenario) and writes CSV/JSON/SVG artifacts;
`descriptorlq verify` runs the invariant suite on the same scenario and emits
a pass/fail report.  Exit codes: 0 success, 1 config error, 2 model
assumption violated, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .control import (
    minimum_cost,
    picard_solve,
    variation_gradient,
)
from .descriptor import (
    PROBE_SEED,
    DescriptorSystem,
    compute_projectors,
    semi_explicit_projectors,
)
from .exceptions import (
    DescriptorLQError,
    HigherIndex,
    IncompatibleWeights,
    NonSquare,
    ProjectionFailure,
    SingularA0,
    SingularElliptic,
    SingularPencil,
)
from .fem import ParabolicEllipticParams, assemble, instability_indicator
from .grid import TimeGrid
from .oracle import direct_transcription
from .pipeline import Synthesis, synthesize
from .riccati import projection_free_residual
from .signals import ControlSignal
from .simulate import (
    optimality_restart_deviation,
    simulate_closed_loop,
    simulate_open_loop,
)
from .weierstrass import check_weight_compatibility

__all__ = ["main", "run_scenario", "verify_scenario", "builtin_scenario"]


class ConfigError(Exception):
    """Malformed or inconsistent scenario configuration."""


_ASSUMPTION_ERRORS = (
    NonSquare,
    SingularPencil,
    HigherIndex,
    ProjectionFailure,
    IncompatibleWeights,
    SingularA0,
    SingularElliptic,
)

_FMT = "%.16e"  # 17 significant digits


# ---------------------------------------------------------------------------
# configuration


def builtin_scenario(name: str) -> dict:
    """Built-in scenario configs, keyed by name."""
    if name == "paper-example":
        return {
            "problem": {
                "kind": "parabolic-elliptic",
                "params": {
                    "rho": 1.0,
                    "gamma": 2.0,
                    "alpha": 2.0,
                    "beta": 2.0,
                    "n_elements": 27,
                },
            },
            "weights": {"preset": "default"},
            "horizon": {"t_f": 6.0, "n_output_nodes": 601},
            "checks": {"picard": False, "oracle": False, "oracle_steps": 400},
            "tolerances": {"dre_rtol": 1e-11, "dre_atol": 1e-14},
            "semi_explicit": True,
            "output_dir": "out-paper-example",
        }
    if name == "lqr-reduction":
        rng = np.random.default_rng(PROBE_SEED)
        n, m = 4, 2
        A = rng.standard_normal((n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + 0.5) * np.eye(n)
        Qh = rng.standard_normal((n, n))
        Gh = rng.standard_normal((n, n))
        x_i = rng.standard_normal(n)
        return {
            "problem": {
                "kind": "matrices",
                "matrices": {
                    "E": np.eye(n).tolist(),
                    "A": A.tolist(),
                    "B": rng.standard_normal((n, m)).tolist(),
                    "x_i": x_i.tolist(),
                },
            },
            "weights": {
                "Q": (Qh @ Qh.T / n).tolist(),
                "R": np.eye(m).tolist(),
                "G": (0.1 * Gh @ Gh.T / n).tolist(),
            },
            "horizon": {"t_f": 2.0, "n_output_nodes": 401},
            # plain fixed-point iteration does not contract at this coupling
            # strength, so only the transcription oracle is cross-checked
            "checks": {"picard": False, "oracle": True, "oracle_steps": 400},
            "tolerances": {},
            "semi_explicit": False,
            "output_dir": "out-lqr-reduction",
        }
    raise ConfigError(f"unknown scenario '{name}'")


def _load_matrix(spec, base: Path, name: str) -> np.ndarray:
    if isinstance(spec, str):
        path = base / spec
        if not path.exists():
            raise ConfigError(f"{name}: referenced file {path} not found")
        return np.loadtxt(path, delimiter=",", ndmin=2)
    try:
        return np.asarray(spec, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: not a numeric array: {exc}") from exc


def _build_problem(config: dict, base: Path):
    """Returns (sys, weights, x_i, fem_params|None) from a parsed config."""
    from .weierstrass import QuadraticWeights

    try:
        problem = config["problem"]
        kind = problem["kind"]
        horizon = config["horizon"]
        t_f = float(horizon["t_f"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"missing config field: {exc}") from exc

    if kind == "parabolic-elliptic":
        params = problem.get("params", {})
        try:
            fem = ParabolicEllipticParams(t_f=t_f, **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad parabolic-elliptic params: {exc}") from exc
        sys_, w, x_i = assemble(fem)
        return sys_, w, x_i, fem

    if kind == "matrices":
        mats = problem.get("matrices")
        if mats is None:
            raise ConfigError("problem.kind 'matrices' needs problem.matrices")
        E = _load_matrix(mats["E"], base, "E")
        A = _load_matrix(mats["A"], base, "A")
        B = _load_matrix(mats["B"], base, "B")
        x_i = _load_matrix(mats.get("x_i", [[0.0]] * A.shape[0]), base, "x_i").ravel()
        weights = config.get("weights", {})
        if "preset" in weights:
            raise ConfigError("weight presets only apply to parabolic-elliptic")
        try:
            w = QuadraticWeights(
                Q=_load_matrix(weights["Q"], base, "Q"),
                R=_load_matrix(weights["R"], base, "R"),
                G=_load_matrix(weights["G"], base, "G"),
                t_f=t_f,
            )
        except KeyError as exc:
            raise ConfigError(f"weights missing {exc}") from exc
        sys_ = DescriptorSystem(E, A, B)
        if x_i.size != sys_.n_x:
            raise ConfigError("x_i length does not match state dimension")
        return sys_, w, x_i, None

    raise ConfigError(f"unknown problem kind '{kind}'")


def _build_grid(config: dict, fem) -> TimeGrid:
    horizon = config["horizon"]
    t_f = float(horizon["t_f"])
    n = int(horizon.get("n_output_nodes", 601))
    if n < 2:
        raise ConfigError("n_output_nodes must be at least 2")
    h_min = horizon.get("h_min")
    growth = float(horizon.get("growth", 1.12))
    if h_min is None and fem is not None:
        # stiff FEM operators put a boundary layer at t_f; resolve it
        h_min = 1e-5
    if h_min is not None:
        return TimeGrid.terminal_refined(0.0, t_f, n, float(h_min), growth)
    return TimeGrid.uniform(0.0, t_f, n)


def _load_config(args) -> tuple[dict, Path]:
    if args.scenario is not None:
        return builtin_scenario(args.scenario), Path.cwd()
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        config = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    return config, path.parent


# ---------------------------------------------------------------------------
# artifact writers


def _write_csv(path: Path, header: str, columns) -> None:
    rows = np.column_stack(columns)
    with path.open("w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def _write_plots(outdir: Path, grid, traj, fem, uncontrolled) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "descriptorlq"
    import matplotlib.pyplot as plt

    meta = {"Date": None}

    fig, ax = plt.subplots(figsize=(7, 4))
    for j in range(traj.u.shape[1]):
        ax.plot(grid.nodes, traj.u[:, j], label=f"u_{j + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("u(t)")
    ax.set_title("optimal feedback control")
    if traj.u.shape[1] > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "control.svg", metadata=meta)
    plt.close(fig)

    if fem is None:
        return
    n = fem.n_elements + 1
    xs = np.linspace(0.0, 1.0, n)
    fields = [
        ("w controlled", traj.x[:, :n]),
        ("v controlled", traj.x[:, n:]),
        ("w uncontrolled", uncontrolled.x[:, :n]),
        ("v uncontrolled", uncontrolled.x[:, n:]),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True, sharey=True)
    for ax, (title, field) in zip(axes.ravel(), fields):
        # rasterized: a vector mesh of every space-time cell makes the SVG huge
        pm = ax.pcolormesh(grid.nodes, xs, field.T, shading="gouraud",
                           rasterized=True)
        fig.colorbar(pm, ax=ax)
        ax.set_title(title)
        ax.set_xlabel("t")
        ax.set_ylabel("x")
    fig.tight_layout()
    fig.savefig(outdir / "fields.svg", metadata=meta)
    plt.close(fig)


def _classic_lqr_metric(sys_, w, grid, syn: Synthesis) -> float:
    """Sup-norm gain disagreement against a plain finite-horizon LQR solve.

    Only meaningful for E = I; integrates the standard Riccati ODE
    independently of the descriptor pipeline.
    """
    from scipy.integrate import solve_ivp

    n = sys_.n_x
    A, B = sys_.A, sys_.B
    Rinv = np.linalg.inv(w.R)

    def rhs(s, y):
        P = y.reshape(n, n)
        P = 0.5 * (P + P.T)
        dP = -(P @ A) - (A.T @ P) + P @ B @ Rinv @ B.T @ P - w.Q
        return (-dP).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, w.t_f - grid.t0),
        (0.5 * (w.G + w.G.T)).ravel(),
        method="RK45",
        t_eval=(w.t_f - grid.nodes)[::-1],
        rtol=1e-11,
        atol=1e-14,
    )
    P = sol.y.T.reshape(-1, n, n)[::-1]
    K_ref = np.einsum("ij,jk,nkl->nil", Rinv, B.T, P)
    denom = max(float(np.max(np.abs(K_ref))), 1e-30)
    return float(np.max(np.abs(K_ref - syn.gains.K)) / denom)


# ---------------------------------------------------------------------------
# scenario execution


def _execute(config: dict, base: Path):
    """Common pipeline for run and verify; returns a dict of all products."""
    sys_, w, x_i, fem = _build_problem(config, base)
    grid = _build_grid(config, fem)
    tols = config.get("tolerances", {}) or {}
    allowed = {"tol_proj", "tol_weights", "tol_dre", "dre_rtol", "dre_atol"}
    unknown = set(tols) - allowed - {"tol_opt", "tol_fp", "tol_consist"}
    if unknown:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
    syn_kwargs = {k: float(v) for k, v in tols.items() if k in allowed}
    syn = synthesize(
        sys_, w, grid, semi_explicit=bool(config.get("semi_explicit", False)),
        **syn_kwargs,
    )
    traj = simulate_closed_loop(sys_, syn.wf, syn.gains, x_i, grid, weights=w)
    return {
        "sys": sys_, "w": w, "x_i": x_i, "fem": fem, "grid": grid,
        "syn": syn, "traj": traj, "tols": tols,
    }


def _summary(config: dict, prod: dict) -> dict:
    sys_, w, x_i = prod["sys"], prod["w"], prod["x_i"]
    syn, traj, grid, fem = prod["syn"], prod["traj"], prod["grid"], prod["fem"]
    checks = config.get("checks", {}) or {}
    tols = prod["tols"]

    zu = variation_gradient(traj.control(), traj, w, syn.sw, syn.wf)
    consistency = float(
        np.max(
            np.linalg.norm(traj.x0c + traj.u @ syn.wf.Bt0.T, axis=1)
            / (1.0 + np.linalg.norm(traj.u, axis=1))
        )
    ) if syn.wf.rank_0 else 0.0
    restart = 0.0
    for frac in (0.25, 0.5, 0.75):
        dev = optimality_restart_deviation(
            traj, grid.t0 + frac * (grid.t_f - grid.t0), sys_, syn.wf, syn.gains
        )
        restart = max(restart, dev["x1"], dev["x0"])

    summary = {
        "J_feedback": traj.J,
        "J_min_formula": minimum_cost(syn.rs, sys_, x_i),
        "zu_sup": zu.sup_norm(),
        "consistency_residual": consistency,
        "restart_deviation": restart,
        "probe_seed": PROBE_SEED,
        "version": __version__,
    }
    if fem is not None:
        summary["leading_open_loop_rate"] = instability_indicator(fem)
    if checks.get("picard"):
        u_fp = picard_solve(
            sys_, syn.wf, syn.sw, traj.x[0], grid,
            tol_fp=float(tols.get("tol_fp", 1e-8)),
        )
        fp_traj = simulate_open_loop(
            sys_, syn.wf, u_fp, traj.x[0], grid, weights=w,
            tol_consist=float(tols.get("tol_consist", 1e-9)),
        )
        summary["J_picard"] = fp_traj.J
        summary["picard_control_gap"] = float(np.max(np.abs(u_fp.u - traj.u)))
    if checks.get("oracle"):
        _, J_star = direct_transcription(
            sys_, syn.wf, w, x_i, int(checks.get("oracle_steps", 400))
        )
        summary["J_oracle"] = J_star
    if np.allclose(sys_.E, np.eye(sys_.n_x)):
        summary["classic_lqr_gain_gap"] = _classic_lqr_metric(sys_, w, grid, syn)
    return summary


def run_scenario(config: dict, base: Path, output_dir: Path | None = None) -> int:
    prod = _execute(config, base)
    sys_, w = prod["sys"], prod["w"]
    syn, traj, grid, fem = prod["syn"], prod["traj"], prod["grid"], prod["fem"]

    outdir = output_dir or Path(config.get("output_dir", "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "diagnostics.json").unlink(missing_ok=True)

    summary = _summary(config, prod)

    n_x, n_u = sys_.n_x, sys_.n_u
    _write_csv(
        outdir / "trajectory.csv",
        "t," + ",".join(f"x_{i + 1}" for i in range(n_x))
        + "," + ",".join(f"u_{j + 1}" for j in range(n_u)),
        [grid.nodes, traj.x, traj.u],
    )
    _write_csv(
        outdir / "control.csv",
        "t," + ",".join(f"u_{j + 1}" for j in range(n_u)),
        [grid.nodes, traj.u],
    )
    Ex = sys_.E @ prod["x_i"]
    cost_to_go = np.einsum("i,nij,j->n", Ex, syn.rs.Pit1, Ex)
    frob = np.linalg.norm(syn.rs.Pit1, axis=(1, 2))
    _write_csv(
        outdir / "riccati.csv",
        "t,cost_to_go_xi,frobenius_Pit1",
        [grid.nodes, cost_to_go, frob],
    )
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    uncontrolled = None
    if fem is not None:
        uncontrolled = simulate_open_loop(
            sys_, syn.wf, ControlSignal.zero(grid, n_u), prod["x_i"], grid,
        )
    _write_plots(outdir, grid, traj, fem, uncontrolled)
    print(f"wrote artifacts to {outdir}")
    return 0


def verify_scenario(config: dict, base: Path, output_dir: Path | None = None) -> int:
    prod = _execute(config, base)
    sys_, w, x_i = prod["sys"], prod["w"], prod["x_i"]
    syn, traj, grid = prod["syn"], prod["traj"], prod["grid"]
    tols = prod["tols"]
    checks_cfg = config.get("checks", {}) or {}

    results = []

    def record(name, value, tol, passed=None):
        ok = bool(value <= tol) if passed is None else bool(passed)
        results.append((name, value, tol, ok))

    pres = syn.proj.residuals(sys_)
    record("projector_idempotency", max(pres["idem_X"], pres["idem_Z"]), 1e-8)
    record("projector_commutation", max(pres["commute_E"], pres["commute_A"]), 1e-8)
    report = check_weight_compatibility(w, syn.proj)
    worst = max(report.residual_G_cross, report.residual_G_alg,
                report.residual_Q_cross)
    record("weight_compatibility", worst, report.tol * report.scale)

    # off-node fractions: at grid nodes the Hermite slopes satisfy the
    # equation by construction, which would make the check vacuous
    interior = grid.t0 + (grid.t_f - grid.t0) * np.array(
        [0.1371, 0.3499, 0.5023, 0.6637, 0.8511]
    )
    pf = max(
        projection_free_residual(syn.rs, sys_, w, syn.proj, t) for t in interior
    )
    record("projection_free_residual", pf, 1e-5)

    zu = variation_gradient(traj.control(), traj, w, syn.sw, syn.wf)
    record("zu_certificate", zu.sup_norm(),
           float(tols.get("tol_opt", 1e-4)) * (1.0 + traj.control().sup_norm()))

    restart = 0.0
    for frac in (0.25, 0.5, 0.75):
        dev = optimality_restart_deviation(
            traj, grid.t0 + frac * (grid.t_f - grid.t0), sys_, syn.wf, syn.gains
        )
        restart = max(restart, dev["x1"], dev["x0"])
    record("optimality_restart", restart, 1e-5)

    consistency = float(
        np.max(np.linalg.norm(traj.x0c + traj.u @ syn.wf.Bt0.T, axis=1))
    ) if syn.wf.rank_0 else 0.0
    record("node_consistency", consistency,
           float(tols.get("tol_consist", 1e-9)) * (1.0 + traj.control().sup_norm()))

    if checks_cfg.get("oracle"):
        _, J_star = direct_transcription(
            sys_, syn.wf, w, x_i, int(checks_cfg.get("oracle_steps", 400))
        )
        record("oracle_cost_gap", abs(J_star - traj.J) / max(abs(traj.J), 1e-30), 1e-2)
    if checks_cfg.get("picard"):
        u_fp = picard_solve(sys_, syn.wf, syn.sw, traj.x[0], grid)
        gap = float(np.max(np.abs(u_fp.u - traj.u)))
        record("picard_control_gap", gap,
               1e-4 * max(traj.control().sup_norm(), 1.0))

    all_ok = all(ok for _, _, _, ok in results)
    for name, value, tol, ok in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {value:.3e} (tol {tol:.3e})")
    print(f"verify: {'all checks passed' if all_ok else 'FAILURES present'}")

    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        report = [
            {"check": n, "value": v, "tol": t, "passed": ok}
            for n, v, t, ok in results
        ]
        (output_dir / "verify_report.json").write_text(
            json.dumps(report, indent=2) + "\n"
        )
    return 0 if all_ok else 3


# ---------------------------------------------------------------------------
# entry point


def _diagnostics(outdir: Path | None, exc: Exception, exit_code: int) -> None:
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code,
    }
    target = (outdir or Path.cwd()) / "diagnostics.json"
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError:
        pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="descriptorlq",
        description="LQ-optimal feedback synthesis for index-0 descriptor systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "run a scenario and write artifacts"),
        ("verify", "run the invariant suite on a scenario"),
    ):
        p = sub.add_parser(name, help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", help="built-in scenario name")
        src.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--output-dir", help="override the config output_dir")
    args = parser.parse_args(argv)

    outdir = Path(args.output_dir) if args.output_dir else None
    try:
        config, base = _load_config(args)
        if outdir is None and "output_dir" in config:
            outdir = Path(config["output_dir"])
        if args.command == "run":
            return run_scenario(config, base, outdir)
        return verify_scenario(config, base, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        _diagnostics(outdir, exc, 1)
        return 1
    except _ASSUMPTION_ERRORS as exc:
        print(f"assumption violated ({type(exc).__name__}): {exc}", file=_sys.stderr)
        _diagnostics(outdir, exc, 2)
        return 2
    except DescriptorLQError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=_sys.stderr)
        _diagnostics(outdir, exc, 3)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
