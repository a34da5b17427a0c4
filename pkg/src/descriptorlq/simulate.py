"""Open- and closed-loop integration of the split descriptor dynamics.

The dynamical sub-state is integrated with a fixed-substep BDF2 scheme
(implicit Euler startup); the algebraic sub-state is eliminated exactly per
node through x0 = -Bt0 u, so the constraint never drifts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .descriptor import DescriptorSystem
from .exceptions import (
    InconsistentInput,
    NewtonFailure,
    SingularClosedLoopCoupling,
)
from .grid import TimeGrid, TimeSeries
from .signals import ControlSignal, GainSchedule
from .weierstrass import QuadraticWeights, WeierstrassForm

__all__ = [
    "Trajectory",
    "simulate_open_loop",
    "simulate_closed_loop",
    "evaluate_cost",
    "optimality_restart_deviation",
]

TOL_CONSIST = 1e-9
N_SUBSTEPS = 8


@dataclass(frozen=True)
class Trajectory:
    """States, sub-state coordinates and control per node, plus the cost.

    x0c satisfies x0c = -Bt0 u at every node by construction; x is the lift
    basis_X1 x1c + basis_X0 x0c.  J is None until a cost has been attached.
    """

    grid: TimeGrid
    x: np.ndarray
    x1c: np.ndarray
    x0c: np.ndarray
    x1c_slopes: np.ndarray
    u: np.ndarray
    J: float | None = None
    #: gap between the supplied algebraic initial sub-state and -Bt0 u(0);
    #: nonzero when the feedback pins u(0) away from the supplied data
    initial_consistency_gap: float = 0.0

    def x1c_series(self) -> TimeSeries:
        return TimeSeries(self.grid, self.x1c, self.x1c_slopes)

    def control(self) -> ControlSignal:
        return ControlSignal(self.grid, self.u)


def _bdf2_steps(ts: np.ndarray):
    """Per-step BDF2 history weights c1, c2 and implicit weight c3*h.

    Step 1 is implicit Euler (no two-step history yet); afterwards the
    variable-step BDF2 coefficients depend on the spacing ratio omega.
    """
    hs = np.diff(ts)
    c1 = np.ones(hs.size)
    c2 = np.zeros(hs.size)
    c3 = np.ones(hs.size)
    om = hs[1:] / hs[:-1]
    c1[1:] = (1 + om) ** 2 / (1 + 2 * om)
    c2[1:] = -(om**2) / (1 + 2 * om)
    c3[1:] = (1 + om) / (1 + 2 * om)
    return c1, c2, c3 * hs


def _bdf2_linear(ts: np.ndarray, M, g, x0: np.ndarray) -> np.ndarray:
    """Integrate x' = M(t) x + g(t) over the node times ts.

    Implicit Euler starts the two-step history; variable-step BDF2 afterwards.
    The dynamics are linear, so each implicit step is a single direct solve
    (Newton converges in one iteration).  M is a constant matrix or a
    callable of t; g is a precomputed (len(ts), n) forcing array or a
    callable of t.  For constant M the step matrices are inverted once per
    distinct spacing, leaving a bare matrix-vector recurrence.
    """
    n = x0.size
    N = ts.size
    out = np.empty((N, n))
    out[0] = x0
    eye = np.eye(n)
    c1, c2, ch = _bdf2_steps(ts)
    g_arr = g if not callable(g) else np.stack([g(t) for t in ts])

    if not callable(M):
        # transposed inverses so each step is a row-vector product
        inv_cache: dict = {}
        try:
            steps = []
            for c in ch:
                if c not in inv_cache:
                    inv_cache[c] = np.linalg.inv(eye - c * M).T
                steps.append(inv_cache[c])
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure("implicit step matrix is singular") from exc
        out[1] = (out[0] + ch[0] * g_arr[1]) @ steps[0]
        for i in range(2, N):
            j = i - 1
            rhs = c1[j] * out[i - 1] + c2[j] * out[i - 2] + ch[j] * g_arr[i]
            out[i] = rhs @ steps[j]
        if not np.all(np.isfinite(out)):
            raise NewtonFailure("state became non-finite during integration")
        return out

    for i in range(1, N):
        j = i - 1
        rhs = c1[j] * out[i - 1] + ch[j] * g_arr[i]
        if i >= 2:
            rhs += c2[j] * out[i - 2]
        try:
            out[i] = np.linalg.solve(eye - ch[j] * M(ts[i]), rhs)
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure(f"implicit step at t = {ts[i]} failed") from exc
        if not np.all(np.isfinite(out[i])):
            raise NewtonFailure(f"state became non-finite at t = {ts[i]}")
    return out


def _substep_times(grid: TimeGrid, n_substeps: int) -> tuple[np.ndarray, np.ndarray]:
    """Refined time array plus indices of the original nodes within it."""
    pieces = [np.array([grid.nodes[0]])]
    for a, b in zip(grid.nodes[:-1], grid.nodes[1:]):
        pieces.append(np.linspace(a, b, n_substeps + 1)[1:])
    ts = np.concatenate(pieces)
    idx = np.arange(0, ts.size, n_substeps)
    return ts, idx


def _check_consistency(x0c_init, u0, wf: WeierstrassForm, x_i, tol_consist):
    r = float(np.linalg.norm(x0c_init + wf.Bt0 @ u0))
    if r > tol_consist * (1.0 + np.linalg.norm(x_i)):
        raise InconsistentInput(
            f"initial algebraic sub-state inconsistent with u(0): residual {r:.2e}"
        )
    return r


def _finish(wf, grid, x1c, u, weights, gap=0.0):
    x0c = -(u @ wf.Bt0.T)
    x = x1c @ wf.basis_X1.T + x0c @ wf.basis_X0.T
    slopes = x1c @ wf.At1.T + u @ wf.Bt1.T
    traj = Trajectory(grid=grid, x=x, x1c=x1c, x0c=x0c, x1c_slopes=slopes, u=u,
                      initial_consistency_gap=gap)
    if weights is not None:
        traj = replace(traj, J=evaluate_cost(traj, weights))
    return traj


def simulate_open_loop(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    u: ControlSignal,
    x_i: np.ndarray,
    grid: TimeGrid,
    n_substeps: int = N_SUBSTEPS,
    tol_consist: float = TOL_CONSIST,
    weights: QuadraticWeights | None = None,
) -> Trajectory:
    """Integrate the split system under a prescribed admissible control."""
    x_i = np.asarray(x_i, dtype=float)
    x1c0, x0c0 = wf.split_state(x_i)
    _check_consistency(x0c0, u.at(grid.t0), wf, x_i, tol_consist)
    useries = u.series()

    ts, idx = _substep_times(grid, n_substeps)
    forcing = useries.at(ts) @ wf.Bt1.T
    x1c = _bdf2_linear(ts, wf.At1, forcing, x1c0)[idx]
    return _finish(wf, grid, x1c, useries.at(grid.nodes), weights)


def simulate_closed_loop(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    gains: GainSchedule,
    x_i: np.ndarray,
    grid: TimeGrid,
    n_substeps: int = N_SUBSTEPS,
    tol_consist: float = TOL_CONSIST,
    weights: QuadraticWeights | None = None,
) -> Trajectory:
    """Integrate the feedback loop u = -K(t) x with x0 eliminated per step.

    The control and the algebraic sub-state depend on each other, so each
    evaluation solves the small coupled system
    (I - K basis_X0 Bt0) u = -K basis_X1 x1.
    """
    x_i = np.asarray(x_i, dtype=float)
    x1c0, x0c0 = wf.split_state(x_i)
    kseries = gains.series()
    n_u = gains.K.shape[1]
    eye_u = np.eye(n_u)

    def coupling(t):
        K = kseries.at(t)
        S = eye_u - K @ wf.basis_X0 @ wf.Bt0
        cond = np.linalg.cond(S)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularClosedLoopCoupling(
                f"control/algebraic coupling singular at t = {t} (cond {cond:.2e})"
            )
        # u = -Kc x1c with the algebraic sub-state resolved
        Kc = np.linalg.solve(S, K @ wf.basis_X1)
        return Kc

    # the feedback pins u(0); record how far the supplied algebraic data is
    # from the value that u(0) enforces (only admissible data makes it zero)
    u0 = -coupling(grid.t0) @ x1c0
    gap = float(np.linalg.norm(x0c0 + wf.Bt0 @ u0))

    ts, idx = _substep_times(grid, n_substeps)
    x1c = _bdf2_linear(
        ts,
        lambda t: wf.At1 - wf.Bt1 @ coupling(t),
        lambda t: np.zeros(wf.rank_1),
        x1c0,
    )[idx]
    u = np.stack([-coupling(t) @ x1c[i] for i, t in enumerate(grid.nodes)])
    return _finish(wf, grid, x1c, u, weights, gap=gap)


def evaluate_cost(traj: Trajectory, w: QuadraticWeights) -> float:
    """Quadratic cost along the trajectory by composite Simpson quadrature."""
    xq = np.einsum("ni,ij,nj->n", traj.x, w.Q, traj.x)
    ur = np.einsum("ni,ij,nj->n", traj.u, w.R, traj.u)
    running = float(simpson(xq + ur, x=traj.grid.nodes))
    terminal = float(traj.x[-1] @ w.G @ traj.x[-1])
    return running + terminal


def optimality_restart_deviation(
    traj: Trajectory,
    t0: float,
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    gains: GainSchedule,
    n_substeps: int = N_SUBSTEPS,
    tol_consist: float = TOL_CONSIST,
) -> dict:
    """Sup-norm deviation of the closed loop restarted at an interior node.

    t0 is snapped to the nearest grid node; the loop is re-run on the tail
    grid from the stored state there and compared sub-state by sub-state.
    """
    traj.grid.require_inside(t0, strict=True)
    i0 = int(np.argmin(np.abs(traj.grid.nodes - t0)))
    i0 = max(1, min(i0, traj.grid.n_nodes - 2))
    tail_nodes = traj.grid.nodes[i0:]
    tail = TimeGrid(tail_nodes[0], tail_nodes[-1], tail_nodes)
    restarted = simulate_closed_loop(
        sys, wf, gains, traj.x[i0], tail,
        n_substeps=n_substeps, tol_consist=max(tol_consist, 1e-6),
    )
    dev_x1 = float(np.max(np.abs(restarted.x1c - traj.x1c[i0:])))
    dev_x0 = float(np.max(np.abs(restarted.x0c - traj.x0c[i0:]))) if traj.x0c.size else 0.0
    return {"t0": float(tail_nodes[0]), "x1": dev_x1, "x0": dev_x0}
