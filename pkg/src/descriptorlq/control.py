"""Optimal-control synthesis, optimality certificates, and the fixed-point solver.

Three routes to the same control live here and in their callers: the Riccati
feedback gain, the Picard fixed-point iteration on the integral form of the
stationarity condition, and (in :mod:`descriptorlq.oracle`) a direct
transcription.  The variational gradient z_u certifies optimality: it
vanishes exactly at the minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .descriptor import DescriptorSystem
from .exceptions import (
    GridMismatch,
    InadmissibleVariation,
    InconsistentInitialData,
    NoConvergence,
)
from .grid import TimeGrid, TimeSeries
from .riccati import RiccatiSolution
from .signals import ControlSignal, GainSchedule
from .simulate import (
    N_SUBSTEPS,
    Trajectory,
    _bdf2_linear,
    _substep_times,
    evaluate_cost,
    simulate_open_loop,
)
from .weierstrass import QuadraticWeights, SplitWeights, WeierstrassForm

__all__ = [
    "ConsistencyReport",
    "feedback_gain",
    "check_admissible",
    "variation_gradient",
    "variation_identity_check",
    "picard_solve",
    "minimum_cost",
]

TOL_OPT = 1e-4
TOL_FP = 1e-8
TOL_CONSIST = 1e-9
MAX_ITER = 200


@dataclass(frozen=True)
class ConsistencyReport:
    """Residual of the initial consistency condition x0(0) = -Bt0 u(0)."""

    residual: float
    tol: float
    scale: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol * self.scale


def feedback_gain(
    rs: RiccatiSolution,
    sys: DescriptorSystem,
    w: QuadraticWeights,
) -> GainSchedule:
    """Gain schedule K(t) = R^{-1} B^T (Pit0 + Pit1(t) E), u = -K x."""
    if rs.Pit1 is None:
        raise ValueError("Pit1 not filled; call lift_projection_free first")
    # one factorization of R reused across all nodes
    RB = np.linalg.solve(w.R, sys.B.T)
    K = np.einsum("ij,njk,kl->nil", RB, rs.Pit1, sys.E) + (RB @ rs.Pit0)[None, :, :]
    slopes = np.einsum("ij,njk,kl->nil", RB, rs.Pit1_slopes, sys.E)
    return GainSchedule(rs.grid, K, slopes)


def check_admissible(
    u: ControlSignal,
    x_i: np.ndarray,
    wf: WeierstrassForm,
    tol_consist: float = TOL_CONSIST,
) -> ConsistencyReport:
    """Measure the initial consistency residual in algebraic coordinates."""
    x_i = np.asarray(x_i, dtype=float)
    _, x0c = wf.split_state(x_i)
    r = float(np.linalg.norm(x0c + wf.Bt0 @ u.at(u.grid.t0)))
    return ConsistencyReport(residual=r, tol=tol_consist, scale=1.0 + float(np.linalg.norm(x_i)))


def _adjoint_solve(
    wf: WeierstrassForm,
    sw: SplitWeights,
    grid: TimeGrid,
    x1_series: TimeSeries,
    n_substeps: int,
) -> np.ndarray:
    """Backward costate lambda' = -At1^T lambda - Q1 x1, lambda(t_f) = G1 x1(t_f)."""
    t_f = grid.t_f
    lam_tf = sw.G1 @ x1_series.at(t_f)
    ts, idx = _substep_times(grid, n_substeps)
    s_ts = (t_f - ts)[::-1]
    forcing = x1_series.at(t_f - s_ts) @ sw.Q1.T
    lam = _bdf2_linear(s_ts, wf.At1.T, forcing, lam_tf)
    return lam[::-1][idx]


def variation_gradient(
    u: ControlSignal,
    traj: Trajectory,
    w: QuadraticWeights,
    sw: SplitWeights,
    wf: WeierstrassForm,
    n_substeps: int = N_SUBSTEPS,
) -> ControlSignal:
    """Gradient z_u of the cost with respect to admissible control variations.

    z_u(t) = 2 [Bt1^T lambda(t) - Bt0^T Q0 x0(t) + R u(t)] with lambda the
    backward costate driven by Q1 x1; the flow-map convolution never appears
    explicitly.
    """
    if not u.grid.same_as(traj.grid):
        raise GridMismatch("control and trajectory grids differ")
    lam = _adjoint_solve(wf, sw, traj.grid, traj.x1c_series(), n_substeps)
    zu = 2.0 * (
        lam @ wf.Bt1
        - traj.x0c @ sw.Q0.T @ wf.Bt0
        + traj.u @ w.R.T
    )
    return ControlSignal(traj.grid, zu)


def variation_identity_check(
    u: ControlSignal,
    h: ControlSignal,
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    w: QuadraticWeights,
    sw: SplitWeights,
    x_i: np.ndarray,
    n_substeps: int = N_SUBSTEPS,
    tol_consist: float = TOL_CONSIST,
):
    """Compare the simulated cost difference against its variational expansion.

    lhs = J(u + h) - J(u) from two simulations; rhs = int <z_u, h> plus the
    quadratic terms built from the homogeneous response to h.  Returns
    (lhs, rhs, |lhs - rhs|).
    """
    if not u.grid.same_as(h.grid):
        raise GridMismatch("u and h must share a grid")
    h0_resid = float(np.linalg.norm(wf.Bt0 @ h.at(h.grid.t0)))
    if h0_resid > tol_consist * (1.0 + h.sup_norm()):
        raise InadmissibleVariation(
            f"Bt0 h(0) = {h0_resid:.2e} != 0; variation leaves the admissible set"
        )
    grid = u.grid
    traj_u = simulate_open_loop(sys, wf, u, x_i, grid, n_substeps=n_substeps,
                                tol_consist=tol_consist, weights=w)
    traj_uh = simulate_open_loop(sys, wf, u + h, x_i, grid, n_substeps=n_substeps,
                                 tol_consist=tol_consist, weights=w)
    lhs = traj_uh.J - traj_u.J

    zu = variation_gradient(u, traj_u, w, sw, wf, n_substeps=n_substeps)
    linear = float(simpson(np.einsum("ni,ni->n", zu.u, h.u), x=grid.nodes))

    # homogeneous response phi(t) h: zero initial dynamical state, driven by h
    traj_h = simulate_open_loop(sys, wf, h, np.zeros(sys.n_x), grid,
                                n_substeps=n_substeps, tol_consist=np.inf)
    phi = traj_h.x
    quad_state = np.einsum("ni,ij,nj->n", phi, w.Q, phi)
    quad_u = np.einsum("ni,ij,nj->n", h.u, w.R, h.u)
    quadratic = float(simpson(quad_state + quad_u, x=grid.nodes))
    terminal = float(phi[-1] @ w.G @ phi[-1])
    rhs = linear + quadratic + terminal
    return lhs, rhs, abs(lhs - rhs)


def picard_solve(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    sw: SplitWeights,
    x_i: np.ndarray,
    grid: TimeGrid,
    max_iter: int = MAX_ITER,
    tol_fp: float = TOL_FP,
    n_substeps: int = N_SUBSTEPS,
    tol_consist: float = TOL_CONSIST,
) -> ControlSignal:
    """Fixed-point iteration on the integral stationarity map.

    Each sweep propagates the dynamical state forward under the current
    iterate, solves the backward costate, and maps through -Rt^{-1} Bt1^T.
    The map is eventually contractive, so failure to converge signals bad
    data rather than a marginal tolerance.
    """
    x_i = np.asarray(x_i, dtype=float)
    x1c0, x0c0 = wf.split_state(x_i)
    if wf.rank_0:
        u0, res, *_ = np.linalg.lstsq(wf.Bt0, -x0c0, rcond=None)
        attained = np.linalg.norm(wf.Bt0 @ u0 + x0c0)
        if attained > max(tol_consist, 1e-10) * (1.0 + np.linalg.norm(x_i)):
            raise InconsistentInitialData(
                f"algebraic initial sub-state not reachable by any control "
                f"(best residual {attained:.2e})"
            )

    ts, idx = _substep_times(grid, n_substeps)
    Rt_inv_Bt1T = np.linalg.solve(sw.Rt, wf.Bt1.T)
    u = ControlSignal.zero(grid, sys.n_u)
    for iteration in range(max_iter):
        useries = u.series()
        x1 = _bdf2_linear(ts, wf.At1, useries.at(ts) @ wf.Bt1.T, x1c0)[idx]
        growth = float(np.max(np.abs(x1)))
        if not np.isfinite(growth) or growth > 1e100:
            raise NoConvergence(
                f"fixed-point iterates diverged after {iteration} sweeps "
                f"(state magnitude {growth:.2e}); the transient amplification "
                "of the iteration exceeds floating-point range for this horizon"
            )
        x1_series = TimeSeries(grid, x1, x1 @ wf.At1.T + u.u @ wf.Bt1.T)
        lam = _adjoint_solve(wf, sw, grid, x1_series, n_substeps)
        new_u = ControlSignal(grid, -(lam @ Rt_inv_Bt1T.T))
        diff = float(np.max(np.abs(new_u.u - u.u)))
        u = new_u
        if diff <= tol_fp * (1.0 + u.sup_norm()):
            return u
    raise NoConvergence(
        f"fixed-point iteration did not converge in {max_iter} sweeps "
        f"(last update {diff:.2e})"
    )


def minimum_cost(rs: RiccatiSolution, sys: DescriptorSystem, x_i: np.ndarray) -> float:
    """Predicted minimum cost <E x_i, Pit1(t0) E x_i>."""
    x_i = np.asarray(x_i, dtype=float)
    Ex = sys.E @ x_i
    val = float(Ex @ rs.pit1_at(rs.grid.t0) @ Ex)
    return max(val, 0.0) if abs(val) < 1e-14 else val
