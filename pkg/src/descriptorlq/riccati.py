"""Backward differential Riccati solve and its projection-free realization.

The quadratic cost-to-go is carried by a small symmetric matrix Pi1(t) living
on the dynamical subspace (solved backward from the terminal weight), a
constant algebraic companion Pi0, and their lifts Pit1(t), Pit0 to the
original coordinates.  The lifted pair feeds the projection-free feedback
u = -R^{-1} B^T (Pit0 + Pit1(t) E) x, which never touches the restricted
operators.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import cho_factor, cho_solve

from .descriptor import DescriptorSystem, SpectralProjectors
from .exceptions import DimensionMismatch, IntegrationFailure
from .grid import TimeGrid, TimeSeries
from .weierstrass import QuadraticWeights, SplitWeights, WeierstrassForm

__all__ = [
    "RiccatiSolution",
    "solve_algebraic_pi0",
    "solve_projected_dre",
    "lift_projection_free",
    "projection_free_residual",
    "perturb_general_solution",
]

TOL_DRE = 1e-6
TOL_ALG = 1e-8
DRE_RTOL = 1e-9
DRE_ATOL = 1e-12


@dataclass(frozen=True)
class RiccatiSolution:
    """Time-sampled Riccati data with cubic Hermite dense output.

    Pi1 holds the projected solution per node (rank_1 x rank_1, symmetric
    PSD); Pit1 the lifted n_z x n_z operator per node once filled; Pit0 the
    constant lifted algebraic companion and Pi0 its subspace-coordinate form.
    """

    grid: TimeGrid
    Pi1: np.ndarray
    Pi1_slopes: np.ndarray
    Pi0: np.ndarray
    Pit0: np.ndarray
    Pit1: np.ndarray | None = None
    Pit1_slopes: np.ndarray | None = None

    def pi1_series(self) -> TimeSeries:
        return TimeSeries(self.grid, self.Pi1, self.Pi1_slopes)

    def pit1_series(self) -> TimeSeries:
        if self.Pit1 is None:
            raise ValueError("Pit1 not filled; call lift_projection_free first")
        return TimeSeries(self.grid, self.Pit1, self.Pit1_slopes)

    def pi1_at(self, t: float) -> np.ndarray:
        self.grid.require_inside(t)
        P = self.pi1_series().at(t)
        return 0.5 * (P + P.T)

    def pit1_at(self, t: float) -> np.ndarray:
        self.grid.require_inside(t)
        P = self.pit1_series().at(t)
        return 0.5 * (P + P.T)


def solve_algebraic_pi0(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    sw: SplitWeights,
    tol_alg: float = TOL_ALG,
):
    """Constant algebraic companion Pi0 = -A0^{-T} Q0 and its lift Pit0.

    Verifies the lifted operator against the algebraic equation
    A^T Pit0 + Q P_X0 = 0 before returning.
    """
    if wf.rank_0 == 0:
        Pi0 = np.zeros((0, 0))
        Pit0 = np.zeros((sys.n_z, sys.n_x))
        return Pi0, Pit0
    Pi0 = -np.linalg.solve(wf.A0.T, sw.Q0)
    Pit0 = wf.coord_Z0.T @ Pi0 @ wf.coord_X0
    # Q P_X0 equals coord_X0^T Q0 coord_X0 once the weights respect the split
    QP0 = wf.coord_X0.T @ sw.Q0 @ wf.coord_X0
    resid = np.linalg.norm(sys.A.T @ Pit0 + QP0)
    scale = max(np.linalg.norm(sw.Q0), 1.0)
    if resid > tol_alg * scale * max(np.linalg.cond(wf.A0), 1.0):
        raise IntegrationFailure(
            f"algebraic companion residual {resid:.2e} exceeds tolerance"
        )
    return Pi0, Pit0


def solve_projected_dre(
    wf: WeierstrassForm,
    sw: SplitWeights,
    grid: TimeGrid,
    rtol: float = DRE_RTOL,
    atol: float = DRE_ATOL,
    tol_dre: float | None = TOL_DRE,
) -> RiccatiSolution:
    """Integrate the projected Riccati equation backward from the terminal weight.

    dPi1/dt = -Pi1 At1 - At1^T Pi1 + Pi1 Bt1 Rt^{-1} Bt1^T Pi1 - Q1 with
    Pi1(t_f) = G1, solved with an adaptive embedded Runge-Kutta pair in
    reversed time and per-evaluation symmetrization.  When tol_dre is given,
    the Hermite-interpolant residual is verified at the grid midpoints.
    """
    k = wf.rank_1
    At1, Bt1 = wf.At1, wf.Bt1
    Rt_chol = cho_factor(sw.Rt)
    S = Bt1 @ cho_solve(Rt_chol, Bt1.T)
    Q1 = 0.5 * (sw.Q1 + sw.Q1.T)
    G1 = 0.5 * (sw.G1 + sw.G1.T)
    t0, t_f = grid.t0, grid.t_f

    def rhs_t(P):
        # time derivative of Pi1 in forward time
        P = 0.5 * (P + P.T)
        out = -(P @ At1) - (At1.T @ P) + P @ S @ P - Q1
        return 0.5 * (out + out.T)

    def rhs_s(s, y):
        P = y.reshape(k, k)
        return (-rhs_t(P)).ravel()

    s_nodes = (t_f - grid.nodes)[::-1]
    sol = solve_ivp(
        rhs_s,
        (0.0, t_f - t0),
        G1.ravel(),
        method="RK45",
        t_eval=s_nodes,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationFailure(f"Riccati integration failed: {sol.message}")
    Pi1 = sol.y.T.reshape(-1, k, k)[::-1].copy()
    Pi1 = 0.5 * (Pi1 + np.transpose(Pi1, (0, 2, 1)))
    slopes = np.stack([rhs_t(P) for P in Pi1])

    eig_floor = min(
        (np.linalg.eigvalsh(P)[0] for P in Pi1), default=0.0
    ) if k else 0.0
    if k and eig_floor < -1e-8 * max(np.max(np.abs(Pi1)), 1.0):
        raise IntegrationFailure(
            f"projected Riccati solution lost positivity (min eig {eig_floor:.2e})"
        )

    # Pi0/Pit0 are attached afterwards (dataclasses.replace) by the pipeline
    rs = RiccatiSolution(
        grid=grid, Pi1=Pi1, Pi1_slopes=slopes,
        Pi0=np.zeros((0, 0)), Pit0=np.zeros((0, 0)),
    )
    if tol_dre is not None and k:
        series = rs.pi1_series()
        mids = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
        worst = 0.0
        for t in mids:
            P = series.at(t)
            dP = series.derivative_at(t)
            # relative to the largest term of the equation at this midpoint;
            # a stiff operator makes absolute residuals meaningless
            terms = [dP, P @ At1, At1.T @ P, P @ S @ P, Q1]
            scale = max(max(np.linalg.norm(T) for T in terms), 1.0)
            resid = np.linalg.norm(dP - rhs_t(P))
            worst = max(worst, resid / scale)
        if worst > tol_dre:
            raise IntegrationFailure(
                f"interior Riccati residual {worst:.2e} exceeds tol_dre={tol_dre:g}; "
                "refine the output grid near t_f"
            )
    return rs


def lift_projection_free(
    rs: RiccatiSolution,
    wf: WeierstrassForm,
    proj: SpectralProjectors,
) -> RiccatiSolution:
    """Fill the lifted operator Pit1(t) = P_Z1^T E1^{-T} Pi1(t) E1^{-1} P_Z1."""
    if wf.rank_1:
        L = np.linalg.solve(wf.E1, wf.coord_Z1)
        Pit1 = np.einsum("ij,nik,kl->njl", L, rs.Pi1, L)
        Pit1_slopes = np.einsum("ij,nik,kl->njl", L, rs.Pi1_slopes, L)
    else:
        n = proj.P_Z1.shape[0]
        Pit1 = np.zeros((rs.grid.n_nodes, n, n))
        Pit1_slopes = np.zeros_like(Pit1)
    return replace(rs, Pit1=Pit1, Pit1_slopes=Pit1_slopes)


def projection_free_residual(
    rs: RiccatiSolution,
    sys: DescriptorSystem,
    w: QuadraticWeights,
    proj: SpectralProjectors,
    t: float,
) -> float:
    """Scaled residual of the lifted Riccati equation at an interior time.

    Evaluates || d/dt(E^T Pit1 E) + E^T Pit1 A + A^T Pit1 E
    - E^T Pit1 B R^{-1} B^T Pit1 E - E^T Pit1 B R^{-1} B^T Pit0 + Q P_X1 ||
    with the derivative taken from the Hermite interpolant, divided by the
    largest term norm.
    """
    rs.grid.require_inside(t, strict=True)
    E, A, B = sys.E, sys.A, sys.B
    series = rs.pit1_series()
    P = series.at(t)
    dP = series.derivative_at(t)
    Rinv_Bt = np.linalg.solve(w.R, B.T)
    terms = [
        E.T @ dP @ E,
        E.T @ P @ A,
        A.T @ P @ E,
        -E.T @ P @ B @ Rinv_Bt @ P @ E,
        -E.T @ P @ B @ Rinv_Bt @ rs.Pit0,
        w.Q @ proj.P_X1,
    ]
    resid = np.linalg.norm(sum(terms))
    scale = max(max(np.linalg.norm(T) for T in terms), 1.0)
    return float(resid / scale)


def perturb_general_solution(
    rs: RiccatiSolution,
    proj: SpectralProjectors,
    Z2: np.ndarray,
    Z4: np.ndarray,
) -> np.ndarray:
    """General-solution perturbation Z(t) = Pit1(t) + P_Z1^T Z2 P_Z0 + P_Z0^T Z4 P_Z0.

    Z2 and Z4 are full-size matrices (only their action between the Z1/Z0
    subspaces matters).  Since P_Z0 annihilates E, every Z(t) produces the
    same Z(t) E and hence the same feedback and minimum cost.
    """
    n = proj.P_Z1.shape[0]
    Z2 = np.atleast_2d(np.asarray(Z2, dtype=float))
    Z4 = np.atleast_2d(np.asarray(Z4, dtype=float))
    if Z2.shape != (n, n) or Z4.shape != (n, n):
        raise DimensionMismatch(f"Z2 and Z4 must be {n} x {n}")
    if rs.Pit1 is None:
        raise ValueError("Pit1 not filled; call lift_projection_free first")
    PZ1, PZ0 = proj.P_Z1, proj.P_Z0
    bump = PZ1.T @ Z2 @ PZ0 + PZ0.T @ Z4 @ PZ0
    return rs.Pit1 + bump[None, :, :]
