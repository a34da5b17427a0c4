"""Restricted operators on the dynamical/algebraic split, and weight handling.

Orthonormal bases of the four projector ranges turn the commuting projectors
into small dense blocks: E1, A1 on the dynamical pair of subspaces, A0 on the
algebraic pair, and the input maps B1, B0.  Everything downstream works in
these block coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .descriptor import COND_MAX, TOL_PROJ, DescriptorSystem, SpectralProjectors
from .exceptions import AssumptionViolated, IncompatibleWeights

__all__ = [
    "WeierstrassForm",
    "QuadraticWeights",
    "SplitWeights",
    "CompatibilityReport",
    "decompose",
    "check_weight_compatibility",
    "split_weights",
]

TOL_WEIGHTS = 1e-8


def _range_basis(P: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of ran(P) via column-pivoted QR, sign-canonicalized."""
    n = P.shape[0]
    if rank == 0:
        return np.zeros((n, 0))
    q, _, _ = qr(P, pivoting=True)
    basis = q[:, :rank]
    # fix the sign so the largest-magnitude entry of each column is positive
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(rank)])
    signs[signs == 0] = 1.0
    return basis * signs


@dataclass(frozen=True)
class WeierstrassForm:
    """Block-coordinate realization of the split system.

    basis_* are orthonormal columns spanning the projector ranges; coord_*
    extract subspace coordinates (coord_X1 = basis_X1^T P_X1 etc., so that
    P_X1 = basis_X1 @ coord_X1).  E1, A1, A0, B1, B0 are the restricted
    blocks; At1 = E1^{-1} A1, Bt1 = E1^{-1} B1 and Bt0 = A0^{-1} B0 are the
    derived operators of the explicit split dynamics.
    """

    basis_X1: np.ndarray
    basis_X0: np.ndarray
    basis_Z1: np.ndarray
    basis_Z0: np.ndarray
    coord_X1: np.ndarray
    coord_X0: np.ndarray
    coord_Z1: np.ndarray
    coord_Z0: np.ndarray
    E1: np.ndarray
    A1: np.ndarray
    A0: np.ndarray
    B1: np.ndarray
    B0: np.ndarray
    At1: np.ndarray
    Bt1: np.ndarray
    Bt0: np.ndarray

    @property
    def rank_1(self) -> int:
        return self.basis_X1.shape[1]

    @property
    def rank_0(self) -> int:
        return self.basis_X0.shape[1]

    def split_state(self, x: np.ndarray):
        """Coordinates (x1c, x0c) of the state in the two subspaces."""
        return self.coord_X1 @ x, self.coord_X0 @ x

    def lift_state(self, x1c: np.ndarray, x0c: np.ndarray) -> np.ndarray:
        return self.basis_X1 @ x1c + self.basis_X0 @ x0c

    def reconstruct(self):
        """Lift the blocks back to full matrices (round-trip check)."""
        E = self.basis_Z1 @ self.E1 @ self.coord_X1
        A = self.basis_Z1 @ self.A1 @ self.coord_X1 + self.basis_Z0 @ self.A0 @ self.coord_X0
        B = self.basis_Z1 @ self.B1 + self.basis_Z0 @ self.B0
        return E, A, B


@dataclass(frozen=True)
class QuadraticWeights:
    """Cost data of J = <x(t_f), G x(t_f)> + int <x, Q x> + <u, R u> dt."""

    Q: np.ndarray
    R: np.ndarray
    G: np.ndarray
    t_f: float

    def __post_init__(self):
        for name in ("Q", "R", "G"):
            m = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, m)
            sym = np.linalg.norm(m - m.T)
            if sym > 1e-12 * max(np.linalg.norm(m), 1.0):
                raise ValueError(f"{name} must be symmetric")
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")
        eig_min = np.linalg.eigvalsh(self.R)[0]
        if eig_min <= 0:
            raise ValueError(f"R must be positive definite (lambda_min = {eig_min:g})")


@dataclass(frozen=True)
class SplitWeights:
    """Weight blocks in subspace coordinates, with the effective input weight.

    Rt = R + Bt0^T Q0 Bt0 absorbs the penalty the algebraic sub-state puts on
    the control; it inherits positive definiteness from R.
    """

    Q1: np.ndarray
    Q0: np.ndarray
    G1: np.ndarray
    Rt: np.ndarray


@dataclass(frozen=True)
class CompatibilityReport:
    """Residuals of the weight/subspace compatibility requirements."""

    residual_G_cross: float
    residual_G_alg: float
    residual_Q_cross: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        worst = max(self.residual_G_cross, self.residual_G_alg, self.residual_Q_cross)
        return worst <= self.tol * self.scale


def decompose(
    sys: DescriptorSystem,
    proj: SpectralProjectors,
    tol_proj: float = TOL_PROJ,
    cond_max: float = COND_MAX,
) -> WeierstrassForm:
    """Build the block operators of the split system from the projectors."""
    k = proj.rank_1
    n = sys.n_x
    bX1 = _range_basis(proj.P_X1, k)
    bX0 = _range_basis(proj.P_X0, n - k)
    bZ1 = _range_basis(proj.P_Z1, k)
    bZ0 = _range_basis(proj.P_Z0, n - k)
    cX1 = bX1.T @ proj.P_X1
    cX0 = bX0.T @ proj.P_X0
    cZ1 = bZ1.T @ proj.P_Z1
    cZ0 = bZ0.T @ proj.P_Z0

    scaleE = max(np.linalg.norm(sys.E), 1.0)
    E0_norm = np.linalg.norm(sys.E @ bX0)
    if E0_norm > tol_proj * scaleE:
        raise AssumptionViolated(
            f"E does not vanish on the algebraic subspace (|E|_X0 = {E0_norm:.2e})"
        )

    E1 = bZ1.T @ sys.E @ bX1
    A1 = bZ1.T @ sys.A @ bX1
    A0 = bZ0.T @ sys.A @ bX0
    B1 = cZ1 @ sys.B
    B0 = cZ0 @ sys.B
    for name, M in (("E1", E1), ("A0", A0)):
        if M.size and np.linalg.cond(M) > cond_max:
            raise AssumptionViolated(f"{name} is numerically singular")
    At1 = np.linalg.solve(E1, A1) if k else E1.copy()
    Bt1 = np.linalg.solve(E1, B1) if k else np.zeros((0, sys.n_u))
    Bt0 = np.linalg.solve(A0, B0) if n - k else np.zeros((0, sys.n_u))

    wf = WeierstrassForm(
        basis_X1=bX1, basis_X0=bX0, basis_Z1=bZ1, basis_Z0=bZ0,
        coord_X1=cX1, coord_X0=cX0, coord_Z1=cZ1, coord_Z0=cZ0,
        E1=E1, A1=A1, A0=A0, B1=B1, B0=B0, At1=At1, Bt1=Bt1, Bt0=Bt0,
    )
    Er, Ar, Br = wf.reconstruct()
    scale = max(np.linalg.norm(sys.A), np.linalg.norm(sys.B), scaleE)
    drift = max(
        np.linalg.norm(Er - sys.E),
        np.linalg.norm(Ar - sys.A),
        np.linalg.norm(Br - sys.B),
    )
    if drift > tol_proj * scale:
        raise AssumptionViolated(
            f"block reconstruction drifts from (E, A, B) by {drift:.2e}"
        )
    return wf


def check_weight_compatibility(
    w: QuadraticWeights,
    proj: SpectralProjectors,
    tol_weights: float = TOL_WEIGHTS,
) -> CompatibilityReport:
    """Measure how far G and Q are from respecting the subspace split."""
    PX1, PX0 = proj.P_X1, proj.P_X0
    r_g_cross = max(
        np.linalg.norm(PX1.T @ w.G @ PX0),
        np.linalg.norm(PX0.T @ w.G @ PX1),
    )
    r_g_alg = np.linalg.norm(PX0.T @ w.G @ PX0)
    r_q_cross = max(
        np.linalg.norm(PX0.T @ w.Q @ PX1),
        np.linalg.norm(PX1.T @ w.Q @ PX0),
    )
    scale = max(np.linalg.norm(w.G) + np.linalg.norm(w.Q), 1.0)
    return CompatibilityReport(
        residual_G_cross=r_g_cross,
        residual_G_alg=r_g_alg,
        residual_Q_cross=r_q_cross,
        scale=scale,
        tol=tol_weights,
    )


def split_weights(
    w: QuadraticWeights,
    wf: WeierstrassForm,
    report: CompatibilityReport | None = None,
) -> SplitWeights:
    """Restrict Q and G to the subspaces and form Rt = R + Bt0^T Q0 Bt0."""
    if report is not None and not report.passed:
        raise IncompatibleWeights(
            "weights couple the dynamical and algebraic subspaces: "
            f"residuals {report}"
        )
    Q1 = wf.basis_X1.T @ w.Q @ wf.basis_X1
    Q0 = wf.basis_X0.T @ w.Q @ wf.basis_X0
    G1 = wf.basis_X1.T @ w.G @ wf.basis_X1
    Rt = w.R + wf.Bt0.T @ Q0 @ wf.Bt0
    Rt = 0.5 * (Rt + Rt.T)
    return SplitWeights(Q1=Q1, Q0=Q0, G1=G1, Rt=Rt)
