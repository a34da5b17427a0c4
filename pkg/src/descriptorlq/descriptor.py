"""Descriptor systems d/dt E x = A x + B u and their spectral projectors.

The projectors split the state space into a dynamical part (finite pencil
eigenvalues) and an algebraic part (infinite eigenvalues), and commute with
both E and A.  They are computed from an ordered generalized Schur (QZ)
factorization of (A, E) followed by a generalized-Sylvester decoupling solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, ordqz

from .exceptions import (
    HigherIndex,
    NonSquare,
    ProjectionFailure,
    SingularPencil,
)

__all__ = [
    "DescriptorSystem",
    "SpectralProjectors",
    "PencilClass",
    "validate_pencil",
    "compute_projectors",
    "semi_explicit_projectors",
]

#: default relative singular-value threshold for rank decisions
RANK_RTOL = 1e-10
#: default relative tolerance on projector algebra residuals
TOL_PROJ = 1e-8
#: maximum acceptable conditioning of the decoupling transformation
COND_MAX = 1e12
#: seed for the randomized pencil-regularity probes
PROBE_SEED = 0x5EED


@dataclass(frozen=True)
class DescriptorSystem:
    """The matrix triple (E, A, B) of d/dt E x = A x + B u."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        E = np.atleast_2d(np.asarray(self.E, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if E.shape != A.shape:
            raise ValueError("E and A must have identical shape")
        if B.shape[0] != E.shape[0]:
            raise ValueError("B must have as many rows as E")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n_x(self) -> int:
        return self.E.shape[1]

    @property
    def n_z(self) -> int:
        return self.E.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class SpectralProjectors:
    """Projectors P_X1/P_X0 on the state space and P_Z1/P_Z0 on the range space.

    P_X0 and P_Z0 are stored as exact complements I - P_X1, I - P_Z1.
    ``rank_1`` is the dimension of the dynamical subspace ran(P_X1).
    """

    P_X1: np.ndarray
    P_Z1: np.ndarray
    rank_1: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def P_X0(self) -> np.ndarray:
        return np.eye(self.P_X1.shape[0]) - self.P_X1

    @property
    def P_Z0(self) -> np.ndarray:
        return np.eye(self.P_Z1.shape[0]) - self.P_Z1

    def residuals(self, sys: DescriptorSystem) -> dict:
        """Idempotency and commutation residuals, relative where sensible."""
        nE = max(np.linalg.norm(sys.E), 1.0)
        nA = max(np.linalg.norm(sys.A), 1.0)
        return {
            "idem_X": np.linalg.norm(self.P_X1 @ self.P_X1 - self.P_X1),
            "idem_Z": np.linalg.norm(self.P_Z1 @ self.P_Z1 - self.P_Z1),
            "commute_E": np.linalg.norm(self.P_Z1 @ sys.E - sys.E @ self.P_X1) / nE,
            "commute_A": np.linalg.norm(self.P_Z1 @ sys.A - sys.A @ self.P_X1) / nA,
        }


@dataclass(frozen=True)
class PencilClass:
    """Admission-check result for the pencil lambda*E - A."""

    regular: bool
    index_estimate: int
    finite_spectrum_count: int
    infinite_eigenvalue_count: int
    condition_report: dict


def _null_space(E: np.ndarray, rank_rtol: float):
    """Orthonormal basis of ker(E) with singular-value thresholding."""
    u, s, vt = np.linalg.svd(E)
    tol = (s[0] if s.size else 0.0) * rank_rtol
    rank = int(np.sum(s > tol)) if s.size else 0
    return vt[rank:].T, rank, tol


def validate_pencil(
    sys: DescriptorSystem,
    rank_rtol: float = RANK_RTOL,
    seed: int = PROBE_SEED,
) -> PencilClass:
    """Admit a square, regular pencil whose infinite eigenvalues are semi-simple.

    Regularity is probed at 3 randomized values of lambda; the index check
    requires ran(E) and A*ker(E) to be complementary, which is the matrix
    statement that the algebraic part involves no derivatives.

    Raises NonSquare, SingularPencil or HigherIndex otherwise.
    """
    if sys.n_x != sys.n_z:
        raise NonSquare(f"pencil is {sys.n_z} x {sys.n_x}; a square pencil is required")
    n = sys.n_x
    rng = np.random.default_rng(seed)
    scale = max(np.linalg.norm(sys.A), np.linalg.norm(sys.E), 1.0)
    probes = rng.standard_normal(3) * 2.0
    min_sv = []
    for lam in probes:
        s = np.linalg.svd(lam * sys.E - sys.A, compute_uv=False)
        min_sv.append(s[-1] / max(s[0], scale * np.finfo(float).eps))
    regular = all(sv > rank_rtol for sv in min_sv)
    if not regular:
        raise SingularPencil(
            "det(lambda*E - A) vanishes at all randomized probes; pencil is singular"
        )

    ker_E, rank_E, sv_tol = _null_space(sys.E, rank_rtol)
    n_inf = n - rank_E
    report = {
        "probe_lambdas": probes.tolist(),
        "probe_min_sv_rel": min_sv,
        "rank_tolerance": sv_tol,
        "rank_E": rank_E,
    }
    if n_inf > 0:
        # nilpotency 1 <=> ran(E) + A ker(E) spans the whole range space
        stacked = np.hstack([sys.E, sys.A @ ker_E])
        s = np.linalg.svd(stacked, compute_uv=False)
        rank_stacked = int(np.sum(s > s[0] * rank_rtol))
        report["rank_[E, A kerE]"] = rank_stacked
        if rank_stacked < n:
            raise HigherIndex(
                "infinite eigenvalues are not semi-simple: "
                f"rank([E, A*ker(E)]) = {rank_stacked} < {n}"
            )
    return PencilClass(
        regular=True,
        index_estimate=0,
        finite_spectrum_count=rank_E,
        infinite_eigenvalue_count=n_inf,
        condition_report=report,
    )


def compute_projectors(
    sys: DescriptorSystem,
    tol_proj: float = TOL_PROJ,
    cond_max: float = COND_MAX,
    rank_rtol: float = RANK_RTOL,
) -> SpectralProjectors:
    """Spectral projectors separating finite from infinite pencil eigenvalues.

    Ordered QZ puts the finite eigenvalues in the leading block; the coupled
    generalized Sylvester system then yields the oblique projectors onto the
    deflating subspaces.
    """
    pc = validate_pencil(sys, rank_rtol=rank_rtol)
    n = sys.n_x
    k = pc.finite_spectrum_count
    if k == n:
        proj = SpectralProjectors(np.eye(n), np.eye(n), n, {"pencil": pc})
    elif k == 0:
        proj = SpectralProjectors(np.zeros((n, n)), np.zeros((n, n)), 0, {"pencil": pc})
    else:
        def finite_first(alpha, beta):
            return np.abs(beta) > rank_rtol * np.maximum(np.abs(alpha), 1.0)

        AA, EE, alpha, beta, Q, Z = ordqz(sys.A, sys.E, sort=finite_first, output="real")
        n_finite = int(np.count_nonzero(finite_first(alpha, beta)))
        if n_finite != k:
            raise ProjectionFailure(
                f"QZ selected {n_finite} finite eigenvalues but rank(E) = {k}"
            )
        S11, S12, S22 = AA[:k, :k], AA[:k, k:], AA[k:, k:]
        T11, T12, T22 = EE[:k, :k], EE[:k, k:], EE[k:, k:]
        y, x, scale, dif, info = lapack.dtgsyl(S11, S22, S12, T11, T22, T12)
        if info != 0 or scale == 0.0:
            raise ProjectionFailure(f"generalized Sylvester solve failed (info={info})")
        Y = y / scale
        X = x / scale
        sep = max(np.linalg.norm(Y), np.linalg.norm(X))
        if sep > cond_max:
            raise ProjectionFailure(
                f"deflating-subspace decoupling is ill-conditioned (norm {sep:.2e})"
            )
        block_r = np.zeros((n, n))
        block_r[:k, :k] = np.eye(k)
        block_r[:k, k:] = Y
        block_l = np.zeros((n, n))
        block_l[:k, :k] = np.eye(k)
        block_l[:k, k:] = X
        P_X1 = Z @ block_r @ Z.T
        P_Z1 = Q @ block_l @ Q.T
        proj = SpectralProjectors(P_X1, P_Z1, k, {"pencil": pc, "decoupling_norm": sep})

    res = proj.residuals(sys)
    if max(res.values()) > tol_proj:
        raise ProjectionFailure(f"projector invariants violated: {res}")
    proj.diagnostics.update(res)
    return proj


def semi_explicit_projectors(
    sys: DescriptorSystem,
    rank_rtol: float = RANK_RTOL,
    tol_proj: float = TOL_PROJ,
) -> SpectralProjectors:
    """Closed-form projectors for E = blockdiag(E11, 0) structure.

    The algebraic variables are the coordinates whose E row and column both
    vanish; the dynamical subspace is the graph of -A22^{-1} A21 over them.
    Avoids the QZ factorization entirely.
    """
    if sys.n_x != sys.n_z:
        raise NonSquare("semi-explicit fast path requires a square pencil")
    n = sys.n_x
    scaleE = max(np.linalg.norm(sys.E), 1.0)
    row_zero = np.all(np.abs(sys.E) <= scaleE * rank_rtol, axis=1)
    col_zero = np.all(np.abs(sys.E) <= scaleE * rank_rtol, axis=0)
    alg = np.where(row_zero & col_zero)[0]
    dyn = np.setdiff1d(np.arange(n), alg)
    if not (np.all(row_zero[alg]) and np.all(col_zero[alg])):
        raise ProjectionFailure("E is not block-diagonal with a zero algebraic block")
    off = sys.E[np.ix_(dyn, alg)], sys.E[np.ix_(alg, dyn)]
    if any(np.linalg.norm(o) > scaleE * tol_proj for o in off):
        raise ProjectionFailure("E couples dynamical and algebraic coordinates")
    E11 = sys.E[np.ix_(dyn, dyn)]
    if dyn.size and np.linalg.cond(E11) > COND_MAX:
        raise ProjectionFailure("leading E block is numerically singular")
    A22 = sys.A[np.ix_(alg, alg)]
    A21 = sys.A[np.ix_(alg, dyn)]
    A12 = sys.A[np.ix_(dyn, alg)]
    P_X1 = np.zeros((n, n))
    P_Z1 = np.zeros((n, n))
    P_X1[np.ix_(dyn, dyn)] = np.eye(dyn.size)
    P_Z1[np.ix_(dyn, dyn)] = np.eye(dyn.size)
    if alg.size:
        try:
            coupling = np.linalg.solve(A22, A21)
            right = np.linalg.solve(A22.T, A12.T).T
        except np.linalg.LinAlgError as exc:
            raise ProjectionFailure("algebraic block A22 is singular") from exc
        P_X1[np.ix_(alg, dyn)] = -coupling
        P_Z1[np.ix_(dyn, alg)] = -right
    proj = SpectralProjectors(
        P_X1, P_Z1, int(dyn.size), {"fast_path": "semi-explicit"}
    )
    res = proj.residuals(sys)
    if max(res.values()) > tol_proj:
        raise ProjectionFailure(f"projector invariants violated: {res}")
    proj.diagnostics.update(res)
    return proj
