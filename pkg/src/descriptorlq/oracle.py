"""Direct-transcription ground truth for small problem instances.

Discretizes the control as piecewise linear on a uniform step grid,
propagates the dynamical sub-state with the trapezoidal rule, eliminates the
algebraic sub-state exactly, and minimizes the resulting convex quadratic in
the stacked control values subject to the initial consistency constraint.
Everything is dense, so this is an oracle for cross-checking the Riccati and
fixed-point paths, not a production solver.
"""

from __future__ import annotations

import numpy as np

from .descriptor import DescriptorSystem
from .exceptions import InconsistentInitialData, SingularKKT, TooLarge
from .grid import TimeGrid
from .signals import ControlSignal
from .weierstrass import QuadraticWeights, WeierstrassForm

__all__ = ["direct_transcription"]

MAX_UNKNOWNS = 20000
KKT_TOL = 1e-9


def _psd_factor(Q: np.ndarray) -> np.ndarray:
    """F with F^T F = Q for symmetric PSD Q, rows spanning the active range."""
    lam, V = np.linalg.eigh(0.5 * (Q + Q.T))
    keep = lam > max(lam[-1], 0.0) * 1e-14
    if not np.any(keep):
        return np.zeros((0, Q.shape[0]))
    return (np.sqrt(lam[keep])[:, None] * V[:, keep].T)


def direct_transcription(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    w: QuadraticWeights,
    x_i: np.ndarray,
    n_steps: int,
) -> tuple[ControlSignal, float]:
    """Minimize the discrete cost directly; returns (u*, J*).

    The state recursion x1_{j+1} = D(C x1_j + (h/2) Bt1 (u_j + u_{j+1})) with
    C = I + (h/2) At1 and D = (I - (h/2) At1)^{-1} is condensed into an affine
    map from the stacked control z to every node state, the cost becomes
    (1/2) z^T H z + g^T z + const under trapezoidal quadrature, and the
    consistency equation Bt0 u_0 = -(x_i)_0 enters as equality constraints
    handled through the KKT system.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    k, n_u, n0 = wf.rank_1, sys.n_u, wf.rank_0
    N = n_steps
    m = n_u * (N + 1)
    if m + k * N > MAX_UNKNOWNS:
        raise TooLarge(
            f"{m + k * N} transcription unknowns exceed the dense-solve guard "
            f"({MAX_UNKNOWNS})"
        )
    x_i = np.asarray(x_i, dtype=float)
    x1c0, x0c0 = wf.split_state(x_i)
    h = w.t_f / N
    nodes = np.linspace(0.0, w.t_f, N + 1)

    C = np.eye(k) + 0.5 * h * wf.At1
    try:
        D = np.linalg.inv(np.eye(k) - 0.5 * h * wf.At1)
    except np.linalg.LinAlgError as exc:
        raise SingularKKT("trapezoidal step matrix is singular") from exc
    DB = 0.5 * h * (D @ wf.Bt1)

    # sensitivities: x1_j = c_j + S_j z with z the stacked control values
    S = np.zeros((N + 1, k, m))
    c = np.empty((N + 1, k))
    c[0] = x1c0
    DC = D @ C
    for j in range(N):
        S[j + 1] = DC @ S[j]
        S[j + 1, :, j * n_u:(j + 1) * n_u] += DB
        S[j + 1, :, (j + 1) * n_u:(j + 2) * n_u] += DB
        c[j + 1] = DC @ c[j]

    # full-state affine map x_j = xc_j + M_j z through both sub-states
    # (x0 = -Bt0 u eliminated exactly)
    bX1, bX0 = wf.basis_X1, wf.basis_X0
    M = np.einsum("ik,nkm->nim", bX1, S)
    if n0:
        lift0 = bX0 @ wf.Bt0
        for j in range(N + 1):
            M[j, :, j * n_u:(j + 1) * n_u] -= lift0
    xc = c @ bX1.T

    wts = np.full(N + 1, h)
    wts[0] = wts[-1] = 0.5 * h

    FQ = _psd_factor(w.Q)
    FR = _psd_factor(w.R)
    FG = _psd_factor(w.G)
    # stack sqrt-weighted residual rows: J = ||Y z + y||^2 + const-free form
    rows = []
    offs = []
    for j in range(N + 1):
        sw = np.sqrt(wts[j])
        if FQ.shape[0]:
            rows.append(sw * (FQ @ M[j]))
            offs.append(sw * (FQ @ xc[j]))
        if FR.shape[0]:
            block = np.zeros((FR.shape[0], m))
            block[:, j * n_u:(j + 1) * n_u] = sw * FR
            rows.append(block)
            offs.append(np.zeros(FR.shape[0]))
    if FG.shape[0]:
        rows.append(FG @ M[N])
        offs.append(FG @ xc[N])
    if rows:
        Y = np.vstack(rows)
        y = np.concatenate(offs)
    else:
        Y = np.zeros((0, m))
        y = np.zeros(0)
    H = 2.0 * (Y.T @ Y)
    g = 2.0 * (Y.T @ y)
    const = float(y @ y)

    # consistency constraint on u_0, reduced to independent rows
    if n0:
        A0c = np.zeros((n0, m))
        A0c[:, :n_u] = wf.Bt0
        b0c = -x0c0
        U, sv, Vt = np.linalg.svd(wf.Bt0, full_matrices=False)
        rank = int(np.sum(sv > max(sv[0] if sv.size else 0.0, 1.0) * 1e-12))
        resid = np.linalg.norm(b0c - U[:, :rank] @ (U[:, :rank].T @ b0c))
        if resid > 1e-9 * (1.0 + np.linalg.norm(x_i)):
            raise InconsistentInitialData(
                f"algebraic initial sub-state outside range(Bt0) "
                f"(residual {resid:.2e}); no admissible control exists"
            )
        A_eq = U[:, :rank].T @ A0c
        b_eq = U[:, :rank].T @ b0c
    else:
        A_eq = np.zeros((0, m))
        b_eq = np.zeros(0)

    p = A_eq.shape[0]
    KKT = np.block([[H, A_eq.T], [A_eq, np.zeros((p, p))]])
    rhs = np.concatenate([-g, b_eq])
    try:
        sol = np.linalg.solve(KKT, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularKKT("KKT system is singular") from exc
    z, nu = sol[:m], sol[m:]

    scale = max(np.linalg.norm(H, ord=np.inf) * max(np.linalg.norm(z), 1.0),
                np.linalg.norm(g), 1.0)
    stat = np.linalg.norm(H @ z + g + A_eq.T @ nu)
    feas = np.linalg.norm(A_eq @ z - b_eq) if p else 0.0
    if stat > KKT_TOL * scale or feas > KKT_TOL * (1.0 + np.linalg.norm(x_i)):
        raise SingularKKT(
            f"KKT residuals too large (stationarity {stat:.2e}, "
            f"feasibility {feas:.2e}); system likely ill-conditioned"
        )

    J = float(0.5 * z @ (H @ z) + g @ z + const)
    u = z.reshape(N + 1, n_u)
    grid = TimeGrid(0.0, w.t_f, nodes)
    return ControlSignal(grid, u), J
