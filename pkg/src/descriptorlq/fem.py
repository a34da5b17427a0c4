"""Linear-spline FEM assembly of the coupled parabolic-elliptic test system.

One parabolic field w and one elliptic field v on [0, 1] with Neumann ends,
driven by a single spatially uniform control:

    w_t = w_xx - rho*w + alpha*v + u(t)
      0 = v_xx - gamma*v + beta*w + u(t)

Discretized on a uniform mesh this is a descriptor system with
E = blockdiag(M, 0) and the elliptic constraint as the algebraic part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descriptor import DescriptorSystem
from .exceptions import SingularElliptic
from .weierstrass import QuadraticWeights

__all__ = [
    "ParabolicEllipticParams",
    "assemble",
    "instability_indicator",
    "mass_matrix",
    "stiffness_matrix",
]


@dataclass(frozen=True)
class ParabolicEllipticParams:
    """Coefficients and discretization of the coupled system."""

    rho: float = 1.0
    gamma: float = 2.0
    alpha: float = 2.0
    beta: float = 2.0
    n_elements: int = 27
    t_f: float = 6.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be positive")
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")


def mass_matrix(n_elements: int) -> np.ndarray:
    """Tridiagonal linear-spline mass matrix on a uniform mesh of [0, 1]."""
    h = 1.0 / n_elements
    n = n_elements + 1
    M = np.zeros((n, n))
    main = np.full(n, 4.0)
    main[0] = main[-1] = 2.0
    np.fill_diagonal(M, main)
    off = np.full(n - 1, 1.0)
    M[np.arange(n - 1), np.arange(1, n)] = off
    M[np.arange(1, n), np.arange(n - 1)] = off
    return (h / 6.0) * M


def stiffness_matrix(n_elements: int) -> np.ndarray:
    """Tridiagonal linear-spline stiffness matrix (natural Neumann ends)."""
    h = 1.0 / n_elements
    n = n_elements + 1
    K = np.zeros((n, n))
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0
    np.fill_diagonal(K, main)
    off = np.full(n - 1, -1.0)
    K[np.arange(n - 1), np.arange(1, n)] = off
    K[np.arange(1, n), np.arange(n - 1)] = off
    return K / h


def _load_vector(n_elements: int) -> np.ndarray:
    """Integrals of the hat functions: the discrete image of a uniform input."""
    h = 1.0 / n_elements
    ell = np.full(n_elements + 1, h)
    ell[0] = ell[-1] = h / 2.0
    return ell


def assemble(params: ParabolicEllipticParams):
    """Assemble (DescriptorSystem, QuadraticWeights, x_i) for the coupled system.

    The cost penalizes the parabolic field's L2 norm through the mass matrix
    (Q = blockdiag(M, 0)), uses R = 1, G = 0, and the initial data is the
    sine mode with the elliptic field solved consistently, so u(0) = 0 is
    admissible.
    """
    n_el = params.n_elements
    n = n_el + 1
    M = mass_matrix(n_el)
    K = stiffness_matrix(n_el)
    elliptic = K + params.gamma * M
    sv = np.linalg.svd(elliptic, compute_uv=False)
    if sv[-1] <= sv[0] * 1e-12:
        raise SingularElliptic(
            f"K + gamma*M is singular (gamma = {params.gamma} hits a discrete eigenvalue)"
        )
    ell = _load_vector(n_el)
    zero = np.zeros((n, n))

    E = np.block([[M, zero], [zero, zero]])
    A = np.block([
        [-K - params.rho * M, params.alpha * M],
        [params.beta * M, -elliptic],
    ])
    B = np.concatenate([ell, ell])[:, None]
    sys = DescriptorSystem(E, A, B)

    Q = np.block([[M, zero], [zero, zero]])
    w = QuadraticWeights(Q=Q, R=np.array([[1.0]]), G=np.zeros((2 * n, 2 * n)),
                         t_f=params.t_f)

    xs = np.linspace(0.0, 1.0, n)
    w0 = np.sin(np.pi * xs)
    v0 = np.linalg.solve(elliptic, params.beta * (M @ w0))
    x_i = np.concatenate([w0, v0])
    return sys, w, x_i


def instability_indicator(params: ParabolicEllipticParams) -> float:
    """Leading growth rate of the uncontrolled dynamics.

    Largest real part over the discrete modes of
    M^{-1}(-K - rho*M + alpha*M (K + gamma*M)^{-1} beta*M); for the constant
    mode this is exactly -rho + alpha*beta/gamma.
    """
    n_el = params.n_elements
    M = mass_matrix(n_el)
    K = stiffness_matrix(n_el)
    elliptic = K + params.gamma * M
    sv = np.linalg.svd(elliptic, compute_uv=False)
    if sv[-1] <= sv[0] * 1e-12:
        raise SingularElliptic("K + gamma*M is singular")
    coupled = -K - params.rho * M + params.alpha * M @ np.linalg.solve(
        elliptic, params.beta * M
    )
    eigs = np.linalg.eigvals(np.linalg.solve(M, coupled))
    return float(np.max(eigs.real))
