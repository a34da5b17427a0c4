import numpy as np
import pytest

from descriptorlq import (
    ParabolicEllipticParams,
    SingularElliptic,
    assemble,
    compute_projectors,
    instability_indicator,
    mass_matrix,
    stiffness_matrix,
)


class TestElementMatrices:
    def test_mass_hand_values_two_elements(self):
        # h = 1/2, M = (h/6) tridiag(1, [2,4,2], 1)
        M = mass_matrix(2)
        ref = (0.5 / 6.0) * np.array([[2.0, 1.0, 0.0],
                                      [1.0, 4.0, 1.0],
                                      [0.0, 1.0, 2.0]])
        np.testing.assert_allclose(M, ref, atol=1e-15)

    def test_stiffness_hand_values_two_elements(self):
        K = stiffness_matrix(2)
        ref = 2.0 * np.array([[1.0, -1.0, 0.0],
                              [-1.0, 2.0, -1.0],
                              [0.0, -1.0, 1.0]])
        np.testing.assert_allclose(K, ref, atol=1e-15)

    def test_mass_is_partition_of_unity(self):
        # row sums of M are the hat-function integrals; total mass is |[0,1]|
        assert mass_matrix(13).sum() == pytest.approx(1.0, abs=1e-14)

    def test_stiffness_annihilates_constants(self):
        K = stiffness_matrix(9)
        assert np.linalg.norm(K @ np.ones(10)) <= 1e-13


class TestAssemble:
    def test_shapes_and_structure(self):
        params = ParabolicEllipticParams(n_elements=5)
        sys, w, x_i = assemble(params)
        n = 6
        assert sys.E.shape == (2 * n, 2 * n)
        assert sys.B.shape == (2 * n, 1)
        assert x_i.shape == (2 * n,)
        # algebraic block of E is exactly zero
        assert np.all(sys.E[n:, :] == 0.0) and np.all(sys.E[:, n:] == 0.0)
        # cost only weighs the parabolic field
        assert np.all(w.Q[n:, n:] == 0.0)

    def test_initial_data_is_dynamical(self):
        sys, w, x_i = assemble(ParabolicEllipticParams(n_elements=8))
        proj = compute_projectors(sys)
        gap = np.linalg.norm(proj.P_X1 @ x_i - x_i)
        assert gap <= 1e-10 * np.linalg.norm(x_i)

    def test_singular_elliptic_operator_rejected(self):
        # gamma = 0 leaves K alone, which annihilates constants
        with pytest.raises(SingularElliptic):
            assemble(ParabolicEllipticParams(gamma=0.0, n_elements=4))

    def test_rejects_bad_discretization(self):
        with pytest.raises(ValueError):
            ParabolicEllipticParams(n_elements=0)
        with pytest.raises(ValueError):
            ParabolicEllipticParams(t_f=-1.0)


class TestInstability:
    def test_constant_mode_rate(self):
        # the constant mode grows at exactly -rho + alpha*beta/gamma = 1
        rate = instability_indicator(ParabolicEllipticParams())
        assert rate == pytest.approx(1.0, abs=1e-6)

    def test_rate_independent_of_mesh(self):
        rates = [
            instability_indicator(ParabolicEllipticParams(n_elements=n))
            for n in (4, 10, 27)
        ]
        assert max(rates) - min(rates) <= 1e-8

    def test_decoupled_system_is_stable(self):
        rate = instability_indicator(ParabolicEllipticParams(alpha=0.0))
        assert rate == pytest.approx(-1.0, abs=1e-9)
