import numpy as np
import pytest

from descriptorlq import (
    DescriptorSystem,
    IncompatibleWeights,
    QuadraticWeights,
    check_weight_compatibility,
    compute_projectors,
    decompose,
    split_weights,
)


def test_scalar_restricted_operators(scalar):
    wf = scalar["syn"].wf
    assert wf.rank_1 == 1 and wf.rank_0 == 1
    assert wf.At1[0, 0] == pytest.approx(-1.0, abs=1e-12)
    assert abs(wf.Bt1[0, 0]) == pytest.approx(1.0, abs=1e-12)
    # x0 = -Bt0 u with the algebraic row -2 x0 + u = 0 gives Bt0 = -1/2
    assert wf.Bt0[0, 0] == pytest.approx(-0.5, abs=1e-12)


def test_scalar_effective_input_weight(scalar_full_q):
    # Rt = R + Bt0^T Q0 Bt0 = 1 + 0.25
    assert scalar_full_q["syn"].sw.Rt[0, 0] == pytest.approx(1.25, abs=1e-12)


def test_reconstruction_roundtrip():
    rng = np.random.default_rng(11)
    k, n = 3, 5
    E_blk = np.zeros((n, n))
    A_blk = np.zeros((n, n))
    E_blk[:k, :k] = rng.standard_normal((k, k)) + 3.0 * np.eye(k)
    A_blk[:k, :k] = rng.standard_normal((k, k))
    A_blk[k:, k:] = rng.standard_normal((n - k, n - k)) + 3.0 * np.eye(n - k)
    L = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
    R = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
    sys = DescriptorSystem(L @ E_blk @ R, L @ A_blk @ R, rng.standard_normal((n, 1)))
    proj = compute_projectors(sys)
    wf = decompose(sys, proj)
    Er, Ar, Br = wf.reconstruct()
    scale = max(np.linalg.norm(sys.A), np.linalg.norm(sys.E))
    assert np.linalg.norm(Er - sys.E) <= 1e-9 * scale
    assert np.linalg.norm(Ar - sys.A) <= 1e-9 * scale
    assert np.linalg.norm(Br - sys.B) <= 1e-9 * scale


def test_e_vanishes_on_algebraic_subspace(paper):
    wf = paper["syn"].wf
    sys = paper["sys"]
    assert np.linalg.norm(sys.E @ wf.basis_X0) <= 1e-10 * np.linalg.norm(sys.E)


def test_split_lift_inverse(fem4):
    wf = fem4["syn"].wf
    rng = np.random.default_rng(3)
    x = rng.standard_normal(fem4["sys"].n_x)
    x1c, x0c = wf.split_state(x)
    np.testing.assert_allclose(wf.lift_state(x1c, x0c), x, atol=1e-10)


def test_bases_are_orthonormal(paper):
    wf = paper["syn"].wf
    for b in (wf.basis_X1, wf.basis_X0, wf.basis_Z1, wf.basis_Z0):
        np.testing.assert_allclose(b.T @ b, np.eye(b.shape[1]), atol=1e-12)


class TestQuadraticWeights:
    def test_rejects_asymmetric_q(self):
        with pytest.raises(ValueError, match="symmetric"):
            QuadraticWeights(Q=np.array([[1.0, 1.0], [0.0, 1.0]]),
                             R=np.eye(1), G=np.zeros((2, 2)), t_f=1.0)

    def test_rejects_indefinite_r(self):
        with pytest.raises(ValueError, match="positive definite"):
            QuadraticWeights(Q=np.eye(2), R=np.array([[0.0]]),
                             G=np.zeros((2, 2)), t_f=1.0)

    def test_rejects_nonpositive_horizon(self):
        with pytest.raises(ValueError, match="t_f"):
            QuadraticWeights(Q=np.eye(2), R=np.eye(1), G=np.zeros((2, 2)),
                             t_f=0.0)


class TestWeightCompatibility:
    def test_split_respecting_weights_pass(self, scalar):
        report = check_weight_compatibility(scalar["w"], scalar["syn"].proj)
        assert report.passed
        assert report.residual_G_cross == 0.0
        assert report.residual_G_alg == 0.0

    def test_cross_coupling_detected_and_refused(self, scalar):
        w_bad = QuadraticWeights(Q=np.ones((2, 2)), R=np.eye(1),
                                 G=np.zeros((2, 2)), t_f=6.0)
        report = check_weight_compatibility(w_bad, scalar["syn"].proj)
        assert not report.passed
        assert report.residual_Q_cross > 0.0
        with pytest.raises(IncompatibleWeights):
            split_weights(w_bad, scalar["syn"].wf, report)

    def test_mass_weighted_fem_q_passes(self, paper):
        report = check_weight_compatibility(paper["w"], paper["syn"].proj)
        assert report.passed
