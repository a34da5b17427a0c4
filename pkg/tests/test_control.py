import numpy as np
import pytest

from descriptorlq import (
    ControlSignal,
    DescriptorSystem,
    InadmissibleVariation,
    InconsistentInitialData,
    NoConvergence,
    ParabolicEllipticParams,
    QuadraticWeights,
    TimeGrid,
    assemble,
    check_admissible,
    minimum_cost,
    picard_solve,
    simulate_open_loop,
    synthesize,
    variation_gradient,
    variation_identity_check,
)


class TestFeedbackGain:
    def test_scalar_gain_formula(self, scalar):
        syn = scalar["syn"]
        sys = scalar["sys"]
        # K = R^{-1} B^T (Pit0 + Pit1 E) spelled out by hand per node
        for i in (0, 600, 1200):
            K_hand = sys.B.T @ (syn.rs.Pit0 + syn.rs.Pit1[i] @ sys.E)
            np.testing.assert_allclose(syn.gains.K[i], K_hand, atol=1e-12)

    def test_gain_static_in_steady_region(self, scalar):
        # far from t_f the Riccati solution is stationary
        K = scalar["syn"].gains.K
        assert np.max(np.abs(K[0] - K[100])) <= 1e-6


class TestAdmissibility:
    def test_consistent_pair_passes(self, scalar):
        grid = scalar["grid"]
        u = ControlSignal(grid, np.cos(grid.nodes)[:, None])
        # x0(0) = -Bt0 u(0) = 0.5
        rep = check_admissible(u, np.array([1.0, 0.5]), scalar["syn"].wf)
        assert rep.passed

    def test_violated_pair_fails(self, scalar):
        grid = scalar["grid"]
        u = ControlSignal.zero(grid, 1)
        rep = check_admissible(u, np.array([1.0, 0.5]), scalar["syn"].wf)
        assert not rep.passed


class TestPicard:
    def test_zero_weights_one_sweep(self):
        sys = DescriptorSystem(np.diag([1.0, 0.0]), np.diag([-1.0, -2.0]),
                               np.array([[1.0], [1.0]]))
        w = QuadraticWeights(Q=np.zeros((2, 2)), R=np.eye(1),
                             G=np.zeros((2, 2)), t_f=2.0)
        grid = TimeGrid.uniform(0.0, 2.0, 101)
        syn = synthesize(sys, w, grid)
        u = picard_solve(sys, syn.wf, syn.sw, np.array([1.0, 0.0]), grid,
                         max_iter=1)
        assert u.sup_norm() == 0.0

    def test_scalar_matches_feedback(self, scalar):
        traj = scalar["traj"]
        u_fp = picard_solve(scalar["sys"], scalar["syn"].wf, scalar["syn"].sw,
                            traj.x[0], scalar["grid"])
        assert np.max(np.abs(u_fp.u - traj.u)) <= 1e-6

    def test_unreachable_algebraic_state_rejected(self):
        # B feeds only the dynamical row, so Bt0 = 0 and a nonzero algebraic
        # initial coordinate cannot be made consistent by any control
        sys = DescriptorSystem(np.diag([1.0, 0.0]), np.diag([-1.0, -2.0]),
                               np.array([[1.0], [0.0]]))
        w = QuadraticWeights(Q=np.diag([1.0, 0.0]), R=np.eye(1),
                             G=np.zeros((2, 2)), t_f=2.0)
        grid = TimeGrid.uniform(0.0, 2.0, 101)
        syn = synthesize(sys, w, grid)
        with pytest.raises(InconsistentInitialData):
            picard_solve(sys, syn.wf, syn.sw, np.array([1.0, 1.0]), grid)

    def test_divergence_reported_honestly(self):
        # the iteration map amplifies ~1e5 per sweep on the unstable coupled
        # instance at this horizon; the solver must say so, not hang or crash
        params = ParabolicEllipticParams(n_elements=4, t_f=6.0)
        sys, w, x_i = assemble(params)
        grid = TimeGrid.terminal_refined(0.0, 6.0, 301, 1e-5, 1.12)
        syn = synthesize(sys, w, grid, dre_rtol=1e-11, dre_atol=1e-14)
        with pytest.raises(NoConvergence):
            picard_solve(sys, syn.wf, syn.sw, x_i, grid)

    def test_small_coupled_instance_matches_feedback(self, fem4):
        traj = fem4["traj"]
        u_fp = picard_solve(fem4["sys"], fem4["syn"].wf, fem4["syn"].sw,
                            traj.x[0], fem4["grid"])
        gap = np.max(np.abs(u_fp.u - traj.u))
        assert gap <= 1e-4 * traj.control().sup_norm()


class TestVariation:
    def test_gradient_vanishes_at_optimum(self, scalar):
        traj = scalar["traj"]
        zu = variation_gradient(traj.control(), traj, scalar["w"],
                                scalar["syn"].sw, scalar["syn"].wf)
        assert zu.sup_norm() <= 1e-4 * (1.0 + traj.control().sup_norm())

    def test_identity_on_scalar(self, scalar):
        grid = scalar["grid"]
        traj = scalar["traj"]
        # smooth variation with h(0) = 0 so the admissible set is preserved
        h = ControlSignal(grid, 0.05 * np.sin(grid.nodes)[:, None])
        lhs, rhs, gap = variation_identity_check(
            traj.control(), h, scalar["sys"], scalar["syn"].wf, scalar["w"],
            scalar["syn"].sw, traj.x[0],
        )
        assert gap <= 1e-6 * max(abs(lhs), 1.0)

    def test_inadmissible_variation_rejected(self, scalar):
        grid = scalar["grid"]
        h = ControlSignal(grid, np.ones((grid.n_nodes, 1)))
        with pytest.raises(InadmissibleVariation):
            variation_identity_check(
                scalar["traj"].control(), h, scalar["sys"], scalar["syn"].wf,
                scalar["w"], scalar["syn"].sw, scalar["traj"].x[0],
            )

    def test_perturbations_increase_cost(self, scalar):
        grid = scalar["grid"]
        traj = scalar["traj"]
        rng = np.random.default_rng(101)
        for _ in range(10):
            h_vals = 0.1 * rng.standard_normal((grid.n_nodes, 1))
            h_vals[0] = 0.0
            pert = simulate_open_loop(
                scalar["sys"], scalar["syn"].wf,
                traj.control() + ControlSignal(grid, h_vals),
                traj.x[0], grid, weights=scalar["w"],
            )
            assert pert.J > traj.J


def test_minimum_cost_zero_state(scalar):
    assert minimum_cost(scalar["syn"].rs, scalar["sys"], np.zeros(2)) == 0.0
