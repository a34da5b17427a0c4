import numpy as np
import pytest

from descriptorlq import (
    DescriptorSystem,
    InconsistentInitialData,
    QuadraticWeights,
    TimeGrid,
    TooLarge,
    direct_transcription,
    synthesize,
)


def test_zero_weights_give_zero_control(scalar):
    sys = scalar["sys"]
    w = QuadraticWeights(Q=np.zeros((2, 2)), R=np.eye(1), G=np.zeros((2, 2)),
                         t_f=2.0)
    syn = synthesize(sys, w, TimeGrid.uniform(0.0, 2.0, 51))
    u, J = direct_transcription(sys, syn.wf, w, np.array([1.0, 0.0]), 50)
    assert u.sup_norm() <= 1e-12
    assert J == pytest.approx(0.0, abs=1e-12)


def test_scalar_cost_close_to_feedback(scalar):
    u, J = direct_transcription(scalar["sys"], scalar["syn"].wf, scalar["w"],
                                scalar["x_i"], 400)
    assert abs(J - scalar["traj"].J) <= 5e-3 * scalar["traj"].J


def test_scalar_gap_halves_with_step_refinement(scalar):
    gaps = []
    for n in (100, 200, 400):
        _, J = direct_transcription(scalar["sys"], scalar["syn"].wf,
                                    scalar["w"], scalar["x_i"], n)
        gaps.append(abs(J - scalar["traj"].J))
    assert gaps[1] <= 0.6 * gaps[0]
    assert gaps[2] <= 0.6 * gaps[1]


def test_coupled_instance_within_one_percent(fem4):
    _, J = direct_transcription(fem4["sys"], fem4["syn"].wf, fem4["w"],
                                fem4["x_i"], 400)
    assert abs(J - fem4["traj"].J) <= 1e-2 * fem4["traj"].J


def test_optimal_control_is_consistent(fem4):
    wf = fem4["syn"].wf
    u, _ = direct_transcription(fem4["sys"], wf, fem4["w"], fem4["x_i"], 200)
    _, x0c0 = wf.split_state(fem4["x_i"])
    resid = np.linalg.norm(wf.Bt0 @ u.u[0] + x0c0)
    assert resid <= 1e-8 * (1.0 + np.linalg.norm(fem4["x_i"]))


def test_size_guard(scalar):
    with pytest.raises(TooLarge):
        direct_transcription(scalar["sys"], scalar["syn"].wf, scalar["w"],
                             scalar["x_i"], 50000)


def test_unreachable_initial_data_rejected():
    sys = DescriptorSystem(np.diag([1.0, 0.0]), np.diag([-1.0, -2.0]),
                           np.array([[1.0], [0.0]]))
    w = QuadraticWeights(Q=np.diag([1.0, 0.0]), R=np.eye(1),
                         G=np.zeros((2, 2)), t_f=2.0)
    syn = synthesize(sys, w, TimeGrid.uniform(0.0, 2.0, 51))
    with pytest.raises(InconsistentInitialData):
        direct_transcription(sys, syn.wf, w, np.array([1.0, 1.0]), 50)


def test_rejects_nonpositive_steps(scalar):
    with pytest.raises(ValueError):
        direct_transcription(scalar["sys"], scalar["syn"].wf, scalar["w"],
                             scalar["x_i"], 0)
