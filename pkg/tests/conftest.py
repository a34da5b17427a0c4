import numpy as np
import pytest

from descriptorlq import (
    DescriptorSystem,
    ParabolicEllipticParams,
    QuadraticWeights,
    TimeGrid,
    assemble,
    simulate_closed_loop,
    synthesize,
)


@pytest.fixture(scope="session")
def scalar():
    """One differential + one algebraic coordinate; weights respect the split."""
    sys = DescriptorSystem(
        E=np.diag([1.0, 0.0]),
        A=np.diag([-1.0, -2.0]),
        B=np.array([[1.0], [1.0]]),
    )
    w = QuadraticWeights(Q=np.diag([1.0, 0.0]), R=np.array([[1.0]]),
                         G=np.zeros((2, 2)), t_f=6.0)
    grid = TimeGrid.uniform(0.0, 6.0, 1201)
    syn = synthesize(sys, w, grid)
    x_i = np.array([1.0, 0.0])
    traj = simulate_closed_loop(sys, syn.wf, syn.gains, x_i, grid, weights=w)
    return {"sys": sys, "w": w, "grid": grid, "syn": syn, "x_i": x_i,
            "traj": traj}


@pytest.fixture(scope="session")
def scalar_full_q():
    """Same dynamics with Q = I, so the algebraic penalty feeds Rt."""
    sys = DescriptorSystem(
        E=np.diag([1.0, 0.0]),
        A=np.diag([-1.0, -2.0]),
        B=np.array([[1.0], [1.0]]),
    )
    w = QuadraticWeights(Q=np.eye(2), R=np.array([[1.0]]),
                         G=np.zeros((2, 2)), t_f=6.0)
    grid = TimeGrid.uniform(0.0, 6.0, 1201)
    syn = synthesize(sys, w, grid)
    return {"sys": sys, "w": w, "grid": grid, "syn": syn}


@pytest.fixture(scope="session")
def paper():
    """The coupled parabolic-elliptic instance at full size."""
    params = ParabolicEllipticParams(rho=1.0, gamma=2.0, alpha=2.0, beta=2.0,
                                     n_elements=27, t_f=6.0)
    sys, w, x_i = assemble(params)
    grid = TimeGrid.terminal_refined(0.0, 6.0, 2000, 1e-5, 1.12)
    syn = synthesize(sys, w, grid, semi_explicit=True,
                     dre_rtol=1e-11, dre_atol=1e-14)
    traj = simulate_closed_loop(sys, syn.wf, syn.gains, x_i, grid, weights=w)
    return {"params": params, "sys": sys, "w": w, "grid": grid, "syn": syn,
            "x_i": x_i, "traj": traj}


@pytest.fixture(scope="session")
def fem4():
    """Small coupled instance on a short horizon where every solver agrees."""
    params = ParabolicEllipticParams(n_elements=4, t_f=0.5)
    sys, w, x_i = assemble(params)
    grid = TimeGrid.terminal_refined(0.0, 0.5, 401, 1e-5, 1.12)
    syn = synthesize(sys, w, grid, dre_rtol=1e-11, dre_atol=1e-14)
    traj = simulate_closed_loop(sys, syn.wf, syn.gains, x_i, grid, weights=w)
    return {"params": params, "sys": sys, "w": w, "grid": grid, "syn": syn,
            "x_i": x_i, "traj": traj}
