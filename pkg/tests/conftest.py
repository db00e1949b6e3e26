import numpy as np
import pytest

from machform.analysis import run_analysis
from machform.simulator import load_scenario, simulate
from machform.system import MachineParams, ReducedNetwork, SystemModel, bundled


@pytest.fixture(scope="session")
def wscc9():
    return load_scenario(bundled("wscc9"))


@pytest.fixture(scope="session")
def wscc9_traj(wscc9):
    return simulate(wscc9)


@pytest.fixture(scope="session")
def wscc9_an(wscc9, wscc9_traj):
    return run_analysis(wscc9, [1, 2], wscc9_traj)


@pytest.fixture(scope="session")
def unstable():
    return load_scenario(bundled("wscc9_unstable"))


@pytest.fixture(scope="session")
def unstable_an(unstable):
    return run_analysis(unstable, [1, 2])


@pytest.fixture(scope="session")
def smib():
    return load_scenario(bundled("smib"))


def lossless_pair(m1=0.1, m2=1.0, pm=0.8, b_pre=2.0, b_fault=0.0, b_post=1.5):
    """Two machines exchanging power over a pure reactance."""
    machines = (MachineParams(0, m1, pm, 1.0), MachineParams(1, m2, -pm, 1.0))

    def net(b):
        return ReducedNetwork(np.zeros((2, 2)), np.array([[-b, b], [b, -b]]))

    return SystemModel(machines, net(b_pre), net(b_fault), net(b_post))
