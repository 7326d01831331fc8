import numpy as np
import pytest

from credalnet.credal import binary_interval
from credalnet.graph import Dag
from credalnet.network import CredalNetwork

from helpers import fig_dag


@pytest.fixture(scope="session")
def fig1():
    return fig_dag()


@pytest.fixture(scope="session")
def two_coins():
    """Two disconnected binary nodes whose heads probabilities both sit in
    [1/4, 3/4]; the worked linear-programming example."""
    dag = Dag(["1", "2"], [])
    m = binary_interval(("h", "t"), 0.25, 0.75)
    return CredalNetwork(dag, {"1": ("h", "t"), "2": ("h", "t")},
                         {("1", ()): m, ("2", ()): m})


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
