import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from graphdiffusion import generators as gen
from graphdiffusion import uniform_measure, validate_graph

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def connected_graphs(draw, max_vertices=12, killing=None):
    """Random connected graph drawn through a hypothesis-chosen seed."""
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(2, max_vertices))
    kill = draw(st.booleans()) if killing is None else killing
    rng = np.random.default_rng(seed)
    g = gen.random_connected(rng, n, killing=kill)
    return g, gen.random_measure(rng, g), rng


@pytest.fixture
def triangle():
    return gen.triangle()


@pytest.fixture
def path3():
    g = gen.path(-1, 1)
    return g, uniform_measure(g)


@pytest.fixture
def killed_pair():
    g = validate_graph(["1", "2"], [("1", "2", 1.0)], {"1": 1.0})
    return g, uniform_measure(g)
