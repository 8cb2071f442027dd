import itertools

import pytest
from hypothesis import strategies as st

from qdicut.graph import EdgeStream
from qdicut.snapshot import load_config


@pytest.fixture(scope="session")
def test2():
    return load_config("test2")


@pytest.fixture(scope="session")
def production():
    return load_config("production")


def naive_opt(stream):
    """Max-DiCut by plain enumeration, kept separate from the vectorised solver."""
    best = 0
    for x in itertools.product((0, 1), repeat=stream.n):
        best = max(best, sum(1 for u, v in stream.edges if x[u] == 0 and x[v] == 1))
    return best


@st.composite
def streams(draw, n_min=2, n_max=6, m_max=10):
    n = draw(st.integers(n_min, n_max))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=m_max))
    return EdgeStream(n, tuple(edges))
