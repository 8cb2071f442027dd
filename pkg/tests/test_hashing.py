import math
from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from qdicut.hashing import HashOracle, copy_draws, derive_seed
from qdicut.pseudosnapshot import DegreeGrid


def oracle(kappa=4, n=64, eps=1, seed=7):
    return HashOracle(seed, kappa, DegreeGrid(n, eps))


def test_capped_probability_always_fires():
    o = oracle(kappa=4)
    assert o.f_prob(1) == 1  # d_1 = 2, kappa / (2 d) = 1
    assert all(o.f(1, e) for e in range(500))


def test_bits_are_consistent():
    o = oracle()
    first = [o.f(3, e) for e in range(200)]
    fresh = oracle()
    assert first == [fresh.f(3, e) for e in range(200)] == [o.f(3, e) for e in range(200)]


def test_f_rate_matches_probability():
    o = oracle(kappa=2)
    level = 4  # d_4 = 16
    p = float(o.f_prob(level))
    n = 10 ** 5
    hits = sum(o.f(level, e) for e in range(n))
    se = math.sqrt(p * (1 - p) / n)
    assert abs(hits / n - p) <= 5 * se


def test_level_outside_grid():
    o = oracle()
    try:
        o.f(len(o.grid.levels), 0)
    except IndexError:
        return
    raise AssertionError("expected IndexError")


def test_g_range_and_mean():
    o = oracle(eps=Fraction(1, 2))
    vals = [o.g(v) for v in range(20000)]
    assert all(-Fraction(1, 2) <= x <= Fraction(1, 2) for x in vals)
    arr = np.array([float(x) for x in vals])
    assert abs(arr.mean()) <= 5 * (0.5 / math.sqrt(3)) / math.sqrt(len(arr))


def test_seed_tree():
    assert derive_seed(1, "oracle", 0) == derive_seed(1, "oracle", 0)
    kids = {derive_seed(1, "oracle", i) for i in range(100)} | {derive_seed(1, "copies", i) for i in range(100)}
    assert len(kids) == 200
    assert derive_seed(1, "oracle", 0) != derive_seed(2, "oracle", 0)


@given(st.integers(0, 2 ** 32), st.integers(1, 9), st.integers(0, 40))
def test_copy_draws_independent_of_blocking(seed, per_copy, c):
    bulk = copy_draws(seed, c + 3, per_copy)
    assert np.array_equal(copy_draws(seed, 1, per_copy, first_copy=c)[0], bulk[c])
    assert np.array_equal(copy_draws(seed, 3, per_copy, first_copy=c), bulk[c:c + 3])
