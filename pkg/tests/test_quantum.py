from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdicut.graph import EdgeStream
from qdicut.hashing import HashOracle
from qdicut.pseudosnapshot import DegreeGrid, bias_bound_count, pseudosnapshot_restricted
from qdicut.quantum import (CopySimulator, Outcome, PairParams, PairSampler, Replay, Status, check_state_invariant,
                            classical_stage, closed_form_intervals, measure_table, min_capacity, outcome_sign,
                            single_copy_run, trajectory)

from conftest import streams


class NoHits(HashOracle):
    def f(self, level, edge):
        return False


def make_oracle(stream, eps=1, kappa=2, seed=0, cls=HashOracle):
    return cls(seed, kappa, DegreeGrid(max(stream.n, 1), eps, max_degree=max(stream.m, 1)))


def test_capacity_formula():
    s = EdgeStream(2, ((0, 1),))
    sim = CopySimulator(s, make_oracle(s), 0, 0, capacity=32)
    assert sim.M == 256 and sim.mlive == 256 and not sim.stored_states()
    assert PairParams.build(s, make_oracle(s), 0, 0).copies == 8


def test_empty_stream_outputs_zero(test2):
    s = EdgeStream(3, ())
    res = single_copy_run(s, make_oracle(s), test2, 0, 0)
    assert res.status is Status.RUNNING and not res.estimate.any() and res.M == 0


def test_small_capacity_exhausts():
    s = EdgeStream(4, ((0, 1), (0, 2), (0, 3), (1, 2), (0, 1)))
    o = make_oracle(s, kappa=3, seed=1)
    a = o.grid.windows()[-1]
    cap = min_capacity(s, o, a, a)
    assert trajectory(s, o, a, a, cap).exhausted_at is None
    assert trajectory(s, o, a, a, cap - 1).exhausted_at is not None


def test_exhausted_propagates():
    s = EdgeStream(3, ((0, 1), (1, 2), (0, 2)))
    o = make_oracle(s, kappa=2)
    sim = CopySimulator(s, o, 0, 0, capacity=1)
    sim.M = sim.mlive = 10  # too few scratch states for one edge
    assert sim.process_edge(0, None, None) is Status.EXHAUSTED
    before = (sim.t, sim.processed, dict(sim.sets))
    assert sim.process_edge(1, 0, 0) is Status.EXHAUSTED
    assert (sim.t, sim.processed, dict(sim.sets)) == before


def _amplitude_weights(x_on, y_on):
    # measuring (|x> + (-1)^b |y>) / sqrt 2 on uniform amplitudes 1 / sqrt M': (x +- y)^2 / (2 M')
    return {0: (x_on + y_on) ** 2, 1: (x_on - y_on) ** 2}


@pytest.mark.parametrize("x_on, y_on", [(1, 1), (1, 0), (0, 1), (0, 0)])
def test_measure_weights_match_amplitudes(x_on, y_on):
    kappa = 1
    pu = {"A": [bool(x_on)], "B": [False]}
    pv = {"C": [bool(y_on)], "D": [False]}
    table = dict(measure_table(pu, pv, kappa))
    want = _amplitude_weights(x_on, y_on)
    for b in (0, 1):
        assert table.get((1, 1, 1, b), 0) == want[b]


def test_measure_probabilities_example():
    # both present with M' = 100: Pr[b=0] = 4 / 200, Pr[b=1] = 0; one present: 1 / 200 each
    both = dict(measure_table({"A": [True], "B": [False]}, {"C": [True], "D": [False]}, 1))
    assert Fraction(both[(1, 1, 1, 0)], 200) == Fraction(2, 100) and (1, 1, 1, 1) not in both
    one = dict(measure_table({"A": [True], "B": [False]}, {"C": [False], "D": [False]}, 1))
    assert Fraction(one[(1, 1, 1, 0)], 200) == Fraction(one[(1, 1, 1, 1)], 200) == Fraction(1, 200)
    none = measure_table({"A": [False], "B": [False]}, {"C": [False], "D": [False]}, 1)
    assert none == []


@pytest.mark.parametrize("k", [0, 1, 3, 7])
def test_cleanup_survival_telescopes(k):
    s = EdgeStream(2, ((0, 1),))
    sim = CopySimulator(s, make_oracle(s), 0, 0, capacity=4, strict=True)
    start = sim.mlive
    prod = Fraction(1)
    for _ in range(k):
        prod *= 1 - Fraction(1, sim.mlive)
        sim._account(1)
    assert prod == Fraction(start - k, start) == 1 - sim.p


def test_first_edge_without_targets_continues():
    s = EdgeStream(8, ((0, 1), (2, 3)))
    o = make_oracle(s, kappa=2, cls=NoHits)
    a = o.grid.index_of(4)
    sim = CopySimulator(s, o, a, a, trace=True)
    assert sim.process_edge(0, 0, 0) is Status.RUNNING
    assert sim.trace[0].op == "measure" and sim.trace[0].weights == ()


def test_sampled_head_edge_adds_block():
    s = EdgeStream(8, ((0, 1),))
    o = make_oracle(s, kappa=2)
    sim = CopySimulator(s, o, 1, 1)
    d1 = sim.params.d_a1
    for f in ("A", "B"):
        sim.inc(f, 0, 1)
        sim.inc(f, 0, d1)
        assert sim.family_set(f, 0).intervals == ((1, d1 + 1),)


def test_sign_examples(test2):
    s = EdgeStream(2, ((0, 1),))
    o = make_oracle(s)
    for fam, b, sign in [(1, 0, 1), (1, 1, -1), (2, 0, -1), (2, 1, 1), (3, 0, -1), (4, 0, 1)]:
        out = classical_stage(Outcome(0, 0, 1, fam, 1, 1, b), s, o, test2, 0, 0, 256)
        assert outcome_sign(Outcome(0, 0, 1, fam, 1, 1, b)) == sign
        assert out.sum() == sign * 128 and np.count_nonzero(out) == 1


def test_first_slot_means_zero_out_count(test2):
    # i = 1 gives an estimated before-out count of 0: head bias 2 * douta / (dbps + da) - 1 + g
    s = EdgeStream(3, ((0, 1), (0, 2)))
    o = make_oracle(s, kappa=2)
    out = classical_stage(Outcome(0, 0, 1, 1, 1, 1, 0), s, o, test2, 0, 0, 256)
    g = o.g(0)
    head = min(Fraction(2 * 1, 1 + 1) - 1 + g, 1)
    assert out[int(head >= 0)].sum() == 128


def test_closed_form_examples():
    # R = 0, r = 2, d = 5: two unit increments give {1, 2}
    assert closed_form_intervals(2, [], 5, 9)[0] == ((1, 2),)
    assert closed_form_intervals(7, [], 5, 9) == (((1, 4),), ((1, 7),))
    assert closed_form_intervals(0, [], 5, 9) == ((), ())


def test_outcome_law_is_a_distribution(test2):
    s = EdgeStream(4, ((0, 1), (1, 2), (0, 1), (2, 3), (3, 0)))
    o = make_oracle(s, kappa=2, seed=4)
    for a, b in o.grid.pairs():
        assert PairSampler(s, o, test2, a, b).law.total() == 1


@settings(max_examples=40, deadline=None)
@given(s=streams(m_max=10), eps=st.sampled_from([1, Fraction(1, 2)]), kappa=st.integers(2, 3), seed=st.integers(0, 999))
def test_state_matches_closed_form(s, eps, kappa, seed):
    o = make_oracle(s, eps, kappa, seed)
    for a, b in o.grid.pairs():
        sim = CopySimulator(s, o, a, b, capacity=10 ** 6)
        replay = Replay(s, o, a, b)
        for k in range(s.m):
            sim.process_edge(k, None, None)
            rep = check_state_invariant(sim, replay)
            assert rep.ok, rep.diffs


@settings(max_examples=30, deadline=None)
@given(s=streams(m_max=8), kappa=st.integers(2, 3), seed=st.integers(0, 999))
def test_expectation_equals_restricted_pseudosnapshot(s, kappa, seed, test2):
    """Exact single-copy mean equals the restricted pseudosnapshot, up to the bias bound."""
    o = make_oracle(s, 1, kappa, seed)
    for a, b in o.grid.pairs():
        mean = PairSampler(s, o, test2, a, b, capacity=10 ** 4).entry_moments()[0]
        target = pseudosnapshot_restricted(s, test2, o, a, b)
        bound = bias_bound_count(s, o, a, b)
        diff = np.abs((mean - target).astype(object))
        if bound == 0:
            assert all(x == 0 for x in diff.ravel())
        else:
            assert all(x <= bound for x in diff.ravel())


@settings(max_examples=25, deadline=None)
@given(s=streams(m_max=8), seed=st.integers(0, 999))
def test_bulk_sampler_agrees_with_single_copy(s, seed, test2):
    o = make_oracle(s, 1, 2, seed)
    a, b = o.grid.pairs()[seed % len(o.grid.pairs())]
    sampler = PairSampler(s, o, test2, a, b, capacity=2)
    codes = sampler.copy_codes(seed, 40)
    for c, (code, mat) in enumerate(zip(codes, sampler.copy_matrices(codes))):
        run = single_copy_run(s, o, test2, a, b, capacity=2, seed=seed, copy=c)
        expect = {Status.SAMPLED: None, Status.ZEROED: -2, Status.EXHAUSTED: -3, Status.RUNNING: -1}[run.status]
        if expect is None:
            assert code >= 0
        else:
            assert code == expect
        assert np.array_equal(mat, run.estimate)
        assert np.count_nonzero(run.estimate) <= 1
        assert np.abs(run.estimate).sum() in (0, run.M / 2)


def test_projector_order_invariance(monkeypatch, test2):
    """Reversing the measurement order changes which draw hits which projector, not the outcome law."""
    from scipy.stats import chi2_contingency

    import qdicut.quantum as q

    s = EdgeStream(4, ((0, 1), (1, 2), (0, 1), (2, 3), (3, 0), (0, 2)))
    o = make_oracle(s, kappa=2, seed=2)
    a, b = 0, 0
    cap = min_capacity(s, o, a, b)
    ref = PairSampler(s, o, test2, a, b, capacity=cap)
    original = q.measure_table
    monkeypatch.setattr(q, "measure_table", lambda pu, pv, kappa: original(pu, pv, kappa)[::-1])
    rev = PairSampler(s, o, test2, a, b, capacity=cap)
    assert dict(zip(ref.law.keys, ref.law.weights)) == dict(zip(rev.law.keys, rev.law.weights))

    def freq(sampler, seed):
        codes = sampler.copy_codes(seed, 10 ** 5)
        out = {}
        for c in codes:
            key = sampler.law.keys[c] if c >= 0 else int(c)
            out[key] = out.get(key, 0) + 1
        return out

    f1, f2 = freq(ref, 1), freq(rev, 2)
    keys = sorted(set(f1) | set(f2), key=str)
    table = np.array([[f1.get(k, 0) for k in keys], [f2.get(k, 0) for k in keys]])
    assert len(keys) > 3
    assert chi2_contingency(table)[1] > 1e-4
