import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdicut.comm import (DirectedMatching, MatchingError, classical_baseline_estimate, compare_protocols,
                         message_cost, outcome_probabilities, protocol_truth, quantum_protocol_estimate,
                         random_instance)


def test_truth_examples():
    m = DirectedMatching(((0, 1),))
    assert protocol_truth(m, [2, 3], 2, 3) == 1
    assert protocol_truth(DirectedMatching(()), [2, 3], 2, 3) == 0
    assert protocol_truth(m, [0, 0], 2, 3) == 0


def test_matching_must_be_disjoint():
    with pytest.raises(MatchingError):
        DirectedMatching(((0, 1), (1, 2)))
    with pytest.raises(MatchingError):
        DirectedMatching(((0, 0),))


def test_single_edge_expectation():
    m, labels = DirectedMatching(((0, 1),)), [0, 1]
    plus, minus = outcome_probabilities(m, labels, 0, 1)
    assert (plus, minus) == (0.5, 0.0)
    assert 2 * (plus - minus) == 1


def test_empty_matching_always_zero():
    m = DirectedMatching(())
    assert all(quantum_protocol_estimate(m, [0] * 10, 0, 1, 7, s) == 0 for s in range(20))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(4, 40), seed=st.integers(0, 10 ** 6))
def test_outcome_probabilities_from_amplitudes(n, seed):
    """Per edge: (a + b)^2 / (4n) for '+' and (a - b)^2 / (4n) for '-', with a, b the label indicators."""
    m, lab = random_instance(n, 3, n // 2, seed)
    plus = sum((int(lab[u] == 0) + int(lab[v] == 1)) ** 2 for u, v in m.edges) / (4 * n)
    minus = sum((int(lab[u] == 0) - int(lab[v] == 1)) ** 2 for u, v in m.edges) / (4 * n)
    assert outcome_probabilities(m, lab, 0, 1) == pytest.approx((plus, minus))


def test_unbiased_and_variance():
    n, k, trials = 400, 25, 10 ** 4
    m, lab = random_instance(n, 4, n // 2, 3)
    truth = protocol_truth(m, lab, 0, 1)
    rng = np.random.default_rng(9)
    est = np.array([quantum_protocol_estimate(m, lab, 0, 1, k, rng) for _ in range(trials)])
    assert abs(est.mean() - truth) <= 5 * est.std(ddof=1) / math.sqrt(trials)
    assert est.var(ddof=1) <= n * n / k


def test_one_label_edges_cancel():
    n, k, trials = 200, 16, 10 ** 4
    m = DirectedMatching(tuple((2 * e, 2 * e + 1) for e in range(n // 2)))
    lab = [0 if x % 4 == 0 else 2 for x in range(n)]  # heads sometimes right, tails never
    assert protocol_truth(m, lab, 0, 1) == 0
    rng = np.random.default_rng(1)
    est = np.array([quantum_protocol_estimate(m, lab, 0, 1, k, rng) for _ in range(trials)])
    assert abs(est.mean()) <= 5 * est.std(ddof=1) / math.sqrt(trials)


def test_classical_edge_cases():
    m, lab = random_instance(50, 2, 25, 0)
    truth = protocol_truth(m, lab, 0, 1)
    assert classical_baseline_estimate(m, lab, 0, 1, 50, 1) == truth
    assert classical_baseline_estimate(m, lab, 0, 1, 0, 1) == 0
    with pytest.raises(ValueError):
        classical_baseline_estimate(m, lab, 0, 1, 51, 1)


def test_classical_accuracy_at_sqrt_n_samples():
    n, eps = 400, 0.2
    s = math.ceil(0.5 * math.sqrt(n) / eps ** 2)
    m, lab = random_instance(n, 4, n // 2, 5)
    truth = protocol_truth(m, lab, 0, 1)
    rng = np.random.default_rng(2)
    ok = [abs(classical_baseline_estimate(m, lab, 0, 1, s, rng) - truth) <= eps * n for _ in range(600)]
    assert np.mean(ok) >= 2 / 3


def test_message_cost_examples():
    assert message_cost(1024, 2, k=25) == {"quantum_qubits": 325}
    assert message_cost(1024, 2, s=64) == {"classical_bits": 768}
    assert message_cost(2048, 2, k=25)["quantum_qubits"] - 325 == 25


def test_compare_protocols_table():
    cmp = compare_protocols(2000, 0.2, 200, 0)
    rows = cmp.rows()
    assert [r["protocol"] for r in rows] == ["quantum", "classical"]
    assert cmp.k == 25 and cmp.quantum_qubits < cmp.classical_bits
