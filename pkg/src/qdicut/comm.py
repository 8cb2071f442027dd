"""One-way protocol for counting label-matched edges of a directed matching, quantum vs classical sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MatchingError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedMatching:
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for u, v in self.edges:
            if u == v or u in seen or v in seen:
                raise MatchingError(f"edge {u}->{v} shares a vertex with another edge")
            seen.update((u, v))


def _label_counts(matching: DirectedMatching, labels: Sequence[int], i: int, j: int) -> tuple[int, int]:
    """(edges with both labels right, edges with exactly one right)."""
    both = one = 0
    for u, v in matching.edges:
        hit = (labels[u] == i) + (labels[v] == j)
        if hit == 2:
            both += 1
        elif hit == 1:
            one += 1
    return both, one


def protocol_truth(matching: DirectedMatching, labels: Sequence[int], i: int, j: int) -> int:
    return _label_counts(matching, labels, i, j)[0]


def outcome_probabilities(matching: DirectedMatching, labels: Sequence[int], i: int, j: int) -> tuple[float, float]:
    """Per-copy probability of any '+' outcome and of any '-' outcome."""
    n = len(labels)
    both, one = _label_counts(matching, labels, i, j)
    return (both + one / 4) / n, (one / 4) / n


def quantum_protocol_estimate(matching: DirectedMatching, labels: Sequence[int], i: int, j: int, k: int,
                              seed: int | np.random.Generator) -> float:
    """Bob's estimate from k measured copies: +n/k per '+' outcome and -n/k per '-' outcome.

    Outcomes of independent copies are drawn jointly as one multinomial, which
    has the same distribution as k separate categorical draws.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = len(labels)
    plus, minus = outcome_probabilities(matching, labels, i, j)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.multinomial(k, [plus, minus, max(0.0, 1.0 - plus - minus)])
    return n / k * (int(counts[0]) - int(counts[1]))


def classical_baseline_estimate(matching: DirectedMatching, labels: Sequence[int], i: int, j: int, s: int,
                                seed: int | np.random.Generator) -> float:
    """Sample s vertices with their labels; count fully sampled correct edges, rescaled by 1 / Pr[both sampled]."""
    n = len(labels)
    if not 0 <= s <= n:
        raise ValueError("sample size must lie in 0..n")
    if s < 2:
        return 0.0
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chosen = np.zeros(n, dtype=bool)
    chosen[rng.choice(n, size=s, replace=False)] = True
    hits = sum(1 for u, v in matching.edges if chosen[u] and chosen[v] and labels[u] == i and labels[v] == j)
    return hits * (n * (n - 1)) / (s * (s - 1))


def message_cost(n: int, label_bits: int, *, k: int | None = None, s: int | None = None) -> dict:
    """Quantum: k (log n + label + 1) qubits. Classical: s (log n + label) bits."""
    vertex_bits = math.ceil(math.log2(max(n, 2)))
    out = {}
    if k is not None:
        out["quantum_qubits"] = k * (vertex_bits + label_bits + 1)
    if s is not None:
        out["classical_bits"] = s * (vertex_bits + label_bits)
    return out


def random_instance(n: int, labels: int, edges: int, seed: int):
    """Random labelling and a random directed matching with the given number of edges."""
    rng = np.random.default_rng(seed)
    if 2 * edges > n:
        raise ValueError("matching needs 2 * edges <= n")
    lab = rng.integers(0, labels, size=n).tolist()
    perm = rng.permutation(n)
    matching = DirectedMatching(tuple((int(perm[2 * e]), int(perm[2 * e + 1])) for e in range(edges)))
    return matching, lab


@dataclass
class CommComparison:
    n: int
    truth: int
    eps: float
    k: int
    s: int
    trials: int
    quantum_mean: float
    quantum_se: float
    quantum_var: float
    quantum_within: float
    classical_within: float
    quantum_qubits: int
    classical_bits: int

    def rows(self) -> list[dict]:
        return [
            {"protocol": "quantum", "copies_or_samples": self.k, "message_size": self.quantum_qubits,
             "unit": "qubits", "within_eps_n": self.quantum_within},
            {"protocol": "classical", "copies_or_samples": self.s, "message_size": self.classical_bits,
             "unit": "bits", "within_eps_n": self.classical_within},
        ]


def compare_protocols(n: int, eps: float, trials: int, seed: int, labels: int = 4, k: int | None = None,
                      s: int | None = None) -> CommComparison:
    """Run both protocols on one random instance with k = ceil(1/eps^2) and s = ceil(sqrt(n)/eps^2) by default."""
    k = k or math.ceil(1 / eps ** 2)
    s = s or min(n, math.ceil(math.sqrt(n) / eps ** 2))
    matching, lab = random_instance(n, labels, n // 2, seed)
    i, j = 0, 1
    truth = protocol_truth(matching, lab, i, j)
    rng = np.random.default_rng(seed + 1)
    q = np.array([quantum_protocol_estimate(matching, lab, i, j, k, rng) for _ in range(trials)])
    c = np.array([classical_baseline_estimate(matching, lab, i, j, s, rng) for _ in range(trials)])
    bits = math.ceil(math.log2(labels))
    cost = message_cost(n, bits, k=k, s=s)
    return CommComparison(
        n=n, truth=truth, eps=eps, k=k, s=s, trials=trials,
        quantum_mean=float(q.mean()), quantum_se=float(q.std(ddof=1) / math.sqrt(trials)),
        quantum_var=float(q.var(ddof=1)),
        quantum_within=float(np.mean(np.abs(q - truth) <= eps * n)),
        classical_within=float(np.mean(np.abs(c - truth) <= eps * n)),
        quantum_qubits=cost["quantum_qubits"], classical_bits=cost["classical_bits"],
    )
