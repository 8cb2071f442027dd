"""Degree grid, pseudobiases and the exact (full-memory) pseudosnapshot oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import EdgeStream
from .hashing import HashOracle
from .snapshot import BiasClassConfig, _exact, classify


class DegreeGrid:
    """Levels d_i = floor((1 + eps^3)^i) for i < L, with d_L = n and L = floor(log_{1+eps^3} n).

    Before-degrees can exceed n in a multigraph stream, so the grid continues past
    d_L with the same formula until some level exceeds ``max_degree`` (2(n-1) when not
    given). Index ``top`` is L; ``levels`` holds the extended list.
    """

    def __init__(self, n: int, eps, max_degree: int | None = None):
        if n < 1:
            raise ValueError("n must be at least 1")
        eps = _exact(eps)
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        self.n = int(n)
        self.eps = eps
        base = 1 + eps ** 3
        self.base = base
        # exact L: largest i with base^i <= n
        L, power = 0, Fraction(1)
        while power * base <= n:
            power *= base
            L += 1
        self.top = L
        levels = []
        power = Fraction(1)
        for _ in range(L):
            levels.append(math.floor(power))
            power *= base
        levels.append(self.n)
        bound = max(self.n, 2 * (self.n - 1) if max_degree is None else int(max_degree))
        while levels[-1] <= bound:
            power *= base
            levels.append(max(math.floor(power), levels[-1]))
        self.levels: tuple[int, ...] = tuple(levels)
        self.max_degree = bound

    def __len__(self) -> int:
        return len(self.levels)

    def __repr__(self) -> str:
        return f"DegreeGrid(n={self.n}, eps={self.eps}, levels={self.levels})"

    def check_level(self, i: int) -> None:
        if not 0 <= i < len(self.levels):
            raise IndexError(f"grid level {i} outside 0..{len(self.levels) - 1}")

    def index_of(self, db: int) -> int:
        """Largest i with d_i <= db, i.e. the level whose window [d_i, d_{i+1}) holds db."""
        if db < 1:
            raise ValueError("before-degree is at least 1")
        lo, hi = 0, len(self.levels) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.levels[mid] <= db:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def windows(self) -> list[int]:
        """Indices a with a non-empty window [d_a, d_{a+1}), one per distinct level."""
        lv = self.levels
        return [a for a in range(len(lv) - 1) if lv[a] < lv[a + 1]]

    def window(self, a: int) -> tuple[int, int]:
        self.check_level(a + 1)
        return self.levels[a], self.levels[a + 1]

    def pairs(self) -> list[tuple[int, int]]:
        w = self.windows()
        return [(a, b) for a in w for b in w]


def degree_grid(n: int, eps, max_degree: int | None = None) -> DegreeGrid:
    return DegreeGrid(n, eps, max_degree)


@dataclass(frozen=True)
class PseudobiasRecord:
    level: int
    dbps: int
    hits: int
    doutbps: Fraction
    da: int
    douta: int
    bps: Fraction

    @property
    def db(self) -> int:
        return self.dbps


def pseudobias_value(dbps, doutbps, da: int, douta: int, g) -> Fraction:
    """min(2 (doutbps + douta) / (dbps + da) - 1 + g, 1)."""
    val = 2 * (_exact(doutbps) + douta) / (_exact(dbps) + da) - 1 + _exact(g)
    return min(val, Fraction(1))


class StreamIndex:
    """Per-vertex arrival positions, precomputed once for repeated pseudobias queries."""

    def __init__(self, stream: EdgeStream):
        self.stream = stream
        self.incident = stream.incident_positions()
        self.out = [[] for _ in range(stream.n)]
        for k, (u, _) in enumerate(stream.edges):
            self.out[u].append(k)
        self._rank = [{k: p for p, k in enumerate(pos)} for pos in self.incident]

    def before_degree(self, k: int, v: int) -> int:
        try:
            return self._rank[v][k] + 1
        except KeyError:
            raise ValueError(f"edge {k} is not incident to vertex {v}") from None

    def after_counts(self, k: int, v: int) -> tuple[int, int]:
        """(da, douta): incident and out-edges of v strictly after edge k."""
        da = len(self.incident[v]) - self.before_degree(k, v)
        douta = sum(1 for q in self.out[v] if q > k)
        return da, douta

    def head_hits(self, k: int, v: int, level: int, oracle: HashOracle) -> int:
        """Edges with head v arriving up to and including k whose f_level bit is set."""
        return sum(1 for q in self.out[v] if q <= k and oracle.f(level, q))


def pseudobias(stream: EdgeStream | StreamIndex, k: int, v: int, oracle: HashOracle) -> PseudobiasRecord:
    """The pseudobias of vertex ``v`` at edge ``k``, computed by full replay.

    The sampled before-out-count is hits / Pr[f = 1] at the coarsened level, which
    is (2 d / kappa) * hits whenever that probability is below one.
    """
    idx = stream if isinstance(stream, StreamIndex) else StreamIndex(stream)
    db = idx.before_degree(k, v)
    level = oracle.grid.index_of(db)
    dbps = oracle.grid.levels[level]
    hits = idx.head_hits(k, v, level, oracle)
    doutbps = hits / oracle.f_prob(level)
    da, douta = idx.after_counts(k, v)
    bps = pseudobias_value(dbps, doutbps, da, douta, oracle.g(v))
    return PseudobiasRecord(level, dbps, hits, doutbps, da, douta, bps)


@dataclass(frozen=True)
class EdgeRecord:
    k: int
    u: int
    v: int
    head: PseudobiasRecord
    tail: PseudobiasRecord


def edge_records(stream: EdgeStream, oracle: HashOracle) -> list[EdgeRecord]:
    """Head and tail pseudobias of every edge; memoised on the oracle per stream."""
    recs = oracle.memo.get(("records", stream))
    if recs is None:
        idx = StreamIndex(stream)
        recs = [EdgeRecord(k, u, v, pseudobias(idx, k, u, oracle), pseudobias(idx, k, v, oracle))
                for k, (u, v) in enumerate(stream.edges)]
        oracle.memo[("records", stream)] = recs
    return recs


def pseudosnapshot_exact(stream: EdgeStream, config: BiasClassConfig, oracle: HashOracle) -> np.ndarray:
    out = np.zeros((config.ell, config.ell), dtype=np.int64)
    for rec in edge_records(stream, oracle):
        out[classify(rec.head.bps, config), classify(rec.tail.bps, config)] += 1
    return out


def pseudosnapshot_restricted(
    stream: EdgeStream, config: BiasClassConfig, oracle: HashOracle, alpha: int, beta: int
) -> np.ndarray:
    """Pseudosnapshot over edges whose head before-degree lies in window alpha and tail's in window beta."""
    out = np.zeros((config.ell, config.ell), dtype=np.int64)
    lv = oracle.grid.levels
    if lv[alpha] == lv[alpha + 1] or lv[beta] == lv[beta + 1]:
        return out
    for rec in edge_records(stream, oracle):
        if rec.head.level == alpha and rec.tail.level == beta:
            out[classify(rec.head.bps, config), classify(rec.tail.bps, config)] += 1
    return out


def bias_bound_count(stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int) -> int:
    """Window edges where the head's f_alpha hit count or the tail's f_beta count exceeds kappa - 1.

    These are exactly the edges the single-copy estimator can miss, so the count
    bounds its bias entry-wise.
    """
    lv = oracle.grid.levels
    if lv[alpha] == lv[alpha + 1] or lv[beta] == lv[beta + 1]:
        return 0
    count = 0
    kappa = oracle.kappa
    for rec in edge_records(stream, oracle):
        if rec.head.level == alpha and rec.tail.level == beta:
            if rec.head.hits + 1 > kappa or rec.tail.hits + 1 > kappa:
                count += 1
    return count


def window_edges(stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int) -> list[EdgeRecord]:
    return [r for r in edge_records(stream, oracle) if r.head.level == alpha and r.tail.level == beta]
