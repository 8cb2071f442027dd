"""Directed edge streams, degree bookkeeping, generators and a brute-force Max-DiCut."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

BRUTE_FORCE_CAP = 24


class StreamParseError(ValueError):
    """Base class for malformed edge-stream input."""


class MalformedLineError(StreamParseError):
    pass


class EndpointRangeError(StreamParseError):
    pass


class SelfLoopError(StreamParseError):
    pass


class EdgeCountError(StreamParseError):
    pass


@dataclass(frozen=True)
class EdgeStream:
    """An ordered multiset of directed edges u->v on vertices 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise EndpointRangeError(f"edge {u}->{v} has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    def incident_positions(self) -> list[list[int]]:
        """Per vertex, the stream indices of its incident edges in arrival order."""
        pos: list[list[int]] = [[] for _ in range(self.n)]
        for k, (u, v) in enumerate(self.edges):
            pos[u].append(k)
            pos[v].append(k)
        return pos


def parse_stream(text: str) -> EdgeStream:
    """Parse the ``n m`` header followed by ``m`` lines of ``u v``.

    Blank lines are ignored. Each kind of defect raises its own
    :class:`StreamParseError` subclass.
    """
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise MalformedLineError("missing 'n m' header")
    header = rows[0]
    if len(header) != 2:
        raise MalformedLineError(f"header must be 'n m', got {' '.join(header)!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MalformedLineError(f"non-integer header {' '.join(header)!r}") from exc
    if n < 0 or m < 0:
        raise MalformedLineError("negative header value")
    edges = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise MalformedLineError(f"line {lineno}: expected 'u v', got {' '.join(row)!r}")
        try:
            u, v = int(row[0]), int(row[1])
        except ValueError as exc:
            raise MalformedLineError(f"line {lineno}: non-integer endpoint") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise EndpointRangeError(f"line {lineno}: endpoint out of range for n={n}")
        if u == v:
            raise SelfLoopError(f"line {lineno}: self-loop at vertex {u}")
        edges.append((u, v))
    if len(edges) != m:
        raise EdgeCountError(f"header declares {m} edges, found {len(edges)}")
    return EdgeStream(n, tuple(edges))


def read_stream(path) -> EdgeStream:
    with open(path, encoding="utf-8") as fh:
        return parse_stream(fh.read())


@dataclass(frozen=True)
class DegreeProfile:
    dout: tuple[int, ...]
    din: tuple[int, ...]

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.dout, self.din))

    def degree(self, v: int) -> int:
        return self.dout[v] + self.din[v]


def degrees(stream: EdgeStream) -> DegreeProfile:
    dout = [0] * stream.n
    din = [0] * stream.n
    for u, v in stream.edges:
        dout[u] += 1
        din[v] += 1
    return DegreeProfile(tuple(dout), tuple(din))


def bias(profile: DegreeProfile, v: int) -> Fraction:
    """Exact bias (dout - din) / d of vertex ``v``; isolated vertices have none."""
    d = profile.degree(v)
    if d == 0:
        raise ValueError(f"vertex {v} is isolated and has no bias")
    return Fraction(profile.dout[v] - profile.din[v], d)


def gen_random(n: int, p: float, seed: int) -> EdgeStream:
    """Include each ordered pair u != v independently with probability p, then shuffle."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    rng.shuffle(edges)
    return EdgeStream(n, tuple(edges))


def gen_bipartite_forward(n_left: int, n_right: int, p: float, seed: int) -> EdgeStream:
    """Random edges from the first ``n_left`` vertices to the remaining ones only."""
    rng = random.Random(seed)
    n = n_left + n_right
    edges = [
        (u, v)
        for u in range(n_left)
        for v in range(n_left, n)
        if rng.random() < p
    ]
    rng.shuffle(edges)
    return EdgeStream(n, tuple(edges))


def _assignment_chunks(n: int, chunk: int = 1 << 18) -> Iterable[np.ndarray]:
    total = 1 << n
    for start in range(0, total, chunk):
        yield np.arange(start, min(total, start + chunk), dtype=np.int64)


def cut_value(stream: EdgeStream, x: Sequence[int]) -> int:
    """Number of edges u->v with x[u] = 0 and x[v] = 1."""
    return sum(1 for u, v in stream.edges if x[u] == 0 and x[v] == 1)


def max_dicut_bruteforce(stream: EdgeStream, cap: int = BRUTE_FORCE_CAP) -> int:
    """Exact Max-DiCut by enumerating all 2^n side assignments (bit v of the mask is x_v)."""
    if stream.n > cap:
        raise ValueError(f"brute force limited to n <= {cap}, got n={stream.n}")
    if stream.m == 0 or stream.n == 0:
        return 0
    pairs: dict[tuple[int, int], int] = {}
    for e in stream.edges:
        pairs[e] = pairs.get(e, 0) + 1
    best = 0
    for masks in _assignment_chunks(stream.n):
        total = np.zeros(masks.shape, dtype=np.int64)
        for (u, v), mult in pairs.items():
            total += mult * ((((masks >> u) & 1) == 0) & (((masks >> v) & 1) == 1))
        best = max(best, int(total.max()))
    return best
