"""Exact classical simulation of the quantum streaming stage and its classical post-processing.

The superposition is uniform over a set of basis states, so it is stored as
per-(family, vertex) interval sets shared by all 2*kappa^2 copies plus a scratch
cursor. Measurements are sampled from exact rational probabilities with one
64-bit draw per operation: each edge consumes draw 2k for ``measure`` and draw
2k + 1 for ``cleanup``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .graph import EdgeStream
from .hashing import TWO64, HashOracle, copy_draws
from .intervals import IntervalSet
from .pseudosnapshot import StreamIndex, pseudobias_value
from .snapshot import BiasClassConfig, classify

FAMILIES = ("A", "B", "C", "D")
DEFAULT_CAPACITY = 32


class Status(str, Enum):
    RUNNING = "running"
    SAMPLED = "sampled"
    ZEROED = "zeroed"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Outcome:
    k: int
    u: int
    v: int
    family: int
    i: int
    j: int
    b: int

    @property
    def projector(self) -> tuple[int, int, int, int]:
        return (self.family, self.i, self.j, self.b)


@dataclass(frozen=True)
class TraceRecord:
    """One measure or cleanup operation: nonzero outcome weights over ``den``, and what happened."""

    k: int
    op: str
    weights: tuple
    den: int
    result: object


def copy_index_r(i: int, j: int, kappa: int) -> int:
    return (i - 1) * kappa + j


def copy_index_s(i: int, j: int, kappa: int) -> int:
    return kappa * kappa + (i - 1) * kappa + j


@dataclass(frozen=True)
class PairParams:
    """Everything fixed for one (alpha, beta) degree-window pair."""

    kappa: int
    capacity: int
    m: int
    alpha: int
    beta: int
    d_a: int
    d_a1: int
    d_b: int
    d_b1: int

    @classmethod
    def build(cls, stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity constant must be at least 1")
        lv = oracle.grid.levels
        oracle.grid.check_level(alpha + 1)
        oracle.grid.check_level(beta + 1)
        return cls(oracle.kappa, int(capacity), stream.m, alpha, beta, lv[alpha], lv[alpha + 1], lv[beta], lv[beta + 1])

    @property
    def M(self) -> int:
        return self.capacity * self.kappa ** 3 * self.m

    @property
    def copies(self) -> int:
        return 2 * self.kappa ** 2

    def measured_values(self) -> dict[str, list[int]]:
        """Counter values probed by ``measure``, indexed by i (or j) - 1."""
        K = range(1, self.kappa + 1)
        return {
            "A": [self.d_a + (i - 1) * self.d_a1 for i in K],
            "B": [i * self.d_a1 for i in K],
            "C": [self.d_b + (j - 1) * self.d_b1 for j in K],
            "D": [j * self.d_b1 for j in K],
        }

    def cleanup_progressions(self) -> dict[str, tuple[int, int]]:
        """(start, step) of the counter values removed by ``cleanup``, per family."""
        return {
            "A": (self.d_a, self.d_a1),
            "B": (self.d_a1, self.d_a1),
            "C": (self.d_b, self.d_b1),
            "D": (self.d_b1, self.d_b1),
        }


# family a pairs (u-side family, v-side family)
_PAIRING = {1: ("A", "C"), 2: ("B", "C"), 3: ("A", "D"), 4: ("B", "D")}


def measure_table(present_u: dict[str, list[bool]], present_v: dict[str, list[bool]], kappa: int):
    """Nonzero outcome weights (over 2M') in the fixed order family, i, j, b."""
    table = []
    for a in (1, 2, 3, 4):
        fu, fv = _PAIRING[a]
        xs, ys = present_u[fu], present_v[fv]
        ys_on = [j for j in range(kappa) if ys[j]]
        for i in range(kappa):
            js = range(kappa) if xs[i] else ys_on
            for j in js:
                if xs[i] and ys[j]:
                    table.append(((a, i + 1, j + 1, 0), 4))
                else:
                    table.append(((a, i + 1, j + 1, 0), 1))
                    table.append(((a, i + 1, j + 1, 1), 1))
    return table


class CopySimulator:
    """One copy of the quantum stage for a fixed (alpha, beta) pair.

    With ``strict`` the termination probability p and the live count M' are
    tracked step by step in exact arithmetic and M' = (1 - p) M is asserted
    after every elementary projection.
    """

    def __init__(self, stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int,
                 capacity: int = DEFAULT_CAPACITY, trace: bool = False, strict: bool = False):
        self.stream = stream
        self.oracle = oracle
        self.params = PairParams.build(stream, oracle, alpha, beta, capacity)
        self.M = self.params.M
        self.mlive = self.M
        self.t = 1
        self._p = Fraction(0)
        self._vals = self.params.measured_values()
        self._progs = self.params.cleanup_progressions()
        self.sets: dict[tuple[str, int], IntervalSet] = {}
        self.status = Status.RUNNING
        self.outcome: Optional[Outcome] = None
        self.processed = 0
        self.strict = strict
        self.checks = 0
        self.trace: Optional[list[TraceRecord]] = [] if trace else None

    @property
    def p(self) -> Fraction:
        """Accumulated termination probability; M' = (1 - p) M on the surviving branch."""
        if self.strict:
            return self._p
        return 1 - Fraction(self.mlive, self.M) if self.M else Fraction(0)

    def family_set(self, fam: str, w: int) -> IntervalSet:
        s = self.sets.get((fam, w))
        if s is None:
            s = self.sets[(fam, w)] = IntervalSet()
        return s

    def stored_states(self) -> int:
        return self.params.copies * sum(len(s) for s in self.sets.values())

    def recount(self) -> int:
        """Live basis states by direct recount (between edges)."""
        return (self.M - self.t + 1) + self.stored_states()

    # elementary operations

    def inc(self, fam: str, w: int, r: int) -> bool:
        need = self.params.copies * r
        if self.t + need - 1 > self.M:
            self.status = Status.EXHAUSTED
            if self.trace is not None:
                self.trace.append(TraceRecord(self.processed, "exhausted", (), 0, None))
            return False
        self.family_set(fam, w).shift_insert(r)
        self.t += need
        return True

    def _account(self, c: int) -> None:
        """Survive one elementary projection that held c live states."""
        if c == 0:
            return
        if self.strict:
            self._p = self._p + (1 - self._p) * Fraction(c, self.mlive)
            self.mlive -= c
            if Fraction(self.mlive) != (1 - self._p) * self.M:
                raise AssertionError(f"live count {self.mlive} != (1 - {self._p}) * {self.M}")
            self.checks += 1
        else:
            self.mlive -= c

    def _presence(self, u: int, v: int):
        vals = self._vals
        pu = {f: [x in self.family_set(f, u) for x in vals[f]] for f in ("A", "B")}
        pv = {f: [x in self.family_set(f, v) for x in vals[f]] for f in ("C", "D")}
        return vals, pu, pv

    def measure(self, k: int, u: int, v: int, draw: Optional[int]) -> Optional[Outcome]:
        kappa = self.params.kappa
        vals, pu, pv = self._presence(u, v)
        need_table = draw is not None or self.trace is not None
        table = measure_table(pu, pv, kappa) if need_table else []
        den = 2 * self.mlive
        result = None
        if table and draw is not None:
            cum = 0
            for proj, w in table:
                cum += w
                if draw * den < cum * TWO64:
                    result = Outcome(k, u, v, *proj)
                    break
        if self.trace is not None:
            self.trace.append(TraceRecord(k, "measure", tuple(table), den, result and result.projector))
        if result is not None:
            self.status = Status.SAMPLED
            self.outcome = result
            return result
        # survive: account each elementary projection in order, then drop measured states
        if self.strict:
            for a in (1, 2, 3, 4):
                fu, fv = _PAIRING[a]
                for i in range(kappa):
                    for j in range(kappa):
                        self._account(int(pu[fu][i]) + int(pv[fv][j]))
        else:
            self._account(2 * kappa * (sum(map(sum, pu.values())) + sum(map(sum, pv.values()))))
        self._removed = {}
        for f, flags in list(pu.items()) + list(pv.items()):
            for idx, on in enumerate(flags):
                if on:
                    self._removed[(f, vals[f][idx])] = 2 * kappa
        return None

    def cleanup_targets(self, u: int, v: int) -> list[tuple[str, int, int, int]]:
        """(family, vertex, value, present copies) for every cleanup target present in some copy."""
        removed = getattr(self, "_removed", {})
        out = []
        copies = self.params.copies
        for w in (u, v):
            for f, (start, step) in self._progs.items():
                for x in self.family_set(f, w).progression(start, step):
                    gone = 0
                    if (w == u and f in ("A", "B")) or (w == v and f in ("C", "D")):
                        gone = removed.get((f, x), 0)
                    out.append((f, w, x, copies - gone))
        return out

    def cleanup(self, k: int, u: int, v: int, draw: Optional[int]) -> bool:
        targets = self.cleanup_targets(u, v)
        c = sum(t[3] for t in targets)
        zeroed = draw is not None and c > 0 and draw * self.mlive < c * TWO64
        if self.trace is not None:
            self.trace.append(TraceRecord(k, "cleanup", ((None, c),) if c else (), self.mlive, "zeroed" if zeroed else None))
        if zeroed:
            self.status = Status.ZEROED
            return True
        if self.strict:
            for *_, cnt in targets:
                for _ in range(cnt):
                    self._account(1)
        else:
            self._account(c)
        for f, w, x, _ in targets:
            self.family_set(f, w).discard(x)
        self._removed = {}
        return False

    def process_edge(self, k: int, draw_measure: Optional[int], draw_cleanup: Optional[int]) -> Status:
        if self.status is not Status.RUNNING:
            return self.status
        u, v = self.stream.edges[k]
        pp = self.params
        for w in (u, v):
            for f in FAMILIES:
                if not self.inc(f, w, 1):
                    return self.status
        if self.oracle.f(pp.alpha, k):
            if not (self.inc("A", u, pp.d_a1) and self.inc("B", u, pp.d_a1)):
                return self.status
        if self.oracle.f(pp.beta, k):
            if not (self.inc("C", u, pp.d_b1) and self.inc("D", u, pp.d_b1)):
                return self.status
        if self.measure(k, u, v, draw_measure) is not None:
            return self.status
        self.cleanup(k, u, v, draw_cleanup)
        self.processed = k + 1
        return self.status

    def run(self, draws: Optional[np.ndarray]) -> Status:
        for k in range(self.stream.m):
            dm = None if draws is None else int(draws[2 * k])
            dc = None if draws is None else int(draws[2 * k + 1])
            if self.process_edge(k, dm, dc) is not Status.RUNNING:
                break
        return self.status


def classical_stage(outcome: Outcome, stream: EdgeStream | StreamIndex, oracle: HashOracle,
                    config: BiasClassConfig, alpha: int, beta: int, M: int) -> np.ndarray:
    """Estimate matrix for a sampled outcome: a single entry of magnitude M/2."""
    idx = stream if isinstance(stream, StreamIndex) else StreamIndex(stream)
    lv = oracle.grid.levels
    k, u, v = outcome.k, outcome.u, outcome.v
    da_u, douta_u = idx.after_counts(k, u)
    da_v, douta_v = idx.after_counts(k, v)
    bu = pseudobias_value(lv[alpha], (outcome.i - 1) / oracle.f_prob(alpha), da_u, douta_u, oracle.g(u))
    bv = pseudobias_value(lv[beta], (outcome.j - 1) / oracle.f_prob(beta), da_v, douta_v, oracle.g(v))
    out = np.zeros((config.ell, config.ell))
    out[classify(bu, config), classify(bv, config)] = outcome_sign(outcome) * M / 2
    return out


def outcome_sign(outcome: Outcome) -> int:
    return sign_of(outcome.family, outcome.b)


def sign_of(family: int, b: int) -> int:
    """Families 1 and 4 report (-1)^b, families 2 and 3 report (-1)^(1-b)."""
    return (-1) ** b if family in (1, 4) else (-1) ** (1 - b)


class CellResolver:
    """Memoised classical stage: the head's class depends only on (edge, i), the tail's on (edge, j)."""

    def __init__(self, stream: EdgeStream | StreamIndex, oracle: HashOracle, config: BiasClassConfig,
                 alpha: int, beta: int):
        self.idx = stream if isinstance(stream, StreamIndex) else StreamIndex(stream)
        self.oracle, self.config = oracle, config
        self.alpha, self.beta = alpha, beta
        self._head: dict[tuple[int, int], int] = {}
        self._tail: dict[tuple[int, int], int] = {}

    def _cls(self, k: int, w: int, level: int, count: int) -> int:
        da, douta = self.idx.after_counts(k, w)
        dout = (count - 1) / self.oracle.f_prob(level)
        b = pseudobias_value(self.oracle.grid.levels[level], dout, da, douta, self.oracle.g(w))
        return classify(b, self.config)

    def head_class(self, k: int, u: int, i: int) -> int:
        r = self._head.get((k, i))
        if r is None:
            r = self._head[(k, i)] = self._cls(k, u, self.alpha, i)
        return r

    def tail_class(self, k: int, v: int, j: int) -> int:
        c = self._tail.get((k, j))
        if c is None:
            c = self._tail[(k, j)] = self._cls(k, v, self.beta, j)
        return c

    def cell(self, o: Outcome) -> tuple[int, int, int]:
        """(row, column, sign) of the entry the classical stage writes for this outcome."""
        return self.head_class(o.k, o.u, o.i), self.tail_class(o.k, o.v, o.j), outcome_sign(o)


@dataclass
class RunResult:
    status: Status
    outcome: Optional[Outcome]
    estimate: np.ndarray
    trace: Optional[list[TraceRecord]] = None
    M: int = 0


def single_copy_run(stream: EdgeStream, oracle: HashOracle, config: BiasClassConfig, alpha: int, beta: int,
                    capacity: int = DEFAULT_CAPACITY, seed: int = 0, copy: int = 0,
                    trace: bool = False, strict: bool = False) -> RunResult:
    """Run one copy with the draws of copy ``copy`` under ``seed``."""
    sim = CopySimulator(stream, oracle, alpha, beta, capacity, trace=trace, strict=strict)
    draws = copy_draws(seed, 1, 2 * stream.m, first_copy=copy)[0]
    sim.run(draws)
    est = np.zeros((config.ell, config.ell))
    if sim.status is Status.SAMPLED:
        est = classical_stage(sim.outcome, stream, oracle, config, alpha, beta, sim.M)
    return RunResult(sim.status, sim.outcome, est, sim.trace, sim.M)


# exact outcome law along the survival branch

@dataclass
class EdgeStep:
    k: int
    table: list
    measure_den: int
    cleanup_count: int
    cleanup_den: int


@dataclass
class Trajectory:
    """The unique all-survive branch of one copy: every copy follows it until it terminates."""

    M: int
    steps: list[EdgeStep] = field(default_factory=list)
    exhausted_at: Optional[int] = None


def trajectory(stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int,
               capacity: int = DEFAULT_CAPACITY, strict: bool = False) -> Trajectory:
    sim = CopySimulator(stream, oracle, alpha, beta, capacity, trace=True, strict=strict)
    traj = Trajectory(sim.M)
    seen = 0
    for k in range(stream.m):
        sim.process_edge(k, None, None)
        recs = sim.trace[seen:]
        seen = len(sim.trace)
        if sim.status is Status.EXHAUSTED:
            traj.exhausted_at = k
            break
        meas, clean = recs
        traj.steps.append(EdgeStep(k, list(meas.weights), meas.den,
                                   clean.weights[0][1] if clean.weights else 0, clean.den))
    return traj


@dataclass
class OutcomeLaw:
    """Exact distribution of a copy's fate.

    Sampled outcome o, keyed (edge, family, i, j, b), has probability weights[o] / (2M);
    the rest of the mass is split between zeroed, exhausted and never sampled.
    """

    M: int
    keys: list[tuple[int, int, int, int, int]]
    weights: list[int]
    zeroed: Fraction
    exhausted: Fraction
    never: Fraction

    @property
    def unit(self) -> Fraction:
        return Fraction(1, 2 * self.M) if self.M else Fraction(0)

    def sampled(self) -> Fraction:
        return sum(self.weights) * self.unit

    def total(self) -> Fraction:
        return self.sampled() + self.zeroed + self.exhausted + self.never

    def items(self, stream: EdgeStream) -> Iterator[tuple[Outcome, Fraction]]:
        unit = self.unit
        for (k, a, i, j, b), w in zip(self.keys, self.weights):
            u, v = stream.edges[k]
            yield Outcome(k, u, v, a, i, j, b), w * unit


def outcome_law(stream: EdgeStream, traj: Trajectory) -> OutcomeLaw:
    """Probabilities by multiplying survival factors along the branch.

    Each sampled outcome's probability reach * w / (2M') must also equal
    w / (2M) by telescoping; that identity is asserted at every edge.
    """
    reach = Fraction(1)
    keys, weights = [], []
    zeroed = Fraction(0)
    unit = Fraction(1, 2 * traj.M) if traj.M else Fraction(0)
    for step in traj.steps:
        if step.table:
            if reach / step.measure_den != unit:
                raise AssertionError(f"edge {step.k}: outcome probabilities do not telescope to w / 2M")
            total_w = 0
            for proj, w in step.table:
                keys.append((step.k, *proj))
                weights.append(w)
                total_w += w
            reach *= 1 - Fraction(total_w, step.measure_den)
        if step.cleanup_count:
            zeroed += reach * Fraction(step.cleanup_count, step.cleanup_den)
            reach *= 1 - Fraction(step.cleanup_count, step.cleanup_den)
    exhausted = reach if traj.exhausted_at is not None else Fraction(0)
    never = Fraction(0) if traj.exhausted_at is not None else reach
    return OutcomeLaw(traj.M, keys, weights, zeroed, exhausted, never)


class PairSampler:
    """Samples many copies of one (alpha, beta) pair from its survival branch.

    ``copies`` mode replays the exact per-copy draws, so each copy agrees with
    :func:`single_copy_run`. ``aggregate`` draws counts per estimate cell from the
    exact multinomial law, which is cheap for any number of copies.
    """

    def __init__(self, stream: EdgeStream, oracle: HashOracle, config: BiasClassConfig, alpha: int, beta: int,
                 capacity: int = DEFAULT_CAPACITY):
        self.stream = stream
        self.config = config
        self.traj = trajectory(stream, oracle, alpha, beta, capacity)
        self.law = outcome_law(stream, self.traj)
        self.M = self.traj.M
        res = CellResolver(stream, oracle, config, alpha, beta)
        edges = stream.edges
        cells = []
        grouped: dict[tuple[int, int, int], int] = {}
        for (k, a, i, j, b), w in zip(self.law.keys, self.law.weights):
            u, v = edges[k]
            cell = (res.head_class(k, u, i), res.tail_class(k, v, j), sign_of(a, b))
            cells.append(cell)
            grouped[cell] = grouped.get(cell, 0) + w
        self.cells = cells
        # (row, column, sign) -> summed weight, in first-seen order
        self.grouped = grouped

    def _thresholds(self):
        meas, clean = [], []
        for step in self.traj.steps:
            cum, th = 0, []
            for _, w in step.table:
                cum += w
                th.append(-(-cum * TWO64 // step.measure_den))
            meas.append(th)
            clean.append(-(-step.cleanup_count * TWO64 // step.cleanup_den) if step.cleanup_count else 0)
        return meas, clean

    def copy_codes(self, seed: int, copies: int, first_copy: int = 0, block: int = 1 << 16) -> np.ndarray:
        """Per-copy fate: outcome index >= 0, or -1 never sampled, -2 zeroed, -3 exhausted."""
        meas, clean = self._thresholds()
        m = self.stream.m
        codes = np.empty(copies, dtype=np.int64)
        for start in range(0, copies, block):
            cnt = min(block, copies - start)
            draws = copy_draws(seed, cnt, 2 * m, first_copy=first_copy + start)
            code = np.full(cnt, -1, dtype=np.int64)
            alive = np.ones(cnt, dtype=bool)
            base = 0
            for s, step in enumerate(self.traj.steps):
                k = step.k
                th = meas[s]
                if th:
                    x = draws[:, 2 * k]
                    hit = alive & (x <= np.uint64(min(th[-1], TWO64) - 1))
                    if hit.any():
                        arr = np.array([min(t, TWO64) - 1 for t in th], dtype=np.uint64)
                        code[hit] = base + np.searchsorted(arr, x[hit], side="left")
                        alive &= ~hit
                base += len(th)
                if clean[s]:
                    z = alive & (draws[:, 2 * k + 1] <= np.uint64(min(clean[s], TWO64) - 1))
                    code[z] = -2
                    alive &= ~z
            if self.traj.exhausted_at is not None:
                code[alive] = -3
            codes[start:start + cnt] = code
        return codes

    def estimates_from_counts(self, counts: np.ndarray) -> np.ndarray:
        """Sum of copy estimates given per-outcome counts."""
        ell = self.config.ell
        out = np.zeros((ell, ell))
        for idx in np.flatnonzero(counts):
            r, c, s = self.cells[idx]
            out[r, c] += s * int(counts[idx]) * (self.M / 2)
        return out

    def sample_copies(self, seed: int, copies: int):
        codes = self.copy_codes(seed, copies)
        counts = np.bincount(codes[codes >= 0], minlength=len(self.cells))
        return self.estimates_from_counts(counts) / copies, codes

    def copy_matrices(self, codes: np.ndarray) -> Iterator[np.ndarray]:
        ell = self.config.ell
        for code in codes:
            out = np.zeros((ell, ell))
            if code >= 0:
                r, c, s = self.cells[code]
                out[r, c] = s * self.M / 2
            yield out

    def sample_aggregate(self, rng: np.random.Generator, copies: int):
        """Mean of ``copies`` copy estimates; returns it with the counts per cell group plus the remainder."""
        ell = self.config.ell
        groups = list(self.grouped.items())
        scale = 2 * self.M
        probs = [w / scale for _, w in groups]
        rest = max(0.0, 1.0 - sum(probs))
        counts = rng.multinomial(copies, probs + [rest])
        out = np.zeros((ell, ell))
        for ((r, c, s), _), cnt in zip(groups, counts):
            out[r, c] += s * int(cnt) * (self.M / 2)
        return out / copies, counts

    def entry_moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Exact per-entry mean and variance of one copy's estimate."""
        ell = self.config.ell
        mean = np.full((ell, ell), Fraction(0), dtype=object)
        second = np.full((ell, ell), Fraction(0), dtype=object)
        for (r, c, s), w in self.grouped.items():
            # probability w / 2M times value s M / 2, and (M / 2)^2 for the second moment
            mean[r, c] += Fraction(s * w, 4)
            second[r, c] += Fraction(w * self.M, 8)
        return mean, second - mean * mean


def expected_estimate(stream: EdgeStream, oracle: HashOracle, config: BiasClassConfig, alpha: int, beta: int,
                      capacity: int = DEFAULT_CAPACITY) -> np.ndarray:
    """Exact expectation of the single-copy estimate (object array of Fractions)."""
    return PairSampler(stream, oracle, config, alpha, beta, capacity).entry_moments()[0]


def scratch_demand(stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int) -> int:
    """Scratch states consumed by a copy that survives the whole stream."""
    lv = oracle.grid.levels
    per_copy = 0
    for k in range(stream.m):
        per_copy += 8
        if oracle.f(alpha, k):
            per_copy += 2 * lv[alpha + 1]
        if oracle.f(beta, k):
            per_copy += 2 * lv[beta + 1]
    return 2 * oracle.kappa ** 2 * per_copy


def min_capacity(stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int) -> int:
    """Smallest capacity constant with which no copy can run out of scratch."""
    if stream.m == 0:
        return 1
    unit = oracle.kappa ** 3 * stream.m
    return max(1, -(-scratch_demand(stream, oracle, alpha, beta) // unit))


def closed_form_intervals(r: int, hits: list[int], d_lo: int, d_hi: int):
    """Expected lower/upper family sets of a vertex after r incident edges, as interval tuples.

    ``hits`` are the 1-based positions (among the vertex's incident edges) of the
    sampled out-edges; rho_i = r - p_i + 1 counts back from the i-th most recent hit.
    Every piece starts at least two past the previous one's end, so dropping empty
    pieces leaves the canonical form.
    """
    top_lo, top_hi = min(r + 1, d_lo), min(r + 1, d_hi)
    R = len(hits)
    if R == 0:
        lower = [(1, top_lo - 1)]
        upper = [(1, top_hi - 1)]
    else:
        lower = [(1, d_lo - 1)]
        upper = [(1, d_hi - 1)]
        for i in range(1, R):
            rho = r - hits[R - i] + 1
            lower.append((d_lo + (i - 1) * d_hi + rho, d_lo + i * d_hi - 1))
            upper.append((i * d_hi + rho, (i + 1) * d_hi - 1))
        rho = r - hits[0] + 1
        lower.append((d_lo + (R - 1) * d_hi + rho, R * d_hi + top_lo - 1))
        upper.append((R * d_hi + rho, R * d_hi + top_hi - 1))
    return (tuple(iv for iv in lower if iv[0] <= iv[1]),
            tuple(iv for iv in upper if iv[0] <= iv[1]))


def closed_form_sets(r: int, hits: list[int], d_lo: int, d_hi: int) -> tuple[IntervalSet, IntervalSet]:
    lower, upper = closed_form_intervals(r, hits, d_lo, d_hi)
    return IntervalSet(lower), IntervalSet(upper)


@dataclass
class InvariantReport:
    ok: bool
    diffs: list = field(default_factory=list)


class Replay:
    """Classical record of what the closed form needs: incident counts and sampled-hit positions."""

    def __init__(self, stream: EdgeStream, oracle: HashOracle, alpha: int, beta: int):
        self.stream, self.oracle = stream, oracle
        self.alpha, self.beta = alpha, beta
        self.processed = 0
        self.r: dict[int, int] = {}
        self.hits_a: dict[int, list[int]] = {}
        self.hits_b: dict[int, list[int]] = {}
        self._want: dict[int, dict[str, tuple]] = {}
        lv = oracle.grid.levels
        self._windows = (lv[alpha], lv[alpha + 1], lv[beta], lv[beta + 1])

    def advance(self, upto: int) -> None:
        for k in range(self.processed, upto):
            u, v = self.stream.edges[k]
            self._want.pop(u, None)
            self._want.pop(v, None)
            self.r[u] = self.r.get(u, 0) + 1
            self.r[v] = self.r.get(v, 0) + 1
            if self.oracle.f(self.alpha, k):
                self.hits_a.setdefault(u, []).append(self.r[u])
            if self.oracle.f(self.beta, k):
                self.hits_b.setdefault(u, []).append(self.r[u])
        self.processed = max(self.processed, upto)

    def expected(self, w: int) -> dict[str, tuple]:
        """Closed-form interval tuples per family for vertex w; cached until w is touched again."""
        want = self._want.get(w)
        if want is None:
            d_a, d_a1, d_b, d_b1 = self._windows
            rw = self.r.get(w, 0)
            want = dict(zip("AB", closed_form_intervals(rw, self.hits_a.get(w, []), d_a, d_a1)))
            want.update(zip("CD", closed_form_intervals(rw, self.hits_b.get(w, []), d_b, d_b1)))
            self._want[w] = want
        return want


def check_state_invariant(sim: CopySimulator, replay: Optional[Replay] = None) -> InvariantReport:
    """Compare the live sets of a running copy with the closed form replayed from the stream prefix.

    Also checks the live count against a direct recount. Pass a :class:`Replay`
    to reuse work across successive checks of one copy.
    """
    pp = sim.params
    if replay is None or replay.processed > sim.processed:
        replay = Replay(sim.stream, sim.oracle, pp.alpha, pp.beta)
    replay.advance(sim.processed)
    diffs = []
    empty = ()
    for w in set(replay.r) | {w for _, w in sim.sets}:
        want = replay.expected(w)
        for f in FAMILIES:
            have = sim.sets.get((f, w))
            have = have.intervals if have is not None else empty
            if have != want[f]:
                diffs.append((f, w, IntervalSet(want[f]), IntervalSet(have)))
    if sim.mlive != sim.recount():
        diffs.append(("live", None, sim.recount(), sim.mlive))
    return InvariantReport(not diffs, diffs)
