"""Reference simulator over an explicit set of basis states, for cross-checking the interval-set one."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .graph import EdgeStream
from .hashing import TWO64, HashOracle, copy_draws
from .quantum import DEFAULT_CAPACITY, Outcome, RunResult, Status, TraceRecord, classical_stage
from .snapshot import BiasClassConfig

DENSE_CAP = 10 ** 6


class DenseSizeError(ValueError):
    pass


def dense_reference_run(stream: EdgeStream, oracle: HashOracle, config: BiasClassConfig, alpha: int, beta: int,
                        capacity: int = DEFAULT_CAPACITY, seed: int = 0, copy: int = 0) -> RunResult:
    """Same dynamics and draw discipline as :func:`single_copy_run`, with one tuple per basis state.

    States are (family, vertex, counter, copy); scratch states are the range t..M.
    Outcome weights come straight from the squared amplitude sums (x + y)^2 and (x - y)^2.
    """
    kappa = oracle.kappa
    M = capacity * kappa ** 3 * stream.m
    if M > DENSE_CAP:
        raise DenseSizeError(f"M = {M} exceeds the dense cap {DENSE_CAP}")
    lv = oracle.grid.levels
    da, da1, db, db1 = lv[alpha], lv[alpha + 1], lv[beta], lv[beta + 1]
    ncopy = 2 * kappa * kappa
    states: set[tuple[str, int, int, int]] = set()
    t = 1
    trace: list[TraceRecord] = []
    draws = copy_draws(seed, 1, 2 * stream.m, first_copy=copy)[0]

    def live() -> int:
        return (M - t + 1) + len(states)

    def done(status: Status, outcome: Optional[Outcome] = None) -> RunResult:
        est = np.zeros((config.ell, config.ell))
        if outcome is not None:
            est = classical_stage(outcome, stream, oracle, config, alpha, beta, M)
        return RunResult(status, outcome, est, trace, M)

    for k, (u, v) in enumerate(stream.edges):
        incs = [(f, w, 1) for w in (u, v) for f in "ABCD"]
        if oracle.f(alpha, k):
            incs += [("A", u, da1), ("B", u, da1)]
        if oracle.f(beta, k):
            incs += [("C", u, db1), ("D", u, db1)]
        for f, w, r in incs:
            if t + ncopy * r - 1 > M:
                trace.append(TraceRecord(k, "exhausted", (), 0, None))
                return done(Status.EXHAUSTED)
            moved = {s for s in states if s[0] == f and s[1] == w}
            states -= moved
            states |= {(f, w, x + r, c) for (_, _, x, c) in moved}
            states |= {(f, w, x, c) for x in range(1, r + 1) for c in range(1, ncopy + 1)}
            t += ncopy * r

        # measure: all weights over twice the live count at the start of the operation
        den = 2 * live()
        table, present = [], []
        for a in (1, 2, 3, 4):
            for i in range(1, kappa + 1):
                for j in range(1, kappa + 1):
                    rc = (i - 1) * kappa + j
                    sc = kappa * kappa + rc
                    left = ("A", u, da + (i - 1) * da1) if a in (1, 3) else ("B", u, i * da1)
                    right = ("C", v, db + (j - 1) * db1) if a in (1, 2) else ("D", v, j * db1)
                    lcopy = rc if a in (1, 2) else sc
                    rcopy = rc if a in (1, 3) else sc
                    x = left + (lcopy,)
                    y = right + (rcopy,)
                    px, py = int(x in states), int(y in states)
                    for b, w in ((0, (px + py) ** 2), (1, (px - py) ** 2)):
                        if w:
                            table.append(((a, i, j, b), w))
                    present += [s for s, p in ((x, px), (y, py)) if p]
        X = int(draws[2 * k])
        cum, hit = 0, None
        for proj, w in table:
            cum += w
            if X * den < cum * TWO64:
                hit = proj
                break
        trace.append(TraceRecord(k, "measure", tuple(table), den, hit))
        if hit is not None:
            return done(Status.SAMPLED, Outcome(k, u, v, *hit))
        states -= set(present)

        # cleanup
        def target(s) -> bool:
            f, w, x, _ = s
            if w not in (u, v):
                return False
            start, step = {"A": (da, da1), "B": (da1, da1), "C": (db, db1), "D": (db1, db1)}[f]
            return x >= start and (x - start) % step == 0

        hits = {s for s in states if target(s)}
        den = live()
        X = int(draws[2 * k + 1])
        zeroed = bool(hits) and X * den < len(hits) * TWO64
        trace.append(TraceRecord(k, "cleanup", ((None, len(hits)),) if hits else (), den, "zeroed" if zeroed else None))
        if zeroed:
            return done(Status.ZEROED)
        states -= hits
    return done(Status.RUNNING)
