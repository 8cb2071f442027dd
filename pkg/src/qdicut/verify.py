"""Verification suites: each checks one property of the simulator against an independent oracle.

Every suite returns a :class:`SuiteResult`; sizes are parameters so the same code
backs the quick ``verify`` command and the full-size acceptance tests.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from . import comm
from .dense import dense_reference_run
from .estimator import EstimatorParams, full_estimate, qubit_accounting
from .graph import EdgeStream, max_dicut_bruteforce, parse_stream
from .hashing import HashOracle, copy_draws, derive_seed
from .pseudosnapshot import DegreeGrid, bias_bound_count, pseudosnapshot_restricted, window_edges
from .quantum import (CopySimulator, PairSampler, Replay, Status, check_state_invariant, min_capacity,
                      single_copy_run)
from .snapshot import BiasClassConfig, load_config, oblivious_value, snapshot

TARGET_RATIO = 0.4844


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        body = ", ".join(f"{k}={v}" for k, v in self.details.items() if not isinstance(v, (list, dict)))
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {body}"


def bundled_corpus() -> list[tuple[str, EdgeStream]]:
    root = resources.files("qdicut.corpus")
    out = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".txt"):
            out.append((entry.name, parse_stream(entry.read_text(encoding="utf-8"))))
    return out


def random_small_streams(count: int, n_max: int, m_max: int, seed: int, n_min: int = 2) -> list[EdgeStream]:
    """Random streams with n in [n_min, n_max] and at most m_max edges (some repeated)."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(n_min, n_max)
        m = rng.randint(1, m_max)
        edges = []
        while len(edges) < m:
            u, v = rng.randrange(n), rng.randrange(n)
            if u != v:
                edges.append((u, v))
        out.append(EdgeStream(n, tuple(edges)))
    return out


def _oracle(stream: EdgeStream, eps, kappa: int, seed: int) -> HashOracle:
    return HashOracle(seed, kappa, DegreeGrid(max(stream.n, 1), eps, max_degree=max(1, stream.m)))


def suite_state_invariant(streams: Sequence[EdgeStream], settings: Iterable[tuple], seed: int = 0) -> SuiteResult:
    """Live sets equal the closed form after every edge, for every window pair."""
    t0 = time.perf_counter()
    checks = failures = 0
    first = None
    settings = list(settings)
    for s_idx, stream in enumerate(streams):
        eps, kappa = settings[s_idx % len(settings)]
        oracle = _oracle(stream, eps, kappa, derive_seed(seed, "invariant", s_idx))
        for a, b in oracle.grid.pairs():
            sim = CopySimulator(stream, oracle, a, b, capacity=10 ** 9)
            replay = Replay(stream, oracle, a, b)
            for k in range(stream.m):
                sim.process_edge(k, None, None)
                rep = check_state_invariant(sim, replay)
                checks += 1
                if not rep.ok:
                    failures += 1
                    first = first or (s_idx, a, b, k, repr(rep.diffs[0]))
    details = {"streams": len(streams), "checks": checks, "failures": failures,
               "seconds": round(time.perf_counter() - t0, 2)}
    if first:
        details["first_failure"] = str(first)
    return SuiteResult("state invariant", failures == 0 and checks > 0, details)


def suite_accounting(streams: Sequence[EdgeStream], settings: Iterable[tuple], copies: int = 5,
                     seed: int = 0) -> SuiteResult:
    """M' = (1 - p) M after every elementary projection, in exact arithmetic, along real traces."""
    checks = traces = 0
    errors = []
    settings = list(settings)
    for s_idx, stream in enumerate(streams):
        eps, kappa = settings[s_idx % len(settings)]
        oracle = _oracle(stream, eps, kappa, derive_seed(seed, "accounting", s_idx))
        for a, b in oracle.grid.pairs():
            cap = min_capacity(stream, oracle, a, b)
            for c in range(copies):
                sim = CopySimulator(stream, oracle, a, b, cap, strict=True)
                try:
                    sim.run(copy_draws(derive_seed(seed, "acc-draws", s_idx), 1, 2 * stream.m, first_copy=c)[0])
                    if sim.status is Status.RUNNING and Fraction(sim.mlive) != (1 - sim.p) * sim.M:
                        raise AssertionError("final live count mismatch")
                except AssertionError as exc:
                    errors.append(f"stream {s_idx} pair {(a, b)} copy {c}: {exc}")
                checks += sim.checks
                traces += 1
    details = {"traces": traces, "exact_checks": checks, "failures": len(errors)}
    if errors:
        details["first_failure"] = errors[0]
    return SuiteResult("early-termination accounting", not errors and checks > 0, details)


def suite_dense(instances: int, copies: int = 3, seed: int = 0) -> SuiteResult:
    """Interval-set and explicit-state simulators produce identical traces under shared draws."""
    rng = random.Random(seed)
    compared = mismatches = 0
    statuses: dict[str, int] = {}
    for inst in range(instances):
        stream = random_small_streams(1, 5, 8, derive_seed(seed, "dense-stream", inst))[0]
        eps, kappa = rng.choice([(1, 2), (0.5, 2), (1, 3)])
        oracle = _oracle(stream, eps, kappa, derive_seed(seed, "dense", inst))
        a, b = rng.choice(oracle.grid.pairs())
        base = min_capacity(stream, oracle, a, b)
        for c in range(copies):
            cap = max(1, base + rng.choice((-1, 0, 0, 1)))
            if cap * kappa ** 3 * stream.m > 10 ** 6:
                continue
            r1 = single_copy_run(stream, oracle, load_config("test2"), a, b, cap, seed=inst, copy=c, trace=True)
            r2 = dense_reference_run(stream, oracle, load_config("test2"), a, b, cap, seed=inst, copy=c)
            compared += 1
            statuses[r1.status.value] = statuses.get(r1.status.value, 0) + 1
            if r1.trace != r2.trace or r1.status != r2.status or not np.array_equal(r1.estimate, r2.estimate):
                mismatches += 1
    return SuiteResult("dense-reference equivalence", mismatches == 0 and compared > 0,
                       {"instances": instances, "runs": compared, "mismatches": mismatches, **statuses})


def _mc_compare(mean: np.ndarray, se: np.ndarray, target: np.ndarray, slack: float, z: float = 5.0):
    """Largest excess of |mean - target| over slack + z * se (<= 0 means within tolerance)."""
    return float(np.max(np.abs(mean - target) - slack - z * se))


def _copy_stats(sampler: PairSampler, seed: int, copies: int):
    codes = sampler.copy_codes(seed, copies)
    ell = sampler.config.ell
    total = np.zeros((ell, ell))
    sq = np.zeros((ell, ell))
    counts = np.bincount(codes[codes >= 0], minlength=len(sampler.cells))
    half = sampler.M / 2
    for idx in np.flatnonzero(counts):
        r, c, s = sampler.cells[idx]
        total[r, c] += s * counts[idx] * half
        sq[r, c] += counts[idx] * half * half
    mean = total / copies
    var = sq / copies - mean ** 2
    se = np.sqrt(np.maximum(var, 0) * copies / max(copies - 1, 1) / copies)
    return mean, se, codes


def suite_unbiased(graphs: Sequence[EdgeStream], hash_draws: int, copies: int, config: BiasClassConfig,
                   eps=1, kappa: int = 2, capacity: int = 32, seed: int = 0) -> SuiteResult:
    """Per-pair Monte-Carlo mean vs restricted pseudosnapshot, within the bias bound plus 5 standard errors."""
    t0 = time.perf_counter()
    worst = -math.inf
    comparisons = sampled = 0
    bias_pairs = 0
    for g_idx, stream in enumerate(graphs):
        for h in range(hash_draws):
            oracle = _oracle(stream, eps, kappa, derive_seed(seed, "unbiased", g_idx, h))
            for a, b in oracle.grid.pairs():
                target = pseudosnapshot_restricted(stream, config, oracle, a, b)
                bound = bias_bound_count(stream, oracle, a, b)
                bias_pairs += bound > 0
                sampler = PairSampler(stream, oracle, config, a, b, capacity)
                mean, se, codes = _copy_stats(sampler, derive_seed(seed, "unbiased-copies", g_idx, h, a, b), copies)
                sampled += int((codes >= 0).sum())
                worst = max(worst, _mc_compare(mean, se, target, bound))
                comparisons += target.size
    return SuiteResult("single-copy unbiasedness", worst <= 0,
                       {"graphs": len(graphs), "hash_draws": hash_draws, "copies": copies,
                        "entry_comparisons": comparisons, "sampled_copies": sampled,
                        "pairs_with_bias_bound": bias_pairs, "worst_excess": round(worst, 4),
                        "seconds": round(time.perf_counter() - t0, 2)})


def off_class_streams() -> list[EdgeStream]:
    """Streams in which every tail has before-degree 1, so any tail window above 1 holds no edge."""
    return [
        EdgeStream(9, tuple((0, v) for v in range(1, 9))),
        EdgeStream(7, tuple((v % 2, v) for v in range(2, 7))),
        EdgeStream(6, ((0, 1), (0, 2), (1, 3), (0, 4), (2, 5))),
    ]


def suite_off_class(copies: int, config: BiasClassConfig, kappa: int = 2, seed: int = 0) -> SuiteResult:
    """Pairs whose windows contain no edge: the estimate must average to zero although outcomes occur."""
    worst = -math.inf
    pairs = active = 0
    for s_idx, stream in enumerate(off_class_streams()):
        oracle = _oracle(stream, 1, kappa, derive_seed(seed, "off", s_idx))
        for a, b in oracle.grid.pairs():
            if window_edges(stream, oracle, a, b):
                continue
            sampler = PairSampler(stream, oracle, config, a, b)
            if not sampler.law.weights:
                continue
            pairs += 1
            mean, se, codes = _copy_stats(sampler, derive_seed(seed, "off-copies", s_idx, a, b), copies)
            active += int((codes >= 0).sum())
            exact = sampler.entry_moments()[0]
            if any(x != 0 for x in exact.ravel()):
                worst = math.inf
            worst = max(worst, _mc_compare(mean, se, np.zeros_like(mean), 0.0))
    return SuiteResult("off-class nullity", pairs > 0 and active > 0 and worst <= 0,
                       {"pairs": pairs, "sampled_copies": active, "worst_excess": round(worst, 4)})


def suite_variance(stream: EdgeStream, config: BiasClassConfig, kappas=(2, 4, 8), copies: int = 20000,
                   eps=1, seed: int = 0) -> SuiteResult:
    """Single-copy entry variance never exceeds (M/2)^2; report it against kappa^6 m^2."""
    ok = True
    rows = []
    for kappa in kappas:
        oracle = _oracle(stream, eps, kappa, derive_seed(seed, "variance", kappa))
        worst_exact = Fraction(0)
        worst_emp = 0.0
        M = 0
        for a, b in oracle.grid.pairs():
            sampler = PairSampler(stream, oracle, config, a, b)
            M = sampler.M
            _, var = sampler.entry_moments()
            worst_exact = max(worst_exact, max(var.ravel()))
            _, se, _ = _copy_stats(sampler, derive_seed(seed, "variance-copies", kappa, a, b), copies)
            worst_emp = max(worst_emp, float(np.max(se ** 2 * copies)))
        cap = Fraction(M, 2) ** 2
        ok &= worst_exact <= cap and worst_emp <= float(cap)
        scale = kappa ** 6 * stream.m ** 2
        rows.append({"kappa": kappa, "M": M, "max_exact_var": float(worst_exact), "max_empirical_var": worst_emp,
                     "cap": float(cap), "var_over_k6m2": float(worst_exact) / scale})
    return SuiteResult("variance bound", ok, {"m": stream.m, "rows": rows})


def suite_oblivious(graphs: Sequence[EdgeStream], configs: Sequence[BiasClassConfig],
                    production: BiasClassConfig | None = None, ratio: float = TARGET_RATIO) -> SuiteResult:
    """Oblivious value of the exact snapshot lies in [ratio * OPT, OPT] (lower end only for production)."""
    over = under = 0
    worst = math.inf
    for stream in graphs:
        opt = max_dicut_bruteforce(stream)
        for cfg in configs:
            if oblivious_value(snapshot(stream, cfg), cfg) > opt:
                over += 1
        if production is not None and opt > 0:
            val = oblivious_value(snapshot(stream, production), production)
            worst = min(worst, float(val / opt))
            if val < Fraction(ratio).limit_denominator(10 ** 6) * opt:
                under += 1
    details = {"graphs": len(graphs), "configs": len(configs), "above_opt": over}
    if production is not None:
        details.update(below_ratio=under, worst_ratio=round(worst, 4), production_alpha=production.alpha)
    return SuiteResult("oblivious soundness", over == 0 and under == 0, details)


def suite_end_to_end(graphs: Sequence[EdgeStream], config: BiasClassConfig, params: EstimatorParams,
                     ratio: float = TARGET_RATIO, slack: float = 0.05, need: float = 0.9) -> SuiteResult:
    """Median estimate lands in [ratio OPT - slack m, OPT + slack m] for enough master seeds."""
    t0 = time.perf_counter()
    hits = 0
    misses = []
    for g_idx, stream in enumerate(graphs):
        opt = max_dicut_bruteforce(stream)
        p = EstimatorParams(**{**params.__dict__, "seed": derive_seed(params.seed, "e2e", g_idx)})
        est = full_estimate(stream, config, p, opt=opt).estimate
        lo, hi = ratio * opt - slack * stream.m, opt + slack * stream.m
        if lo <= est <= hi:
            hits += 1
        else:
            misses.append((g_idx, round(est, 3), opt, stream.m))
    frac = hits / len(graphs) if graphs else 0.0
    details = {"graphs": len(graphs), "within": hits, "fraction": round(frac, 3),
               "seconds": round(time.perf_counter() - t0, 1)}
    if misses:
        details["misses"] = misses
    return SuiteResult("end-to-end approximation", frac >= need, details)


def suite_comm(n: int = 10 ** 4, eps: float = 0.2, trials: int = 2000, seed: int = 0, c: float = 1.0) -> SuiteResult:
    """Quantum estimate unbiased with variance <= c n^2 / k; classical sampling accurate; cost gap shown."""
    cmp = comm.compare_protocols(n, eps, trials, seed)
    unbiased = abs(cmp.quantum_mean - cmp.truth) <= 5 * cmp.quantum_se
    var_ok = cmp.quantum_var <= c * n * n / cmp.k
    classical_ok = cmp.classical_within >= 2 / 3
    gap = cmp.quantum_qubits < cmp.classical_bits
    return SuiteResult("communication demo", unbiased and var_ok and classical_ok and gap, {
        "n": n, "truth": cmp.truth, "k": cmp.k, "s": cmp.s, "quantum_mean": round(cmp.quantum_mean, 2),
        "quantum_se": round(cmp.quantum_se, 2), "var_over_n2_k": round(cmp.quantum_var * cmp.k / n ** 2, 4),
        "classical_within_eps_n": cmp.classical_within, "quantum_qubits": cmp.quantum_qubits,
        "classical_bits": cmp.classical_bits,
    })


def suite_space(log_m=range(6, 15), n: int = 64, params: EstimatorParams | None = None, seed: int = 0) -> SuiteResult:
    """Per-copy register width grows by at most one bit per doubling of m, and every label fits in it."""
    params = params or EstimatorParams()
    widths = []
    fits = True
    for lm in log_m:
        m = 2 ** lm
        stream = random_stream_with_m(n, m, derive_seed(seed, "space", lm))
        oracle = _oracle(stream, params.eps, params.kappa, derive_seed(seed, "space-oracle", lm))
        a = oracle.grid.windows()[0]
        sim = CopySimulator(stream, oracle, a, a, params.capacity)
        sim.run(None)
        acc = qubit_accounting(params, m, n, 1)
        largest = max([sim.t - 1] + [s.max() for s in sim.sets.values()])
        fits &= largest < 2 ** (acc["per_copy_width"] - 3)
        widths.append(acc["per_copy_width"])
    steps = [b - a for a, b in zip(widths, widths[1:])]
    return SuiteResult("space accounting", fits and all(0 <= d <= 1 for d in steps),
                       {"widths": widths, "max_step": max(steps) if steps else 0, "labels_fit": fits})


def random_stream_with_m(n: int, m: int, seed: int) -> EdgeStream:
    rng = random.Random(seed)
    edges = []
    while len(edges) < m:
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            edges.append((u, v))
    return EdgeStream(n, tuple(edges))


def quick_suites(seed: int = 0) -> list[SuiteResult]:
    """Small versions of every invariant suite, over the bundled corpus plus a few random streams."""
    corpus = [s for _, s in bundled_corpus()]
    small = random_small_streams(12, 6, 10, derive_seed(seed, "quick"))
    settings = [(1, 2), (0.5, 2), (1, 4)]
    test2 = load_config("test2")
    prod = load_config("production")
    suites = [
        suite_state_invariant(corpus + small, settings, seed),
        suite_accounting(corpus + small[:4], settings, copies=2, seed=seed),
        suite_dense(15, 2, seed),
        suite_unbiased([s for s in corpus if 0 < s.m <= 8][:3], 1, 20000, test2, seed=seed),
        suite_off_class(20000, test2, seed=seed),
        suite_oblivious([s for s in corpus + small if s.n <= 12], [test2, prod], prod),
        suite_space(range(6, 10), seed=seed),
    ]
    return suites
