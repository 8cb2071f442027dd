"""End-to-end Max-DiCut estimate: per-pair copy averages, summed, rounded obliviously, median over repetitions."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .graph import EdgeStream
from .hashing import HashOracle, derive_seed
from .pseudosnapshot import DegreeGrid
from .quantum import DEFAULT_CAPACITY, PairSampler
from .snapshot import BiasClassConfig, oblivious_value

SAMPLERS = ("aggregate", "copies")
TAG_QUBITS = 3


@dataclass(frozen=True)
class EstimatorParams:
    """Run parameters. ``sampler`` picks exact per-copy replay or multinomial outcome counts."""

    eps: float = 0.5
    kappa: int = 8
    capacity: int = DEFAULT_CAPACITY
    copies: int = 10 ** 4
    med_reps: int = 5
    c_corr: float = 0.0
    seed: int = 0
    sampler: str = "aggregate"

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.kappa < 2:
            raise ValueError("kappa must be at least 2")
        if self.capacity < 1 or self.copies < 1 or self.med_reps < 1:
            raise ValueError("capacity, copies and med_reps must be positive")
        if self.c_corr < 0:
            raise ValueError("c_corr must be non-negative")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")


@dataclass
class PairResult:
    alpha: int
    beta: int
    window_a: tuple[int, int]
    window_b: tuple[int, int]
    matrix: np.ndarray
    sampled: int
    zeroed: int
    exhausted: int


def _grid(stream: EdgeStream, params: EstimatorParams) -> DegreeGrid:
    return DegreeGrid(max(1, stream.n), params.eps, max_degree=max(1, stream.m))


def run_pair(stream: EdgeStream, oracle: HashOracle, config: BiasClassConfig, alpha: int, beta: int,
             params: EstimatorParams, seed: int) -> PairResult:
    """Average of ``params.copies`` single-copy estimates for one window pair, all sharing ``oracle``."""
    ell = config.ell
    lv = oracle.grid.levels
    windows = ((lv[alpha], lv[alpha + 1]), (lv[beta], lv[beta + 1]))
    if stream.m == 0:
        return PairResult(alpha, beta, *windows, np.zeros((ell, ell)), 0, 0, 0)
    sampler = PairSampler(stream, oracle, config, alpha, beta, params.capacity)
    K = params.copies
    if params.sampler == "copies":
        mean, codes = sampler.sample_copies(seed, K)
        sampled = int((codes >= 0).sum())
        zeroed = int((codes == -2).sum())
        exhausted = int((codes == -3).sum())
    else:
        rng = np.random.default_rng(np.random.Philox(key=seed % (1 << 128)))
        mean, counts = sampler.sample_aggregate(rng, K)
        sampled = int(counts[:-1].sum())
        # split the non-sampled remainder between its causes in proportion to their mass
        rest = int(counts[-1])
        law = sampler.law
        idle = law.zeroed + law.exhausted + law.never
        zeroed = exhausted = 0
        if idle > 0 and rest:
            sub = rng.multinomial(rest, [float(law.zeroed / idle), float(law.exhausted / idle), float(law.never / idle)])
            zeroed, exhausted = int(sub[0]), int(sub[1])
    return PairResult(alpha, beta, *windows, mean, sampled, zeroed, exhausted)


def qubit_accounting(params: EstimatorParams, m: int, n: int, pairs: int) -> dict:
    """Register widths and totals. Per copy: ceil(log2 M) index qubits plus a constant tag."""
    M = params.capacity * params.kappa ** 3 * max(m, 1)
    width = math.ceil(math.log2(M)) + TAG_QUBITS
    total = width * params.copies * pairs * params.med_reps
    log_n = math.log2(max(n, 2))
    return {
        "M": M,
        "per_copy_width": width,
        "copies_per_pair": params.copies,
        "pairs": pairs,
        "repetitions": params.med_reps,
        "total_qubits": total,
        "label_width": math.ceil(math.log2(max(n, 2))) + math.ceil(math.log2(M + 1))
        + math.ceil(math.log2(8 * params.kappa ** 2)),
        "prescribed_copies": math.ceil(params.kappa ** 6 * params.eps ** -3 * log_n ** 2),
    }


@dataclass
class RunReport:
    estimate: float
    opt: Optional[int]
    ratio: Optional[float]
    per_pair: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    qubits: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "opt": self.opt,
            "ratio": self.ratio,
            "per_pair": self.per_pair,
            "diagnostics": self.diagnostics,
            "qubits": self.qubits,
            "config": self.config,
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def repetition(stream: EdgeStream, config: BiasClassConfig, params: EstimatorParams, rep: int):
    """One repetition: fresh hash functions, every window pair, summed matrix and its value."""
    grid = _grid(stream, params)
    oracle = HashOracle(derive_seed(params.seed, "oracle", rep), params.kappa, grid)
    total = np.zeros((config.ell, config.ell))
    pairs = []
    for alpha, beta in grid.pairs():
        res = run_pair(stream, oracle, config, alpha, beta, params, derive_seed(params.seed, "copies", rep, alpha, beta))
        total += res.matrix
        pairs.append(res)
    value = oblivious_value(total, config) - params.c_corr * params.eps * stream.m
    return float(value), total, pairs


def full_estimate(stream: EdgeStream, config: BiasClassConfig, params: EstimatorParams,
                  opt: Optional[int] = None, keep_pairs: bool = False) -> RunReport:
    """Median over ``med_reps`` repetitions of the corrected oblivious value of the summed estimate."""
    values, per_pair = [], []
    diag = {"sampled": 0, "zeroed": 0, "exhausted": 0, "copies": 0, "repetition_values": []}
    npairs = 0
    for rep in range(params.med_reps):
        value, total, pairs = repetition(stream, config, params, rep)
        values.append(value)
        npairs = len(pairs)
        diag["repetition_values"].append(value)
        for res in pairs:
            diag["sampled"] += res.sampled
            diag["zeroed"] += res.zeroed
            diag["exhausted"] += res.exhausted
            diag["copies"] += params.copies
            if keep_pairs and res.matrix.any():
                per_pair.append({
                    "repetition": rep, "alpha": res.alpha, "beta": res.beta,
                    "window_head": list(res.window_a), "window_tail": list(res.window_b),
                    "matrix": res.matrix.tolist(),
                })
        if keep_pairs:
            per_pair.append({"repetition": rep, "summed": total.tolist()})
    estimate = float(statistics.median(values)) if stream.m else 0.0
    ratio = None if not opt else estimate / opt
    return RunReport(
        estimate=estimate,
        opt=opt,
        ratio=ratio,
        per_pair=per_pair,
        diagnostics=diag,
        qubits=qubit_accounting(params, stream.m, stream.n, npairs),
        config=config.to_dict(),
        params=asdict(params),
    )
