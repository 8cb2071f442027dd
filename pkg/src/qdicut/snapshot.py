"""Bias classes, first-order snapshots and the oblivious rounding value."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import EdgeStream, bias, degrees


class ConfigError(ValueError):
    pass


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    if isinstance(x, np.integer):
        return Fraction(int(x))
    return Fraction(x)


@dataclass(frozen=True)
class BiasClassConfig:
    """Thresholds t (with t[0] = -1) and side-0 probabilities r, one per class.

    Class i covers [t[i], t[i+1]) and the last class covers [t[-1], 1].
    Indices are 0-based throughout the package.
    """

    t: tuple[Fraction, ...]
    r: tuple[Fraction, ...]
    alpha: float
    name: str = ""
    note: str = field(default="", compare=False)

    @property
    def ell(self) -> int:
        return len(self.t)

    def r_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.r])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ell": self.ell,
            "t": [str(x) for x in self.t],
            "r": [str(x) for x in self.r],
            "alpha": self.alpha,
            "note": self.note,
        }


def validate_config(ell: int, t: Sequence, r: Sequence, alpha: float, name: str = "", note: str = "") -> BiasClassConfig:
    if ell < 1:
        raise ConfigError("need at least one class")
    if len(t) != ell or len(r) != ell:
        raise ConfigError(f"expected {ell} thresholds and probabilities, got {len(t)} and {len(r)}")
    tt = tuple(_exact(x) for x in t)
    rr = tuple(_exact(x) for x in r)
    if tt[0] != -1:
        raise ConfigError("first threshold must be -1")
    if any(a >= b for a, b in zip(tt, tt[1:])):
        raise ConfigError("thresholds must be strictly ascending")
    if tt[-1] > 1:
        raise ConfigError("thresholds must lie in [-1, 1]")
    if any(not 0 <= x <= 1 for x in rr):
        raise ConfigError("probabilities must lie in [0, 1]")
    return BiasClassConfig(tt, rr, float(alpha), name, note)


def config_from_dict(doc: dict) -> BiasClassConfig:
    try:
        return validate_config(
            int(doc["ell"]), doc["t"], doc["r"], doc["alpha"], doc.get("name", ""), doc.get("note", "")
        )
    except KeyError as exc:
        raise ConfigError(f"config is missing field {exc.args[0]!r}") from None


def load_config(source: str | Path) -> BiasClassConfig:
    """Load a class config from a JSON file, or a bundled one by name ("test2", "production")."""
    path = Path(source)
    if path.suffix != ".json" and not path.exists():
        text = resources.files("qdicut.configs").joinpath(f"{source}.json").read_text(encoding="utf-8")
    else:
        text = path.read_text(encoding="utf-8")
    return config_from_dict(json.loads(text))


def classify(b, config: BiasClassConfig) -> int:
    """0-based class of bias value ``b``; values outside [-1, 1] are clamped first."""
    b = _exact(b)
    if b < -1:
        b = Fraction(-1)
    elif b > 1:
        b = Fraction(1)
    t = config.t
    lo, hi = 0, len(t) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if t[mid] <= b:
            lo = mid
        else:
            hi = mid - 1
    return lo


def snapshot(stream: EdgeStream, config: BiasClassConfig) -> np.ndarray:
    """Edge counts between final bias classes of head and tail."""
    ell = config.ell
    out = np.zeros((ell, ell), dtype=np.int64)
    if stream.m == 0:
        return out
    prof = degrees(stream)
    cls = {v: classify(bias(prof, v), config) for v in range(stream.n) if prof.degree(v) > 0}
    for u, v in stream.edges:
        out[cls[u], cls[v]] += 1
    return out


def oblivious_value(S, config: BiasClassConfig):
    """sum_ij r_i S_ij (1 - r_j). Exact (Fraction) for integer or object matrices."""
    S = np.asarray(S)
    ell = config.ell
    if S.shape != (ell, ell):
        raise ValueError(f"matrix shape {S.shape} does not match {ell} classes")
    if S.dtype.kind in "iuO":
        total = Fraction(0)
        for i in range(ell):
            for j in range(ell):
                if S[i, j]:
                    total += config.r[i] * _exact(S[i, j]) * (1 - config.r[j])
        return total
    r = config.r_array()
    return float(r @ S @ (1.0 - r))


def worst_case_ratio(config: BiasClassConfig) -> float:
    """Worst-case ratio of the oblivious rounding over all directed graphs.

    Vertices are grouped by (class, side of an optimal cut); merging vertices of
    one group preserves both the rounding value and the cut, and keeps the merged
    bias inside the class interval, which is a pair of linear constraints on the
    group's out/in weight. Minimising the rounding value over edge weights that
    cut one unit is then a linear program.
    """
    from scipy.optimize import linprog

    ell = config.ell
    t = [float(x) for x in config.t] + [1.0]
    r = config.r_array()
    types = [(i, x) for i in range(ell) for x in (0, 1)]
    k = len(types)
    cost = np.empty(k * k)
    eq = np.zeros((1, k * k))
    for a, (i, x) in enumerate(types):
        for b, (j, y) in enumerate(types):
            cost[a * k + b] = r[i] * (1 - r[j])
            if x == 0 and y == 1:
                eq[0, a * k + b] = 1.0
    ub = np.zeros((2 * k, k * k))
    for a, (i, _) in enumerate(types):
        lo, hi = t[i], t[i + 1]
        # lo*(out+in) <= out-in <= hi*(out+in)
        ub[2 * a, a * k:(a + 1) * k] += lo - 1
        ub[2 * a, a::k] += lo + 1
        ub[2 * a + 1, a * k:(a + 1) * k] += 1 - hi
        ub[2 * a + 1, a::k] -= 1 + hi
    res = linprog(cost, A_ub=ub, b_ub=np.zeros(2 * k), A_eq=eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"worst-case LP failed: {res.message}")
    return float(res.fun)
