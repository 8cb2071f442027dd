"""Keyed pseudorandom functions for the hash families and the seed tree."""

from __future__ import annotations

import hashlib
import struct
from fractions import Fraction

import numpy as np

TWO64 = 1 << 64
G_BITS = 40


def _digest(key: int, tag: bytes, *ints: int, size: int = 8) -> bytes:
    h = hashlib.blake2b(digest_size=size, key=(key % TWO64).to_bytes(8, "little"), person=b"qdicut")
    h.update(tag)
    h.update(struct.pack(f"<{len(ints)}q", *ints))
    return h.digest()


def derive_seed(master: int, role: str, *index: int) -> int:
    """Child seed of ``master`` for a named role and index path.

    Children depend only on (master, role, index), never on how many siblings
    were drawn, so adding parallelism leaves every result unchanged.
    """
    return int.from_bytes(_digest(master, role.encode(), *index), "little")


def philox_key(seed: int) -> int:
    return int.from_bytes(_digest(seed, b"philox", size=16), "little")


def copy_draws(seed: int, copies: int, per_copy: int, first_copy: int = 0) -> np.ndarray:
    """64-bit draws for a block of copies, shape (copies, per_copy).

    Copy c always receives the same draws whether generated alone or in bulk:
    its block starts at counter c * stride / 4 of one Philox stream.
    """
    stride = 4 * ((per_copy + 3) // 4)
    if copies == 0 or stride == 0:
        return np.zeros((copies, per_copy), dtype=np.uint64)
    bitgen = np.random.Philox(key=philox_key(seed))
    if first_copy:
        bitgen.advance(first_copy * stride // 4)
    raw = bitgen.random_raw(copies * stride).reshape(copies, stride)
    return raw[:, :per_copy]


class HashOracle:
    """Lazily evaluated, reproducible hash families f_i (edge -> bit) and g (vertex -> noise).

    ``f(i, e)`` is 1 with probability min(1, kappa / (2 d_i)); ``g(v)`` is uniform on
    [-eps, eps] at 2^-40 resolution and returned as an exact Fraction.
    """

    def __init__(self, seed: int, kappa: int, grid):
        if kappa < 1:
            raise ValueError("kappa must be a positive integer")
        self.seed = int(seed)
        self.kappa = int(kappa)
        self.grid = grid
        self._f: dict[tuple[int, int], bool] = {}
        self._g: dict[int, Fraction] = {}
        # replay results derived from this oracle, keyed by consumer
        self.memo: dict = {}

    @property
    def eps(self) -> Fraction:
        return self.grid.eps

    def f_prob(self, level: int) -> Fraction:
        self.grid.check_level(level)
        return min(Fraction(1), Fraction(self.kappa, 2 * self.grid.levels[level]))

    def f(self, level: int, edge: int) -> bool:
        key = (level, edge)
        hit = self._f.get(key)
        if hit is None:
            p = self.f_prob(level)
            u = int.from_bytes(_digest(self.seed, b"f", level, edge), "little")
            hit = u * p.denominator < p.numerator * TWO64
            self._f[key] = hit
        return hit

    def g(self, v: int) -> Fraction:
        val = self._g.get(v)
        if val is None:
            k = int.from_bytes(_digest(self.seed, b"g", v), "little") >> (64 - G_BITS)
            val = self.eps * (Fraction(2 * k, 1 << G_BITS) - 1)
            self._g[v] = val
        return val


def f_eval(oracle: HashOracle, level: int, edge: int) -> bool:
    return oracle.f(level, edge)


def g_eval(oracle: HashOracle, v: int) -> Fraction:
    return oracle.g(v)
