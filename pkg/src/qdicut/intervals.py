"""Sets of positive integers stored as sorted, disjoint, non-adjacent closed intervals."""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterable, Iterator


class IntervalSet:
    __slots__ = ("_iv", "_size")

    def __init__(self, intervals: Iterable[tuple[int, int]] = ()):
        self._iv: list[tuple[int, int]] = []
        self._size: int | None = None
        for lo, hi in sorted((int(a), int(b)) for a, b in intervals if a <= b):
            self._append(lo, hi)

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "IntervalSet":
        return cls((x, x) for x in values)

    @classmethod
    def half_open(cls, lo: int, hi: int) -> "IntervalSet":
        """The integers in [lo, hi)."""
        return cls([(lo, hi - 1)]) if hi > lo else cls()

    def _append(self, lo: int, hi: int) -> None:
        self._size = None
        if self._iv and lo <= self._iv[-1][1] + 1:
            plo, phi = self._iv[-1]
            self._iv[-1] = (plo, max(phi, hi))
        else:
            self._iv.append((lo, hi))

    def copy(self) -> "IntervalSet":
        out = IntervalSet()
        out._iv = list(self._iv)
        out._size = self._size
        return out

    @property
    def intervals(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._iv)

    def __len__(self) -> int:
        if self._size is None:
            self._size = sum(hi - lo + 1 for lo, hi in self._iv)
        return self._size

    def __bool__(self) -> bool:
        return bool(self._iv)

    def __iter__(self) -> Iterator[int]:
        for lo, hi in self._iv:
            yield from range(lo, hi + 1)

    def __eq__(self, other) -> bool:
        if isinstance(other, IntervalSet):
            return self._iv == other._iv
        return NotImplemented

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}..{hi}]" for lo, hi in self._iv)
        return f"IntervalSet({body})"

    def __contains__(self, x: int) -> bool:
        k = bisect_right(self._iv, (x, float("inf"))) - 1
        return k >= 0 and self._iv[k][0] <= x <= self._iv[k][1]

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._iv + other._iv)

    def max(self) -> int:
        return self._iv[-1][1] if self._iv else 0

    def shift_insert(self, r: int) -> None:
        """Replace the set S with {x + r : x in S} together with {1, ..., r}."""
        if r <= 0:
            raise ValueError("shift must be positive")
        size = len(self)
        shifted = [(lo + r, hi + r) for lo, hi in self._iv]
        self._iv = []
        self._append(1, r)
        for lo, hi in shifted:
            self._append(lo, hi)
        self._size = size + r

    def discard(self, x: int) -> bool:
        k = bisect_right(self._iv, (x, float("inf"))) - 1
        if k < 0:
            return False
        lo, hi = self._iv[k]
        if not lo <= x <= hi:
            return False
        pieces = []
        if lo <= x - 1:
            pieces.append((lo, x - 1))
        if x + 1 <= hi:
            pieces.append((x + 1, hi))
        self._iv[k:k + 1] = pieces
        if self._size is not None:
            self._size -= 1
        return True

    def progression(self, start: int, step: int) -> list[int]:
        """Members of the form start + i*step with i >= 0, ascending."""
        out = []
        for lo, hi in self._iv:
            if hi < start:
                continue
            first = max(lo, start)
            rem = (first - start) % step
            if rem:
                first += step - rem
            out.extend(range(first, hi + 1, step))
        return out

    def discard_progression(self, start: int, step: int) -> list[int]:
        hits = self.progression(start, step)
        for x in hits:
            self.discard(x)
        return hits
