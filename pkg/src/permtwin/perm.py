"""Permutations, pattern keys, twin pairs, symmetries and seeded generation.

All externally visible indices and values are one-based.
"""
from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _backend
from ._pykernels import GOLDEN, MASK64, mix64

PatternKey = tuple  # rank sequence, itself a permutation of 1..k


class PermutationError(ValueError):
    """Input is not a valid permutation or value sequence."""


class Permutation(tuple):
    """Immutable permutation of ``1..n`` in one-line notation."""

    def __new__(cls, entries: Iterable[int] = ()):
        self = super().__new__(cls, (int(v) for v in entries))
        n = len(self)
        if n and (min(self) < 1 or max(self) > n or len(set(self)) != n):
            seen = set()
            for v in self:
                if v in seen:
                    raise PermutationError(f"duplicate value {v}")
                if not 1 <= v <= n:
                    raise PermutationError(f"value {v} out of range [1, {n}]")
                seen.add(v)
        return self

    @classmethod
    def _trusted(cls, entries: Iterable[int]) -> "Permutation":
        return super().__new__(cls, (int(v) for v in entries))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls._trusted(range(1, n + 1))

    def __repr__(self) -> str:
        return f"Permutation({tuple(self)!r})"

    def __str__(self) -> str:
        return " ".join(map(str, self))

    def values_at(self, indices: Iterable[int]) -> tuple[int, ...]:
        """Values at one-based positions."""
        return tuple(self[i - 1] for i in indices)


def parse_permutation(text: str) -> Permutation:
    """Parse one line of whitespace- or comma-separated one-based values.

    Surrounding brackets or parentheses are tolerated, so ``(3,1,2)`` works.
    """
    body = text.strip().strip("()[]").strip()
    if not body:
        raise PermutationError("empty permutation text")
    tokens = [t for t in re.split(r"[\s,]+", body) if t]
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise PermutationError(f"non-integer token in {text!r}") from exc
    return Permutation(values)


def parse_values(text: str) -> tuple[int, ...]:
    """Parse a sequence of distinct integers (not necessarily 1..n)."""
    body = text.strip().strip("()[]").strip()
    if not body:
        return ()
    try:
        values = tuple(int(t) for t in re.split(r"[\s,]+", body) if t)
    except ValueError as exc:
        raise PermutationError(f"non-integer token in {text!r}") from exc
    if len(set(values)) != len(values):
        raise PermutationError("duplicate value in sequence")
    return values


def pattern_key(values: Sequence[int]) -> PatternKey:
    """Rank sequence of ``values``: entry i becomes its rank among all values."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    prev = None
    for rank, i in enumerate(order, 1):
        if prev is not None and values[i] == prev:
            raise PermutationError(f"duplicate value {prev}")
        prev = values[i]
        ranks[i] = rank
    return tuple(ranks)


def is_similar(s1: Sequence[int], s2: Sequence[int]) -> bool:
    return len(s1) == len(s2) and pattern_key(s1) == pattern_key(s2)


@dataclass(frozen=True)
class TwinPair:
    """Two index sequences (one-based) into a host permutation."""

    first: tuple[int, ...]
    second: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "first", tuple(int(i) for i in self.first))
        object.__setattr__(self, "second", tuple(int(i) for i in self.second))

    @property
    def length(self) -> int:
        return len(self.first)

    def __len__(self) -> int:
        return len(self.first)

    @classmethod
    def empty(cls) -> "TwinPair":
        return cls((), ())

    def shifted(self, offset: int) -> "TwinPair":
        return TwinPair(
            tuple(i + offset for i in self.first), tuple(i + offset for i in self.second)
        )

    def to_json(self) -> dict:
        return {"first": list(self.first), "second": list(self.second)}

    @classmethod
    def from_json(cls, data: dict) -> "TwinPair":
        return cls(tuple(data["first"]), tuple(data["second"]))


def verify_twin_pair(perm: Sequence[int], pair: TwinPair) -> bool:
    """Check that ``pair`` is a pair of twins in ``perm``.

    Raises ``IndexError`` for an index outside ``[1, n]``.
    """
    n = len(perm)
    for i in pair.first + pair.second:
        if not 1 <= i <= n:
            raise IndexError(f"index {i} out of range [1, {n}]")
    a, b = pair.first, pair.second
    if len(a) != len(b):
        return False
    if any(x >= y for x, y in zip(a, a[1:])) or any(x >= y for x, y in zip(b, b[1:])):
        return False
    if set(a) & set(b):
        return False
    return is_similar([perm[i - 1] for i in a], [perm[i - 1] for i in b])


class Symmetry(str, Enum):
    REVERSE = "reverse"
    COMPLEMENT = "complement"
    INVERSE = "inverse"


def apply_symmetry(perm: Sequence[int], s: Symmetry | str) -> Permutation:
    s = Symmetry(s)
    n = len(perm)
    if s is Symmetry.REVERSE:
        return Permutation._trusted(reversed(perm))
    if s is Symmetry.COMPLEMENT:
        return Permutation._trusted(n + 1 - v for v in perm)
    inv = [0] * n
    for i, v in enumerate(perm, 1):
        inv[v - 1] = i
    return Permutation._trusted(inv)


def symmetry_images(perm: Sequence[int], with_inverse: bool = True) -> list[Permutation]:
    """All images of ``perm`` under the group generated by the given symmetries
    (8 with inverse, 4 without), identity included."""
    base = [Permutation._trusted(perm)]
    if with_inverse:
        base.append(apply_symmetry(perm, Symmetry.INVERSE))
    out = []
    for p in base:
        r = apply_symmetry(p, Symmetry.REVERSE)
        out.extend([p, r, apply_symmetry(p, Symmetry.COMPLEMENT), apply_symmetry(r, Symmetry.COMPLEMENT)])
    return out


def derive_seed(master: int, *parts: int) -> int:
    """Mix a master seed with integer coordinates into an independent 64-bit seed.

    ``h = mix64(master + G)``, then ``h = mix64(h ^ mix64(p + G))`` for each part,
    where ``mix64`` is the SplitMix64 finalizer and ``G = 0x9E3779B97F4A7C15``.
    """
    h = mix64((master + GOLDEN) & MASK64)
    for p in parts:
        h = mix64(h ^ mix64((p + GOLDEN) & MASK64))
    return h


def random_array(n: int, seed: int) -> np.ndarray:
    """Uniform random permutation of ``1..n`` as an int64 array (SplitMix64 +
    forward Fisher-Yates; identical on every platform)."""
    return _backend.kernels.random_permutation(n, seed & MASK64)


def random_permutation(n: int, seed: int) -> Permutation:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Permutation._trusted(random_array(n, seed).tolist())


class MonotoneRun(NamedTuple):
    direction: str  # "increasing" or "decreasing"
    length: int
    witness: tuple[int, ...]  # one-based positions


def _lis(values: Sequence[int]) -> list[int]:
    # patience sorting; returns zero-based positions of one longest increasing run
    tails: list[int] = []
    tail_pos: list[int] = []
    prev = [-1] * len(values)
    for i, v in enumerate(values):
        j = bisect_left(tails, v)
        prev[i] = tail_pos[j - 1] if j else -1
        if j == len(tails):
            tails.append(v)
            tail_pos.append(i)
        else:
            tails[j] = v
            tail_pos[j] = i
    out = []
    i = tail_pos[-1] if tail_pos else -1
    while i >= 0:
        out.append(i)
        i = prev[i]
    return out[::-1]


def longest_monotone(perm: Sequence[int]) -> MonotoneRun:
    """Longest increasing or decreasing subsequence, with witness positions.

    Ties go to the increasing direction.
    """
    inc = _lis(perm)
    dec = _lis([-v for v in perm])
    if len(dec) > len(inc):
        return MonotoneRun("decreasing", len(dec), tuple(i + 1 for i in dec))
    return MonotoneRun("increasing", len(inc), tuple(i + 1 for i in inc))
