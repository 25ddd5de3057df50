"""Pure-Python implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
bit-identical results; ``_backend`` picks one at import time. Indices are
zero-based throughout this module.

RNG: SplitMix64 (Steele, Lea & Flood 2014). State advances by the golden-gamma
constant and each output is the state passed through the ``mix64`` finalizer.
Bounded draws use Lemire's multiply-shift with rejection, so they are exactly
uniform. Permutations come from a forward Fisher-Yates shuffle: for
``i = 0 .. n-2`` swap slot ``i`` with slot ``i + bounded(n - i)``.
"""
from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def bounded(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` for ``1 <= m < 2**64``."""
        prod = self.next() * m
        low = prod & MASK64
        if low < m:
            threshold = (-m) % m
            while low < threshold:
                prod = self.next() * m
                low = prod & MASK64
        return prod >> 64


def random_permutation(n: int, seed: int) -> np.ndarray:
    out = np.arange(1, n + 1, dtype=np.int64)
    rng = SplitMix64(seed)
    for i in range(n - 1):
        j = i + rng.bounded(n - i)
        out[i], out[j] = out[j], out[i]
    return out


def random_prefix(n: int, m: int, seed: int) -> np.ndarray:
    """First ``m`` entries of ``random_permutation(n, seed)`` in O(m) memory."""
    m = min(m, n)
    rng = SplitMix64(seed)
    moved: dict[int, int] = {}
    out = np.empty(m, dtype=np.int64)
    for i in range(m):
        if i < n - 1:
            j = i + rng.bounded(n - i)
        else:
            j = i
        vi = moved.get(i, i + 1)
        vj = moved.get(j, j + 1)
        out[i] = vj
        moved[j] = vi
    return out


def random_permutations(n: int, seeds: Sequence[int]) -> np.ndarray:
    rows = np.empty((len(seeds), n), dtype=np.int64)
    for r, s in enumerate(seeds):
        rows[r] = random_permutation(n, int(s))
    return rows


def contains_pattern(seq: Sequence[int], tau: Sequence[int]) -> bool:
    """True iff some subsequence of ``seq`` is order-isomorphic to ``tau``."""
    m = len(tau)
    n = len(seq)
    if m == 0:
        return True
    if m > n:
        return False
    chosen: list[int] = []

    def extend(start: int) -> bool:
        d = len(chosen)
        if d == m:
            return True
        for i in range(start, n - (m - d) + 1):
            v = seq[i]
            t = tau[d]
            for q in range(d):
                if (chosen[q] < v) != (tau[q] < t):
                    break
            else:
                chosen.append(v)
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    return extend(0)


def _code(vals: Sequence[int]) -> int:
    # mixed-radix code of the "smaller entries to the left" table; equal iff similar
    code = 0
    for d, v in enumerate(vals):
        c = 0
        for j in range(d):
            if vals[j] < v:
                c += 1
        code = code * (d + 1) + c
    return code


def twins_at_length(
    perm: Sequence[int],
    k: int,
    budget: Optional[int] = None,
    tau: Optional[Sequence[int]] = None,
):
    """Search for twins of length exactly ``k``.

    k-subsets are visited in lexicographic index order and bucketed by pattern
    code. On reaching subset T the earliest previously seen subset of the same
    class that is disjoint from T is looked up; the first T that has one ends
    the search. Subsets whose pattern contains ``tau`` are skipped.

    Returns ``(first, second, nodes, exhausted)`` with zero-based index tuples,
    or ``None`` for both when no pair exists (or the budget ran out first).
    ``nodes`` counts k-subsets visited, skipped ones included.
    """
    n = len(perm)
    limit = budget if budget is not None else float("inf")
    nodes = 0
    classes: dict[int, list[int]] = {}
    member: dict[int, int] = {}
    avoid_cache: dict[int, bool] = {}
    scan_cap = comb(n - k, k)
    for idx in combinations(range(n), k):
        nodes += 1
        if nodes > limit:
            return None, None, nodes - 1, True
        vals = [perm[i] for i in idx]
        code = _code(vals)
        if tau is not None:
            bad = avoid_cache.get(code)
            if bad is None:
                bad = contains_pattern(vals, tau)
                avoid_cache[code] = bad
            if bad:
                continue
        mask = 0
        for i in idx:
            mask |= 1 << i
        bucket = classes.get(code)
        if bucket is None:
            classes[code] = [mask]
        else:
            partner = None
            if len(bucket) <= scan_cap:
                for other in bucket:
                    if not other & mask:
                        partner = other
                        break
            else:
                free = [i for i in range(n) if not (mask >> i) & 1]
                for sub in combinations(free, k):
                    other = 0
                    for i in sub:
                        other |= 1 << i
                    if member.get(other) == code:
                        partner = other
                        break
            if partner is not None:
                first = tuple(i for i in range(n) if (partner >> i) & 1)
                return first, idx, nodes, False
            bucket.append(mask)
        member[mask] = code
    return None, None, nodes, False


def tight_split(window: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Offsets of the first color class of the lexicographically first balanced
    split of ``window`` into two similar subsequences, or ``None``.

    Colors are tried A before B at each position, so position 0 is always A.
    """
    L = len(window)
    r = L // 2
    A: list[int] = []
    B: list[int] = []
    colors: list[int] = []

    def place(pos: int) -> bool:
        if pos == L:
            return True
        v = window[pos]
        na, nb = len(A), len(B)
        if na < r:
            ok = True
            if nb > na:
                w = B[na]
                for q in range(na):
                    if (A[q] < v) != (B[q] < w):
                        ok = False
                        break
            if ok:
                A.append(v)
                colors.append(0)
                if place(pos + 1):
                    return True
                A.pop()
                colors.pop()
        if nb < r and pos > 0:
            ok = True
            if na > nb:
                w = A[nb]
                for q in range(nb):
                    if (B[q] < v) != (A[q] < w):
                        ok = False
                        break
            if ok:
                B.append(v)
                colors.append(1)
                if place(pos + 1):
                    return True
                B.pop()
                colors.pop()
        return False

    if L == 0 or L % 2:
        return None
    if place(0):
        return tuple(i for i, c in enumerate(colors) if c == 0)
    return None
