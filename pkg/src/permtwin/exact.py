"""Exact, witness-producing solvers and the brute-force oracles that check them."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _backend
from .heuristic import es_split_twins
from .perm import (
    Permutation,
    PermutationError,
    TwinPair,
    is_similar,
    pattern_key,
    symmetry_images,
)

EXACT_LIMIT = 20  # largest n searched by exact_twins without a node budget
ORACLE_LIMIT = 10
EXTREMAL_LIMITS = {"t": 9, "bt": 10, "tt_max": 8}


class CostGuardError(RuntimeError):
    """Refusal to start a computation outside its declared size limits."""


class SearchStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    BEST_SO_FAR = "best_so_far"


@dataclass(frozen=True)
class TwinSearchResult:
    """Outcome of an exact search.

    With ``BEST_SO_FAR`` the true value lies in ``[k, upper_bound]``: every
    length above ``upper_bound`` was refuted before the node budget ran out.
    """

    k: int
    witness: TwinPair
    status: SearchStatus
    upper_bound: int
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is SearchStatus.OPTIMAL

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "status": self.status.value,
            "upper_bound": self.upper_bound,
            "nodes": self.nodes,
            "witness": self.witness.to_json(),
        }


def contains_pattern(sigma: Sequence[int], tau: Sequence[int]) -> bool:
    if len(tau) < 1:
        raise ValueError("pattern must be non-empty")
    return _backend.kernels.contains_pattern(list(sigma), list(tau))


def _monotone_lower_bound(perm: Sequence[int], tau: Optional[Sequence[int]]) -> TwinPair:
    pair = es_split_twins(perm)
    if tau is None:
        return pair
    h = len(pair)
    while h > 0:
        cand = TwinPair(pair.first[:h], pair.second[:h])
        if not contains_pattern(pattern_key([perm[i - 1] for i in cand.first]), tau):
            return cand
        h -= 1
    return TwinPair.empty()


def _search(perm: Sequence[int], budget: Optional[int], tau: Optional[Sequence[int]]) -> TwinSearchResult:
    p = [int(v) for v in perm]
    n = len(p)
    if budget is None and n > EXACT_LIMIT:
        raise CostGuardError(
            f"exact twin search is limited to n <= {EXACT_LIMIT} without a node budget (n={n})"
        )
    lower = _monotone_lower_bound(p, tau)
    lb = len(lower)
    nodes = 0
    # levels at or below the monotone split are settled without search
    for k in range(n // 2, lb, -1):
        remaining = None if budget is None else max(budget - nodes, 0)
        first, second, used, exhausted = _backend.twins_at_length(p, k, remaining, tau)
        nodes += used
        if exhausted:
            return TwinSearchResult(lb, lower, SearchStatus.BEST_SO_FAR, k, nodes)
        if first is not None:
            pair = TwinPair(tuple(i + 1 for i in first), tuple(i + 1 for i in second))
            return TwinSearchResult(k, pair, SearchStatus.OPTIMAL, k, nodes)
    return TwinSearchResult(lb, lower, SearchStatus.OPTIMAL, lb, nodes)


def exact_twins(perm: Sequence[int], budget: Optional[int] = None) -> TwinSearchResult:
    """Longest twins in ``perm``.

    Lengths are tried from ``n // 2`` downwards; the first length with a pair
    is the answer. Lengths up to half the longest monotone subsequence are
    known feasible and never searched. ``budget`` caps the number of
    subsequences examined; without it ``n`` must not exceed ``EXACT_LIMIT``.
    """
    return _search(perm, budget, None)


def exact_twins_avoiding(
    perm: Sequence[int], tau: Sequence[int], budget: Optional[int] = None
) -> TwinSearchResult:
    """Longest twins whose common pattern avoids ``tau``."""
    if len(tau) < 1:
        raise ValueError("pattern must be non-empty")
    return _search(perm, budget, pattern_key(tau))


def oracle_twins_3color(perm: Sequence[int], tau: Optional[Sequence[int]] = None) -> int:
    """Brute-force twin length: try every assignment of positions to
    unused / first / second. Only count feasibility prunes the tree."""
    n = len(perm)
    if n > ORACLE_LIMIT:
        raise CostGuardError(f"oracle is limited to n <= {ORACLE_LIMIT}")
    A: list[int] = []
    B: list[int] = []
    best = 0

    def leaf():
        nonlocal best
        if len(A) == len(B) and len(A) > best and is_similar(A, B):
            if tau is None or not contains_pattern(pattern_key(A), tau):
                best = len(A)

    def go(i: int):
        if abs(len(A) - len(B)) > n - i:
            return
        if i == n:
            leaf()
            return
        v = perm[i]
        go(i + 1)
        A.append(v)
        go(i + 1)
        A.pop()
        B.append(v)
        go(i + 1)
        B.pop()

    go(0)
    return best


# --- windows -----------------------------------------------------------------


def _window_ids(p: np.ndarray) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(k, ids)`` for k = 1, 2, ...: ``ids[i]`` labels the pattern of the
    window ``p[i:i+k]`` so that equal labels mean similar windows."""
    n = len(p)
    if n == 0:
        return
    ids = np.zeros(n, dtype=np.int64)
    k = 1
    yield k, ids
    while k < n:
        cnt = n - k
        last = p[k:]
        rank = np.zeros(cnt, dtype=np.int64)
        for d in range(k):
            rank += p[d : d + cnt] < last
        combined = ids[:cnt] * (k + 1) + rank
        _, ids = np.unique(combined, return_inverse=True)
        ids = ids.astype(np.int64, copy=False).reshape(-1)
        k += 1
        yield k, ids


def _separated_class(ids: np.ndarray, k: int) -> Optional[tuple[int, int]]:
    """Lexicographically least ``(i, j)`` with ``ids[i] == ids[j]`` and ``j >= i + k``."""
    order = np.argsort(ids, kind="stable")
    sid = ids[order]
    bounds = np.flatnonzero(np.diff(sid)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [len(sid)])) - 1
    lo, hi = order[starts], order[ends]
    ok = hi - lo >= k
    if not ok.any():
        return None
    g = int(np.argmin(np.where(ok, lo, len(ids))))
    members = order[starts[g] : ends[g] + 1]
    i = int(lo[g])
    j = int(members[np.searchsorted(members, i + k)])
    return i, j


@dataclass(frozen=True)
class BlockTwins:
    k: int
    start_first: Optional[int]  # one-based
    start_second: Optional[int]

    def pair(self) -> TwinPair:
        if not self.k:
            return TwinPair.empty()
        return TwinPair(
            tuple(range(self.start_first, self.start_first + self.k)),
            tuple(range(self.start_second, self.start_second + self.k)),
        )

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "start_first": self.start_first,
            "start_second": self.start_second,
            "witness": self.pair().to_json(),
        }


def exact_block_twins(perm: Sequence[int]) -> BlockTwins:
    """Longest block twins: two disjoint similar windows.

    Window lengths are tried upwards; block twins of length k contain block
    twins of every shorter length, so the first infeasible length ends the scan.
    Ties are broken by least first start, then least second start.
    """
    p = np.asarray(perm, dtype=np.int64)
    best: Optional[tuple[int, int, int]] = None
    for k, ids in _window_ids(p):
        if 2 * k > len(p):
            break
        hit = _separated_class(ids, k)
        if hit is None:
            break
        best = (k, hit[0] + 1, hit[1] + 1)
    if best is None:
        return BlockTwins(0, None, None)
    return BlockTwins(*best)


def tight_block_scan(perm: Sequence[int]) -> tuple[int, Optional[int]]:
    """Longest pair of adjacent similar windows as ``(k, start)`` (least start)."""
    p = np.asarray(perm, dtype=np.int64)
    best = (0, None)
    for k, ids in _window_ids(p):
        if 2 * k > len(p):
            break
        eq = np.flatnonzero(ids[: len(p) - 2 * k + 1] == ids[k : len(p) - k + 1])
        if len(eq):
            best = (k, int(eq[0]) + 1)
    return best


# --- tight twins ---------------------------------------------------------------


def tight_window_split(window: Sequence[int]) -> Optional[TwinPair]:
    """Split a window of even length into two similar subsequences.

    Returns local one-based offsets of the lexicographically first split
    (first twin = color A, tried before B at each position), or ``None``.
    """
    if len(window) % 2:
        raise ValueError("window length must be even")
    if len(set(window)) != len(window):
        raise PermutationError("window values must be distinct")
    a = _backend.kernels.tight_split(list(window))
    if a is None:
        return None
    in_a = set(a)
    return TwinPair(
        tuple(i + 1 for i in a),
        tuple(i + 1 for i in range(len(window)) if i not in in_a),
    )


@dataclass
class TightScanReport:
    max_length: int
    witness_start: Optional[int]  # one-based start of the witnessing window
    witness: Optional[TwinPair]  # host positions
    per_length: dict[int, bool] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "max_length": self.max_length,
            "witness_start": self.witness_start,
            "witness": self.witness.to_json() if self.witness else None,
            "per_length": {str(r): v for r, v in self.per_length.items()},
        }


def tight_twins_scan(perm: Sequence[int], max_half: Optional[int] = None) -> TightScanReport:
    """Which half-lengths r admit a window of length 2r that splits into twins.

    Every r is checked independently because the property is not monotone.
    """
    p = [int(v) for v in perm]
    n = len(p)
    top = n // 2 if max_half is None else min(max_half, n // 2)
    split = _backend.kernels.tight_split
    report = TightScanReport(0, None, None)
    for r in range(1, top + 1):
        report.per_length[r] = False
        for s in range(n - 2 * r + 1):
            a = split(p[s : s + 2 * r])
            if a is not None:
                report.per_length[r] = True
                in_a = set(a)
                b = [i for i in range(2 * r) if i not in in_a]
                report.max_length = r
                report.witness_start = s + 1
                report.witness = TwinPair(
                    tuple(s + i + 1 for i in a), tuple(s + i + 1 for i in b)
                )
                break
    return report


# --- extremal values -------------------------------------------------------------


def _stat(stat: str):
    if stat == "t":
        return lambda p: exact_twins(p).k, True
    if stat == "bt":
        return lambda p: exact_block_twins(p).k, False
    if stat in ("tt", "tt_max"):
        return lambda p: tight_twins_scan(p).max_length, False
    raise ValueError(f"unknown statistic {stat!r}")


def extremal_search(n: int, stat: str, symmetry_reduction: bool = False) -> tuple[int, Permutation]:
    """Minimum of a statistic over all n-permutations, with the
    lexicographically first minimizer.

    With ``symmetry_reduction`` only the lexicographically least member of
    each symmetry class is evaluated: reverse/complement/inverse for ``t``,
    reverse/complement for ``bt`` and ``tt``.
    """
    key = "tt_max" if stat == "tt" else stat
    fn, with_inverse = _stat(key)
    if n > EXTREMAL_LIMITS[key]:
        raise CostGuardError(f"extremal search for {key} is limited to n <= {EXTREMAL_LIMITS[key]}")
    best = None
    witness = None
    for entries in permutations(range(1, n + 1)):
        if symmetry_reduction and min(symmetry_images(entries, with_inverse)) < entries:
            continue
        v = fn(entries)
        if best is None or v < best:
            best, witness = v, entries
    return best, Permutation._trusted(witness)
