"""Scalable twin finders: monotone splitting and block-graph matchings.

The block graph has one left vertex per run of ``a`` consecutive positions
and one right vertex per run of ``a`` consecutive values; ``(i, j)`` is an
edge when block ``i`` puts at least two of its entries into value run ``j``.
Any matching ``(i_1, j_1), ..., (i_m, j_m)`` with ``i_1 < ... < i_m`` yields
twins of length ``m``: take two such entries per matched block, the earlier
one for the first twin. Their relative order is dictated by the ``j``'s, so
both sides carry the same pattern.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .perm import TwinPair, longest_monotone

STRATEGIES = ("greedy", "maximum", "truncated")
BLOCK_MODES = ("plain", "log")


def es_split_twins(perm: Sequence[int]) -> TwinPair:
    """Split a longest monotone subsequence into its two halves."""
    if len(perm) < 2:
        return TwinPair.empty()
    run = longest_monotone(perm)
    h = run.length // 2
    return TwinPair(run.witness[:h], run.witness[h : 2 * h])


def _ceil_root3(x: float) -> int:
    a = math.ceil(x ** (1.0 / 3.0))
    while a > 1 and (a - 1) ** 3 >= x:
        a -= 1
    while a**3 < x:
        a += 1
    return a


def default_block_size(n: int, C: float = 3.0, mode: str = "plain") -> int:
    """``ceil((C n)^(1/3))`` in plain mode, ``ceil((C n ln n)^(1/3))`` in log mode."""
    if mode not in BLOCK_MODES:
        raise ValueError(f"unknown block mode {mode!r}")
    x = C * n if mode == "plain" else C * n * math.log(max(n, 2))
    return max(1, min(n, _ceil_root3(x)))


def default_cprime(C: float = 3.0) -> int:
    return math.ceil(math.e**2 * C / 2)


@dataclass(frozen=True)
class BipartiteBlockGraph:
    """Block graph of a permutation. Vertex and edge arrays are zero-based;
    ``edges`` gives the one-based ``(i, j)`` pairs.

    When ``a`` does not divide ``n`` the trailing partial position block and
    value block are left out, so ``m = n // a`` vertices per side.
    """

    n: int
    a: int
    m: int
    counts: sp.csr_matrix
    edge_rows: np.ndarray
    edge_cols: np.ndarray
    left_degrees: np.ndarray
    right_degrees: np.ndarray

    @property
    def num_edges(self) -> int:
        return len(self.edge_rows)

    @property
    def max_degree(self) -> int:
        if not self.m:
            return 0
        return int(max(self.left_degrees.max(initial=0), self.right_degrees.max(initial=0)))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(i) + 1, int(j) + 1) for i, j in zip(self.edge_rows, self.edge_cols)]

    def biadjacency(self, keep_rows=None, keep_cols=None) -> sp.csr_matrix:
        rows, cols = self.edge_rows, self.edge_cols
        if keep_rows is not None:
            sel = keep_rows[rows] & keep_cols[cols]
            rows, cols = rows[sel], cols[sel]
        data = np.ones(len(rows), dtype=np.int8)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.m, self.m))


def build_block_graph(perm: Sequence[int], a: int) -> BipartiteBlockGraph:
    p = np.asarray(perm, dtype=np.int64)
    n = len(p)
    if not 1 <= a <= n:
        raise ValueError(f"block size a={a} outside [1, {n}]")
    m = n // a
    span = m * a
    pos_block = np.arange(span, dtype=np.int64) // a
    val_block = (p[:span] - 1) // a
    keep = val_block < m
    codes = pos_block[keep] * m + val_block[keep]
    uniq, cnt = np.unique(codes, return_counts=True)
    rows, cols = uniq // m, uniq % m
    counts = sp.csr_matrix((cnt, (rows, cols)), shape=(m, m), dtype=np.int64)
    is_edge = cnt >= 2
    er, ec = rows[is_edge], cols[is_edge]
    return BipartiteBlockGraph(
        n=n,
        a=a,
        m=m,
        counts=counts,
        edge_rows=er,
        edge_cols=ec,
        left_degrees=np.bincount(er, minlength=m),
        right_degrees=np.bincount(ec, minlength=m),
    )


@dataclass(frozen=True)
class MatchingStrategy:
    kind: str = "maximum"
    cprime: Optional[int] = None  # used by "truncated" only

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown matching strategy {self.kind!r}")
        if self.cprime is not None and self.cprime < 1:
            raise ValueError("cprime must be >= 1")


def _greedy(rows: np.ndarray, cols: np.ndarray, m: int) -> list[tuple[int, int]]:
    left = bytearray(m)
    right = bytearray(m)
    out = []
    for i, j in zip(rows.tolist(), cols.tolist()):
        if not left[i] and not right[j]:
            left[i] = right[j] = 1
            out.append((i, j))
    return out


def match_block_graph(
    graph: BipartiteBlockGraph, strategy: MatchingStrategy | str = "maximum", C: float = 3.0
) -> list[tuple[int, int]]:
    """Matched edges (zero-based), sorted by left vertex."""
    if isinstance(strategy, str):
        strategy = MatchingStrategy(strategy)
    if graph.num_edges == 0:
        return []
    if strategy.kind == "greedy":
        return _greedy(graph.edge_rows, graph.edge_cols, graph.m)
    if strategy.kind == "truncated":
        cp = strategy.cprime if strategy.cprime is not None else default_cprime(C)
        keep_l = graph.left_degrees < cp
        keep_r = graph.right_degrees < cp
        sel = keep_l[graph.edge_rows] & keep_r[graph.edge_cols]
        return _greedy(graph.edge_rows[sel], graph.edge_cols[sel], graph.m)
    mate = maximum_bipartite_matching(graph.biadjacency(), perm_type="column")
    return [(i, int(j)) for i, j in enumerate(mate) if j >= 0]


def extract_twins(perm: Sequence[int], a: int, matched: Sequence[tuple[int, int]]) -> TwinPair:
    """Turn matched block edges into a twin pair (one-based positions)."""
    p = np.asarray(perm, dtype=np.int64)
    first, second = [], []
    for i, j in sorted(matched):
        start = i * a
        hits = np.flatnonzero((p[start : start + a] - 1) // a == j)
        first.append(start + int(hits[0]) + 1)
        second.append(start + int(hits[1]) + 1)
    return TwinPair(tuple(first), tuple(second))


@dataclass
class MatchingOutcome:
    pair: TwinPair
    graph: BipartiteBlockGraph
    matched: list[tuple[int, int]] = field(default_factory=list)


def matching_outcome(
    perm: Sequence[int],
    a: Optional[int] = None,
    strategy: MatchingStrategy | str = "maximum",
    C: float = 3.0,
    block_mode: str = "plain",
) -> MatchingOutcome:
    n = len(perm)
    if n < 4:
        raise ValueError("matching twins need n >= 4")
    if a is None:
        a = default_block_size(n, C, block_mode)
    graph = build_block_graph(perm, a)
    matched = match_block_graph(graph, strategy, C)
    return MatchingOutcome(extract_twins(perm, a, matched), graph, matched)


def matching_twins(
    perm: Sequence[int],
    a: Optional[int] = None,
    strategy: MatchingStrategy | str = "maximum",
    C: float = 3.0,
    block_mode: str = "plain",
) -> TwinPair:
    """Twins from a matching in the block graph.

    ``a`` defaults to :func:`default_block_size`; the strategy defaults to a
    maximum (Hopcroft-Karp) matching.
    """
    return matching_outcome(perm, a, strategy, C, block_mode).pair
