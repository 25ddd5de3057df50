import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SAMPLE
from permtwin.heuristic import (
    MatchingStrategy,
    build_block_graph,
    default_block_size,
    default_cprime,
    es_split_twins,
    extract_twins,
    match_block_graph,
    matching_outcome,
    matching_twins,
)
from permtwin.perm import TwinPair, random_permutation, verify_twin_pair


def graph_inputs(max_n=60):
    return st.integers(4, max_n).flatmap(
        lambda n: st.tuples(st.permutations(list(range(1, n + 1))), st.integers(1, n))
    )


def test_es_split_examples():
    assert es_split_twins((1, 2, 3, 4, 5)) == TwinPair((1, 2), (3, 4))
    pair = es_split_twins((5, 4, 3, 2, 1))
    assert len(pair) == 2 and verify_twin_pair((5, 4, 3, 2, 1), pair)
    assert len(es_split_twins(SAMPLE)) == 2
    assert es_split_twins((1,)) == TwinPair.empty()


def test_block_size_defaults():
    assert default_block_size(1000) == math.ceil(3000 ** (1 / 3) - 1e-9) == 15
    assert default_block_size(9) == 3  # 27 is a perfect cube
    assert default_block_size(1000, mode="log") == math.ceil((3000 * math.log(1000)) ** (1 / 3))
    assert default_cprime(3) == 12
    with pytest.raises(ValueError):
        default_block_size(10, mode="nope")


def test_block_graph_example():
    g = build_block_graph(SAMPLE, 3)
    assert g.edges == [(1, 2), (2, 3)]
    assert g.counts.toarray().tolist() == [[1, 2, 0], [1, 0, 2], [1, 1, 1]]


def test_block_graph_identity_and_trivial():
    g = build_block_graph(tuple(range(1, 13)), 4)
    assert g.edges == [(1, 1), (2, 2), (3, 3)]
    assert (g.counts.diagonal() == 4).all()
    assert build_block_graph(random_permutation(20, 3), 1).num_edges == 0
    with pytest.raises(ValueError):
        build_block_graph(SAMPLE, 0)
    with pytest.raises(ValueError):
        build_block_graph(SAMPLE, 10)


def test_partial_blocks_dropped():
    p = random_permutation(23, 5)
    g = build_block_graph(p, 5)
    assert g.m == 4 and g.counts.shape == (4, 4)


@given(graph_inputs())
@settings(max_examples=300, deadline=None)
def test_graph_invariants(args):
    p, a = args
    g = build_block_graph(p, a)
    X = g.counts.toarray()
    dense = np.zeros((g.m, g.m), dtype=int)
    for s, v in enumerate(p):
        i, j = s // a, (v - 1) // a
        if i < g.m and j < g.m:
            dense[i, j] += 1
    assert (X == dense).all()
    # every entry of a full block lands in a full or the trailing value block
    span = g.m * a
    in_full_values = [sum(1 for v in p[i * a : (i + 1) * a] if v <= span) for i in range(g.m)]
    assert X.sum(axis=1).tolist() == in_full_values
    in_full_positions = [sum(1 for v in p[:span] if j * a < v <= (j + 1) * a) for j in range(g.m)]
    assert X.sum(axis=0).tolist() == in_full_positions
    if a * g.m == len(p):
        assert (X.sum(axis=1) == a).all() and (X.sum(axis=0) == a).all()
    assert g.max_degree <= a // 2
    assert sorted(g.edges) == [(i + 1, j + 1) for i, j in zip(*np.nonzero(X >= 2))]


def _nx_matching_size(g):
    G = nx.Graph()
    left = [("L", i) for i in range(g.m)]
    G.add_nodes_from(left)
    G.add_nodes_from(("R", j) for j in range(g.m))
    G.add_edges_from((("L", int(i)), ("R", int(j))) for i, j in zip(g.edge_rows, g.edge_cols))
    return len(nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)) // 2


def _is_matching(edges, g):
    es = set(zip(g.edge_rows.tolist(), g.edge_cols.tolist()))
    return (
        all(e in es for e in edges)
        and len({i for i, _ in edges}) == len(edges)
        and len({j for _, j in edges}) == len(edges)
    )


@given(graph_inputs(120))
@settings(max_examples=200, deadline=None)
def test_matchings(args):
    p, a = args
    g = build_block_graph(p, a)
    mx = match_block_graph(g, "maximum")
    gr = match_block_graph(g, "greedy")
    tr = match_block_graph(g, MatchingStrategy("truncated", 2))
    for m in (mx, gr, tr):
        assert _is_matching(m, g)
    assert len(mx) == _nx_matching_size(g)
    assert len(mx) >= len(gr) and len(mx) >= len(tr)
    if g.num_edges:
        assert len(gr) >= g.num_edges / (2 * g.max_degree)
    for m in (mx, gr, tr):
        pair = extract_twins(p, a, m)
        assert len(pair) == len(m) and verify_twin_pair(p, pair)


def test_truncation_removes_high_degree():
    p = tuple(range(1, 65))
    g = build_block_graph(p, 8)  # every vertex has degree 1
    assert match_block_graph(g, MatchingStrategy("truncated", 1)) == []
    assert len(match_block_graph(g, MatchingStrategy("truncated", 2))) == 8


def test_matching_twins_examples():
    out = matching_outcome(SAMPLE, 3, "greedy")
    assert out.pair == TwinPair((1, 4), (3, 6))
    assert [SAMPLE[i - 1] for i in out.pair.first] == [6, 7]
    assert [SAMPLE[i - 1] for i in out.pair.second] == [4, 9]
    for strat in ("greedy", "maximum", "truncated"):
        assert len(matching_twins(tuple(range(1, 17)), 4, strat)) == 4
    assert len(matching_twins((2, 1, 4, 3, 6, 5), 1)) == 0
    with pytest.raises(ValueError):
        matching_twins((1, 2, 3))
    with pytest.raises(ValueError):
        MatchingStrategy("truncated", 0)
    with pytest.raises(ValueError):
        MatchingStrategy("bogus")


def test_matching_twins_default_block_size():
    p = random_permutation(5000, 17)
    out = matching_outcome(p)
    assert out.graph.a == default_block_size(5000)
    assert verify_twin_pair(p, out.pair)
    assert len(out.pair) > 0
