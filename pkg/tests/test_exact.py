import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NO_TIGHT_18, SAMPLE, all_perms
from permtwin.exact import (
    EXACT_LIMIT,
    CostGuardError,
    SearchStatus,
    contains_pattern,
    exact_block_twins,
    exact_twins,
    exact_twins_avoiding,
    extremal_search,
    oracle_twins_3color,
    tight_block_scan,
    tight_twins_scan,
    tight_window_split,
)
from permtwin.perm import (
    PermutationError,
    TwinPair,
    apply_symmetry,
    is_similar,
    longest_monotone,
    random_permutation,
    verify_twin_pair,
)

small_perms = st.integers(1, 8).flatmap(lambda n: st.permutations(list(range(1, n + 1))))


# --- brute-force references -----------------------------------------------------


def brute_block(p):
    n = len(p)
    for k in range(n // 2, 0, -1):
        for i in range(n - 2 * k + 1):
            for j in range(i + k, n - k + 1):
                if is_similar(p[i : i + k], p[j : j + k]):
                    return k, i + 1, j + 1
    return 0, None, None


def brute_tight_block(p):
    n = len(p)
    for k in range(n // 2, 0, -1):
        for i in range(n - 2 * k + 1):
            if is_similar(p[i : i + k], p[i + k : i + 2 * k]):
                return k, i + 1
    return 0, None


def brute_window_splits(w):
    m = len(w) // 2
    for A in itertools.combinations(range(len(w)), m):
        B = [i for i in range(len(w)) if i not in A]
        if is_similar([w[i] for i in A], [w[i] for i in B]):
            return True
    return False


# --- twins ------------------------------------------------------------------------


def test_exact_twins_examples():
    r = exact_twins((1, 2, 3, 4))
    assert r.k == 2 and r.optimal and verify_twin_pair((1, 2, 3, 4), r.witness)
    assert exact_twins((2, 1)).k == 1
    r = exact_twins(SAMPLE)
    assert r.k == oracle_twins_3color(SAMPLE) == 4
    assert verify_twin_pair(SAMPLE, r.witness)


def test_exact_twins_degenerate():
    assert exact_twins(()).k == 0
    assert exact_twins((1,)).k == 0
    assert exact_twins((1,)).witness == TwinPair.empty()


def test_oracle_examples():
    assert oracle_twins_3color((1, 2, 3, 4)) == 2
    assert oracle_twins_3color((1,)) == 0
    with pytest.raises(CostGuardError):
        oracle_twins_3color(tuple(range(1, 12)))


@pytest.mark.parametrize("n", range(1, 7))
def test_exact_matches_oracle_exhaustive(n):
    for p in all_perms(n):
        r = exact_twins(p)
        assert r.k == oracle_twins_3color(p)
        assert verify_twin_pair(p, r.witness) and len(r.witness) == r.k


@given(small_perms)
@settings(max_examples=150, deadline=None)
def test_exact_twins_lower_bound_and_witness(p):
    r = exact_twins(p)
    assert r.k >= longest_monotone(p).length // 2
    assert verify_twin_pair(p, r.witness)


def test_exact_twins_cost_guard_and_budget():
    big = random_permutation(EXACT_LIMIT + 5, 1)
    with pytest.raises(CostGuardError):
        exact_twins(big)
    r = exact_twins(big, budget=50)
    assert r.status is SearchStatus.BEST_SO_FAR
    assert r.k <= r.upper_bound
    assert verify_twin_pair(big, r.witness)
    assert r.to_json()["status"] == "best_so_far"


def test_generous_budget_is_optimal():
    p = random_permutation(12, 4)
    assert exact_twins(p, budget=10**9) == exact_twins(p)


def test_deterministic_witness():
    p = random_permutation(14, 8)
    assert exact_twins(p) == exact_twins(p)


# --- pattern containment and avoidance ------------------------------------------------


def test_contains_pattern_examples():
    assert contains_pattern(SAMPLE, (1, 3, 2))
    assert not contains_pattern((3, 2, 1), (1, 2))
    assert contains_pattern(SAMPLE, SAMPLE)
    with pytest.raises(ValueError):
        contains_pattern((1, 2), ())


def test_avoiding_examples():
    assert exact_twins_avoiding((1, 2, 3, 4, 5, 6), (1, 2)).k == 1
    assert exact_twins_avoiding((6, 5, 4, 3, 2, 1), (2, 1)).k == 1
    r = exact_twins_avoiding(SAMPLE, (1, 3, 2))
    assert r.k == oracle_twins_3color(SAMPLE, (1, 3, 2)) == 3
    assert verify_twin_pair(SAMPLE, r.witness)
    assert not contains_pattern([SAMPLE[i - 1] for i in r.witness.first], (1, 3, 2))


@pytest.mark.parametrize("tau", [(1, 2), (2, 1), (1, 3, 2), (2, 3, 1), (1, 2, 3)])
def test_avoiding_matches_filtered_oracle(tau):
    for s in range(40):
        n = 3 + s % 6
        p = random_permutation(n, s + 1000 * len(tau))
        r = exact_twins_avoiding(p, tau)
        assert r.k == oracle_twins_3color(p, tau)
        assert r.k <= exact_twins(p).k
        assert verify_twin_pair(p, r.witness)
        if r.k:
            assert not contains_pattern([p[i - 1] for i in r.witness.first], tau)


def test_avoiding_equals_plain_when_tau_too_long():
    p = random_permutation(9, 5)
    k = exact_twins(p).k
    assert exact_twins_avoiding(p, tuple(range(1, k + 2))).k == k


# --- block twins -----------------------------------------------------------------------


def test_block_twins_examples():
    assert (exact_block_twins((1, 2, 3, 4)).k, exact_block_twins((1, 2, 3, 4)).start_first) == (2, 1)
    assert exact_block_twins((1, 2, 3, 4)).start_second == 3
    assert exact_block_twins((2, 1)).k == 1
    assert exact_block_twins((1,)).k == 0
    assert exact_block_twins(()).pair() == TwinPair.empty()


def test_block_twins_nine_element_example():
    p = (6, 5, 2, 3, 8, 9, 7, 1, 4)
    # the windows (5,2,3) and (7,1,4) are similar block twins of length 3 ...
    assert is_similar(p[1:4], p[6:9])
    # ... but the optimum is longer: (6,5,2,3) and (9,7,1,4) share pattern (4,3,1,2)
    bt = exact_block_twins(p)
    assert (bt.k, bt.start_first, bt.start_second) == brute_block(p) == (4, 1, 6)
    assert verify_twin_pair(p, bt.pair())


@given(small_perms)
@settings(max_examples=300, deadline=None)
def test_block_twins_match_brute_force(p):
    bt = exact_block_twins(p)
    assert (bt.k, bt.start_first, bt.start_second) == brute_block(p)


def test_block_twins_large_random():
    for s in range(5):
        p = random_permutation(60, s)
        bt = exact_block_twins(p)
        assert (bt.k, bt.start_first, bt.start_second) == brute_block(p)


def test_tight_block_examples():
    assert tight_block_scan((6, 9, 5, 2, 3, 7, 1, 4, 8)) == (3, 3)
    assert tight_block_scan((1, 2, 3, 4)) == (2, 1)
    assert tight_block_scan((2, 1)) == (1, 1)
    assert tight_block_scan((1,)) == (0, None)


@given(small_perms)
@settings(max_examples=300, deadline=None)
def test_tight_block_matches_brute_force(p):
    assert tight_block_scan(p) == brute_tight_block(p)


# --- tight twins -------------------------------------------------------------------------


def test_tight_split_examples():
    w = (5, 7, 1, 2, 3, 4)
    pair = tight_window_split(w)
    assert verify_twin_pair(w, pair)
    # lexicographically first coloring; the split (5,2,3)/(7,1,4) also works
    assert pair == TwinPair((1, 3, 4), (2, 5, 6))
    assert verify_twin_pair(w, TwinPair((1, 4, 5), (2, 3, 6)))
    assert tight_window_split((1, 2)) == TwinPair((1,), (2,))
    assert tight_window_split((1, 4, 3, 2)) is None


def test_tight_split_errors():
    with pytest.raises(ValueError):
        tight_window_split((1, 2, 3))
    with pytest.raises(PermutationError):
        tight_window_split((1, 1))


@given(st.integers(1, 5).flatmap(lambda r: st.permutations(list(range(1, 2 * r + 1)))))
@settings(max_examples=300, deadline=None)
def test_tight_split_matches_brute_force(w):
    pair = tight_window_split(w)
    assert (pair is not None) == brute_window_splits(w)
    if pair is not None:
        assert verify_twin_pair(w, pair)
        assert sorted(pair.first + pair.second) == list(range(1, len(w) + 1))


def test_tight_scan_examples():
    p = (6, 5, 7, 1, 2, 3, 4, 9, 8)
    rep = tight_twins_scan(p)
    # windows of length 6 from position 2 split, and so does one of length 8
    assert rep.per_length[3]
    assert rep.max_length == 4 and rep.witness_start == 2
    assert verify_twin_pair(p, rep.witness)
    assert tight_twins_scan((1, 2)).max_length == 1
    assert tight_twins_scan((1,)).max_length == 0


def test_tight_scan_18_fixture():
    rep = tight_twins_scan(NO_TIGHT_18)
    assert all(not rep.per_length[r] for r in range(3, 10))
    assert rep.max_length == 2
    assert verify_twin_pair(NO_TIGHT_18, rep.witness)


@given(small_perms)
@settings(max_examples=200, deadline=None)
def test_tight_scan_per_length_matches_brute_force(p):
    rep = tight_twins_scan(p)
    for r in range(1, len(p) // 2 + 1):
        expect = any(brute_window_splits(p[s : s + 2 * r]) for s in range(len(p) - 2 * r + 1))
        assert rep.per_length[r] == expect
    if rep.max_length:
        assert rep.per_length[rep.max_length]
        assert verify_twin_pair(p, rep.witness)
        assert max(rep.witness.first + rep.witness.second) - min(rep.witness.first + rep.witness.second) \
            == 2 * rep.max_length - 1


def test_tight_twins_claim_six():
    # a monotone run of length 3 starting at position 1 or 2 forces tight twins
    # of length 2 in any 6-permutation
    checked = 0
    for p in all_perms(6):
        runs = [p[s : s + 3] for s in (0, 1)]
        if any(list(r) == sorted(r) or list(r) == sorted(r, reverse=True) for r in runs):
            checked += 1
            assert tight_twins_scan(p).max_length >= 2
    assert checked > 0


# --- invariance and extremal ---------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 7))
def test_statistics_invariant_under_symmetries(n):
    for p in all_perms(n):
        t = exact_twins(p).k
        bt = exact_block_twins(p).k
        tt = tight_twins_scan(p).max_length
        for s in ("reverse", "complement"):
            q = apply_symmetry(p, s)
            assert exact_twins(q).k == t
            assert exact_block_twins(q).k == bt
            assert tight_twins_scan(q).max_length == tt
        assert exact_twins(apply_symmetry(p, "inverse")).k == t


def test_extremal_examples():
    assert extremal_search(2, "t") == (1, (1, 2))
    assert extremal_search(6, "tt")[0] >= 2
    v5, w5 = extremal_search(5, "t")
    assert v5 == min(oracle_twins_3color(p) for p in all_perms(5)) == 2
    assert exact_twins(w5).k == v5


@pytest.mark.parametrize("stat", ["t", "bt", "tt"])
@pytest.mark.parametrize("n", range(1, 7))
def test_extremal_symmetry_reduction_agrees(stat, n):
    full = extremal_search(n, stat)
    reduced = extremal_search(n, stat, symmetry_reduction=True)
    assert full[0] == reduced[0]


def test_extremal_limits():
    with pytest.raises(CostGuardError):
        extremal_search(10, "t")
    with pytest.raises(ValueError):
        extremal_search(3, "nope")
