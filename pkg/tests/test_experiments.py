import math

import numpy as np
import pytest

from conftest import NO_TIGHT_18, SAMPLE
from permtwin.bounds import edge_prob
from permtwin.exact import CostGuardError, exact_block_twins
from permtwin.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    block_independence_check,
    bt_theory,
    derive_seeds,
    edge_prob_monte_carlo,
    fit_loglog,
    pigeonhole_block_finder,
    read_csv,
    run_trials,
    summarize,
    theory_ratio_bt,
    write_csv,
)
from permtwin.perm import derive_seed, is_similar, random_permutation


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("nope", [10], 1)
    with pytest.raises(ValueError):
        ExperimentConfig("es_len", [10], 0)
    with pytest.raises(ValueError):
        ExperimentConfig("es_len", [3], 1)
    with pytest.raises(ValueError):
        ExperimentConfig("es_len", [], 1)
    with pytest.raises(ValueError):
        ExperimentConfig("matching_len", [10], 1, strategy="best")
    with pytest.raises(ValueError):
        ExperimentConfig.from_json({"stat": "es_len", "ns": [10], "trials": 1, "colour": 1})


def test_config_json_roundtrip():
    cfg = ExperimentConfig("matching_len", [64, 16], 3, 5, strategy="greedy", a=4)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    assert ExperimentConfig.from_json({"stat": "es_len", "n": 9, "trials": 2}).ns == (9,)


def test_bt_exact_reproducible():
    cfg = ExperimentConfig("bt_exact", [100], 10, 1)
    a, b = run_trials(cfg), run_trials(cfg)
    assert len(a) == 10 and a == b
    for r in a:
        assert r.seed == derive_seed(1, 100, r.trial)
        assert r.value == exact_block_twins(random_permutation(100, r.seed)).k


def test_identity_hook_matching():
    cfg = ExperimentConfig("matching_len", [16], 1, 1, a=4,
                           permutation_hook=lambda n, t: range(1, n + 1))
    (rec,) = run_trials(cfg)
    assert rec.value == 4


@pytest.mark.parametrize("stat", ["matching_len", "es_len", "bt_exact", "tt_profile",
                                  "edge_count", "max_degree"])
def test_every_stat_runs(stat):
    recs = run_trials(ExperimentConfig(stat, [12, 20], 3, 7))
    assert [(r.n, r.trial) for r in recs] == [(n, t) for n in (12, 20) for t in range(3)]
    assert all(r.value >= 0 for r in recs)


def test_stats_against_direct_computation():
    from permtwin.heuristic import build_block_graph, default_block_size, es_split_twins
    from permtwin.exact import tight_twins_scan

    seed = derive_seed(3, 30, 0)
    p = random_permutation(30, seed)
    g = build_block_graph(p, default_block_size(30))
    expect = {
        "es_len": len(es_split_twins(p)),
        "tt_profile": tight_twins_scan(p).max_length,
        "edge_count": g.num_edges,
        "max_degree": g.max_degree,
    }
    for stat, v in expect.items():
        assert run_trials(ExperimentConfig(stat, [30], 1, 3))[0].value == v


def test_cost_guards():
    with pytest.raises(CostGuardError):
        run_trials(ExperimentConfig("tt_profile", [41], 1))
    with pytest.raises(CostGuardError):
        run_trials(ExperimentConfig("bt_exact", [10**7], 1))


def test_threads_give_identical_csv():
    cfg = ExperimentConfig("matching_len", [64, 256], 6, 11)
    one = write_csv(run_trials(cfg, threads=1))
    two = write_csv(run_trials(cfg, threads=2))
    assert one == two


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("PERMTWIN_THREADS", "2")
    cfg = ExperimentConfig("es_len", [40], 4, 2)
    assert run_trials(cfg) == run_trials(cfg, threads=1)
    with pytest.raises(ValueError):
        run_trials(cfg, threads=0)


def test_csv_format():
    recs = run_trials(ExperimentConfig("es_len", [10], 2, 3))
    text = write_csv(recs)
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert "\r" not in text and text.endswith("\n")
    assert lines[1].startswith("es_len,10,0,") and lines[1].endswith(",")
    assert read_csv(text)[0].value == recs[0].value
    timed = run_trials(ExperimentConfig("es_len", [10], 1, 3, timing=True))
    assert timed[0].millis is not None and not write_csv(timed).split("\n")[1].endswith(",")


def test_csv_float_precision():
    from permtwin.experiments import TrialRecord

    text = write_csv([TrialRecord("x", 4, 0, 1, 1 / 3)])
    assert text.split("\n")[1].split(",")[4] == "0.33333333333333331"


def test_summarize():
    recs = run_trials(ExperimentConfig("es_len", [10, 20], 5, 3))
    s = summarize(recs)
    assert [x.n for x in s] == [10, 20] and all(x.count == 5 for x in s)
    vals = [r.value for r in recs if r.n == 10]
    assert s[0].mean == pytest.approx(np.mean(vals))


def test_fit_loglog():
    fit = fit_loglog([(n, n ** (2 / 3)) for n in (10, 100, 1000, 10**4)])
    assert fit.slope == pytest.approx(2 / 3) and fit.residual == pytest.approx(0, abs=1e-12)
    assert fit_loglog([(n, 3 * n) for n in (2, 4, 8)]).slope == pytest.approx(1)
    with pytest.raises(ValueError):
        fit_loglog([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_loglog([(1, 1), (2, 0), (3, 1)])


def test_theory_ratio():
    n = 1000
    assert theory_ratio_bt(n, 2 * math.log(n) / math.log(math.log(n))) == pytest.approx(1)
    assert theory_ratio_bt(n, 0) == 0
    assert bt_theory(10**5) == pytest.approx(9.4234, abs=1e-3)
    with pytest.raises(ValueError):
        theory_ratio_bt(15, 1)


def test_pigeonhole_examples():
    assert pigeonhole_block_finder(tuple(range(1, 13)), 2) == (1, 3)
    assert pigeonhole_block_finder((2, 1, 3, 4), 2) is None
    for p in (tuple(range(1, 22)), tuple(range(21, 0, -1)), SAMPLE + tuple(range(10, 22)),
              NO_TIGHT_18 + (19, 20, 21)):
        i, j = pigeonhole_block_finder(p, 3)
        assert i < j and is_similar(p[i - 1 : i + 2], p[j - 1 : j + 2])
    with pytest.raises(ValueError):
        pigeonhole_block_finder(SAMPLE, 0)


def test_derive_seeds_vectorized():
    got = derive_seeds(5, 77, np.arange(50)).tolist()
    assert got == [derive_seed(5, 77, t) for t in range(50)]


def test_edge_prob_monte_carlo_small():
    exact = float(edge_prob(40, 4))
    est = edge_prob_monte_carlo(40, 4, 20000, 1)
    assert abs(est.mean - exact) <= 4 * est.stderr
    with pytest.raises(ValueError):
        edge_prob_monte_carlo(10, 6, 10)


def test_block_independence_small_sample():
    est = block_independence_check(2 * 10**5, seed=4)
    assert abs(est.mean) <= 4 * est.stderr
