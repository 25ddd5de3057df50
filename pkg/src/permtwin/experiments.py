"""Seeded Monte Carlo trials over random permutations, with CSV output.

Trial ``t`` at size ``n`` uses the permutation ``random_permutation(n,
derive_seed(master, n, t))``, so any single record can be replayed alone and
results do not depend on how trials are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from . import _backend
from .exact import CostGuardError, exact_block_twins, tight_twins_scan
from .heuristic import (
    BLOCK_MODES,
    STRATEGIES,
    MatchingStrategy,
    build_block_graph,
    default_block_size,
    es_split_twins,
    matching_outcome,
)
from .perm import derive_seed, pattern_key, random_array, verify_twin_pair
from ._pykernels import GOLDEN

STATS = ("matching_len", "es_len", "bt_exact", "tt_profile", "edge_count", "max_degree")
# largest n accepted per statistic; the others scale to any n that fits in memory
COST_GUARDS = {"bt_exact": 10**6, "tt_profile": 40}
CSV_HEADER = ("stat", "n", "trial", "seed", "value", "millis")


@dataclass(frozen=True)
class ExperimentConfig:
    stat: str
    ns: tuple[int, ...]
    trials: int
    seed: int = 0
    strategy: str = "maximum"
    block_mode: str = "plain"
    C: float = 3.0
    a: Optional[int] = None
    cprime: Optional[int] = None
    timing: bool = False
    # test hook: (n, trial) -> permutation used instead of the seeded draw
    permutation_hook: Optional[Callable[[int, int], Sequence[int]]] = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        if self.stat not in STATS:
            raise ValueError(f"unknown stat {self.stat!r}; choose from {', '.join(STATS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.ns:
            raise ValueError("at least one n is required")
        if min(self.ns) < 4:
            raise ValueError("every n must be >= 4")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.block_mode not in BLOCK_MODES:
            raise ValueError(f"unknown block mode {self.block_mode!r}")

    def check_cost(self) -> None:
        limit = COST_GUARDS.get(self.stat)
        if limit is not None and max(self.ns) > limit:
            raise CostGuardError(f"{self.stat} is limited to n <= {limit} (got n={max(self.ns)})")

    def block_size(self, n: int) -> int:
        return self.a if self.a is not None else default_block_size(n, self.C, self.block_mode)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("permutation_hook")
        d["ns"] = list(self.ns)
        return d

    @classmethod
    def from_json(cls, data: Mapping) -> "ExperimentConfig":
        data = dict(data)
        if "n" in data and "ns" not in data:
            n = data.pop("n")
            data["ns"] = n if isinstance(n, (list, tuple)) else [n]
        known = {f for f in cls.__dataclass_fields__ if f != "permutation_hook"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**data)


@dataclass(frozen=True)
class TrialRecord:
    stat: str
    n: int
    trial: int
    seed: int
    value: float
    millis: Optional[float] = None


def _stat_value(cfg: ExperimentConfig, perm: np.ndarray) -> int:
    n = len(perm)
    if cfg.stat == "es_len":
        pair = es_split_twins(perm.tolist())
    elif cfg.stat == "matching_len":
        strategy = MatchingStrategy(cfg.strategy, cfg.cprime)
        pair = matching_outcome(perm, cfg.block_size(n), strategy, cfg.C).pair
    elif cfg.stat == "bt_exact":
        pair = exact_block_twins(perm).pair()
    elif cfg.stat == "tt_profile":
        rep = tight_twins_scan(perm.tolist())
        pair = rep.witness
        if pair is None:
            return rep.max_length
    else:
        graph = build_block_graph(perm, cfg.block_size(n))
        return graph.num_edges if cfg.stat == "edge_count" else graph.max_degree
    if not verify_twin_pair(perm, pair):
        raise RuntimeError(f"{cfg.stat} produced an invalid witness at n={n}")
    return len(pair)


def _run_one(cfg: ExperimentConfig, n: int, trial: int) -> TrialRecord:
    seed = derive_seed(cfg.seed, n, trial)
    t0 = time.perf_counter()
    if cfg.permutation_hook is not None:
        perm = np.asarray(cfg.permutation_hook(n, trial), dtype=np.int64)
    else:
        perm = random_array(n, seed)
    value = _stat_value(cfg, perm)
    millis = (time.perf_counter() - t0) * 1e3 if cfg.timing else None
    return TrialRecord(cfg.stat, n, trial, seed, value, millis)


def _run_chunk(cfg: ExperimentConfig, jobs: list[tuple[int, int]]) -> list[TrialRecord]:
    return [_run_one(cfg, n, t) for n, t in jobs]


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("PERMTWIN_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def run_trials(config: ExperimentConfig, threads: Optional[int] = None) -> list[TrialRecord]:
    """Run every (n, trial) job; records come back sorted by n, then trial.

    With ``threads > 1`` jobs are spread over a process pool. Output is the
    same for any worker count.
    """
    config.check_cost()
    workers = resolve_threads(threads)
    jobs = [(n, t) for n in sorted(set(config.ns)) for t in range(config.trials)]
    if workers == 1 or config.permutation_hook is not None or len(jobs) == 1:
        records = _run_chunk(config, jobs)
    else:
        chunks = [jobs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [config] * len(chunks), chunks)
            records = [r for part in parts for r in part]
    records.sort(key=lambda r: (r.n, r.trial))
    return records


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) or (isinstance(v, float) and v.is_integer()):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(records: Iterable[TrialRecord], out: Optional[io.TextIOBase] = None) -> str:
    """Serialize records (header ``stat,n,trial,seed,value,millis``, LF endings).

    ``millis`` stays empty unless the config asked for timing, which keeps
    files from identical configs byte-identical.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.stat, r.n, r.trial, r.seed, _fmt(r.value), _fmt(r.millis)])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def read_csv(text: str) -> list[TrialRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [
        TrialRecord(
            r["stat"], int(r["n"]), int(r["trial"]), int(r["seed"]), float(r["value"]),
            float(r["millis"]) if r["millis"] else None,
        )
        for r in rows
    ]


class Summary(NamedTuple):
    n: int
    count: int
    mean: float
    std: float

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.count) if self.count > 1 else math.nan


def summarize(records: Iterable[TrialRecord]) -> list[Summary]:
    by_n: dict[int, list[float]] = {}
    for r in records:
        by_n.setdefault(r.n, []).append(float(r.value))
    out = []
    for n in sorted(by_n):
        v = np.asarray(by_n[n])
        out.append(Summary(n, len(v), float(v.mean()), float(v.std(ddof=1)) if len(v) > 1 else 0.0))
    return out


class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    residual: float  # root-mean-square residual in log space


def fit_loglog(points: Sequence[tuple[float, float]]) -> LogLogFit:
    """Least-squares line through ``(log n, log mean)``."""
    ns = sorted({float(n) for n, _ in points})
    if len(ns) < 3:
        raise ValueError("need at least 3 distinct n values")
    if any(m <= 0 for _, m in points):
        raise ValueError("means must be positive for a log-log fit")
    x = np.log([float(n) for n, _ in points])
    y = np.log([float(m) for _, m in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return LogLogFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def bt_theory(n: int) -> float:
    """``2 ln n / ln ln n``, the leading term for block twins in random permutations."""
    return 2 * math.log(n) / math.log(math.log(n))


def theory_ratio_bt(n: int, observed_mean: float) -> float:
    if n < 16:
        raise ValueError("theory ratio needs n >= 16")
    return observed_mean / bt_theory(n)


def pigeonhole_block_finder(perm: Sequence[int], k: int) -> Optional[tuple[int, int]]:
    """Cut ``perm`` into consecutive blocks of length k and return the
    one-based starts of the first two similar blocks, or ``None``.

    Success is certain once there are more than ``k!`` blocks.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seen: dict[tuple, int] = {}
    for b in range(len(perm) // k):
        key = pattern_key(perm[b * k : (b + 1) * k])
        if key in seen:
            return seen[key] * k + 1, b * k + 1
        seen[key] = b
    return None


# --- vectorized checks ------------------------------------------------------------


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def derive_seeds(master: int, n: int, trials: np.ndarray) -> np.ndarray:
    """Vectorized ``derive_seed(master, n, t)`` over an array of trial indices."""
    head = np.uint64(derive_seed(master, n))
    with np.errstate(over="ignore"):
        t = np.asarray(trials, dtype=np.uint64) + np.uint64(GOLDEN)
        return _mix64_array(head ^ _mix64_array(t))


class Estimate(NamedTuple):
    mean: float
    stderr: float
    trials: int


def edge_prob_monte_carlo(n: int, a: int, trials: int, seed: int = 0) -> Estimate:
    """Estimate ``P(X_ij >= 2)`` from random permutations.

    Each trial draws only the first position block (``a`` entries) and
    records the fraction of full value blocks that receive at least two of
    them. Trials are independent, so the standard error comes from their
    spread.
    """
    if not 1 <= a <= n // 2:
        raise ValueError("need 1 <= a <= n/2")
    m = n // a
    prefix = _backend.kernels.random_prefix
    seeds = derive_seeds(seed, n, np.arange(trials))
    rows = np.empty((trials, a), dtype=np.int64)
    for t, s in enumerate(seeds.tolist()):
        rows[t] = prefix(n, a, s)
    blocks = np.sort((rows - 1) // a, axis=1)
    blocks = np.where(blocks < m, blocks, -1 - np.arange(a))  # partial block never pairs
    dup = blocks[:, 1:] == blocks[:, :-1]
    run_start = dup & ~np.concatenate([np.zeros((trials, 1), bool), dup[:, :-1]], axis=1)
    frac = run_start.sum(axis=1) / m
    se = float(frac.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    return Estimate(float(frac.mean()), se, trials)


# disjoint segments for the block-twin independence check (one-based, k=2, n=12);
# the first A is disjoint from every other segment, later pairs may overlap
INDEPENDENCE_SEGMENTS = (((1, 2), (3, 4)), ((4, 5), (7, 8)), ((8, 9), (11, 12)))


def block_independence_check(samples: int = 10**6, seed: int = 0, chunk: int = 10**5) -> Estimate:
    """Estimate ``E[1(E1 E2 E3) - 1(E2 E3) / k!]`` for block-twin events on
    fixed segments of a random 12-permutation, k = 2. Zero mean means the
    first event factors out of the joint probability.
    """
    n, k = 12, 2
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        seeds = derive_seeds(seed, n, np.arange(done, done + size))
        P = _backend.kernels.random_permutations(n, seeds)
        ev = []
        for (a1, a2), (b1, b2) in INDEPENDENCE_SEGMENTS:
            ev.append((P[:, a1 - 1] < P[:, a2 - 1]) == (P[:, b1 - 1] < P[:, b2 - 1]))
        rest = ev[1] & ev[2]
        z = (ev[0] & rest).astype(float) - rest.astype(float) / math.factorial(k)
        total += float(z.sum())
        total_sq += float((z * z).sum())
        done += size
    mean = total / samples
    var = (total_sq - samples * mean * mean) / (samples - 1)
    return Estimate(mean, math.sqrt(var / samples), samples)
