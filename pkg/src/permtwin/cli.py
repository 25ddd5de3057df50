"""``permtwin`` command-line interface.

JSON (or CSV for trial data) goes to stdout or ``--output``; a short human
summary goes to stderr. Exit codes: 0 success, 1 property violated, 2 usage
error, 3 budget exhausted or cost guard refusal.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from . import __version__, _backend
from .bounds import (
    DEFAULT_SCHEDULE,
    Schedule,
    ScheduleError,
    block_lll_n,
    count_avoiders,
    edge_distribution,
    edge_prob,
    gawron_first_moment,
    lll_symmetric_block,
    lll_tight_certificate,
    tau_first_moment,
)
from .exact import (
    CostGuardError,
    exact_block_twins,
    exact_twins,
    exact_twins_avoiding,
    extremal_search,
    oracle_twins_3color,
    tight_block_scan,
    tight_twins_scan,
    tight_window_split,
)
from .experiments import (
    ExperimentConfig,
    edge_prob_monte_carlo,
    pigeonhole_block_finder,
    run_trials,
    summarize,
    write_csv,
)
from .heuristic import BLOCK_MODES, STRATEGIES, MatchingStrategy, es_split_twins, matching_outcome
from .perm import (
    PermutationError,
    TwinPair,
    parse_permutation,
    parse_values,
    pattern_key,
    random_permutation,
    verify_twin_pair,
)

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Outcome:
    """Result of a subcommand: a JSON payload, a summary line and an exit code."""

    def __init__(self, payload: Any, summary: str = "", code: int = EXIT_OK, csv: Optional[str] = None):
        self.payload = payload
        self.summary = summary
        self.code = code
        self.csv = csv


# --- input helpers -------------------------------------------------------------


def _read_arg(text: str) -> str:
    """Inline text, ``@path`` for a file, or ``-`` for stdin."""
    if text == "-":
        return sys.stdin.read()
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return fh.read()
    return text


def _json_arg(text: str) -> Any:
    raw = text
    if not text.lstrip().startswith(("{", "[")) and text != "-" and os.path.exists(text):
        raw = "@" + text
    try:
        return json.loads(_read_arg(raw))
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON: {exc}") from exc


def _input_lines(args) -> list[str]:
    if args.perm is not None and args.input is not None:
        raise UsageError("give a permutation inline or with --input, not both")
    if args.perm is not None:
        return [args.perm]
    if args.input is None:
        raise UsageError("no permutation given (positional argument or --input)")
    src = _read_arg("-" if args.input == "-" else "@" + args.input)
    lines = [ln for ln in src.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise UsageError("input holds no permutation")
    return lines


def _per_perm(args, fn: Callable[[Any], Outcome], parse=parse_permutation) -> Outcome:
    outs = [fn(parse(line)) for line in _input_lines(args)]
    if len(outs) == 1:
        return outs[0]
    return Outcome(
        [o.payload for o in outs],
        "\n".join(o.summary for o in outs),
        max(o.code for o in outs),
    )


def _pair_json(pair: Optional[TwinPair]) -> Optional[dict]:
    return pair.to_json() if pair is not None else None


# --- subcommands -------------------------------------------------------------------


def _twins(args) -> Outcome:
    mode = args.mode

    def run(p):
        if mode == "exact":
            res = exact_twins(p, args.budget)
        elif mode == "avoiding":
            if args.tau is None:
                raise UsageError("twins avoiding needs --tau")
            res = exact_twins_avoiding(p, parse_permutation(args.tau), args.budget)
        elif mode == "oracle":
            k = oracle_twins_3color(p, parse_permutation(args.tau) if args.tau else None)
            return Outcome({"n": len(p), "k": k}, f"oracle twin length {k}")
        else:
            return _heur(args, p)
        code = EXIT_OK if res.optimal else EXIT_REFUSED
        summary = f"twin length {res.k} ({res.status.value}"
        summary += ")" if res.optimal else f", true value <= {res.upper_bound})"
        return Outcome({"n": len(p), **res.to_json()}, summary, code)

    return _per_perm(args, run)


def _heur(args, p) -> Outcome:
    if args.method == "es":
        pair = es_split_twins(p)
        return Outcome({"n": len(p), "method": "es", "k": len(pair), "witness": pair.to_json()},
                       f"monotone split twins of length {len(pair)}")
    strategy = MatchingStrategy(args.strategy, args.cprime)
    out = matching_outcome(p, args.a, strategy, args.C, args.block_mode)
    g = out.graph
    payload = {
        "n": len(p),
        "method": "matching",
        "strategy": args.strategy,
        "a": g.a,
        "blocks": g.m,
        "edges": g.num_edges,
        "max_degree": g.max_degree,
        "k": len(out.pair),
        "witness": out.pair.to_json(),
    }
    return Outcome(payload, f"matching twins of length {len(out.pair)} (a={g.a}, {g.num_edges} edges)")


def _block(args) -> Outcome:
    def run(p):
        if args.mode == "exact":
            bt = exact_block_twins(p)
            return Outcome({"n": len(p), **bt.to_json()}, f"block twins of length {bt.k}")
        if args.k is None:
            raise UsageError("block pigeonhole needs --k")
        hit = pigeonhole_block_finder(p, args.k)
        if hit is None:
            return Outcome({"n": len(p), "k": args.k, "found": False},
                           f"no two similar blocks of length {args.k}", EXIT_VIOLATED)
        i, j = hit
        pair = TwinPair(tuple(range(i, i + args.k)), tuple(range(j, j + args.k)))
        return Outcome({"n": len(p), "k": args.k, "found": True, "start_first": i,
                        "start_second": j, "witness": pair.to_json()},
                       f"similar blocks at {i} and {j}")

    return _per_perm(args, run)


def _tight(args) -> Outcome:
    if args.mode == "scan":
        def run(p):
            rep = tight_twins_scan(p, args.max_half)
            return Outcome({"n": len(p), **rep.to_json()}, f"longest tight twins: {rep.max_length}")
        return _per_perm(args, run)

    def split(w):
        if len(w) % 2:
            raise UsageError("window length must be even")
        pair = tight_window_split(w)
        if pair is None:
            return Outcome({"window": list(w), "split": None}, "window does not split into twins",
                           EXIT_VIOLATED)
        return Outcome({"window": list(w), "split": pair.to_json()}, "window splits into twins")

    return _per_perm(args, split, parse=parse_values)


def _tightblock(args) -> Outcome:
    def run(p):
        k, start = tight_block_scan(p)
        return Outcome({"n": len(p), "k": k, "start": start}, f"adjacent similar windows of length {k}")
    return _per_perm(args, run)


def _extremal(args) -> Outcome:
    value, witness = extremal_search(args.n, args.stat, args.symmetry_reduction)
    return Outcome(
        {"n": args.n, "stat": args.stat, "min": value, "witness": list(witness)},
        f"min {args.stat} over n={args.n}: {value} at {witness}",
    )


def _schedule(text: Optional[str]) -> Schedule:
    if text is None:
        return DEFAULT_SCHEDULE
    data = _json_arg(text)
    try:
        return Schedule.from_json(data)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad schedule: {exc}") from exc


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"cert {args.kind} needs {' '.join(missing)}")


def _cert(args) -> Outcome:
    kind = args.kind
    if kind in ("gawron", "tau"):
        _need(args, "n")
        if kind == "tau":
            if args.c is None and args.tau is None:
                raise UsageError("cert tau needs --c or --tau")
        c = args.c
        extra = {}
        if kind == "tau" and c is None:
            tau = parse_permutation(args.tau)
            k0 = max(len(tau), args.avoider_k)
            d = count_avoiders(k0, tau)
            c = d ** (1.0 / k0)
            extra = {"tau": list(tau), "avoider_k": k0, "avoiders": d}
        k = args.k
        if kind == "gawron":
            b = gawron_first_moment(args.n, k if k is not None else 1)
            limit = math.ceil(math.e * args.n ** (2 / 3)) + 1
        else:
            b = tau_first_moment(args.n, k if k is not None else 1, c)
            limit = math.ceil(math.e * c**0.25 * math.sqrt(args.n)) + 1
        payload = {"certificate": kind, "params": {"n": args.n, **({"c": c} if kind == "tau" else {})},
                   "min_k": b.min_k, "min_k_limit": limit, "pass": b.min_k <= limit, **extra}
        if k is not None:
            payload["params"]["k"] = k
            payload.update({"log_bound": b.log_bound, "bound": b.bound, "below_one": b.log_bound < 0})
        return Outcome(payload, f"least k with bound < 1: {b.min_k} (limit {limit})",
                       EXIT_OK if payload["pass"] else EXIT_VIOLATED)
    if kind == "edgeprob":
        _need(args, "n", "a")
        if args.mode == "asymptotic":
            v = edge_prob(args.n, args.a, "asymptotic")
            return Outcome({"certificate": kind, "params": {"n": args.n, "a": args.a},
                            "mode": "asymptotic", "p_ge2": v}, f"a^4/(2n^2) = {v:.6g}")
        d = edge_distribution(args.n, args.a)
        payload = {
            "certificate": kind,
            "params": {"n": args.n, "a": args.a},
            "mode": "exact",
            "p0": str(d.p0), "p1": str(d.p1), "p_ge2": str(d.p_ge2),
            "p_ge2_float": float(d.p_ge2),
            "asymptotic": edge_prob(args.n, args.a, "asymptotic"),
        }
        if args.mc_trials:
            est = edge_prob_monte_carlo(args.n, args.a, args.mc_trials, args.seed)
            payload["monte_carlo"] = est._asdict()
        return Outcome(payload, f"P(X >= 2) = {d.p_ge2} ~ {float(d.p_ge2):.6g}")
    if kind == "lll-block":
        _need(args, "k")
        n = args.n if args.n is not None else block_lll_n(args.k)
        rep = lll_symmetric_block(args.k, n)
    else:
        rep = lll_tight_certificate(_schedule(args.schedule), args.r_min, args.r_max, args.exact_terms)
    payload = rep.to_json(rows=not args.failed_only)
    summary = f"{rep.name}: {'pass' if rep.passed else 'FAIL'}"
    if not rep.passed:
        summary += f" ({len(rep.failures())} failing rows, first {rep.failures()[0].params})"
    csv_text = None
    if args.format == "csv":
        lines = ["param,lhs,rhs,pass"]
        for r in rep.rows:
            key = ";".join(f"{k}={v}" for k, v in r.params.items())
            lines.append(f"{key},{r.lhs!r},{r.rhs!r},{str(r.passed).lower()}")
        csv_text = "\n".join(lines) + "\n"
    return Outcome(payload, summary, EXIT_OK if rep.passed else EXIT_VIOLATED, csv_text)


def _mc(args) -> Outcome:
    data = _json_arg(args.config)
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    try:
        cfg = ExperimentConfig.from_json(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    records = run_trials(cfg, args.threads)
    stats = summarize(records)
    summary = "; ".join(f"n={s.n}: mean {s.mean:.4g} over {s.count}" for s in stats)
    payload = {"config": cfg.to_json(),
               "summary": [dict(s._asdict(), stderr=s.stderr) for s in stats],
               "records": [r.__dict__ for r in records]}
    fmt = args.format or "csv"
    return Outcome(payload, summary, csv=write_csv(records) if fmt == "csv" else None)


def _verify(args) -> Outcome:
    data = _json_arg(args.pair)
    if isinstance(data, dict) and "witness" in data:
        data = data["witness"]
    try:
        pair = TwinPair.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"pair JSON needs 'first' and 'second' index lists: {exc}") from exc

    def run(p):
        try:
            ok = verify_twin_pair(p, pair)
        except IndexError as exc:
            raise UsageError(str(exc)) from exc
        payload = {"n": len(p), "pair": pair.to_json(), "valid": ok}
        if ok:
            payload["pattern"] = list(pattern_key(p.values_at(pair.first))) if len(pair) else []
        return Outcome(payload, "valid twins" if ok else "not a pair of twins",
                       EXIT_OK if ok else EXIT_VIOLATED)

    return _per_perm(args, run)


def _random(args) -> Outcome:
    p = random_permutation(args.n, args.seed)
    return Outcome({"n": args.n, "seed": args.seed, "permutation": list(p)}, str(p))


# --- parser --------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    # shared output options, accepted before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    p.add_argument("-o", "--output", default=argparse.SUPPRESS, help="write machine output here")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker processes (default: $PERMTWIN_THREADS or 1)")
    p.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                   help="no summary on stderr")
    return p


def _perm_input(p: argparse.ArgumentParser, what: str = "permutation") -> None:
    p.add_argument("perm", nargs="?", help=f"{what} inline, e.g. '6 1 4 7 3 9 8 2 5'")
    p.add_argument("-i", "--input", help=f"file with one {what} per line ('-' for stdin)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="permtwin", parents=[common],
                                     description="Twins in permutations: exact search, "
                                     "heuristics, bound certificates and Monte Carlo trials.")
    parser.add_argument("--version", action="version",
                        version=f"permtwin {__version__} ({_backend.NAME} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    tw = sub.add_parser("twins", parents=[common], help="longest twins")
    tw.add_argument("mode", choices=("exact", "oracle", "avoiding", "heur"))
    _perm_input(tw)
    tw.add_argument("--tau", help="forbidden pattern for 'avoiding' (optional for 'oracle')")
    tw.add_argument("--budget", type=int, help="node budget; lifts the size limit of 'exact'")
    tw.add_argument("--method", choices=("es", "matching"), default="matching")
    tw.add_argument("--block-mode", choices=BLOCK_MODES, default="plain")
    tw.add_argument("--a", type=int, help="block size (default from n, C and block mode)")
    tw.add_argument("--C", type=float, default=3.0)
    tw.add_argument("--strategy", choices=STRATEGIES, default="maximum")
    tw.add_argument("--cprime", type=int, help="degree cutoff for 'truncated'")
    tw.set_defaults(func=_twins)

    bl = sub.add_parser("block", parents=[common], help="block twins")
    bl.add_argument("mode", choices=("exact", "pigeonhole"))
    _perm_input(bl)
    bl.add_argument("--k", type=int, help="block length for 'pigeonhole'")
    bl.set_defaults(func=_block)

    ti = sub.add_parser("tight", parents=[common], help="tight twins")
    ti.add_argument("mode", choices=("scan", "split"))
    _perm_input(ti, "permutation (or window for 'split')")
    ti.add_argument("--max-half", type=int, help="largest half-length to scan")
    ti.set_defaults(func=_tight)

    tb = sub.add_parser("tightblock", parents=[common], help="adjacent similar windows")
    tb.add_argument("mode", choices=("scan",))
    _perm_input(tb)
    tb.set_defaults(func=_tightblock)

    ex = sub.add_parser("extremal", parents=[common], help="minimum of a statistic over all n-permutations")
    ex.add_argument("--stat", choices=("t", "bt", "tt"), required=True)
    ex.add_argument("--n", type=int, required=True)
    ex.add_argument("--symmetry-reduction", action="store_true")
    ex.set_defaults(func=_extremal)

    ce = sub.add_parser("cert", parents=[common], help="first-moment and Local Lemma checks")
    ce.add_argument("kind", choices=("gawron", "tau", "edgeprob", "lll-block", "lll-tight"))
    ce.add_argument("--n", type=int)
    ce.add_argument("--k", type=int)
    ce.add_argument("--c", type=float, help="avoider growth constant for 'tau'")
    ce.add_argument("--tau", help="pattern for 'tau'; c is then derived from avoider counts")
    ce.add_argument("--avoider-k", type=int, default=7, help="k used to estimate c from --tau")
    ce.add_argument("--a", type=int)
    ce.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    ce.add_argument("--mc-trials", type=int, default=0, help="add a Monte Carlo estimate")
    ce.add_argument("--seed", type=int, default=0)
    ce.add_argument("--schedule", help="JSON schedule {ratio, exceptional}, inline or a file path")
    ce.add_argument("--r-min", type=int, default=13)
    ce.add_argument("--r-max", type=int, default=1000)
    ce.add_argument("--exact-terms", type=int, default=200)
    ce.add_argument("--failed-only", action="store_true", help="list only failing rows")
    ce.set_defaults(func=_cert)

    mc = sub.add_parser("mc", parents=[common], help="Monte Carlo trials")
    mc.add_argument("--config", required=True, help="JSON config, inline or a file path")
    mc.set_defaults(func=_mc)

    ve = sub.add_parser("verify", parents=[common], help="check a twin pair")
    _perm_input(ve)
    ve.add_argument("--pair", required=True, help='JSON {"first": [...], "second": [...]}')
    ve.set_defaults(func=_verify)

    ra = sub.add_parser("random", parents=[common], help="seeded random permutation")
    ra.add_argument("--n", type=int, required=True)
    ra.add_argument("--seed", type=int, required=True)
    ra.set_defaults(func=_random)
    return parser


def _emit(out: Outcome, args) -> None:
    fmt = getattr(args, "format", None)
    if fmt == "csv" and out.csv is None:
        raise UsageError(f"csv output is not available for '{args.command}'")
    text = out.csv if (fmt == "csv" or (fmt is None and args.command == "mc")) and out.csv else None
    if text is None:
        text = json.dumps(out.payload, indent=2, default=_json_default) + "\n"
    path = getattr(args, "output", None)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if out.summary and not getattr(args, "quiet", False):
        print(out.summary, file=sys.stderr)


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        # argparse binds an optional positional before later flags are seen,
        # so "twins avoiding --tau 1,2 PERM" leaves PERM over
        if len(extra) == 1 and not extra[0].startswith("-") and getattr(args, "perm", "") is None:
            args.perm = extra[0]
        elif extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:  # argparse: 0 for --help/--version, 2 for usage
        return int(exc.code or 0)
    if getattr(args, "threads", None) is None:
        args.threads = None
    args.format = getattr(args, "format", None)
    try:
        out = args.func(args)
        _emit(out, args)
        return out.code
    except CostGuardError as exc:
        print(f"permtwin: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (UsageError, PermutationError, ScheduleError, ValueError, OSError) as exc:
        print(f"permtwin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
