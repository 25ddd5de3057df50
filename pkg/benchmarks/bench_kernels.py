"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each row times one kernel call on identical inputs under both backends and
checks that the outputs agree.
"""
import argparse
import sys
import timeit

from permtwin import _backend
from permtwin.exact import exact_twins
from permtwin.perm import derive_seed


def _perm(n, s):
    return _backend.pure.random_permutation(n, derive_seed(42, n, s)).tolist()


def cases(quick):
    n_exact = 16 if quick else 20
    hard = _perm(n_exact, 1)
    # one above the optimum: the level is infeasible, so every subset is visited
    k = exact_twins(hard).k + 1
    yield "random_permutation n=10^5", "random_permutation", (10**5, 7)
    yield "random_prefix n=10^6 m=50", "random_prefix", (10**6, 50, 7)
    yield "random_permutations 2000 x 12", "random_permutations", (12, list(range(2000)))
    yield "contains_pattern n=40, absent 1..11", "contains_pattern", (_perm(40, 2), list(range(1, 12)))
    yield f"twins_at_length n={n_exact} k={k}", "twins_at_length", (hard, k, None, None)
    yield f"twins_at_length n={n_exact} k={k - 1} tau", "twins_at_length", (hard, k - 1, None, [2, 1, 3])
    yield "tight_split 2r=16 (x20 windows)", "tight_split_many", [_perm(16, s) for s in range(20)]


def _call(mod, name, args):
    if name == "tight_split_many":
        return [mod.tight_split(w) for w in args]
    return getattr(mod, name)(*args)


def _same(a, b):
    if hasattr(a, "tolist"):
        return a.tolist() == b.tolist()
    if isinstance(a, tuple) and len(a) == 4:  # twins_at_length
        norm = lambda x: (None if x[0] is None else tuple(x[0]), None if x[1] is None else tuple(x[1]), x[2], x[3])
        return norm(a) == norm(b)
    return a == b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller exact-search instance")
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    print(f"{'kernel':40s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>9s}  agree")
    for label, name, call_args in cases(args.quick):
        times = {}
        outs = {}
        for tag, mod in (("pure", _backend.pure), ("compiled", _backend.compiled)):
            outs[tag] = _call(mod, name, call_args)
            times[tag] = min(timeit.repeat(lambda: _call(mod, name, call_args), number=1, repeat=args.repeat))
        ok = _same(outs["pure"], outs["compiled"])
        speed = times["pure"] / times["compiled"] if times["compiled"] else float("inf")
        print(f"{label:40s} {times['pure']:10.4f} {times['compiled']:13.5f} {speed:8.0f}x  {'yes' if ok else 'NO'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
