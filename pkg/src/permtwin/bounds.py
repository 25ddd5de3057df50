"""First-moment bounds, exact edge probabilities and Local Lemma certificates.

Certificates evaluate both sides in interval arithmetic (``mpmath.iv``). A row
passes only when the upper end of the left side is at most the lower end of the
right side, and reported floats are rounded outward in the same direction, so
a "pass" is a rigorous inequality rather than a floating-point coincidence.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Any, Mapping, NamedTuple, Optional, Sequence

import mpmath
from mpmath.libmp import mpf_le, to_float

from .exact import contains_pattern
from .perm import pattern_key

iv = mpmath.iv
IV_PREC = 113
AVOIDER_LIMIT = 9


@contextmanager
def _iv_precision(prec: int = IV_PREC):
    old = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = old


def _iv_frac(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _up(x) -> float:
    return to_float(x._mpi_[1], rnd="c")


def _down(x) -> float:
    return to_float(x._mpi_[0], rnd="f")


def _le(x, y) -> bool:
    """Rigorous ``x <= y`` over every point of both intervals."""
    return bool(mpf_le(x._mpi_[1], y._mpi_[0]))


# --- reports -------------------------------------------------------------------


@dataclass
class CertificateRow:
    params: dict
    lhs: float  # rounded up
    rhs: float  # rounded down
    passed: bool

    def to_json(self) -> dict:
        return {"params": self.params, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@dataclass
class CertificateReport:
    name: str
    params: dict
    rows: list[CertificateRow]
    scale: str = "linear"  # "log" when lhs/rhs are natural logarithms
    note: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[CertificateRow]:
        return [r for r in self.rows if not r.passed]

    def to_json(self, rows: bool = True) -> dict:
        out: dict[str, Any] = {
            "certificate": self.name,
            "params": self.params,
            "scale": self.scale,
            "pass": self.passed,
            "note": self.note,
        }
        out.update(self.extras)
        if rows:
            out["rows"] = [r.to_json() for r in self.rows]
        else:
            out["failed_rows"] = [r.to_json() for r in self.failures()]
        return out


# --- first moment ------------------------------------------------------------------


class FirstMomentBound(NamedTuple):
    bound: float
    log_bound: float
    min_k: Optional[int]  # least k with bound < 1


def _gawron_log(n: int, k: int) -> float:
    return k * (2 * math.log(n) + 3 - 3 * math.log(k))


def _tau_log(n: int, k: int, c: float) -> float:
    return -math.log(2) + 2 * k * (math.log(n) + 0.5 * math.log(c) + 2 - 2 * math.log(k))


def _first_k_below_one(log_fn) -> int:
    k = 1
    while log_fn(k) >= 0:
        k += 1
    return k


def _exp(x: float) -> float:
    return math.exp(x) if x < 709 else math.inf


def gawron_first_moment(n: int, k: int, scan: bool = True) -> FirstMomentBound:
    """``(n^2 e^3 / k^3)^k``, the first-moment bound on the expected number of
    twin pairs of length k in a random n-permutation."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    lb = _gawron_log(n, k)
    min_k = _first_k_below_one(lambda j: _gawron_log(n, j)) if scan else None
    return FirstMomentBound(_exp(lb), lb, min_k)


def tau_first_moment(n: int, k: int, c: float, scan: bool = True) -> FirstMomentBound:
    """``(1/2) (n c^(1/2) e^2 / k^2)^(2k)``: expected number of tau-free twin
    pairs of length k when at most ``c^k`` k-permutations avoid tau."""
    if n < 1 or k < 1 or c <= 0:
        raise ValueError("need n, k >= 1 and c > 0")
    lb = _tau_log(n, k, c)
    min_k = _first_k_below_one(lambda j: _tau_log(n, j, c)) if scan else None
    return FirstMomentBound(_exp(lb), lb, min_k)


def count_avoiders(k: int, tau: Sequence[int]) -> int:
    """Number of k-permutations with no subsequence similar to ``tau``."""
    if k > AVOIDER_LIMIT:
        from .exact import CostGuardError

        raise CostGuardError(f"count_avoiders is limited to k <= {AVOIDER_LIMIT}")
    tau = pattern_key(tau)
    return sum(1 for p in permutations(range(1, k + 1)) if not contains_pattern(p, tau))


# --- edge probability ----------------------------------------------------------------


class EdgeDistribution(NamedTuple):
    p0: Fraction
    p1: Fraction
    p_ge2: Fraction


def edge_distribution(n: int, a: int) -> EdgeDistribution:
    """Exact law of ``X = |{s in A_i : perm(s) in V_j}|`` for two blocks of size a.

    ``P(X=0) = C(n-a, a) / C(n, a)`` and ``P(X=1) = a^2 / (n-2a+1) * P(X=0)``,
    evaluated in exact rational arithmetic.
    """
    if not (1 <= a and 2 * a <= n):
        raise ValueError(f"need 1 <= a <= n/2, got n={n}, a={a}")
    p0 = Fraction(math.comb(n - a, a), math.comb(n, a))
    p1 = Fraction(a * a, n - 2 * a + 1) * p0
    return EdgeDistribution(p0, p1, 1 - p0 - p1)


def edge_prob(n: int, a: int, mode: str = "exact"):
    """``P(X_ij >= 2)``: an exact ``Fraction`` or the asymptotic ``a^4 / (2 n^2)``."""
    if mode == "exact":
        return edge_distribution(n, a).p_ge2
    if mode == "asymptotic":
        return a**4 / (2 * n**2)
    raise ValueError(f"unknown mode {mode!r}")


# --- symmetric Local Lemma for block twins ---------------------------------------------


def block_lll_n(k: int) -> int:
    """``floor((k-1)! / (4e))``, the host size used for the block-twin bound."""
    with _iv_precision():
        x = iv.mpf(math.factorial(k - 1)) / (4 * iv.e)
        lo, hi = math.floor(_down(x)), math.floor(_up(x))
    if lo != hi:
        raise ArithmeticError("floor is not determined at working precision")
    return lo


def lll_symmetric_block(k: int, n: int) -> CertificateReport:
    """Check ``e p (D + 1) <= 1`` for the events "windows at i and j are block
    twins of length k" with ``p = 1/k!`` and ``D = 2(2k-1)(n-k)``.

    For ``n < 2k`` there are no events at all; ``D`` is clamped at 0 and the
    note records that the statement is vacuous.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    degree = max(0, 2 * (2 * k - 1) * (n - k))
    with _iv_precision():
        lhs = iv.e * iv.mpf(degree + 1) / iv.mpf(math.factorial(k))
        ok = _le(lhs, iv.mpf(1))
        row = CertificateRow({"k": k, "n": n, "p": f"1/{k}!", "Delta": degree}, _up(lhs), 1.0, ok)
    note = "e*p*(Delta+1) <= 1"
    if n < 2 * k:
        note += "; vacuous: no two disjoint k-windows fit in n"
    return CertificateReport("lll-block", {"k": k, "n": n}, [row], "linear", note)


# --- multiple-version Local Lemma for tight twins ----------------------------------------


class ScheduleError(ValueError):
    """A Local Lemma schedule outside the range the certificate can handle."""


@dataclass(frozen=True)
class Schedule:
    """Weights ``x_s``: ``exceptional[s]`` where given, else ``ratio ** s``."""

    ratio: Fraction = Fraction(2, 3)
    exceptional: Mapping[int, Fraction] = field(default_factory=dict)

    def x(self, s: int) -> Fraction:
        v = self.exceptional.get(s)
        return v if v is not None else self.ratio**s

    def tail_start(self, r_min: int) -> int:
        """First s from which every weight is geometric."""
        exc = [s for s in self.exceptional if s >= r_min]
        return max(exc) + 1 if exc else r_min

    def to_json(self) -> dict:
        return {
            "ratio": str(self.ratio),
            "exceptional": {str(s): str(v) for s, v in sorted(self.exceptional.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Schedule":
        exc = {int(s): Fraction(str(v)) for s, v in dict(data.get("exceptional", {})).items()}
        return cls(Fraction(str(data.get("ratio", "2/3"))), exc)


DEFAULT_SCHEDULE = Schedule()
VARIANT_SCHEDULE = Schedule(Fraction(2, 3), {12: Fraction(9, 500)})


def tight_event_prob(r: int) -> Fraction:
    """``p_r = C(2r, r) / (2 r!)``: union bound for a 2r-window splitting into twins."""
    return Fraction(math.comb(2 * r, r), 2 * math.factorial(r))


def _validate(schedule: Schedule, r_min: int, r_max: int) -> int:
    q = schedule.ratio
    if not 0 < q < 1:
        raise ScheduleError(f"geometric ratio {q} must lie in (0, 1)")
    if r_min < 2 or r_max < r_min:
        raise ScheduleError("need 2 <= r_min <= r_max")
    t0 = schedule.tail_start(r_min)
    if r_max < t0:
        raise ScheduleError(f"r_max={r_max} must reach the geometric tail (starts at {t0})")
    for s in range(r_min, t0 + 1):
        x = schedule.x(s)
        if not 0 < x <= Fraction(1, 2):
            raise ScheduleError(
                f"x_{s} = {x} is outside (0, 1/2]; the bound 1 - x >= exp(-2x) needs x <= 1/2"
            )
    return t0


def lll_tight_certificate(
    schedule: Schedule = DEFAULT_SCHEDULE,
    r_min: int = 13,
    r_max: int = 1000,
    exact_terms: int = 200,
) -> CertificateReport:
    """Certify ``p_r <= x_r prod_{s >= r_min} (1 - x_s)^(2r + 2s - 1)`` for all r >= r_min.

    Events are "the window of length 2r splits into tight twins", one class per
    r >= r_min. Factors for s below ``tail_start + exact_terms`` are evaluated
    exactly; beyond that ``1 - x >= exp(-2x)`` and ``2r + 2s - 1 <= 2(r + s)``
    give a closed-form geometric tail. Rows cover ``r_min..r_max`` (log scale).
    The last row extends the result to every r > r_max: the log-margin grows by
    ``log q + 2 sum log(1 - x_s) - 4 sum_tail x_s - log(p_{r+1} / p_r)`` per step,
    and that increment is increasing in r, so it suffices at ``r = r_max``.
    """
    t0 = _validate(schedule, r_min, r_max)
    q = schedule.ratio
    cut = t0 + exact_terms
    rows: list[CertificateRow] = []
    with _iv_precision():
        log_q = iv.log(_iv_frac(q))
        A = iv.mpf(0)
        B = iv.mpf(0)
        for s in range(r_min, cut):
            term = iv.log(1 - _iv_frac(schedule.x(s)))
            A += term
            B += (2 * s - 1) * term
        qa = _iv_frac(q) ** cut
        one_minus_q = 1 - _iv_frac(q)
        S0 = qa / one_minus_q
        S1 = qa * (cut * one_minus_q + _iv_frac(q)) / one_minus_q**2
        p = tight_event_prob(r_min)
        log_p = iv.log(iv.mpf(p.numerator)) - iv.log(iv.mpf(p.denominator))
        for r in range(r_min, r_max + 1):
            x = schedule.exceptional.get(r)
            log_x = iv.log(_iv_frac(x)) if x is not None else r * log_q
            log_rhs = log_x + 2 * r * A + B - 4 * (r * S0 + S1)
            rows.append(CertificateRow({"r": r}, _up(log_p), _down(log_rhs), _le(log_p, log_rhs)))
            step = iv.log(iv.mpf(2 * (2 * r + 1))) - 2 * iv.log(iv.mpf(r + 1))
            if r < r_max:
                log_p = log_p + step
        growth = log_q + 2 * A - 4 * S0
        rows.append(
            CertificateRow(
                {"r": f">{r_max}", "test": "ratio"}, _up(step), _down(growth), _le(step, growth)
            )
        )
        closed = _closed_form(schedule, r_min) if not schedule.exceptional else None
    note = (
        f"rows r={r_min}..{r_max}: log p_r <= log rhs_r; exact factors for s < {cut}, "
        f"exp(-2x) tail bound beyond; final row extends to all r > {r_max}"
    )
    return CertificateReport(
        "lll-tight",
        {"r_min": r_min, "r_max": r_max, "schedule": schedule.to_json(), "exact_terms": exact_terms},
        rows,
        "log",
        note,
        {"closed_form": closed},
    )


def _closed_form(schedule: Schedule, r0: int) -> dict:
    """Single-inequality form at ``r0`` for a purely geometric schedule, every
    factor replaced by ``exp(-2 x_s)``.

    ``f(r) = x_r exp(-4 sum_{s >= r_min} x_s (r + s)) / p_r`` and
    ``f(r+1)/f(r) = q exp(-4 sum x_s) (r+1)^2 / (2(2r+1))``. For the default
    schedule at r0 = 13 these are ``x_r e^{-12 r q^13} e^{-180 q^13} / p_r`` and
    ``(r+1)^2/(6r+3) e^{-12 q^13}``.
    """
    q = _iv_frac(schedule.ratio)
    S0 = q**r0 / (1 - q)
    S1 = q**r0 * (r0 * (1 - q) + q) / (1 - q) ** 2
    p = tight_event_prob(r0)
    f = q**r0 * iv.exp(-4 * (r0 * S0 + S1)) * iv.mpf(p.denominator) / iv.mpf(p.numerator)
    ratio = q * iv.exp(-4 * S0) * iv.mpf((r0 + 1) ** 2) / iv.mpf(2 * (2 * r0 + 1))
    return {
        "r": r0,
        "f": _down(f),
        "ratio": _down(ratio),
        "pass": _le(iv.mpf(1), f) and _le(iv.mpf(1), ratio),
    }
