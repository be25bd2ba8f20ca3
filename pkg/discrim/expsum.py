"""
Numerical evaluation of the exponential sums behind the analytic half of case I.

For m = delta p^r with delta <= 3 and p = 2 (mod 3), a collision exists as
soon as the count N of pairs (a, b) in [1, X]^2 with f(a, b) + 1 = 0 (mod p^2r),
f(a, b) = delta^4 (a^2 + ab + b^2), is positive. N is expanded into the sums
T_j, which are bounded through Gauss sums, Kloosterman sums and incomplete
geometric sums. This module evaluates every one of those objects directly and
in closed form so that each identity and each bound can be checked.

Phase numerators are always reduced modulo the denominator in exact integer
arithmetic before any trigonometric call, and sums are accumulated with
math.fsum on the real and imaginary parts separately. The one exception is
the "fft" evaluation of T_j, used when the phase table for "direct" would
exceed the term budget.

"""

from dataclasses import dataclass, field
from typing import List, Optional
import logging
import math
import os

import cachetools.func
import numpy as np

from .modarith import (
    DomainError,
    inv_mod,
    is_prime,
    jacobi_prime_power,
    mobius_prime_power,
)

log = logging.getLogger(__name__)

ComplexValue = complex

_DEFAULT_TERM_BUDGET = int(os.environ.get("DISCRIM_TERM_BUDGET", 10**8))
_DEFAULT_TOLERANCE = 1e-6
_WEIL_SLACK = 1e-6
_VANISHING_SCALE = 1e-9
_ROW_BLOCK = 1 << 12
_PHASE_BLOCK = 1 << 21


class BudgetExceededError(RuntimeError):
    """
    Raised when a direct evaluation would exceed the term budget.

    """


class IdentityMismatchError(AssertionError):
    """
    Raised when two evaluations of the same quantity disagree.

    """


@dataclass(frozen=True)
class ExpSumCtx:
    """
    The parameters of the analytic argument for m = delta p^r.

    """

    delta: int
    p: int
    r: int
    X: int
    rho: int

    @property
    def modulus(self) -> int:
        return self.p ** (2 * self.r)

    @property
    def delta4(self) -> int:
        return self.delta**4


@dataclass
class Check:
    name: str
    measured: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "pass": self.passed,
        }


@dataclass
class CheckReport:
    """
    A list of named checks, each a measured value against a bound.

    """

    entries: List[Check] = field(default_factory=list)

    def add(self, name: str, measured: float, bound: float, passed: bool = None):
        if passed is None:
            passed = measured <= bound
        self.entries.append(Check(name, float(measured), float(bound), bool(passed)))

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def to_dict(self) -> List[dict]:
        return [entry.to_dict() for entry in self.entries]


BoundReport = CheckReport


@dataclass(frozen=True)
class ThresholdReport:
    p: int
    r: int
    check1: bool
    check2: Optional[bool]
    check3: bool
    q: float
    f_q: float

    @property
    def relevant_check(self) -> bool:
        return self.check1 if self.p == 5 else self.check3

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "r": self.r,
            "check1": self.check1,
            "check2": self.check2,
            "check3": self.check3,
            "q": self.q,
            "f_q": self.f_q,
        }


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _phases(numerators: np.ndarray, den: int) -> np.ndarray:
    reduced = np.mod(numerators, den)
    return np.exp(2j * np.pi * (reduced / den))


def _check_budget(terms: int, budget: int, what: str):
    if terms > budget:
        raise BudgetExceededError(
            f"{what} needs {terms} terms, above the budget of {budget}."
        )


def _units(q: int, p: int) -> np.ndarray:
    c = np.arange(1, q + 1, dtype=np.int64)
    return c[c % p != 0]


def unit_phase(num: int, den: int) -> ComplexValue:
    """
    Return e(num / den) = exp(2 pi i num / den).

    Arguments:
        num (int): The numerator, any integer
        den (int): The denominator, at least 1

    Returns:
        complex: The unit complex number

    """
    if den < 1:
        raise DomainError(f"Denominator must be at least 1, got {den}.")
    angle = 2 * math.pi * (num % den) / den
    return complex(math.cos(angle), math.sin(angle))


def make_ctx(delta: int, p: int, r: int) -> ExpSumCtx:
    """
    Build the context (delta, p, r, X, rho).

    Arguments:
        delta (int): One of 1, 2, 3
        p (int): A prime >= 5 with p = 2 (mod 3)
        r (int): The exponent, at least 1

    Returns:
        ExpSumCtx: The context with X and rho filled in

    """
    if delta not in (1, 2, 3):
        raise DomainError(f"delta must be 1, 2 or 3, got {delta}.")
    if p < 5 or not is_prime(p):
        raise DomainError(f"p must be a prime >= 5, got {p}.")
    if p % 3 != 2:
        raise DomainError(f"p = {p} is 1 mod 3; that branch is constructive.")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}.")
    if p == 5:
        X, rho = (p * p // 9) * p ** (2 * r - 2), 2 * r - 2
    else:
        X, rho = (p // 9) * p ** (2 * r - 1), 2 * r - 1
    return ExpSumCtx(delta=delta, p=p, r=r, X=X, rho=rho)


def gauss_sum(c: int, p: int, j: int, method: str = "direct") -> ComplexValue:
    """
    Evaluate sum_{a <= p^j} e(c a^2 / p^j).

    Arguments:
        c (int): The coefficient
        p (int): An odd prime
        j (int): The exponent, at least 1
        method (str: "direct"): "direct" sums every term; "closed" uses
            p^(j/2) (c / p^j) eps, with eps = 1 or i as p^j = 1 or 3 mod 4

    Returns:
        complex: The Gauss sum

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    q = p**j
    if method == "direct":
        a = np.arange(1, q + 1, dtype=np.int64)
        return _fsum_complex(_phases((c % q) * (a * a % q), q))
    if method == "closed":
        if c % p == 0:
            raise DomainError(f"Closed form needs gcd(c, p) = 1; {p} | {c}.")
        eps = 1 if q % 4 == 1 else 1j
        return complex(math.sqrt(q) * jacobi_prime_power(c, p, j) * eps)
    raise ValueError(f"Unknown method: {method}. Valid methods are: direct, closed")


def kloosterman(u: int, p: int, j: int) -> ComplexValue:
    """
    Evaluate K(p^j; u) = sum over units c of e((c^-1 u + c) / p^j).

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    q = p**j
    c = _units(q, p)
    inverses = np.array([inv_mod(int(x), q) for x in c], dtype=np.int64)
    return _fsum_complex(_phases(inverses * (u % q) + c, q))


def _closed_form_table(ctx: ExpSumCtx, j: int) -> np.ndarray:
    """
    W[v] = sum over units c of e((inv(3 c delta^4) v + c) / p^j), v in [0, p^j).

    S_j(x, y) = p^j (-3 / p^j) W[(-x^2 + xy - y^2) mod p^j].

    """
    q = ctx.p**j
    c = _units(q, ctx.p)
    inverses = np.array(
        [inv_mod(3 * int(x) * ctx.delta4, q) for x in c], dtype=np.int64
    )
    v = np.arange(q, dtype=np.int64)
    table = np.empty(q, dtype=complex)
    for value in v:
        table[value] = _fsum_complex(_phases(inverses * value + c, q))
    return table


def s_j(x: int, y: int, ctx: ExpSumCtx, j: int, method: str = "direct",
        budget: int = None) -> ComplexValue:
    """
    Evaluate S_j(x, y) = sum over units c and a, b <= p^j of
    e((c f(a, b) + a x + b y + c) / p^j).

    Arguments:
        x, y (int): The linear coefficients
        ctx (ExpSumCtx): The context supplying delta and p
        j (int): The exponent, at least 1
        method (str: "direct"): "direct" triple sum, or "closed" Kloosterman-type
            single sum
        budget (int: None): Term cap for the direct sum

    Returns:
        complex: S_j(x, y)

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    q = ctx.p**j
    if method == "closed":
        c = _units(q, ctx.p)
        quad = (-x * x + x * y - y * y) % q
        inverses = np.array(
            [inv_mod(3 * int(z) * ctx.delta4, q) for z in c], dtype=np.int64
        )
        inner = _fsum_complex(_phases(inverses * quad + c, q))
        return q * jacobi_prime_power(-3, ctx.p, j) * inner
    if method == "direct":
        c = _units(q, ctx.p)
        _check_budget(len(c) * q * q, budget or _DEFAULT_TERM_BUDGET, "S_j direct")
        a, b = np.meshgrid(
            np.arange(1, q + 1, dtype=np.int64),
            np.arange(1, q + 1, dtype=np.int64),
            indexing="ij",
        )
        f = ctx.delta4 * ((a * a + a * b + b * b) % q) % q
        linear = (a * (x % q) + b * (y % q)) % q
        partials = [
            _fsum_complex(_phases(int(unit) * f + linear + int(unit), q).ravel())
            for unit in c
        ]
        return _fsum_complex(np.array(partials))
    raise ValueError(f"Unknown method: {method}. Valid methods are: direct, closed")


@cachetools.func.lru_cache(maxsize=64)
def _residue_histogram(ctx: ExpSumCtx, budget: int) -> np.ndarray:
    """
    Count the pairs (a, b) in [1, X]^2 by the value of f(a, b) + 1 mod p^2r.

    """
    _check_budget(ctx.X * ctx.X, budget, "Histogram over [1, X]^2")
    modulus = ctx.modulus
    counts = np.zeros(modulus, dtype=np.int64)
    b = np.arange(1, ctx.X + 1, dtype=np.int64) % modulus
    for start in range(1, ctx.X + 1, _ROW_BLOCK):
        a = np.arange(start, min(start + _ROW_BLOCK, ctx.X + 1), dtype=np.int64)
        a = (a % modulus)[:, None]
        values = (ctx.delta4 * ((a * a + a * b + b * b) % modulus) + 1) % modulus
        counts += np.bincount(values.ravel(), minlength=modulus)
    counts.setflags(write=False)
    return counts


def ramanujan_sums(p: int, j: int) -> np.ndarray:
    """
    c_q(v) = sum over units c mod q of e(c v / q), for q = p^j and v in [0, q).

    Equals phi(q) when q | v, -p^(j-1) when p^(j-1) || v, and 0 otherwise.
    Exact integers, used to cross-check the phase evaluation of T_j.

    """
    q = p**j
    v = np.arange(q, dtype=np.int64)
    sums = np.zeros(q, dtype=np.int64)
    sums[v % (q // p) == 0] = -(q // p)
    sums[0] = q - q // p
    return sums


def _folded_histogram(ctx: ExpSumCtx, j: int, budget: int) -> np.ndarray:
    """
    Counts of f(a, b) + 1 mod p^j over [1, X]^2.

    """
    return _residue_histogram(ctx, budget).reshape(-1, ctx.p**j).sum(axis=0)


def _evaluation_method(ctx: ExpSumCtx, j: int, budget: int) -> str:
    """
    "direct" when the phase table fits in the budget, "fft" otherwise.

    """
    q = ctx.p**j
    terms = (q - q // ctx.p) * min(q, ctx.X * ctx.X)
    return "direct" if terms <= budget else "fft"


def _incomplete_sums(X: int, q: int, sign: int = 1) -> np.ndarray:
    """
    E[x] = sum_{a <= X} e(sign a x / q) for x = 1 .. q.

    """
    x = np.arange(1, q + 1, dtype=np.int64)
    full, rest = divmod(X, q)
    out = np.empty(q, dtype=complex)
    for i, xi in enumerate(x):
        a = np.arange(1, rest + 1, dtype=np.int64)
        partial = _fsum_complex(_phases(sign * a * int(xi), q)) if rest else 0j
        # Each complete period contributes q at x = q and 0 elsewhere.
        out[i] = partial + (full * q if xi == q else 0)
    return out


def t_j(ctx: ExpSumCtx, j: int, method: str = "direct", budget: int = None) -> ComplexValue:
    """
    Evaluate T_j = sum over units c mod p^j and a, b <= X of
    e((c f(a, b) + c) / p^j).

    Arguments:
        ctx (ExpSumCtx): The context
        j (int): The exponent, 1 <= j <= 2r
        method (str: "direct"): One of
            "direct": e((c v) / p^j) for every unit c and every residue v
            of f(a, b) + 1, weighted by how many pairs reach v
            "fft": the same weighted sum over v, taken with numpy's FFT
            "closed_small_j": X^2 p^-j (-3 / p^j) mu(p^j), for j <= rho
            "transform": p^-2j sum_{x, y} S_j(x, y) E(-x) E(-y), with S_j in
            closed form and E the incomplete sums over [1, X]
        budget (int: None): Term cap for direct evaluation

    Returns:
        complex: T_j

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    budget = budget or _DEFAULT_TERM_BUDGET
    p, q = ctx.p, ctx.p**j

    if method == "closed_small_j":
        if j > ctx.rho:
            raise DomainError(f"Closed form needs j <= rho = {ctx.rho}, got j = {j}.")
        return complex(
            ctx.X * ctx.X / q * jacobi_prime_power(-3, p, j) * mobius_prime_power(p, j)
        )

    if method in ("direct", "fft"):
        if j > 2 * ctx.r:
            raise DomainError(f"j must be at most 2r = {2 * ctx.r}, got {j}.")
        folded = _folded_histogram(ctx, j, budget)
        units = _units(q, p)
        if method == "fft":
            # conj(FFT) gives sum_v folded[v] e(c v / q) at every c.
            spectrum = np.conj(np.fft.fft(folded.astype(float)))
            return _fsum_complex(spectrum[units % q])
        support = np.flatnonzero(folded)
        _check_budget(len(units) * len(support), budget, "T_j direct")
        weights = folded[support].astype(float)
        block = max(1, _PHASE_BLOCK // max(1, len(support)))
        partials = []
        for start in range(0, len(units), block):
            c = units[start:start + block, None]
            partials.append(_fsum_complex(_phases(c * support[None, :], q) @ weights))
        return _fsum_complex(np.array(partials))

    if method == "transform":
        _check_budget(q * q, budget, "T_j transform")
        table = _closed_form_table(ctx, j)
        x = np.arange(1, q + 1, dtype=np.int64)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        quad = (-xx * xx + xx * yy - yy * yy) % q
        s = q * jacobi_prime_power(-3, p, j) * table[quad]
        e = _incomplete_sums(ctx.X, q, sign=-1)
        weights = s * e[:, None] * e[None, :]
        return _fsum_complex(weights.ravel()) / (q * q)

    raise ValueError(
        f"Unknown method: {method}. Valid methods are: direct, fft, closed_small_j, transform"
    )


def n_count(ctx: ExpSumCtx, method: str = "brute", budget: int = None):
    """
    Count N = #{(a, b) in [1, X]^2 : f(a, b) + 1 = 0 (mod p^2r)}.

    Arguments:
        ctx (ExpSumCtx): The context
        method (str: "brute"): "brute" counts exactly and returns an int;
            "expansion" returns X^2 / p^2r + p^-2r sum_j T_j as a float, and
            when rho >= 1 also checks the split with the small-j terms in
            closed form
        budget (int: None): Term cap (X^2 for either method)

    Returns:
        int or float: The count

    """
    budget = budget or _DEFAULT_TERM_BUDGET
    modulus = ctx.modulus
    if method == "brute":
        return int(_residue_histogram(ctx, budget)[0])
    if method == "expansion":
        terms = [
            t_j(ctx, j, _evaluation_method(ctx, j, budget), budget)
            for j in range(1, 2 * ctx.r + 1)
        ]
        main = ctx.X * ctx.X / modulus
        total = main + _fsum_complex(np.array(terms)) / modulus
        if ctx.rho >= 1:
            tail = _fsum_complex(np.array(terms[ctx.rho:])) if ctx.rho < len(terms) else 0j
            split = main * (1 + 1 / ctx.p) + tail / modulus
            scale = _DEFAULT_TOLERANCE * max(1.0, main)
            if abs(split - total) > scale:
                raise IdentityMismatchError(
                    f"Split count {split} disagrees with full expansion {total}."
                )
        log.debug("Expansion for %s: %r", ctx, total)
        return total.real
    raise ValueError(f"Unknown method: {method}. Valid methods are: brute, expansion")


def diagonal_free(ctx: ExpSumCtx) -> bool:
    """
    Return True if f(a, a) + 1 is nonzero mod p^2r for every a <= X.

    """
    a = np.arange(1, ctx.X + 1, dtype=np.int64) % ctx.modulus
    values = (3 * ctx.delta4 * (a * a % ctx.modulus) + 1) % ctx.modulus
    return bool(np.all(values != 0))


def row_sum(X: int, q: int) -> float:
    """
    Return sum_{x <= q} |sum_{a <= X} e(a x / q)|.

    """
    return math.fsum(np.abs(_incomplete_sums(X, q)))


def s_j_max(ctx: ExpSumCtx, j: int) -> float:
    """
    Return max |S_j(x, y)| over all x, y mod p^j, from the closed form.

    """
    q = ctx.p**j
    return float(q * np.max(np.abs(_closed_form_table(ctx, j))))


def count_bound(ctx: ExpSumCtx) -> float:
    """
    The bound on |N - main term| obtained by summing the |T_j| bounds.

    """
    p, r = ctx.p, ctx.r
    bound = 2 * p**r * (2 + math.log(p ** (2 * r))) ** 2
    return bound * (1 + 1 / (p * math.sqrt(p))) if p == 5 else bound


def count_main_term(ctx: ExpSumCtx) -> float:
    main = ctx.X * ctx.X / ctx.modulus
    return main * (1 + 1 / ctx.p) if ctx.rho >= 1 else main


def check_bounds(ctx: ExpSumCtx, j: int, budget: int = None) -> CheckReport:
    """
    Measure each analytic bound at level j and report it against its value.

    Kloosterman bounds hold at every j. The row-sum, |S_j| and |T_j| bounds
    are only claimed for the incomplete range rho + 1 <= j <= 2r, so they are
    only reported there. The count deviation is reported whenever X^2 fits
    the budget.

    Arguments:
        ctx (ExpSumCtx): The context
        j (int): The level, at least 1
        budget (int: None): Term cap; p^2j must fit under it

    Returns:
        CheckReport: One entry per bound

    """
    budget = budget or _DEFAULT_TERM_BUDGET
    report = kloosterman_checks(ctx.p, j, budget)
    q = ctx.p**j

    if ctx.rho + 1 <= j <= 2 * ctx.r:
        report.add("row_sum", row_sum(ctx.X, q), q * (2 + math.log(q)))
        report.add("s_j_max", s_j_max(ctx, j), 2 * q**1.5 + _WEIL_SLACK)
        if ctx.X * ctx.X <= budget:
            method = _evaluation_method(ctx, j, budget)
        else:
            method = "transform"
        report.add(
            "t_j_magnitude",
            abs(t_j(ctx, j, method, budget)),
            2 * q**1.5 * (2 + math.log(q)) ** 2,
        )

    if ctx.X * ctx.X <= budget:
        deviation = abs(n_count(ctx, "brute", budget) - count_main_term(ctx))
        report.add("count_deviation", deviation, count_bound(ctx))
    return report


def kloosterman_checks(p: int, j: int, budget: int = None) -> CheckReport:
    """
    Check the Weil bound, the Ramanujan degeneration at u = 0, and the
    vanishing of K(p^j; u) when p divides u (j >= 2).

    """
    budget = budget or _DEFAULT_TERM_BUDGET
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    q = p**j
    _check_budget(q * q, budget, "Kloosterman check")
    report = CheckReport()

    values = np.array([abs(kloosterman(u, p, j)) for u in range(q)])
    report.add("kloosterman_max", values.max(), 2 * math.sqrt(q) + _WEIL_SLACK)
    report.add(
        "ramanujan",
        abs(kloosterman(0, p, j) - mobius_prime_power(p, j)),
        _VANISHING_SCALE * q,
    )
    if j >= 2:
        partial = [u for u in range(1, q) if u % p == 0]
        report.add(
            "kloosterman_vanishing",
            max(values[u] for u in partial),
            _VANISHING_SCALE * q,
        )
    return report


def identity_report(ctx: ExpSumCtx, budget: int = None) -> CheckReport:
    """
    Run every identity check available for a context within the budget.

    Each entry's measured value is the absolute disagreement between two
    evaluations and its bound is the tolerance.

    """
    budget = budget or _DEFAULT_TERM_BUDGET
    report = CheckReport()
    modulus = ctx.modulus
    report.add("diagonal_free", 0.0, 0.0, diagonal_free(ctx))

    brute = n_count(ctx, "brute", budget)
    expansion = n_count(ctx, "expansion", budget)
    report.add(
        "count_expansion",
        abs(expansion - brute),
        1e-4,
        round(expansion) == brute and abs(expansion - brute) < 1e-4,
    )

    for j in range(1, 2 * ctx.r + 1):
        q = ctx.p**j
        method = _evaluation_method(ctx, j, budget)
        direct = t_j(ctx, j, method, budget)
        scale = _DEFAULT_TOLERANCE * max(1.0, abs(direct))
        exact = int(
            np.dot(
                _folded_histogram(ctx, j, budget).astype(object),
                ramanujan_sums(ctx.p, j).astype(object),
            )
        )
        report.add(f"t_{j}_ramanujan", abs(direct - exact), scale)
        if method == "direct":
            report.add(f"t_{j}_fft", abs(direct - t_j(ctx, j, "fft", budget)), scale)
        if j <= ctx.rho:
            closed = t_j(ctx, j, "closed_small_j", budget)
            report.add(f"t_{j}_closed", abs(direct - closed), _DEFAULT_TOLERANCE)
        if q * q <= budget:
            transformed = t_j(ctx, j, "transform", budget)
            report.add(
                f"t_{j}_transform",
                abs(direct - transformed),
                _DEFAULT_TOLERANCE * max(1.0, abs(direct)),
            )

    for j in range(1, 2 * ctx.r + 1):
        q = ctx.p**j
        if (q - q // ctx.p) * q**4 > budget:
            break
        worst = max(
            abs(s_j(x, y, ctx, j, "direct", budget) - s_j(x, y, ctx, j, "closed"))
            for x in range(1, q + 1)
            for y in range(1, q + 1)
        )
        report.add(f"s_{j}_closed", worst, 1e-9 * q**1.5)

    log.debug("Identity report for %s over modulus %d", ctx, modulus)
    return report


def monotonicity_witness(x: float = 680.0) -> float:
    """
    Return f(x) = x - 34 sqrt(2) (1 + 2 ln x).

    """
    return x - 34 * math.sqrt(2) * (1 + 2 * math.log(x))


def threshold_check(p: int, r: int) -> ThresholdReport:
    """
    Evaluate the size conditions under which N > 0 is guaranteed.

    check1: p^r > 2 * 5^4 (1 + ln p^r)^2 (the p = 5 condition)
    check2: (floor(p / 9) / p)^2 >= 17^-2 (p >= 11 only)
    check3: p^r > 8 * 17^2 (1 + ln p^r)^2 (the p >= 11 condition)

    Arguments:
        p (int): A prime >= 5
        r (int): The exponent, at least 1

    Returns:
        ThresholdReport: The three checks, q = sqrt(p^r) and f(q)

    """
    if p < 5 or not is_prime(p):
        raise DomainError(f"p must be a prime >= 5, got {p}.")
    if r < 1:
        raise DomainError(f"r must be positive, got {r}.")
    pr = p**r
    log_pr = math.log(pr)
    q = math.sqrt(pr)
    return ThresholdReport(
        p=p,
        r=r,
        check1=pr > 2 * 5**4 * (1 + log_pr) ** 2,
        check2=(p // 9) ** 2 * 17**2 >= p * p if p >= 11 else None,
        check3=pr > 8 * 17**2 * (1 + log_pr) ** 2,
        q=q,
        f_q=monotonicity_witness(q),
    )
