"""
Collision certificates for moduli in the open band sqrt(n) < m < 3^k < 3 sqrt(n).

Every such m falls into one of six structural cases. Each case has an explicit
construction of 1 <= a < b <= n with b^3 + b = a^3 + a (mod m^2); when the
construction does not fit under n, a gap-ascending brute-force search takes
over, so `collide` is total on valid inputs unless a genuine counterexample
exists.

"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union
import logging
import math

import numpy as np

from .modarith import (
    DomainError,
    PrimePower,
    cubic_residue,
    inv_mod,
    legendre_symbol,
    lift_sqrt_odd,
    solve_quadratic_2adic,
    three_power_exponent,
)

log = logging.getLogger(__name__)

_MAX_MODULUS = 1 << 63
_INT64_SAFE = 1 << 62
BRUTE_FORCE = "brute-force"


class RangeError(ValueError):
    """
    Raised when (n, m) violates sqrt(n) < m < 3^k < 3 sqrt(n).

    """

    def __init__(self, n: int, m: int, inequality: str):
        super().__init__(f"(n={n}, m={m}) violates {inequality}.")
        self.n = n
        self.m = m
        self.inequality = inequality


class ClassificationError(ValueError):
    """
    Raised when a modulus matches none of the six cases.

    """


class ExhaustionError(RuntimeError):
    """
    Raised when no collision with b <= n exists modulo m^2.

    """

    def __init__(self, n: int, m: int, message: str = None):
        super().__init__(message or f"No collision with b <= {n} modulo {m}^2.")
        self.n = n
        self.m = m


class Case(Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"


# Sizes of n above which each construction is guaranteed to fit.
CASE_THRESHOLDS = {
    Case.I: 100,
    Case.II: 64,
    Case.III: 144,
    Case.IV: 57,
    Case.V: 14,
    Case.VI: 2000,
}


@dataclass(frozen=True)
class FactoredModulus:
    """
    A modulus with its factorization and, when it has a prime factor p >= 5,
    the split m = delta * p^r with p the largest such prime.

    """

    m: int
    factors: Tuple[Tuple[int, int], ...]
    delta: int
    p: Optional[int] = None
    r: Optional[int] = None

    def exponent(self, prime: int) -> int:
        return dict(self.factors).get(prime, 0)

    def primes(self) -> List[int]:
        return [prime for prime, _ in self.factors]

    def prime_powers(self) -> List[PrimePower]:
        return [PrimePower(prime, e) for prime, e in self.factors]


@dataclass(frozen=True)
class CaseTag:
    """
    One of the six cases, with the parameters its construction needs.

    """

    case: Case
    delta: Optional[int] = None
    p: Optional[int] = None
    r: Optional[int] = None
    s: Optional[int] = None
    has5: Optional[bool] = None

    @property
    def params(self) -> Dict[str, Union[int, bool]]:
        return {
            key: value
            for key, value in (
                ("delta", self.delta),
                ("p", self.p),
                ("r", self.r),
                ("s", self.s),
                ("has5", self.has5),
            )
            if value is not None
        }

    def to_dict(self) -> dict:
        return {"case": self.case.value, **self.params}

    def __str__(self):
        inner = ", ".join(f"{key}={value}" for key, value in self.params.items())
        return f"{self.case.value}({inner})"


@dataclass(frozen=True)
class RangeWitness:
    n: int
    m: int
    k: int


@dataclass(frozen=True)
class CollisionCertificate:
    """
    A pair 1 <= a < b <= n with b^3 + b = a^3 + a (mod m^2).

    `quotient` is (b^3 + b - a^3 - a) / m^2, so the certificate can be checked
    with a single multiplication.

    """

    n: int
    m: int
    a: int
    b: int
    quotient: int
    case_used: Union[CaseTag, str] = field(default=BRUTE_FORCE, compare=False)

    @property
    def case_name(self) -> str:
        if isinstance(self.case_used, CaseTag):
            return self.case_used.case.value
        return str(self.case_used)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "a": self.a,
            "b": self.b,
            "quotient": self.quotient,
            "case": self.case_name,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "CollisionCertificate":
        return cls(
            n=int(record["n"]),
            m=int(record["m"]),
            a=int(record["a"]),
            b=int(record["b"]),
            quotient=int(record["quotient"]),
            case_used=record.get("case", BRUTE_FORCE),
        )


def factorize(m: int) -> FactoredModulus:
    """
    Factor m by trial division.

    Arguments:
        m (int): The modulus, 2 <= m <= 2^63

    Returns:
        FactoredModulus: The factorization and the (delta, p, r) split

    """
    if m < 2:
        raise DomainError(f"Cannot factor {m}; expected m >= 2.")
    if m > _MAX_MODULUS:
        raise DomainError(f"{m} is beyond the trial-division range.")

    factors = []
    rest = m
    d = 2
    while d * d <= rest:
        if rest % d == 0:
            e = 0
            while rest % d == 0:
                rest //= d
                e += 1
            factors.append((d, e))
        d += 1 if d == 2 else 2
    if rest > 1:
        factors.append((rest, 1))

    large = [(prime, e) for prime, e in factors if prime >= 5]
    if not large:
        return FactoredModulus(m=m, factors=tuple(factors), delta=m)
    p, r = large[-1]
    return FactoredModulus(m=m, factors=tuple(factors), delta=m // p**r, p=p, r=r)


def validate_range(n: int, m: int) -> RangeWitness:
    """
    Check sqrt(n) < m < 3^k < 3 sqrt(n) in exact integer arithmetic.

    Arguments:
        n (int): The sequence length, at least 2
        m (int): The candidate modulus root, at least 2

    Returns:
        RangeWitness: (n, m, k) when all three inequalities hold

    """
    if n < 2 or m < 2:
        raise DomainError(f"Expected n >= 2 and m >= 2, got n={n}, m={m}.")
    k = three_power_exponent(n)
    if not n < m * m:
        raise RangeError(n, m, "sqrt(n) < m")
    if not m < 3**k:
        raise RangeError(n, m, "m < 3^k")
    if not 9**k < 9 * n:
        raise RangeError(n, m, "3^k < 3*sqrt(n)")
    return RangeWitness(n=n, m=m, k=k)


def classify(fm: FactoredModulus) -> CaseTag:
    """
    Assign a modulus to one of the six cases.

    Priority is II, III, I, VI, IV, V. For case VI the distinguished prime is
    the largest p >= 5 whose full power in m is at least 11.

    Arguments:
        fm (FactoredModulus): The factored modulus

    Returns:
        CaseTag: The case and its parameters

    """
    r2, s3 = fm.exponent(2), fm.exponent(3)
    smooth = 2**r2 * 3**s3

    if fm.p is None:
        if r2 >= 1 and s3 == 0:
            return CaseTag(Case.II, r=r2)
        if r2 >= 1 and s3 >= 1:
            return CaseTag(Case.III, r=r2, s=s3)
        raise ClassificationError(f"{fm.m} is a power of 3; no case applies.")

    if fm.delta <= 3:
        return CaseTag(Case.I, delta=fm.delta, p=fm.p, r=fm.r)

    for pp in reversed(fm.prime_powers()):
        if pp.p >= 5 and pp.value >= 11:
            return CaseTag(Case.VI, delta=fm.m // pp.value, p=pp.p, r=pp.e)

    rest = fm.m // smooth
    if rest == 5:
        return CaseTag(Case.IV, r=r2, s=s3)
    if rest in (7, 35):
        return CaseTag(Case.V, r=r2, s=s3, has5=rest == 35)
    raise ClassificationError(f"{fm.m} matches none of the six cases.")


def _quotient(m: int, a: int, b: int) -> Optional[int]:
    difference = (b - a) * (a * a + a * b + b * b + 1)
    q, remainder = divmod(difference, m * m)
    return None if remainder else q


def verify_certificate(cert: CollisionCertificate) -> bool:
    """
    Check a certificate exactly.

    Arguments:
        cert (CollisionCertificate): The certificate to check

    Returns:
        bool: True iff 1 <= a < b <= n, the residues agree mod m^2 and the
            stored quotient is correct

    """
    try:
        n, m, a, b = int(cert.n), int(cert.m), int(cert.a), int(cert.b)
        if not (1 <= a < b <= n) or m < 1:
            return False
        modulus = m * m
        if cubic_residue(a, modulus) != cubic_residue(b, modulus):
            return False
        return int(cert.quotient) * modulus == (b - a) * (a * a + a * b + b * b + 1)
    except (TypeError, ValueError, AttributeError):
        return False


def _certify(n: int, m: int, pair, case_used) -> Optional[CollisionCertificate]:
    if pair is None:
        return None
    a, b = pair
    if not 1 <= a < b <= n:
        log.debug("Construction %s gave (%d, %d), outside [1, %d].", case_used, a, b, n)
        return None
    q = _quotient(m, a, b)
    if q is None:
        log.debug("Construction %s gave a non-collision (%d, %d).", case_used, a, b)
        return None
    return CollisionCertificate(n=n, m=m, a=a, b=b, quotient=q, case_used=case_used)


def brute_force_collision(n: int, m: int) -> CollisionCertificate:
    """
    Search for a collision by increasing gap d = b - a, then increasing a.

    b^3 + b - a^3 - a = d (3a^2 + 3ad + d^2 + 1), so for a fixed gap only
    the second factor has to be divisible by m^2 / gcd(m^2, d).

    Arguments:
        n (int): Consider 1 <= a < b <= n
        m (int): The modulus root

    Returns:
        CollisionCertificate: The first collision in this order

    """
    modulus = m * m
    for d in range(1, n):
        g = modulus // math.gcd(modulus, d)
        if max(3 * n * n + 1, g) < _INT64_SAFE:
            a = np.arange(1, n - d + 1, dtype=np.int64)
            values = 3 * a * a + 3 * a * d + d * d + 1
        else:
            values = np.array(
                [3 * x * x + 3 * x * d + d * d + 1 for x in range(1, n - d + 1)],
                dtype=object,
            )
        hits = np.flatnonzero(values % g == 0)
        if len(hits):
            a0 = int(hits[0]) + 1
            return _certify(n, m, (a0, a0 + d), BRUTE_FORCE)
    raise ExhaustionError(n, m)


def _with_fallback(n: int, m: int, pair, tag: CaseTag) -> CollisionCertificate:
    cert = _certify(n, m, pair, tag)
    if cert is not None:
        return cert
    level = logging.WARNING if n >= CASE_THRESHOLDS[tag.case] else logging.DEBUG
    log.log(level, "Case %s construction missed for n=%d, m=%d; brute force.", tag, n, m)
    return brute_force_collision(n, m)


def lift_pair(n: int, delta: int, p: int, r: int) -> Optional[Tuple[int, int]]:
    """
    Build a collision for m = delta p^r with b = a + delta^2 c, 1 <= c <= p.

    a^2 + ab + b^2 + 1 = 0 (mod p^2r) becomes
    (6a + 3 delta^2 c)^2 = -3 delta^4 c^2 - 12 (mod p^2r); the first c
    making the right side a nonzero residue mod p is lifted to p^2r.

    Arguments:
        n (int): Upper bound for b
        delta (int): The cofactor, coprime to p
        p (int): A prime >= 5
        r (int): The exponent of p

    Returns:
        tuple: (a, b) with b <= n, or None if no c yields one

    """
    modulus = p ** (2 * r)
    six_inverse = inv_mod(6, modulus)
    fallback = None
    for c in range(1, p + 1):
        target = (-3 * delta**4 * c * c - 12) % modulus
        if legendre_symbol(target, p) != 1:
            continue
        root = lift_sqrt_odd(target, p, 2 * r)
        for signed in (root, modulus - root):
            a = (signed - 3 * delta * delta * c) * six_inverse % modulus or modulus
            b = a + delta * delta * c
            if b <= n:
                return a, b
            fallback = fallback or (a, b)
    return fallback


def _lemma_two_adic(r: int, t: int) -> Tuple[int, int]:
    # 3a^2 + 3at^2 + t^4 + 1 = 0 (mod 2^2r), seeded by a = 1 at 2^1.
    a = solve_quadratic_2adic(3, 3 * t * t, t**4 + 1, 2 * r, 1)
    return a, a + t * t


def collide_case_i(n: int, delta: int, p: int, r: int) -> CollisionCertificate:
    """
    Case I: m = delta p^r with delta <= 3 and p >= 5.

    For p = 1 (mod 3), 3a^2 + 1 = 0 (mod p^r) is solvable and b = a + delta^2 p^r.
    For p = 2 (mod 3) the analytic guarantee only covers enormous n, so the
    pairs a = delta^2 a', b = delta^2 b' with
    delta^4 (a'^2 + a'b' + b'^2) + 1 = 0 (mod p^2r) are searched directly.

    """
    m = delta * p**r
    tag = CaseTag(Case.I, delta=delta, p=p, r=r)
    if p % 3 == 1:
        pr = p**r
        root = lift_sqrt_odd(-inv_mod(3, pr), p, r)
        pair = (root, root + delta * delta * pr)
        return _with_fallback(n, m, pair, tag)

    pair = _structured_search(n, delta, p, r)
    if pair is None:
        log.warning(
            "Structured search for delta=%d, p=%d, r=%d found nothing below n=%d.",
            delta,
            p,
            r,
            n,
        )
    return _with_fallback(n, m, pair, tag)


def _structured_search(n: int, delta: int, p: int, r: int):
    modulus = p ** (2 * r)
    d4 = delta**4
    bound = n // (delta * delta)
    for b in range(2, bound + 1):
        a = np.arange(1, b, dtype=np.int64)
        values = (d4 * ((a * a + a * b + b * b) % modulus) + 1) % modulus
        hits = np.flatnonzero(values == 0)
        if len(hits):
            a0 = int(hits[0]) + 1
            return delta * delta * a0, delta * delta * b
    return None


def collide_case_ii(n: int, r: int) -> CollisionCertificate:
    """
    Case II: m = 2^r, using (a+4)^3 + (a+4) - a^3 - a = 4 (3 (a+2)^2 + 5).

    """
    m = 2**r
    tag = CaseTag(Case.II, r=r)
    pair = None
    if r >= 3:
        x = solve_quadratic_2adic(3, 0, 5, 2 * r - 2, 1, seed_level=3)
        half = 1 << (2 * r - 3)
        x %= half
        if x > half // 2:
            x = half - x
        if x >= 3:
            pair = (x - 2, x + 2)
    return _with_fallback(n, m, pair, tag)


def collide_case_iii(n: int, r: int, s: int) -> CollisionCertificate:
    """
    Case III: m = 2^r 3^s with r, s >= 1.

    """
    m = 2**r * 3**s
    tag = CaseTag(Case.III, r=r, s=s)
    if r == 1:
        pair = (1, 1 + 3 ** (2 * s))
    elif s == 1:
        # a^2 + a(a+9) + (a+9)^2 + 1 is 112 = 2^4 * 7 at a = 1.
        a = solve_quadratic_2adic(3, 27, 82, 2 * r, 1, seed_level=4)
        pair = (a, a + 9)
    else:
        pair = _lemma_two_adic(r, 3**s)
    return _with_fallback(n, m, pair, tag)


def collide_case_iv(n: int, r: int, s: int) -> CollisionCertificate:
    """
    Case IV: m = 2^r 3^s 5.

    """
    m = 2**r * 3**s * 5
    tag = CaseTag(Case.IV, r=r, s=s)
    if r >= 2:
        pair = _lemma_two_adic(r, 3**s * 5)
    else:
        pair = lift_pair(n, m // 5, 5, 1)
    return _with_fallback(n, m, pair, tag)


def collide_case_v(n: int, r: int, s: int, has5: bool) -> CollisionCertificate:
    """
    Case V: m = 2^r 3^s 7 or 2^r 3^s 5 7, with a = 3 and b = 3 + t.

    """
    m = 2**r * 3**s * (35 if has5 else 7)
    tag = CaseTag(Case.V, r=r, s=s, has5=has5)
    t = m * m // (14 if r >= 1 else 7)
    return _with_fallback(n, m, (3, 3 + t), tag)


def collide_case_vi(n: int, delta: int, p: int, r: int) -> CollisionCertificate:
    """
    Case VI: m = delta p^r with delta >= 4, p >= 5, p not dividing delta and
    p^r >= 11.

    """
    m = delta * p**r
    tag = CaseTag(Case.VI, delta=delta, p=p, r=r)
    return _with_fallback(n, m, lift_pair(n, delta, p, r), tag)


def collide(n: int, m: int) -> CollisionCertificate:
    """
    Produce a verified collision certificate for a valid (n, m).

    Arguments:
        n (int): The sequence length
        m (int): A modulus root in the band sqrt(n) < m < 3^k < 3 sqrt(n)

    Returns:
        CollisionCertificate: A certificate that passes verify_certificate

    """
    validate_range(n, m)
    tag = classify(factorize(m))
    if n < CASE_THRESHOLDS[tag.case]:
        log.debug("n=%d is below the case %s threshold; attempting anyway.", n, tag)

    if tag.case is Case.I:
        cert = collide_case_i(n, tag.delta, tag.p, tag.r)
    elif tag.case is Case.II:
        cert = collide_case_ii(n, tag.r)
    elif tag.case is Case.III:
        cert = collide_case_iii(n, tag.r, tag.s)
    elif tag.case is Case.IV:
        cert = collide_case_iv(n, tag.r, tag.s)
    elif tag.case is Case.V:
        cert = collide_case_v(n, tag.r, tag.s, tag.has5)
    else:
        cert = collide_case_vi(n, tag.delta, tag.p, tag.r)

    if not verify_certificate(cert):
        raise ExhaustionError(n, m, f"Certificate {cert.to_dict()} failed verification.")
    return cert
