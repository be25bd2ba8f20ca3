"""
Exact integer and modular arithmetic primitives.

Everything in here is a pure function of its arguments. Python integers are
arbitrary precision, but the reductions are still performed at every multiply
so that intermediate values stay bounded by the square of the modulus.

"""

from dataclasses import dataclass, field
from typing import Optional
import logging

log = logging.getLogger(__name__)

_TRIAL_DIVISION_LIMIT = 1 << 16
_MAX_PRIME_POWER_BITS = 127

# Deterministic for every n < 3.3 * 10**24.
_STRONG_PRIME_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class DomainError(ValueError):
    """
    Raised when an argument is outside the domain of an arithmetic operation.

    """


def is_prime(n: int) -> bool:
    """
    Return True if n is prime.

    Trial division handles everything below 2**32; larger inputs go through a
    strong-probable-prime test with a fixed set of bases, which is exact well
    past the working range of this package.

    Arguments:
        n (int): The integer to test

    Returns:
        bool: Whether n is prime

    """
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13):
        if n % q == 0:
            return n == q
    if n < _TRIAL_DIVISION_LIMIT * _TRIAL_DIVISION_LIMIT:
        d = 17
        while d * d <= n and d < _TRIAL_DIVISION_LIMIT:
            if n % d == 0:
                return False
            d += 2
        return True

    s, d = 0, n - 1
    while d % 2 == 0:
        s += 1
        d //= 2
    for base in _STRONG_PRIME_BASES:
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimePower:
    """
    A prime power p**e.

    """

    p: int
    e: int
    value: int = field(init=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"{self.p} is not prime.")
        if self.e < 1:
            raise DomainError(f"Exponent must be positive, got {self.e}.")
        value = self.p**self.e
        if value.bit_length() > _MAX_PRIME_POWER_BITS:
            raise DomainError(f"{self.p}^{self.e} exceeds the working range.")
        object.__setattr__(self, "value", value)


def three_power_exponent(n: int) -> int:
    """
    Return the least positive j with 3**(2j) >= n, i.e. 3**j >= sqrt(n).

    """
    j = 1
    while 9**j < n:
        j += 1
    return j


def pow_mod(base: int, exp: int, modulus: int) -> int:
    """
    Compute base**exp mod modulus by repeated squaring.

    Arguments:
        base (int): The base
        exp (int): A non-negative exponent
        modulus (int): The modulus, at least 1

    Returns:
        int: The residue in [0, modulus)

    """
    if modulus < 1:
        raise DomainError(f"Modulus must be at least 1, got {modulus}.")
    if exp < 0:
        raise DomainError(f"Exponent must be non-negative, got {exp}.")
    result = 1 % modulus
    base %= modulus
    while exp:
        if exp & 1:
            result = result * base % modulus
        base = base * base % modulus
        exp >>= 1
    return result


def cubic_residue(a: int, modulus: int) -> int:
    """
    Return a**3 + a mod modulus without forming a**3.

    """
    if modulus < 1:
        raise DomainError(f"Modulus must be at least 1, got {modulus}.")
    return ((a * a % modulus) * a + a) % modulus


def _require_odd_prime(p: int):
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise DomainError(f"Expected an odd prime, got {p}.")


def legendre_symbol(a: int, p: int) -> int:
    """
    Compute the Legendre symbol (a/p) by Euler's criterion.

    Arguments:
        a (int): The numerator
        p (int): An odd prime

    Returns:
        int: One of -1, 0, +1

    """
    _require_odd_prime(p)
    t = pow_mod(a, (p - 1) // 2, p)
    if t == 0:
        return 0
    return 1 if t == 1 else -1


def jacobi_prime_power(a: int, p: int, j: int) -> int:
    """
    Compute (a/p**j), which equals (a/p)**j.

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    return legendre_symbol(a, p) ** j


def sqrt_mod_prime(d: int, p: int) -> Optional[int]:
    """
    Find a square root of d modulo an odd prime p (Tonelli-Shanks).

    The smaller of the two roots is returned so that results are canonical.

    Arguments:
        d (int): The value whose root is wanted
        p (int): An odd prime

    Returns:
        int: x in [0, p) with x*x = d (mod p), or None if d is a non-residue

    """
    symbol = legendre_symbol(d, p)
    if symbol == 0:
        return 0
    if symbol == -1:
        return None
    d %= p

    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    if s == 1:
        x = pow_mod(d, (p + 1) // 4, p)
        return min(x, p - x)

    z = 2
    while legendre_symbol(z, p) != -1:
        z += 1

    c = pow_mod(z, q, p)
    x = pow_mod(d, (q + 1) // 2, p)
    t = pow_mod(d, q, p)
    m = s
    while t != 1:
        i, t2 = 1, t * t % p
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow_mod(c, 1 << (m - i - 1), p)
        x = x * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return min(x, p - x)


def inv_mod(a: int, m: int) -> int:
    """
    Invert a modulo m with the extended Euclidean algorithm.

    Arguments:
        a (int): The value to invert
        m (int): The modulus, at least 2

    Returns:
        int: The inverse in [1, m)

    """
    if m < 2:
        raise DomainError(f"Modulus must be at least 2, got {m}.")
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_s, s = s, old_s - quotient * s
    if old_r != 1:
        raise DomainError(f"{a} is not invertible modulo {m}.")
    return old_s % m


def lift_sqrt_odd(d: int, p: int, e: int) -> Optional[int]:
    """
    Find a square root of a unit d modulo p**e by Hensel lifting.

    Arguments:
        d (int): A value coprime to p
        p (int): An odd prime
        e (int): The target exponent, at least 1

    Returns:
        int: The smaller root x in [0, p**e), or None if d is a non-residue

    """
    if e < 1:
        raise DomainError(f"Exponent must be positive, got {e}.")
    _require_odd_prime(p)
    if d % p == 0:
        raise DomainError(f"Cannot lift a square root of a non-unit ({p} | {d}).")
    x = sqrt_mod_prime(d, p)
    if x is None:
        return None
    modulus = p
    for _ in range(e - 1):
        modulus *= p
        x = (x - (x * x - d) * inv_mod(2 * x, modulus)) % modulus
    return min(x, modulus - x)


def solve_quadratic_2adic(
    A: int, B: int, C: int, j: int, x0: int, seed_level: int = 1
) -> int:
    """
    Lift a root of A x^2 + B x + C from mod 2**seed_level to mod 2**j.

    One bit is decided per level. At level L the running root x is kept when
    it already works modulo 2**(L+1); otherwise it is moved by 2**L if the
    derivative 2Ax + B is odd, or by 2**(L-1) if it is even (the latter needs
    x odd and L >= 3 for the increment to act on the 2**L bit only).

    Arguments:
        A, B, C (int): Coefficients of the quadratic
        j (int): Target exponent, at least 1
        x0 (int): Seed root, valid modulo 2**seed_level
        seed_level (int: 1): The exponent at which x0 is a root

    Returns:
        int: x in [1, 2**j] with A x^2 + B x + C = 0 (mod 2**j)

    """
    if j < 1 or seed_level < 1:
        raise DomainError("Levels must be positive.")

    def value(x):
        return A * x * x + B * x + C

    if value(x0) % (1 << seed_level):
        raise DomainError(
            f"Seed {x0} is not a root modulo 2^{seed_level} ({value(x0)})."
        )

    x = x0
    for level in range(seed_level, j):
        target = 1 << (level + 1)
        if value(x) % target == 0:
            continue
        step = 1 << level if (2 * A * x + B) % 2 else 1 << (level - 1)
        if value(x + step) % target:
            raise DomainError(f"Cannot lift {x} from 2^{level} to 2^{level + 1}.")
        x += step
        log.debug("2-adic lift: level %d -> root %d", level + 1, x)

    x %= 1 << j
    return x or 1 << j


def mobius_prime_power(p: int, j: int) -> int:
    """
    Return mu(p**j).

    """
    if j < 1:
        raise DomainError(f"Exponent must be positive, got {j}.")
    return -1 if j == 1 else 0
