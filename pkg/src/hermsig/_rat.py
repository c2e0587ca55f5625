"""Exact rational scalars.

Uses gmpy2.mpq when available (much faster), falling back to
fractions.Fraction.  Both keep values in lowest terms with a positive
denominator, which is the representation contract everywhere in this
package.
"""

from math import isqrt

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as Rat

RAT_ZERO = Rat(0)
RAT_ONE = Rat(1)


def rat(p, q=1):
    """Rational p/q."""
    return Rat(p, q)


def rat_sign(q):
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0


def rat_sqrt(q):
    """Exact square root of a rational, or None if q is not a square."""
    if q < 0:
        return None
    n, d = int(q.numerator), int(q.denominator)
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Rat(rn, rd)
    return None


def sqrt_bounds(q, bits):
    """Rational lo <= sqrt(q) <= hi with hi - lo <= 1/2**bits, for q > 0.

    Uses sqrt(p/d) = sqrt(p*d)/d and an integer square root at scaled
    precision, so both bounds are exact rationals.
    """
    p, d = int(q.numerator), int(q.denominator)
    v = p * d
    scale = 1 << bits
    r = isqrt(v * scale * scale)
    return Rat(r, d * scale), Rat(r + 1, d * scale)
