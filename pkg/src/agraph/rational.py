"""Exact arithmetic helpers.

All quantities flow through the package as ``int`` or ``fractions.Fraction``.
Floats are accepted at the edges and converted through their decimal repr, so
``0.1`` becomes exactly ``1/10``.
"""

from decimal import Context, Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from numbers import Rational

REPORT_DIGITS = 6


def to_rational(x):
    """Convert a number to ``int`` or ``Fraction``; integral fractions collapse to int."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        x = Fraction(repr(x))
    elif isinstance(x, Rational):
        x = Fraction(x)
    elif isinstance(x, Decimal):
        x = Fraction(x)
    elif isinstance(x, str):
        x = Fraction(x.strip())
    else:
        raise TypeError(f"not a number: {x!r}")
    return x.numerator if x.denominator == 1 else x


def is_number(x):
    return isinstance(x, (int, float, Fraction, Decimal)) and not isinstance(x, bool)


def normalize(value):
    """Recursively normalise numbers in ``value``; lists and tuples become lists."""
    if isinstance(value, bool) or isinstance(value, str) or value is None:
        return value
    if is_number(value):
        return to_rational(value)
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, dict):
        return {k: normalize(v) for k, v in value.items()}
    return value


def freeze(value):
    """Hashable twin of a normalised value (lists become tuples)."""
    if isinstance(value, (list, tuple)):
        return tuple(freeze(v) for v in value)
    if isinstance(value, dict):
        return tuple(sorted((k, freeze(v)) for k, v in value.items()))
    return value


def product(values):
    out = 1
    for v in values:
        out *= v
    return to_rational(out)


def is_terminating(q):
    """True when ``q`` has a finite decimal expansion."""
    d = Fraction(q).denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def exact_decimal(q):
    """Exact decimal string of a terminating rational, e.g. ``93.841552734375``."""
    q = Fraction(q)
    if not is_terminating(q):
        raise ValueError(f"{q} has no finite decimal expansion")
    num, den = q.numerator, q.denominator
    digits = 0
    while den != 1:
        # multiply by 10 until the denominator disappears
        num *= 10
        g = _gcd(num, den)
        num //= g
        den //= g
        digits += 1
    sign = "-" if num < 0 else ""
    s = str(abs(num)).rjust(digits + 1, "0")
    if digits == 0:
        return sign + s
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def format_value(q, digits=REPORT_DIGITS):
    """Round to ``digits`` significant digits (half-even) and print without exponent."""
    q = Fraction(q)
    if q == 0:
        return "0"
    ctx = Context(prec=digits, rounding=ROUND_HALF_EVEN)
    d = ctx.divide(Decimal(q.numerator), Decimal(q.denominator))
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def rational_text(q):
    """Lossless text form used in traces and logs (``7``, ``-3/4``)."""
    q = to_rational(q)
    return str(q)
