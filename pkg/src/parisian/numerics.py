"""Exact arithmetic on the circle (-1, 1] and unit exponentials at huge frequencies.

The circle T is identified with the window (-1, 1], so a frequency ``n``
acts through ``exp(i*pi*n*x)`` and the relevant phase is ``n*x mod 2``.
Phases are reduced in exact rational arithmetic before any transcendental
function is evaluated; this is what keeps ``exp(i*pi*n*x)`` meaningful when
``n`` has hundreds of digits.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import gmpy2
import mpmath

RationalLike = Union[int, Fraction, str]

GUARD_BITS_ENV = "PARISIAN_GUARD_BITS"
DEFAULT_GUARD_BITS = 64
MIN_GUARD_BITS = 30


def guard_bits() -> int:
    """Extra bits of working precision, read from ``PARISIAN_GUARD_BITS``."""
    raw = os.environ.get(GUARD_BITS_ENV)
    if raw is None:
        return DEFAULT_GUARD_BITS
    bits = int(raw)
    if bits < MIN_GUARD_BITS:
        raise ValueError(f"{GUARD_BITS_ENV} must be >= {MIN_GUARD_BITS}, got {bits}")
    return bits


def working_precision() -> int:
    """Binary precision used for extended evaluations (double + guard bits)."""
    return 53 + guard_bits()


def as_rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to a Fraction without any rounding.

    Floats are rejected: their binary expansion is rarely the number the
    caller had in mind. Strings accept ``"p/q"``, integers and finite
    decimals.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def to_circle(x: RationalLike) -> Fraction:
    """Canonical representative of ``x`` in (-1, 1]."""
    r = as_rational(x) % 2
    if r > 1:
        r -= 2
    return r


@dataclass(frozen=True)
class Phase:
    """Exact phase ``reduced`` in [0, 2); the angle is ``pi * reduced``."""

    reduced: Fraction

    def __post_init__(self):
        if not 0 <= self.reduced < 2:
            raise ValueError(f"phase {self.reduced} outside [0, 2)")

    @property
    def as_angle(self) -> mpmath.mpf:
        with mpmath.workprec(working_precision()):
            return mpmath.pi * mpmath.mpf(self.reduced.numerator) / self.reduced.denominator


def reduce_phase(n: int, x: RationalLike) -> Phase:
    """Return ``(n*x) mod 2`` exactly."""
    return Phase((int(n) * as_rational(x)) % 2)


def unit_exponential(phase: Phase) -> complex:
    """``exp(i*pi*reduced)`` evaluated with guard bits, rounded to double."""
    r = phase.reduced
    with mpmath.workprec(working_precision()):
        t = mpmath.mpf(r.numerator) / r.denominator
        c = mpmath.cospi(t)
        s = mpmath.sinpi(t)
        return complex(float(c), float(s))


def cos_sin_pi(r: int, q: int) -> tuple[float, float]:
    """``(cos(pi*r/q), sin(pi*r/q))`` for integers ``0 <= r < 2q``.

    The hot-path kernel of the Fourier engine. The argument is folded into
    [0, 1/4] with exact integer operations, so the only rounding happens in
    one correctly rounded division, one multiplication by pi and the libm
    call. Multiples of a quarter turn come out exact.
    """
    sign = 1.0
    if r >= q:
        r -= q
        sign = -1.0
    cos_sign = sign
    if 2 * r > q:
        r = q - r
        cos_sign = -cos_sign
    if 4 * r > q:
        # pi*r/q = pi/2 - pi*(q - 2r)/(2q)
        t = math.pi * ((q - 2 * r) / (2 * q))
        return cos_sign * math.sin(t), sign * math.cos(t)
    t = math.pi * (r / q)
    return cos_sign * math.cos(t), sign * math.sin(t)


def circle_distance(x: RationalLike, grid_modulus: int) -> Fraction:
    """Exact distance on the circle from ``x`` to the grid ``2Z/N``.

    The grid is 2-periodic, so the wrap at -1/1 needs no special case.
    The result lies in [0, 1/N].
    """
    N = int(grid_modulus)
    if N < 1:
        raise ValueError("grid modulus must be >= 1")
    x = as_rational(x)
    p, q = x.numerator, x.denominator
    # x*N/2 = p*N/(2q); distance in grid units is min(r, 2q - r)/(2q)
    b = 2 * q
    r = (p * N) % b
    return Fraction(min(r, b - r), q * N)


def max_grid_distance(a: Fraction, b: Fraction, grid_modulus: int) -> Fraction:
    """Largest distance to ``2Z/N`` over the closed real segment [a, b]."""
    N = int(grid_modulus)
    if b < a:
        raise ValueError("empty segment")
    # distance peaks at the grid midpoints (2m+1)/N
    lo = math.ceil((a * N - 1) / 2)
    hi = math.floor((b * N - 1) / 2)
    if lo <= hi:
        return Fraction(1, N)
    return max(circle_distance(a, N), circle_distance(b, N))


def iroot_ceil(x: int, q: int) -> int:
    """Least integer ``r >= 0`` with ``r**q >= x``."""
    if x < 0:
        raise ValueError("negative radicand")
    root, exact = gmpy2.iroot(gmpy2.mpz(x), q)
    root = int(root)
    return root if exact else root + 1


def iroot_floor(x: int, q: int) -> int:
    """Greatest integer ``r >= 0`` with ``r**q <= x``."""
    if x < 0:
        raise ValueError("negative radicand")
    return int(gmpy2.iroot(gmpy2.mpz(x), q)[0])


def window_length(N: int, delta: RationalLike) -> int:
    """``ceil(N**(1 + delta))`` computed with exact integer roots."""
    d = as_rational(delta)
    p, q = d.numerator, d.denominator
    return iroot_ceil(int(N) ** (p + q), q)


def rational_power(base: RationalLike, exponent: RationalLike) -> mpmath.mpf:
    """``base**exponent`` as an extended-precision real (base > 0)."""
    b = as_rational(base)
    e = as_rational(exponent)
    if b <= 0:
        raise ValueError("base must be positive")
    with mpmath.workprec(working_precision() + 64):
        return mpmath.power(mpmath.mpf(b.numerator) / b.denominator,
                            mpmath.mpf(e.numerator) / e.denominator)


def float_up(v) -> float:
    """Smallest double that is provably >= ``v`` (given ``v``'s own accuracy)."""
    with mpmath.workprec(working_precision() + 64):
        v = mpmath.mpf(v)
        slack = abs(v) * mpmath.ldexp(1, -(working_precision() + 32))
        f = float(v)
        if mpmath.mpf(f) < v + slack:
            f = math.nextafter(f, math.inf)
        return f


def float_down(v) -> float:
    """Largest double that is provably <= ``v``."""
    return -float_up(-mpmath.mpf(v))


def rational_to_json(x: RationalLike) -> dict:
    x = as_rational(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def rational_from_json(obj) -> Fraction:
    """Parse ``{"num": ..., "den": ...}``, a ``"p/q"`` string or an int."""
    if isinstance(obj, dict):
        if set(obj) != {"num", "den"}:
            raise ValueError(f"rational object must have keys num, den: {obj!r}")
        den = int(obj["den"])
        if den <= 0:
            raise ValueError("rational denominator must be positive")
        return Fraction(int(obj["num"]), den)
    return as_rational(obj)
