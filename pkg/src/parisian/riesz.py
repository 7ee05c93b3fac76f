"""Riesz-product spectra: the sets Omega((n_j)) and their coefficients.

For a sequence ``n_1 < n_2 < ...`` with amplitudes ``|a_j| <= 1`` the
partial products ``P_k(x) = prod_{j<=k} (1 + a_j cos(pi n_j x))`` are
nonnegative densities of mean one. When the signed sums ``sum eps_j n_j``
(``eps_j`` in {-1, 0, 1}) are pairwise distinct, the probability measure
``P_k(x) dx/2`` has ``mu_hat(sum eps_j n_j) = 1/2 prod (a_j/2)^|eps_j|``
and vanishes off that set.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exceptions import NotDissociateError
from .numerics import as_rational, cos_sin_pi, rational_from_json, rational_to_json

SIGNS = (-1, 0, 1)


@dataclass(frozen=True)
class SignPattern:
    eps: tuple

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if any(e not in SIGNS for e in eps):
            raise ValueError(f"sign pattern entries must be -1, 0 or 1: {eps}")
        object.__setattr__(self, "eps", eps)

    @property
    def weight(self) -> int:
        return sum(abs(e) for e in self.eps)

    def __len__(self):
        return len(self.eps)


@dataclass(frozen=True)
class LacunarySequence:
    """Strictly increasing positive integers with amplitudes ``|a_j| <= 1``."""

    terms: tuple
    coefficients: tuple = None

    def __post_init__(self):
        terms = tuple(int(n) for n in self.terms)
        if any(n <= 0 for n in terms):
            raise ValueError("terms must be positive")
        if any(b <= a for a, b in zip(terms, terms[1:])):
            raise ValueError("terms must be strictly increasing")
        coefs = self.coefficients
        if coefs is None:
            coefs = (Fraction(1),) * len(terms)
        coefs = tuple(as_rational(a) for a in coefs)
        if len(coefs) != len(terms):
            raise ValueError("need one coefficient per term")
        if any(abs(a) > 1 for a in coefs):
            raise ValueError("amplitudes must satisfy |a_j| <= 1")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "coefficients", coefs)

    def __len__(self):
        return len(self.terms)

    def value(self, pattern: SignPattern) -> int:
        return sum(e * n for e, n in zip(pattern.eps, self.terms))


@dataclass(frozen=True)
class OmegaPoint:
    value: int
    pattern: SignPattern


def _check_depth(seq: LacunarySequence, depth: int) -> int:
    depth = int(depth)
    if not 0 <= depth <= len(seq):
        raise ValueError(f"depth {depth} outside [0, {len(seq)}]")
    return depth


def _fast_dissociate(terms: Sequence[int]) -> bool:
    total = 0
    for n in terms:
        if n <= 2 * total:
            return False
        total += n
    return True


def _all_patterns(depth: int):
    return itertools.product(SIGNS, repeat=depth)


def is_dissociate(seq: LacunarySequence, depth: int) -> bool:
    """True iff the ``3**depth`` signed sums of the prefix are pairwise distinct."""
    depth = _check_depth(seq, depth)
    terms = seq.terms[:depth]
    if _fast_dissociate(terms):
        return True
    seen = set()
    for eps in _all_patterns(depth):
        v = sum(e * n for e, n in zip(eps, terms))
        if v in seen:
            return False
        seen.add(v)
    return True


def omega(seq: LacunarySequence, depth: int) -> list[OmegaPoint]:
    """Distinct values of ``sum_{j<=depth} eps_j n_j`` sorted increasingly.

    Each value carries one representing pattern: the one with fewest nonzero
    entries, ties broken lexicographically.
    """
    depth = _check_depth(seq, depth)
    terms = seq.terms[:depth]
    best: dict[int, tuple] = {}
    for eps in _all_patterns(depth):
        v = sum(e * n for e, n in zip(eps, terms))
        key = (sum(map(abs, eps)), eps)
        if v not in best or key < best[v]:
            best[v] = key
    return [OmegaPoint(v, SignPattern(best[v][1])) for v in sorted(best)]


def representation(seq: LacunarySequence, n: int, depth: int) -> SignPattern | None:
    """The unique pattern with ``sum eps_j n_j = n``, or None."""
    depth = _check_depth(seq, depth)
    if not is_dissociate(seq, depth):
        raise NotDissociateError(f"prefix of depth {depth} is not dissociate")
    terms = seq.terms[:depth]
    n = int(n)
    if _fast_dissociate(terms):
        # greedy from the top; each remainder is bounded by the lower partial sum
        eps = [0] * depth
        rest = n
        partial = [0]
        for t in terms:
            partial.append(partial[-1] + t)
        for j in range(depth - 1, -1, -1):
            if abs(rest) > partial[j]:
                e = 1 if rest > 0 else -1
                eps[j] = e
                rest -= e * terms[j]
        return SignPattern(tuple(eps)) if rest == 0 else None
    for point in omega(seq, depth):
        if point.value == n:
            return point.pattern
    return None


def riesz_coefficient(seq: LacunarySequence, n: int, depth: int) -> Fraction:
    """``mu_hat(n)`` of the probability measure ``P_depth(x) dx/2``, exactly."""
    pattern = representation(seq, n, depth)
    if pattern is None:
        return Fraction(0)
    value = Fraction(1, 2)
    for e, a in zip(pattern.eps, seq.coefficients):
        if e:
            value *= a / 2
    return value


def partial_density(seq: LacunarySequence, depth: int, x):
    """``prod_{j<=depth} (1 + a_j cos(pi n_j x))``.

    Exact rationals use exact phase reduction; numpy arrays of floats are
    evaluated directly (this is the quadrature path).
    """
    depth = _check_depth(seq, depth)
    pairs = list(zip(seq.terms[:depth], seq.coefficients[:depth]))
    if isinstance(x, np.ndarray):
        out = np.ones_like(x, dtype=np.float64)
        for n, a in pairs:
            out *= 1.0 + float(a) * np.cos(np.pi * n * x)
        return out
    x = as_rational(x)
    value = 1.0
    for n, a in pairs:
        num = n * x.numerator
        c, _ = cos_sin_pi(num % (2 * x.denominator), x.denominator)
        value *= 1.0 + float(a) * c
    return value


def riesz_coefficient_quadrature(seq: LacunarySequence, n: int, depth: int) -> complex:
    """Trapezoid rule for ``1/2 * integral exp(i*pi*n*x) P_depth(x) dx/2``.

    The integrand is a trigonometric polynomial, so an equispaced rule with
    more nodes than its degree is exact up to rounding.
    """
    depth = _check_depth(seq, depth)
    degree = abs(int(n)) + sum(seq.terms[:depth])
    m = 2 * degree + 2
    x = -1.0 + 2.0 * np.arange(m) / m
    values = np.exp(1j * np.pi * int(n) * x) * partial_density(seq, depth, x)
    return complex(0.5 * values.mean())


def density_mean(seq: LacunarySequence, depth: int) -> float:
    """Mean of ``P_depth`` over the circle, by the same exact trapezoid rule."""
    return riesz_coefficient_quadrature(seq, 0, depth).real * 2


def sequence_to_json(seq: LacunarySequence) -> dict:
    return {"terms": [str(n) for n in seq.terms],
            "coefficients": [rational_to_json(a) for a in seq.coefficients]}


def sequence_from_json(obj: dict) -> LacunarySequence:
    unknown = set(obj) - {"terms", "coefficients"}
    if unknown:
        raise ValueError(f"unknown sequence fields: {sorted(unknown)}")
    coefs = obj.get("coefficients")
    return LacunarySequence(tuple(int(n) for n in obj["terms"]),
                            None if coefs is None else tuple(rational_from_json(a) for a in coefs))


def omega_to_csv(points: Sequence[OmegaPoint], depth: int, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["value"] + [f"eps_{j}" for j in range(1, depth + 1)])
    for p in points:
        writer.writerow([str(p.value)] + [str(e) for e in p.pattern.eps])
    return buf.getvalue()
