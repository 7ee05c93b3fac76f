"""Fourier coefficients ``mu_hat(n) = 1/2 * integral exp(i*pi*n*x) dmu(x)``.

The closed form is evaluated per part with exactly reduced phases. A uniform
part of mass ``w`` on the arc with center ``c`` and half-length ``h``
contributes ``w/2 * exp(i*pi*n*c) * sin(pi*n*h) / (pi*n*h)``; an atom of
mass ``m`` at ``p`` contributes ``m/2 * exp(i*pi*n*p)``. Both ``n*c`` and
``n*h`` are reduced mod 2 in integer arithmetic before touching floats.

``coefficient_oracle`` is a separate Gauss-Legendre quadrature over float
nodes used to cross-check the closed form at moderate frequencies.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .exceptions import OracleRangeError
from .measure import Measure, total_variation
from .numerics import cos_sin_pi

_default_threads = 1


def set_default_threads(threads: int) -> None:
    """Cap the worker count used by :func:`coefficients_batch`."""
    global _default_threads
    if threads < 1:
        raise ValueError("threads must be >= 1")
    _default_threads = int(threads)


@dataclass(frozen=True)
class FourierCoefficient:
    frequency: int
    value: complex

    @property
    def abs(self) -> float:
        return abs(self.value)


def _compile(mu: Measure) -> tuple:
    # (amplitude, center num, center den, half num, half den); atoms have half 0/1
    terms = []
    for iv, w in mu.uniform:
        if w == 0:
            continue
        c, h = iv.center, iv.half_length
        terms.append((float(w / 2), c.numerator, c.denominator, h.numerator, h.denominator))
    for p, m in mu.atoms:
        if m == 0:
            continue
        terms.append((float(m / 2), p.numerator, p.denominator, 0, 1))
    return tuple(terms)


def _compiled(mu: Measure) -> tuple:
    # cached on the (immutable) instance: (terms, correctly rounded mu_hat(0))
    cached = mu.__dict__.get("_fourier_terms")
    if cached is None:
        mass = sum((w for _, w in mu.uniform), Fraction(0)) + sum((m for _, m in mu.atoms), Fraction(0))
        cached = (_compile(mu), complex(float(mass / 2), 0.0))
        mu.__dict__["_fourier_terms"] = cached
    return cached


def _evaluate(compiled: tuple, n: int) -> complex:
    terms, at_zero = compiled
    if n == 0:
        return at_zero
    re = 0.0
    im = 0.0
    for amp, pc, qc, ph, qh in terms:
        c, s = cos_sin_pi((n * pc) % (2 * qc), qc)
        if ph and n:
            m = n * ph
            _, sn = cos_sin_pi(m % (2 * qh), qh)
            if sn == 0.0:
                continue
            try:
                t = math.pi * (m / qh)
            except OverflowError:
                continue
            amp = amp * (sn / t)
        re += amp * c
        im += amp * s
    return complex(re, im)


def coefficient(mu: Measure, n: int) -> FourierCoefficient:
    """Closed-form ``mu_hat(n)`` with exact phase reduction."""
    n = int(n)
    return FourierCoefficient(n, _evaluate(_compiled(mu), n + mu.modulation))


def coefficients_batch(mu: Measure, ns: Sequence[int], threads: int | None = None
                       ) -> list[FourierCoefficient]:
    """Element-wise :func:`coefficient`; order of ``ns`` is preserved."""
    ns = [int(n) for n in ns]
    terms = _compiled(mu)
    shift = mu.modulation
    workers = threads or _default_threads
    if workers == 1 or len(ns) < 2:
        values = [_evaluate(terms, n + shift) for n in ns]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda n: _evaluate(terms, n + shift), ns))
    return [FourierCoefficient(n, v) for n, v in zip(ns, values)]


# ---------------------------------------------------------------- oracle

_GL_NODES = 48
_GL_EXTRA = 8
_CHUNK = 256
# phase span per panel in radians; 48 nodes resolve 40 rad to ~1e-25
_PANEL_SPAN = 40.0


@lru_cache(maxsize=8)
def _leggauss(k: int):
    return np.polynomial.legendre.leggauss(k)


def _gl_segment(a: float, b: float, ns: np.ndarray, panels: int, nodes: int) -> np.ndarray:
    x, w = _leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mids = (edges[1:] + edges[:-1]) / 2
    xs = (mids[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return _unit_rows(ns, xs) @ ws.astype(np.complex128)


def _unit_rows(ks: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Matrix ``exp(i*pi*k*x)`` over ``ks`` x ``xs``."""
    if ks.size > 1 and np.all(np.diff(ks) == 1):
        # consecutive frequencies: rotate row by row (error ~ size * eps)
        rows = np.empty((ks.size, xs.size), dtype=np.complex128)
        rows[0] = np.exp(1j * np.pi * ks[0] * xs)
        step = np.exp(1j * np.pi * xs)
        for j in range(1, ks.size):
            np.multiply(rows[j - 1], step, out=rows[j])
        return rows
    return np.exp(1j * np.pi * np.outer(ks, xs))


def _segment_integrals(fa: float, fb: float, ks: np.ndarray, tol: float,
                       max_panels: int) -> np.ndarray:
    # integral_a^b exp(i*pi*k*x) dx for nonnegative ks, chunked by magnitude
    out = np.empty(ks.shape, dtype=np.complex128)
    for lo in range(0, ks.size, _CHUNK):
        chunk = ks[lo:lo + _CHUNK]
        kmax = float(chunk[-1])
        panels = max(1, math.ceil(math.pi * kmax * (fb - fa) / _PANEL_SPAN))
        while True:
            if panels > max_panels:
                raise OracleRangeError(
                    f"frequency too large for oracle: |n|={kmax:.6g} needs > {max_panels} panels")
            coarse = _gl_segment(fa, fb, chunk, panels, _GL_NODES - _GL_EXTRA)
            fine = _gl_segment(fa, fb, chunk, panels, _GL_NODES)
            if float(np.max(np.abs(fine - coarse))) <= tol:
                break
            panels *= 2
        out[lo:lo + _CHUNK] = fine
    return out


def _oracle_values(mu: Measure, ns: np.ndarray, tol: float, max_panels: int) -> np.ndarray:
    ns = np.asarray(ns, dtype=np.int64) + mu.modulation
    out = np.zeros(ns.shape, dtype=np.complex128)
    if ns.size == 0:
        return out
    ks, inverse = np.unique(np.abs(ns), return_inverse=True)
    negative = ns < 0
    for a, b, density in mu.segments:
        if density == 0:
            continue
        scale = abs(float(density)) / 2
        integrals = _segment_integrals(float(a), float(b), ks.astype(np.float64),
                                       tol / max(scale, 1e-300), max_panels)
        vals = integrals[inverse]
        # real integrand weights: the -k integral is the conjugate of the +k one
        vals = np.where(negative, np.conj(vals), vals)
        out += float(density) / 2 * vals
    fns = ns.astype(np.float64)
    for p, m in mu.atoms:
        out += float(m) / 2 * np.exp(1j * np.pi * fns * float(p))
    return out


def coefficient_oracle(mu: Measure, n, tol: float = 1e-12, max_panels: int = 1 << 14):
    """Adaptive Gauss-Legendre quadrature of ``1/2 * integral exp(i*pi*n*x) dmu``.

    ``n`` may be an integer or an array of integers; arrays share one panel
    layout sized for the largest ``|n|``. Raises :class:`OracleRangeError`
    when the panel budget would be exceeded.
    """
    if np.ndim(n) == 0:
        if abs(int(n)) > 2 ** 52:
            raise OracleRangeError("frequency too large for oracle: not representable in float")
        return complex(_oracle_values(mu, np.array([int(n)]), tol, max_panels)[0])
    arr = np.asarray([int(k) for k in n])
    if arr.size and np.max(np.abs(arr)) > 2 ** 52:
        raise OracleRangeError("frequency too large for oracle: not representable in float")
    return _oracle_values(mu, arr, tol, max_panels)


def coefficients_to_csv(coefs: Iterable[FourierCoefficient], header_lines: Sequence[str] = ()) -> str:
    """CSV text with columns n, re, im, abs (``repr`` floats round-trip)."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "re", "im", "abs"])
    for c in coefs:
        writer.writerow([str(c.frequency), repr(c.value.real), repr(c.value.imag), repr(c.abs)])
    return buf.getvalue()


def coefficient_bound(mu: Measure) -> Fraction:
    """``||mu|| / 2``, the trivial bound on every ``|mu_hat(n)|``."""
    return total_variation(mu) / 2
