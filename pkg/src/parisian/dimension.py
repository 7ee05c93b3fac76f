"""Mass-distribution audit and box counting for finite construction stages.

For a stage measure ``mu_k`` the audit computes, at each scanned length
``l``, the exact supremum of ``mu(I)`` over all arcs ``I`` of length ``l``
and compares ``mu(I) / l^s`` with the constant
``c_{k,s} = N_1 4^k (prod_{j<k} N_j)^delta l^(1-s)`` of the stage bracket
``1/N_k <= l < 1/N_{k-1}``. Empirical ratios are rounded down and
constants rounded up, so a failure is never a rounding artifact.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath

from .construction import ConstructionParams, StageFamily
from .exceptions import ScaleBracketError
from .measure import Measure, RationalInterval
from .numerics import (
    RationalLike,
    as_rational,
    float_down,
    float_up,
    rational_to_json,
    working_precision,
)

CIRCLE = Fraction(2)


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def stage_bracket(params: ConstructionParams, length: RationalLike) -> int | None:
    """Stage ``k`` with ``1/N_k <= length < 1/N_{k-1}``, or None below ``1/N_depth``.

    Stage 1 covers every length up to the whole circle.
    """
    length = as_rational(length)
    for k in range(1, params.depth + 1):
        if length >= Fraction(1, params.N[k - 1]):
            return k
    return None


def theoretical_constant(params: ConstructionParams, k: int, s: RationalLike,
                         interval_length: RationalLike) -> float:
    """``N_1 4^k (prod_{j<=k-1} N_j)^delta |I|^(1-s)``, rounded upward."""
    s, ell = as_rational(s), as_rational(interval_length)
    if not 1 <= k <= params.depth:
        raise ScaleBracketError(f"stage {k} outside [1, {params.depth}]")
    upper = CIRCLE if k == 1 else Fraction(1, params.N[k - 2])
    lower = Fraction(1, params.N[k - 1])
    if not (lower <= ell < upper or (k == 1 and ell == CIRCLE)):
        raise ScaleBracketError(f"scale {ell} outside stage bracket [{lower}, {upper}) of stage {k}")
    d = params.delta
    with mpmath.workprec(working_precision() + 64):
        prod = math.prod(params.N[:k - 1])
        value = (params.N[0] * 4 ** k) * mpmath.power(prod, _mp(d)) * mpmath.power(_mp(ell), _mp(1 - s))
        return float_up(value)


def stage_constant(params: ConstructionParams, k: int, s: RationalLike) -> float:
    """``c_{k,s}`` at the finest scale ``|I| = 1/N_k`` of its bracket."""
    return theoretical_constant(params, k, s, Fraction(1, params.N[k - 1]))


# ---------------------------------------------------------------- exact masses


class _MassIndex:
    """Exact ``mu([x, y])`` for nonnegative piecewise-uniform + atomic measures."""

    def __init__(self, mu: Measure):
        segs = mu.segments
        self.starts = [a for a, _, _ in segs]
        self.ends = [b for _, b, _ in segs]
        self.density = [d for _, _, d in segs]
        self.prefix = [Fraction(0)]
        for a, b, d in segs:
            self.prefix.append(self.prefix[-1] + d * (b - a))
        atoms = sorted(mu.atoms)
        self.atom_pts = [p for p, _ in atoms]
        self.atom_prefix = [Fraction(0)]
        for _, m in atoms:
            self.atom_prefix.append(self.atom_prefix[-1] + m)
        self.total = self.prefix[-1] + self.atom_prefix[-1]

    def _cont(self, y: Fraction) -> Fraction:
        """Continuous mass on [-1, y]."""
        i = bisect.bisect_right(self.starts, y)
        if i == 0:
            return Fraction(0)
        mass = self.prefix[i - 1]
        a, b, d = self.starts[i - 1], self.ends[i - 1], self.density[i - 1]
        return mass + d * (min(y, b) - a)

    def _atoms(self, x: Fraction, y: Fraction) -> Fraction:
        lo = bisect.bisect_left(self.atom_pts, x)
        hi = bisect.bisect_right(self.atom_pts, y)
        return self.atom_prefix[hi] - self.atom_prefix[lo]

    def segment(self, x: Fraction, y: Fraction) -> Fraction:
        """Mass of the closed real segment [x, y] inside [-1, 1]."""
        return self._cont(y) - self._cont(x) + self._atoms(x, y)

    def arc(self, x: Fraction, length: Fraction) -> Fraction:
        """Mass of the closed arc starting at ``x`` (in [-1, 1)) of the given length."""
        if length >= CIRCLE:
            return self.total
        y = x + length
        if y <= 1:
            return self.segment(x, y)
        return self.segment(x, Fraction(1)) + self.segment(Fraction(-1), y - 2)


@lru_cache(maxsize=1024)
def max_arc_mass(mu: Measure, length: RationalLike) -> tuple[Fraction, Fraction]:
    """Exact ``sup mu(I)`` over closed arcs of the given length, with a maximizer.

    ``x -> mu([x, x + l])`` is piecewise linear between the points where an
    end of the arc meets a segment endpoint or an atom, so checking those
    breakpoints gives the supremum.
    """
    length = as_rational(length)
    index = _MassIndex(mu)
    if length >= CIRCLE:
        return index.total, Fraction(-1)
    marks = set()
    for a, b, _ in mu.segments:
        marks.update((a, b, a - length, b - length))
    for p, _ in mu.atoms:
        marks.update((p, p - length))
    best, arg = Fraction(0), Fraction(-1)
    for x in sorted(marks):
        x = x % 2
        if x >= 1:
            x -= 2  # start in [-1, 1)
        m = index.arc(x, length)
        if m > best:
            best, arg = m, x
    return best, arg


def count_meeting(family: StageFamily, start: RationalLike, length: RationalLike) -> int:
    """Number of family arcs meeting the closed arc ``[start, start + length]``."""
    probe = RationalInterval(as_rational(start) + as_rational(length) / 2, as_rational(length) / 2)
    return sum(1 for iv in family.intervals
               if abs(((iv.center - probe.center + 1) % 2) - 1) <= iv.half_length + probe.half_length)


# ---------------------------------------------------------------- audit


@dataclass(frozen=True)
class ScaleRow:
    scale: Fraction
    max_mass: Fraction
    max_ratio: float
    interval_start: Fraction
    stage: int | None
    theoretical_c: float | None

    @property
    def passed(self) -> bool | None:
        if self.theoretical_c is None:
            return None
        return self.max_ratio <= self.theoretical_c


@dataclass(frozen=True)
class DimensionReport:
    s: Fraction
    empirical_max_ratio: float
    theoretical_c: float | None
    per_scale_breakdown: tuple
    box_counts: tuple = ()
    dimension_estimate: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.per_scale_breakdown)


def _ratio_down(mass: Fraction, ell: Fraction, s: Fraction) -> float:
    """``mass / ell^s`` rounded toward zero; exact when ``s`` is an integer."""
    if s.denominator == 1:
        r = mass / ell ** s.numerator
        f = float(r)
        return math.nextafter(f, -math.inf) if Fraction(f) > r else f
    return float_down(_mp(mass) / mpmath.power(_mp(ell), _mp(s)))


def audit_scales(finest_scale: RationalLike, params: ConstructionParams | None = None) -> list[Fraction]:
    """The whole circle, dyadic lengths ``2^-m >= finest_scale`` and, with
    ``params``, the stage lengths ``1/N_j`` and ``1/L_j``."""
    finest = as_rational(finest_scale)
    if finest <= 0:
        raise ValueError("finest_scale must be positive")
    scales = {CIRCLE}
    ell = Fraction(1)
    while ell >= finest:
        scales.add(ell)
        ell /= 2
    if params is not None:
        for n in params.N + params.L:
            if Fraction(1, n) >= finest:
                scales.add(Fraction(1, n))
    return sorted(scales, reverse=True)


def mass_ratio_audit(mu: Measure, s: RationalLike, finest_scale: RationalLike,
                     params: ConstructionParams | None = None, stage: int | None = None,
                     family: StageFamily | None = None) -> DimensionReport:
    """Scan ``mu(I) / |I|^s`` over all arcs at each audit scale.

    With ``params``, each scale inside the bracket of a stage ``k <= stage``
    is compared with ``c_{k,s}``; finer scales are reported without a
    constant. ``family`` adds box counts and a dimension estimate.
    """
    s = as_rational(s)
    if any(w < 0 for _, w in mu.uniform) or any(m < 0 for _, m in mu.atoms):
        raise ValueError("audit needs a nonnegative measure")
    if params is not None and stage is None:
        stage = params.depth
    rows = []
    with mpmath.workprec(working_precision() + 64):
        for ell in audit_scales(finest_scale, params):
            mass, start = max_arc_mass(mu, ell)
            ratio = _ratio_down(mass, ell, s)
            k = stage_bracket(params, ell) if params is not None else None
            if k is not None and k > stage:
                k = None
            c = theoretical_constant(params, k, s, ell) if k is not None else None
            rows.append(ScaleRow(ell, mass, ratio, start, k, c))
    bracketed = [r for r in rows if r.theoretical_c is not None]
    considered = bracketed if params is not None else rows
    emp = max((r.max_ratio for r in considered), default=0.0)
    theo = max((r.theoretical_c for r in bracketed), default=None)
    boxes, estimate = (), None
    if family is not None:
        boxes = tuple((ell, box_count(family, ell)) for ell in audit_scales(finest_scale, params)
                      if ell < CIRCLE)
        if family.stage >= 1:
            estimate = dimension_estimate(family)
    return DimensionReport(s, emp, theo, tuple(rows), boxes, estimate)


# ---------------------------------------------------------------- box counting


def box_count(family: StageFamily, scale: RationalLike) -> int:
    """Boxes ``[-1 + i*l, -1 + (i+1)*l)`` of the circle meeting a family arc
    in a set of positive length."""
    ell = as_rational(scale)
    if ell <= 0:
        raise ValueError("scale must be positive")
    nboxes = math.ceil(CIRCLE / ell)
    ranges = []
    for iv in family.intervals:
        for a, b in iv.pieces():
            i0 = math.floor((a + 1) / ell)
            i1 = min(math.ceil((b + 1) / ell) - 1, nboxes - 1)
            ranges.append((i0, i1))
    ranges.sort()
    count, last = 0, -1
    for i0, i1 in ranges:
        i0 = max(i0, last + 1)
        if i1 >= i0:
            count += i1 - i0 + 1
            last = i1
    return count


def dimension_estimate(family: StageFamily, scale: RationalLike | None = None) -> float:
    """``log(box_count) / log(2 / scale)``; the default scale is the arc length.

    The denominator counts the boxes needed for the whole circle, so the
    full circle estimates exactly 1.
    """
    ell = family.intervals[0].length if scale is None else as_rational(scale)
    count = box_count(family, ell)
    total = CIRCLE / ell
    return math.log(count) / math.log(float(total))


# ---------------------------------------------------------------- export


def report_to_json(report: DimensionReport) -> dict:
    return {
        "s": rational_to_json(report.s),
        "empirical_max_ratio": report.empirical_max_ratio,
        "theoretical_c": report.theoretical_c,
        "passed": report.passed,
        "per_scale_breakdown": [
            {"scale": rational_to_json(r.scale), "max_mass": rational_to_json(r.max_mass),
             "max_ratio": r.max_ratio, "interval_start": rational_to_json(r.interval_start),
             "stage": r.stage, "theoretical_c": r.theoretical_c, "passed": r.passed}
            for r in report.per_scale_breakdown
        ],
        "box_counts": [{"scale": rational_to_json(ell), "count": n} for ell, n in report.box_counts],
        "dimension_estimate": report.dimension_estimate,
    }


def report_csv(reports: Sequence[DimensionReport], header_lines: Sequence[str] = ()) -> str:
    """Rows ``s, scale, max_ratio, theoretical_c, pass`` for plotting."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s", "scale", "max_ratio", "theoretical_c", "pass"])
    for rep in reports:
        for r in rep.per_scale_breakdown:
            status = "n/a" if r.passed is None else ("pass" if r.passed else "fail")
            writer.writerow([str(rep.s), str(r.scale), repr(r.max_ratio),
                             "" if r.theoretical_c is None else repr(r.theoretical_c), status])
    return buf.getvalue()
