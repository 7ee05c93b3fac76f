"""Finite signed measures on the circle: piecewise-uniform parts plus atoms.

Intervals are stored by rational center and half-length. An interval that
crosses the identification point -1 ~ 1 is split into two non-wrapping
pieces whenever endpoint arithmetic is needed, so every comparison below is
a plain total-order comparison of Fractions.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .numerics import RationalLike, as_rational, rational_from_json, rational_to_json, to_circle

ONE = Fraction(1)


@dataclass(frozen=True)
class RationalInterval:
    """Closed arc ``[center - half_length, center + half_length]`` on (-1, 1]."""

    center: Fraction
    half_length: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", to_circle(self.center))
        h = as_rational(self.half_length)
        if not 0 < h <= 1:
            raise ValueError(f"half_length must lie in (0, 1], got {h}")
        object.__setattr__(self, "half_length", h)

    @classmethod
    def from_endpoints(cls, a: RationalLike, b: RationalLike) -> "RationalInterval":
        a, b = as_rational(a), as_rational(b)
        if b <= a:
            raise ValueError("interval needs a < b")
        return cls((a + b) / 2, (b - a) / 2)

    @property
    def length(self) -> Fraction:
        return 2 * self.half_length

    @property
    def is_full_circle(self) -> bool:
        return self.half_length == 1

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """Non-wrapping real segments inside [-1, 1] covering the arc."""
        if self.is_full_circle:
            return [(-ONE, ONE)]
        a = self.center - self.half_length
        b = self.center + self.half_length
        if a < -1:
            return [(-ONE, b), (a + 2, ONE)]
        if b > 1:
            return [(-ONE, b - 2), (a, ONE)]
        return [(a, b)]

    def endpoints(self) -> tuple[Fraction, Fraction]:
        """Both endpoints reduced into (-1, 1]."""
        return (to_circle(self.center - self.half_length),
                to_circle(self.center + self.half_length))

    def contains_point(self, x: RationalLike) -> bool:
        return abs(to_circle(as_rational(x) - self.center)) <= self.half_length

    def contains(self, other: "RationalInterval") -> bool:
        """Exact containment of ``other`` in this arc."""
        if self.is_full_circle:
            return True
        offset = to_circle(other.center - self.center)
        return abs(offset) + other.half_length <= self.half_length


def _check_disjoint(segments: list[tuple[Fraction, Fraction]], what: str) -> None:
    segments = sorted(segments)
    for (a0, b0), (a1, b1) in zip(segments, segments[1:]):
        if a1 < b0:
            raise ValueError(f"{what} overlap: [{a0}, {b0}] and [{a1}, {b1}]")


@dataclass(frozen=True)
class Measure:
    """Signed measure ``sum w_i * Unif(I_i) + sum m_j * delta_{p_j}``.

    ``uniform`` holds ``(interval, weight)`` pairs where ``weight`` is the
    total signed mass spread evenly over the interval; ``atoms`` holds
    ``(point, mass)`` pairs. ``modulation`` multiplies the measure by
    ``exp(i*pi*modulation*x)``, which shifts the Fourier transform.
    """

    uniform: tuple = ()
    atoms: tuple = ()
    modulation: int = 0

    def __post_init__(self):
        uniform = tuple((iv, as_rational(w)) for iv, w in self.uniform)
        atoms = tuple((to_circle(p), as_rational(m)) for p, m in self.atoms)
        object.__setattr__(self, "uniform", uniform)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "modulation", int(self.modulation))
        _check_disjoint([s for iv, _ in uniform for s in iv.pieces()], "uniform parts")
        points = [p for p, _ in atoms]
        if len(set(points)) != len(points):
            raise ValueError("atom points must be pairwise distinct")

    def __add__(self, other: "Measure") -> "Measure":
        if self.modulation != other.modulation:
            raise ValueError("cannot add measures with different modulations")
        return Measure(self.uniform + other.uniform, self.atoms + other.atoms, self.modulation)

    @property
    def is_zero(self) -> bool:
        return all(w == 0 for _, w in self.uniform) and all(m == 0 for _, m in self.atoms)

    @cached_property
    def segments(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        """Sorted ``(a, b, density)`` triples; density is mass per unit length."""
        out = []
        for iv, w in self.uniform:
            density = w / iv.length
            out.extend((a, b, density) for a, b in iv.pieces())
        out.sort()
        return out

    def support_segments(self) -> list[tuple[Fraction, Fraction]]:
        """Real segments and degenerate point segments carrying nonzero mass."""
        segs = [(a, b) for a, b, d in self.segments if d != 0]
        segs.extend((p, p) for p, m in self.atoms if m != 0)
        return sorted(segs)


def total_variation(mu: Measure) -> Fraction:
    """``||mu|| = sum |weight| + sum |mass|`` (parts are disjoint)."""
    return sum((abs(w) for _, w in mu.uniform), Fraction(0)) + sum(
        (abs(m) for _, m in mu.atoms), Fraction(0))


def lebesgue(total_mass: RationalLike = 1) -> Measure:
    """Uniform measure of the given total mass on the whole circle."""
    return Measure(uniform=((RationalInterval(0, 1), as_rational(total_mass)),))


def dirac(point: RationalLike = 0, mass: RationalLike = 1) -> Measure:
    return Measure(atoms=((as_rational(point), as_rational(mass)),))


def uniform_on(intervals: Iterable[RationalInterval], total_mass: RationalLike = 1) -> Measure:
    """Equal mass on each interval, summing to ``total_mass``."""
    intervals = list(intervals)
    if not intervals:
        raise ValueError("need at least one interval")
    w = as_rational(total_mass) / len(intervals)
    return Measure(uniform=tuple((iv, w) for iv in intervals))


def normalized_lebesgue_on(intervals: Iterable[RationalInterval],
                           total_mass: RationalLike = 1) -> Measure:
    """Mass proportional to length on a disjoint interval family."""
    intervals = list(intervals)
    total_length = sum((iv.length for iv in intervals), Fraction(0))
    scale = as_rational(total_mass) / total_length
    return Measure(uniform=tuple((iv, iv.length * scale) for iv in intervals))


def modulate(mu: Measure, frequency: int) -> Measure:
    """``exp(i*pi*frequency*x) * mu``; its transform is ``n -> mu_hat(n + frequency)``."""
    return Measure(mu.uniform, mu.atoms, mu.modulation + int(frequency))


class _SegmentIndex:
    """Sorted disjoint segments with bisect lookup."""

    def __init__(self, segments: Sequence[tuple[Fraction, Fraction]]):
        self.segments = sorted(segments)
        self.starts = [a for a, _ in self.segments]

    def containing(self, a: Fraction, b: Fraction):
        """Segment containing [a, b] entirely, or None."""
        i = bisect.bisect_right(self.starts, a) - 1
        if i >= 0 and self.segments[i][1] >= b:
            return self.segments[i]
        return None

    def overlapping(self, a: Fraction, b: Fraction):
        i = max(bisect.bisect_right(self.starts, a) - 1, 0)
        while i < len(self.segments) and self.segments[i][0] < b:
            lo = max(a, self.segments[i][0])
            hi = min(b, self.segments[i][1])
            if hi > lo:
                yield lo, hi
            i += 1

    def contains_point(self, x: Fraction) -> bool:
        if self.containing(x, x) is not None:
            return True
        # the point 1 is also the point -1
        return x == 1 and bool(self.segments) and self.segments[0][0] == -1


def restrict(mu: Measure, keep: Sequence[RationalInterval]) -> Measure:
    """Restriction of ``mu`` to the union of the disjoint arcs in ``keep``.

    Parts lying inside ``keep`` are kept verbatim; other parts are clipped and
    their weight scaled by the retained fraction of their length.
    """
    segs = [s for iv in keep for s in iv.pieces()]
    _check_disjoint(segs, "keep intervals")
    return _restrict_to_segments(mu, segs)


def _restrict_to_segments(mu: Measure, segments: Sequence[tuple[Fraction, Fraction]]) -> Measure:
    index = _SegmentIndex(segments)
    uniform = []
    for iv, w in mu.uniform:
        pieces = iv.pieces()
        if all(index.containing(a, b) is not None for a, b in pieces):
            uniform.append((iv, w))
            continue
        density = w / iv.length
        for a, b in pieces:
            for lo, hi in index.overlapping(a, b):
                uniform.append((RationalInterval.from_endpoints(lo, hi), density * (hi - lo)))
    atoms = tuple((p, m) for p, m in mu.atoms if index.contains_point(p))
    return Measure(tuple(uniform), atoms, mu.modulation)


def measure_to_json(mu: Measure) -> dict:
    out = {
        "uniform": [
            {"interval": {"center": rational_to_json(iv.center),
                          "half_length": rational_to_json(iv.half_length)},
             "weight": rational_to_json(w)}
            for iv, w in mu.uniform
        ],
        "atoms": [{"point": rational_to_json(p), "mass": rational_to_json(m)}
                  for p, m in mu.atoms],
    }
    if mu.modulation:
        out["modulation"] = str(mu.modulation)
    return out


def measure_from_json(obj: dict) -> Measure:
    unknown = set(obj) - {"uniform", "atoms", "modulation"}
    if unknown:
        raise ValueError(f"unknown measure fields: {sorted(unknown)}")
    uniform = tuple(
        (RationalInterval(rational_from_json(u["interval"]["center"]),
                          rational_from_json(u["interval"]["half_length"])),
         rational_from_json(u["weight"]))
        for u in obj.get("uniform", []))
    atoms = tuple((rational_from_json(a["point"]), rational_from_json(a["mass"]))
                  for a in obj.get("atoms", []))
    return Measure(uniform, atoms, int(obj.get("modulation", 0)))
