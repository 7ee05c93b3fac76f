"""Cantor-type construction on the grids ``2Z/N_j``.

Stage ``k`` keeps closed arcs of length ``1/L_k`` centred on ``2Z/N_k``
(``L_k = ceil(N_k**(1 + delta))``) that lie entirely inside an arc of stage
``k - 1``. Every point of stage ``k`` is therefore within ``1/(2 L_j)`` of
``2Z/N_j`` for all ``j <= k``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exceptions import StageError
from .measure import Measure, RationalInterval, _check_disjoint
from .numerics import (
    RationalLike,
    as_rational,
    circle_distance,
    iroot_floor,
    rational_from_json,
    rational_to_json,
    window_length,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ConstructionParams:
    """Growth data ``delta = p/q`` and the frequency scales ``N_1 < N_2 < ...``."""

    delta: Fraction
    N: tuple
    L: tuple = field(init=False)

    def __post_init__(self):
        delta = as_rational(self.delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        N = tuple(int(n) for n in self.N)
        if not N:
            raise ValueError("need at least N_1")
        if any(n < 1 for n in N) or any(b <= a for a, b in zip(N, N[1:])):
            raise ValueError("N must be a strictly increasing sequence of positive integers")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", tuple(window_length(n, delta) for n in N))

    @classmethod
    def from_alpha(cls, alpha: RationalLike, N: Sequence[int]) -> "ConstructionParams":
        return cls(1 - as_rational(alpha), tuple(N))

    @property
    def alpha(self) -> Fraction:
        return 1 - self.delta

    @property
    def depth(self) -> int:
        return len(self.N)

    def M(self, k: int) -> int:
        """Children per parent at stage ``k`` (``k >= 2``); ``M_1 = N_1``."""
        if k == 1:
            return self.N[0]
        return self.N[k - 1] // (2 * self.L[k - 2]) - 3

    def stage_size(self, k: int) -> int:
        """``|D_k| = N_1 * prod_{j=2..k} M_j``."""
        size = self.N[0]
        for j in range(2, k + 1):
            size *= self.M(j)
        return size


def growth_condition(N: Sequence[int], delta: Fraction, k: int) -> bool:
    """``(N_1 4^(k+2) prod_{j<=k} N_j^delta)^k < N_{k+1}`` in integers.

    With ``delta = p/q`` this is ``(N_1 4^(k+2))^(qk) (prod N_j)^(pk) < N_{k+1}^q``.
    """
    p, q = delta.numerator, delta.denominator
    prod = math.prod(N[:k])
    return (N[0] * 4 ** (k + 2)) ** (q * k) * prod ** (p * k) < N[k] ** q


def rapid_growth(N_prev: int, L_prev: int, N_next: int, delta: Fraction) -> bool:
    """``N_next >= 12 L_prev`` and ``M >= N_next / (4 N_prev^(1+delta))`` exactly."""
    if N_next < 12 * L_prev:
        return False
    M = N_next // (2 * L_prev) - 3
    p, q = delta.numerator, delta.denominator
    return (4 * M) ** q * N_prev ** (p + q) >= N_next ** q


def check_params(params: ConstructionParams) -> list[str]:
    """Names of violated growth requirements (empty when the sequence is admissible)."""
    problems = []
    N, L, d = params.N, params.L, params.delta
    for k in range(1, params.depth):
        if not growth_condition(N, d, k):
            problems.append(f"growth condition fails for N_{k + 1}")
        if not rapid_growth(N[k - 1], L[k - 1], N[k], d):
            problems.append(f"rapid-growth assumption fails for N_{k + 1}")
    return problems


def _least_growth(N: Sequence[int], delta: Fraction, k: int) -> int:
    p, q = delta.numerator, delta.denominator
    bound = (N[0] * 4 ** (k + 2)) ** (q * k) * math.prod(N[:k]) ** (p * k)
    return iroot_floor(bound, q) + 1


def _least_rapid(N_prev: int, L_prev: int, delta: Fraction, start: int) -> int:
    """Least ``N >= start`` passing :func:`rapid_growth`."""
    p, q = delta.numerator, delta.denominator
    n = max(start, 12 * L_prev)
    block = 2 * L_prev
    while True:
        M = n // block - 3
        # within a block M is fixed and the condition holds up to a cap
        cap = iroot_floor((4 * M) ** q * N_prev ** (p + q), q) if M > 0 else -1
        if n <= cap:
            return n
        n = (n // block + 1) * block


def generate_sequence(alpha: RationalLike, N1: int, depth: int,
                      max_digits: int | None = None) -> ConstructionParams:
    """Minimal admissible sequence: each ``N_{k+1}`` is the least integer
    satisfying the growth condition and the rapid-growth assumption."""
    alpha = as_rational(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if int(N1) < 4:
        raise ValueError("N1 must be >= 4")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    delta = 1 - alpha
    N = [int(N1)]
    for k in range(1, depth):
        L_prev = window_length(N[-1], delta)
        n = _least_growth(N, delta, k)
        while True:
            n = _least_rapid(N[-1], L_prev, delta, n)
            if growth_condition(N + [n], delta, k):
                break
            n += 1
        if max_digits is not None and len(str(n)) > max_digits:
            raise StageError(f"depth infeasible: N_{k + 1} has {len(str(n))} digits > {max_digits}")
        N.append(n)
    params = ConstructionParams(delta, tuple(N))
    assert not check_params(params), check_params(params)
    return params


@dataclass(frozen=True)
class StageFamily:
    """Arcs of stage ``k``: centres ``2m/N_k``, half-length ``1/(2 L_k)``."""

    stage: int
    intervals: tuple
    parent_map: tuple

    def __len__(self):
        return len(self.intervals)

    @property
    def half_length(self) -> Fraction:
        return self.intervals[0].half_length


def full_circle_family() -> StageFamily:
    """Stage 0: the whole circle as a single arc."""
    return StageFamily(0, (RationalInterval(0, 1),), (None,))


def _stage_one(params: ConstructionParams) -> StageFamily:
    N1, L1 = params.N[0], params.L[0]
    half = Fraction(1, 2 * L1)
    lo = -(N1 // 2) + 1 if N1 % 2 == 0 else -(N1 // 2)
    intervals = tuple(RationalInterval(Fraction(2 * m, N1), half) for m in range(lo, lo + N1))
    return StageFamily(1, intervals, (0,) * N1)


def _children(parent: RationalInterval, N: int, half: Fraction, count: int) -> list[RationalInterval]:
    # unwrapped coordinates of the parent arc; leftmost fitting centres first
    a = parent.center - parent.half_length
    b = parent.center + parent.half_length
    m_lo = math.ceil((a + half) * N / 2)
    m_hi = math.floor((b - half) * N / 2)
    if m_hi - m_lo + 1 < count:
        raise StageError(f"parent {parent} holds only {m_hi - m_lo + 1} children, need {count}")
    return [RationalInterval(Fraction(2 * m, N), half) for m in range(m_lo, m_lo + count)]


def build_stage(params: ConstructionParams, k: int, previous: StageFamily | None = None) -> StageFamily:
    """Stage ``k`` family; ``previous`` (stage ``k - 1``) is rebuilt if omitted."""
    if not 1 <= k <= params.depth:
        raise StageError(f"stage {k} outside [1, {params.depth}]")
    if k == 1:
        return _stage_one(params)
    if previous is None:
        previous = build_stage(params, k - 1)
    if previous.stage != k - 1:
        raise StageError("previous family has the wrong stage")
    M = params.M(k)
    if M < 1:
        raise StageError(f"M_{k} < 1: the sequence violates the rapid-growth assumption")
    N, half = params.N[k - 1], Fraction(1, 2 * params.L[k - 1])
    intervals, parents = [], []
    for index, parent in enumerate(previous.intervals):
        intervals.extend(_children(parent, N, half, M))
        parents.extend([index] * M)
    return StageFamily(k, tuple(intervals), tuple(parents))


def build_stages(params: ConstructionParams, upto: int | None = None) -> list[StageFamily]:
    upto = params.depth if upto is None else upto
    families: list[StageFamily] = []
    for k in range(1, upto + 1):
        families.append(build_stage(params, k, families[-1] if families else None))
    return families


def stage_measure(params: ConstructionParams, k: int, family: StageFamily | None = None) -> Measure:
    """Probability measure spread equally over the arcs of ``D_k``."""
    family = family or build_stage(params, k)
    w = Fraction(1, len(family))
    return Measure(uniform=tuple((iv, w) for iv in family.intervals))


def window_violations(params: ConstructionParams, family: StageFamily,
                      radius: Fraction = HALF) -> list[tuple[int, int, Fraction]]:
    """Endpoints with ``dist(x, 2Z/N_j) * L_j > radius`` for some ``j <= stage``.

    Returns ``(interval index, j, scaled distance)`` for each violation.
    """
    bad = []
    for i, iv in enumerate(family.intervals):
        for x in iv.endpoints():
            for j in range(1, family.stage + 1):
                scaled = circle_distance(x, params.N[j - 1]) * params.L[j - 1]
                if scaled > radius:
                    bad.append((i, j, scaled))
    return bad


def containment_violations(child: StageFamily, parent: StageFamily) -> list[int]:
    """Indices of children not contained in their recorded parent."""
    return [i for i, (iv, p) in enumerate(zip(child.intervals, child.parent_map))
            if not parent.intervals[p].contains(iv)]


# ---------------------------------------------------------------- truncation sets


@dataclass(frozen=True)
class TruncationSet:
    """``{x : dist(x, 2Z/N_j) * L_j <= t for all j <= depth}`` as disjoint arcs."""

    t: Fraction
    depth: int
    intervals: tuple

    @property
    def total_length(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))


def truncation_level(params: ConstructionParams, x: RationalLike, depth: int | None = None) -> Fraction:
    """``max_{j<=depth} dist(x, 2Z/N_j) * L_j``; ``x`` lies in ``E_t`` iff this is ``<= t``."""
    depth = params.depth if depth is None else depth
    return max((circle_distance(x, params.N[j]) * params.L[j] for j in range(depth)),
               default=Fraction(0))


def truncate_segments(params: ConstructionParams, t: Fraction, depth: int,
                      segments: Sequence[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    """Intersect real segments in [-1, 1] with the depth-``depth`` set ``E_t``.

    Only grid neighbourhoods meeting the current segments are generated, so
    the cost follows the size of the answer rather than of ``E_t``.
    Degenerate segments ``(p, p)`` are treated as points.
    """
    current = sorted(segments)
    for j in range(depth):
        N, L = params.N[j], params.L[j]
        r = t / L
        if r >= Fraction(1, N):
            continue  # neighbourhoods cover the circle
        nxt = []
        for a, b in current:
            m_lo = math.ceil((a - r) * N / 2)
            m_hi = math.floor((b + r) * N / 2)
            for m in range(m_lo, m_hi + 1):
                c = Fraction(2 * m, N)
                lo, hi = max(a, c - r), min(b, c + r)
                if hi > lo or (hi == lo and a == b):
                    nxt.append((lo, hi))
        current = nxt
    return current


def truncation_set(params: ConstructionParams, t: RationalLike, J: int | None = None) -> TruncationSet:
    t = as_rational(t)
    if t <= 0:
        raise ValueError("t must be positive")
    J = params.depth if J is None else int(J)
    if not 0 <= J <= params.depth:
        raise ValueError(f"J outside [0, {params.depth}]")
    segs = truncate_segments(params, t, J, [(Fraction(-1), Fraction(1))])
    intervals = tuple(RationalInterval.from_endpoints(a, b) for a, b in segs)
    _check_disjoint([s for iv in intervals for s in iv.pieces()], "truncation arcs")
    return TruncationSet(t, J, intervals)


# ---------------------------------------------------------------- serialization


def params_to_json(params: ConstructionParams) -> dict:
    return {
        "alpha": rational_to_json(params.alpha),
        "delta": rational_to_json(params.delta),
        "depth": params.depth,
        "N": [str(n) for n in params.N],
        "L": [str(v) for v in params.L],
        "M": [str(params.M(k)) for k in range(1, params.depth + 1)],
    }


def params_from_json(obj: dict) -> ConstructionParams:
    unknown = set(obj) - {"alpha", "delta", "depth", "N", "L", "M"}
    if unknown:
        raise ValueError(f"unknown params fields: {sorted(unknown)}")
    params = ConstructionParams(rational_from_json(obj["delta"]), tuple(int(n) for n in obj["N"]))
    if "alpha" in obj and rational_from_json(obj["alpha"]) != params.alpha:
        raise ValueError("alpha and delta are inconsistent")
    if "L" in obj and tuple(int(v) for v in obj["L"]) != params.L:
        raise ValueError("stored L does not match ceil(N^(1+delta))")
    return params


def family_to_json(family: StageFamily) -> dict:
    return {
        "stage": family.stage,
        "count": len(family),
        "half_length": rational_to_json(family.half_length),
        "centers": [rational_to_json(iv.center) for iv in family.intervals],
        "parent_map": list(family.parent_map),
    }


def family_from_json(obj: dict) -> StageFamily:
    half = rational_from_json(obj["half_length"])
    intervals = tuple(RationalInterval(rational_from_json(c), half) for c in obj["centers"])
    return StageFamily(int(obj["stage"]), intervals, tuple(obj["parent_map"]))


def summary_csv(params: ConstructionParams, families: Sequence[StageFamily],
                header_lines: Sequence[str] = ()) -> str:
    """Per-stage counts: stage, N, L, M, intervals."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stage", "N", "L", "M", "intervals"])
    for fam in families:
        k = fam.stage
        writer.writerow([k, params.N[k - 1], params.L[k - 1], params.M(k), len(fam)])
    return buf.getvalue()
