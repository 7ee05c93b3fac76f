"""Inductive choice of frequencies keeping every signed sum in the spectrum.

Given a measure whose support sits inside the windows
``2Z/N + [-w/L, w/L]`` of every candidate ``N``, each candidate moves all
coefficients by at most ``||mu|| * pi * max(w, 1) / N^delta``. Starting
from a nonzero coefficient and picking, at each step, the smallest
candidate whose perturbation is below the current margin keeps all ``3^k``
coefficients ``mu_hat(shift + sum eps_j n_j)`` bounded away from zero.

Mode ``"lemma1"`` works on the measure itself with margin ``gamma/2``.
Mode ``"lemma2"`` first restricts to the smallest truncation set ``E_t``
carrying all but ``gamma/3`` of the mass, selects on that restriction and
certifies ``gamma/6`` against the original measure.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .construction import ConstructionParams, truncate_segments, truncation_level
from .exceptions import (
    NoAdmissibleCandidateError,
    SelectionError,
    ShiftSearchError,
    VanishingCoefficientError,
    VerificationError,
    WindowError,
)
from .fourier import coefficient, coefficients_batch
from .measure import Measure, _restrict_to_segments, total_variation
from .numerics import (
    RationalLike,
    as_rational,
    max_grid_distance,
    window_length,
    working_precision,
)

MACHINE_ZERO = 1e-13
VERIFY_RTOL = 1e-9
LEMMA1_WINDOW = Fraction(1, 2)


@dataclass(frozen=True)
class TableEntry:
    eps: tuple
    freq: int
    value: complex

    @property
    def abs(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class SelectionState:
    """Inputs of one induction step.

    ``gamma`` is the minimum of ``|mu_hat|`` over the current table of the
    working measure; ``target`` is the bound every new coefficient must keep
    (``gamma/2`` unless given); ``window`` is the scaled distance
    ``dist(x, 2Z/N) * L`` allowed on the support.
    """

    chosen: tuple
    gamma: float
    shift: int
    working_measure: Measure
    target: float | None = None
    window: Fraction = LEMMA1_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "chosen", tuple(int(n) for n in self.chosen))
        if self.target is None:
            object.__setattr__(self, "target", self.gamma / 2)
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class SelectionStep:
    frequency: int
    gamma_before: float
    perturbation_bound: float
    truncation_t: int | None = None
    working_norm: Fraction | None = None


@dataclass(frozen=True)
class SelectionCertificate:
    mode: str
    shift: int
    frequencies: tuple
    gamma_chain: tuple
    lower_bound: float
    table: tuple
    steps: tuple = ()

    @property
    def depth(self) -> int:
        return len(self.frequencies)

    def verify(self, rtol: float = VERIFY_RTOL) -> bool:
        return all(e.abs >= self.lower_bound * (1 - rtol) for e in self.table)


def sign_patterns(k: int):
    return itertools.product((-1, 0, 1), repeat=k)


def coefficient_table(mu: Measure, shift: int, chosen: Sequence[int]) -> list[TableEntry]:
    """``mu_hat(shift + sum eps_j n_j)`` for all ``3^k`` sign patterns."""
    chosen = [int(n) for n in chosen]
    patterns = list(sign_patterns(len(chosen)))
    freqs = [int(shift) + sum(e * n for e, n in zip(eps, chosen)) for eps in patterns]
    coefs = coefficients_batch(mu, freqs)
    return [TableEntry(eps, f, c.value) for eps, f, c in zip(patterns, freqs, coefs)]


def _machine_zero(mu: Measure) -> float:
    return MACHINE_ZERO * float(total_variation(mu))


def min_coefficient(mu: Measure, shift: int, chosen: Sequence[int]) -> float:
    """``min |mu_hat(shift + sum eps_j n_j)|`` over all sign patterns."""
    table = coefficient_table(mu, shift, chosen)
    gamma = min(e.abs for e in table)
    if gamma < _machine_zero(mu) or gamma == 0:
        worst = min(table, key=lambda e: e.abs)
        raise VanishingCoefficientError(
            f"vanishing coefficient at frequency {worst.freq} (|value|={worst.abs:.3e})")
    return gamma


def shift_to_nonzero(mu: Measure, search_radius: int = 64, threshold: float | None = None) -> int:
    """Smallest ``|n| <= search_radius`` with ``|mu_hat(n)| >= threshold`` (``n >= 0`` first)."""
    norm = total_variation(mu)
    if norm == 0:
        raise ShiftSearchError("no nonzero coefficient found in radius: zero measure")
    if threshold is None:
        threshold = MACHINE_ZERO * float(norm)
    for r in range(int(search_radius) + 1):
        for n in ((0,) if r == 0 else (r, -r)):
            if coefficient(mu, n).abs >= threshold:
                return n
    raise ShiftSearchError(f"no nonzero coefficient found in radius {search_radius}")


def perturbation_bound(norm: RationalLike, N: int, delta: RationalLike,
                       window: RationalLike = LEMMA1_WINDOW) -> mpmath.mpf:
    """``||mu|| * pi * max(window, 1) / N^delta``.

    On a support with ``dist(x, 2Z/N) * L <= w`` one has
    ``|exp(i*pi*N*x) - 1| <= pi * N * w / L <= pi * w / N^delta``; the
    factor is floored at 1 to match the classical ``pi / N^delta`` form.
    """
    norm, delta, window = as_rational(norm), as_rational(delta), as_rational(window)
    with mpmath.workprec(working_precision() + 32):
        reach = max(window, Fraction(1))
        num = mpmath.mpf(norm.numerator) / norm.denominator * mpmath.pi * (
            mpmath.mpf(reach.numerator) / reach.denominator)
        return num / mpmath.power(int(N), mpmath.mpf(delta.numerator) / delta.denominator)


def window_holds(mu: Measure, N: int, delta: RationalLike, window: RationalLike = LEMMA1_WINDOW) -> bool:
    """Exact check that ``dist(x, 2Z/N) * ceil(N^(1+delta)) <= window`` on supp(mu)."""
    L = window_length(N, delta)
    window = as_rational(window)
    return all(max_grid_distance(a, b, N) * L <= window for a, b in mu.support_segments())


def next_frequency(state: SelectionState, candidates: Sequence[int], delta: RationalLike) -> int:
    """Smallest admissible candidate for the next induction step.

    Admissible means larger than twice the sum of the chosen frequencies and
    with perturbation bound below ``gamma - target``. The ``3^k`` new
    coefficients of the working measure are recomputed and checked against
    ``target`` before returning.
    """
    cands = [int(n) for n in candidates]
    if any(b <= a for a, b in zip(cands, cands[1:])):
        raise ValueError("candidates must be strictly increasing")
    delta = as_rational(delta)
    mu = state.working_measure
    norm = total_variation(mu)
    floor = 2 * sum(state.chosen)
    margin = state.gamma - state.target
    if margin <= 0:
        raise SelectionError("target must be below gamma")
    for N in cands:
        if N <= floor or (state.chosen and N <= max(state.chosen)):
            continue
        if not window_holds(mu, N, delta, state.window):
            raise WindowError(f"candidate {N} violates the window hypothesis on the support")
        if not perturbation_bound(norm, N, delta, state.window) < margin:
            continue
        table = coefficient_table(mu, state.shift, state.chosen + (N,))
        worst = min(table, key=lambda e: e.abs)
        if worst.abs < state.target * (1 - VERIFY_RTOL):
            raise VerificationError(
                f"verification failed: |mu_hat({worst.freq})| = {worst.abs!r} < {state.target!r}")
        return N
    raise NoAdmissibleCandidateError(
        f"no admissible candidate: pool exhausted (margin {margin:.3e}, need N > {floor})")


# ---------------------------------------------------------------- truncated-mode helpers


def restrict_to_truncation(mu: Measure, params: ConstructionParams, t: RationalLike,
                           depth: int | None = None) -> Measure:
    """``mu`` restricted to the depth-``depth`` truncation set ``E_t``."""
    t = as_rational(t)
    depth = params.depth if depth is None else depth
    uniform_only = Measure(mu.uniform, (), mu.modulation)
    segs = truncate_segments(params, t, depth, [(a, b) for a, b, _ in uniform_only.segments])
    restricted = _restrict_to_segments(uniform_only, segs)
    atoms = tuple((p, m) for p, m in mu.atoms if truncation_level(params, p, depth) <= t)
    return Measure(restricted.uniform, atoms, mu.modulation)


def _tail_mass(mu: Measure, params: ConstructionParams, t: int, depth: int) -> Fraction:
    return total_variation(mu) - total_variation(restrict_to_truncation(mu, params, t, depth))


def minimal_truncation(mu: Measure, params: ConstructionParams, depth: int, budget: float) -> int:
    """Least integer ``t >= 1`` with ``||mu - mu|E_t|| < budget``.

    Doubling search followed by bisection; ``E_t`` is the whole circle once
    ``t >= L_j / N_j`` for every ``j``, which bounds the search.
    """
    budget = Fraction(budget)
    cap = max((math.ceil(Fraction(params.L[j], params.N[j])) for j in range(depth)), default=1)
    hi = 1
    while _tail_mass(mu, params, hi, depth) >= budget:
        if hi > cap:
            raise SelectionError("truncation search failed: no t reaches the mass budget")
        hi *= 2
    lo = hi // 2  # fails (or is 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_mass(mu, params, mid, depth) < budget:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------- driver


def select(mu: Measure, candidates: Sequence[int], delta: RationalLike, depth: int,
           mode: str = "lemma1", truncation_params: ConstructionParams | None = None,
           truncation_depth: int | None = None, shift: int | None = None,
           search_radius: int = 64, threshold: float | None = None) -> SelectionCertificate:
    """Run ``depth`` induction steps and return the certificate.

    Raises the step errors of :func:`next_frequency`; a failed shift search
    raises :class:`ShiftSearchError`.
    """
    if mode not in ("lemma1", "lemma2"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "lemma2" and truncation_params is None:
        raise ValueError("lemma2 mode needs truncation_params")
    delta = as_rational(delta)
    if shift is None:
        shift = shift_to_nonzero(mu, search_radius, threshold)
    shift = int(shift)
    chosen: list[int] = []
    gammas = [min_coefficient(mu, shift, chosen)]
    steps = []
    J = None
    if mode == "lemma2":
        J = truncation_params.depth if truncation_depth is None else truncation_depth
    for _ in range(depth):
        gamma = gammas[-1]
        if mode == "lemma1":
            state = SelectionState(tuple(chosen), gamma, shift, mu)
            t_k, norm_k = None, None
        else:
            t_k = minimal_truncation(mu, truncation_params, J, gamma / 3)
            mu_k = restrict_to_truncation(mu, truncation_params, t_k, J)
            norm_k = total_variation(mu_k)
            state = SelectionState(tuple(chosen), min_coefficient(mu_k, shift, chosen), shift,
                                   mu_k, target=gamma / 2, window=Fraction(t_k))
        n = next_frequency(state, candidates, delta)
        bound = perturbation_bound(total_variation(state.working_measure), n, delta, state.window)
        chosen.append(n)
        gammas.append(min_coefficient(mu, shift, chosen))
        guaranteed = gamma / 2 if mode == "lemma1" else gamma / 6
        if gammas[-1] < guaranteed * (1 - VERIFY_RTOL):
            raise VerificationError(
                f"verification failed: gamma {gammas[-1]!r} below guaranteed {guaranteed!r}")
        steps.append(SelectionStep(n, gamma, float(bound), t_k, norm_k))
    table = tuple(coefficient_table(mu, shift, chosen))
    if depth == 0:
        lower = gammas[0]
    else:
        lower = gammas[-2] / (2 if mode == "lemma1" else 6)
    cert = SelectionCertificate(mode, shift, tuple(chosen), tuple(gammas), lower, table, tuple(steps))
    if not cert.verify():
        raise VerificationError("verification failed: certificate table below lower bound")
    return cert


# ---------------------------------------------------------------- export


def certificate_to_json(cert: SelectionCertificate) -> dict:
    return {
        "mode": cert.mode,
        "shift": cert.shift,
        "frequencies": list(cert.frequencies),
        "gamma_chain": list(cert.gamma_chain),
        "lower_bound": cert.lower_bound,
        "steps": [
            {"frequency": s.frequency, "gamma_before": s.gamma_before,
             "perturbation_bound": s.perturbation_bound,
             "truncation_t": s.truncation_t,
             "working_norm": None if s.working_norm is None else str(s.working_norm)}
            for s in cert.steps
        ],
        "table": [
            {"eps": list(e.eps), "freq": e.freq, "re": e.value.real, "im": e.value.imag, "abs": e.abs}
            for e in cert.table
        ],
    }


def certificate_table_csv(cert: SelectionCertificate, header_lines: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    k = cert.depth
    writer.writerow([f"eps_{j}" for j in range(1, k + 1)] + ["freq", "re", "im", "abs"])
    for e in cert.table:
        writer.writerow(list(e.eps) + [e.freq, repr(e.value.real), repr(e.value.imag), repr(e.abs)])
    return buf.getvalue()
