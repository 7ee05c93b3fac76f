"""Acceptance checks shared by the test suite and ``parisian self-test``.

Each check returns a :class:`CriterionResult`; none of them raises on a
failed expectation. Runtime budgets are part of the verdict.
"""
from __future__ import annotations

import contextlib
import io
import itertools
import math
import os
import random
import struct
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .construction import (
    ConstructionParams,
    build_stages,
    containment_violations,
    generate_sequence,
    stage_measure,
    truncation_level,
    truncation_set,
    window_violations,
)
from .dimension import box_count, dimension_estimate, mass_ratio_audit, stage_constant
from .exceptions import OracleRangeError, ParisianError
from .fourier import coefficient, coefficient_oracle, coefficients_batch
from .measure import Measure, RationalInterval, dirac, normalized_lebesgue_on, total_variation
from .numerics import circle_distance, float_down, float_up, working_precision
from .riesz import LacunarySequence, is_dissociate, omega, riesz_coefficient, riesz_coefficient_quadrature
from .selection import coefficient_table, restrict_to_truncation, select


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] AC{self.number} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _run(number: int, name: str, budget: float | None, body) -> CriterionResult:
    start = time.perf_counter()
    try:
        failures, info = body()
    except ParisianError as exc:  # a library refusal is a failed criterion
        failures, info = [f"{type(exc).__name__}: {exc}"], ""
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        failures = list(failures) + [f"runtime {elapsed:.2f}s over budget {budget}s"]
    detail = "; ".join(failures) if failures else info
    return CriterionResult(number, name, not failures, detail, elapsed)


# ---------------------------------------------------------------- 1


def check_omega() -> CriterionResult:
    def body():
        failures = []
        seq = LacunarySequence((1, 3, 9))
        values = [p.value for p in omega(seq, 3)]
        brute = sorted({a + 3 * b + 9 * c for a, b, c in itertools.product((-1, 0, 1), repeat=3)})
        if values != brute:
            failures.append(f"omega differs from brute force: {values}")
        if len(set(values)) != 27:
            failures.append(f"{len(set(values))} distinct values, expected 27")
        if values and (min(values) < -13 or max(values) > 13):
            failures.append("values outside [-13, 13]")
        if sorted(-v for v in values) != values:
            failures.append("not symmetric under negation")
        if is_dissociate(LacunarySequence((1, 2)), 2):
            failures.append("(1, 2) reported dissociate")
        return failures, "27 distinct values in [-13, 13], symmetric; (1, 2) non-dissociate"
    return _run(1, "omega correctness", 1.0, body)


# ---------------------------------------------------------------- 2


def random_measure(rng: random.Random, max_parts: int = 3, max_atoms: int = 3) -> Measure:
    """Disjoint uniform parts with log-uniform lengths in [2^-10, 2^-2] plus atoms.

    Weights and masses are signed rationals with denominators up to 1000.
    """
    uniform = []
    placed: list[tuple[Fraction, Fraction]] = []
    for _ in range(rng.randint(1, max_parts)):
        half = Fraction(round(2 ** rng.uniform(-11, -3) * 2 ** 20), 2 ** 20)
        for _attempt in range(20):
            c = Fraction(rng.randint(-999, 1000), 1000)
            a, b = c - half, c + half
            if a > -1 and b <= 1 and all(b <= lo or a >= hi for lo, hi in placed):
                placed.append((a, b))
                uniform.append((RationalInterval(c, half), Fraction(rng.randint(-1000, 1000), 1000)))
                break
    points = set()
    for _ in range(rng.randint(0, max_atoms)):
        points.add(Fraction(rng.randint(-9999, 10000), 10000))
    atoms = tuple((p, Fraction(rng.randint(-1000, 1000), 1000)) for p in sorted(points))
    return Measure(tuple(uniform), atoms)


def check_fourier_oracle(count: int = 100, max_n: int = 4096, seed: int = 20240601) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        ns = list(range(-max_n, max_n + 1))
        worst, skipped, failures = 0.0, 0, []
        for i in range(count):
            mu = random_measure(rng)
            try:
                ref = coefficient_oracle(mu, ns)
            except OracleRangeError:
                skipped += 1
                continue
            scale = float(total_variation(mu)) / 2
            got = coefficients_batch(mu, ns)
            for c, r in zip(got, ref):
                err = abs(c.value - complex(r)) / max(abs(complex(r)), scale, 1e-300)
                worst = max(worst, err)
                if err > 1e-9:
                    failures.append(f"measure {i}, n={c.frequency}: relative error {err:.3e}")
                    break
        if skipped == count:
            failures.append("oracle precondition failed for every measure")
        return failures[:5], f"{count - skipped} measures x {len(ns)} frequencies, worst error {worst:.2e}"
    return _run(2, "closed form vs quadrature", 30.0, body)


# ---------------------------------------------------------------- 3


def check_riesz() -> CriterionResult:
    def body():
        failures = []
        seq = LacunarySequence((1, 3, 9))
        expected = {0: Fraction(1, 2), 13: Fraction(1, 16), 5: Fraction(0)}
        parts = []
        for n, want in expected.items():
            exact = riesz_coefficient(seq, n, 3)
            quad = riesz_coefficient_quadrature(seq, n, 3)
            parts.append(f"mu_hat({n}) = {exact}")
            if exact != want:
                failures.append(f"mu_hat({n}) = {exact}, expected {want}")
            if abs(quad - float(want)) > 1e-8:
                failures.append(f"quadrature at {n} gives {quad.real:.12g}, expected {want}")
        return failures, ", ".join(parts) + ", quadrature agrees"
    return _run(3, "Riesz-product coefficients", None, body)


# ---------------------------------------------------------------- 4


def check_construction() -> CriterionResult:
    def body():
        failures = []
        params = generate_sequence(Fraction(1, 2), 16, 2)
        fams = build_stages(params)
        if params.N != (16, 4097):
            failures.append(f"N = {params.N}")
        if params.L[0] != 64:
            failures.append(f"L_1 = {params.L[0]}")
        if params.M(2) != 29:
            failures.append(f"M_2 = {params.M(2)}")
        if len(fams[-1]) != 464:
            failures.append(f"|D_2| = {len(fams[-1])}")
        if containment_violations(fams[1], fams[0]):
            failures.append("child not contained in parent")
        for fam in fams:
            bad = window_violations(params, fam)
            if bad:
                failures.append(f"window violations at stage {fam.stage}: {bad[:3]}")
        return failures, "N_2 = 4097, L_1 = 64, M_2 = 29, |D_2| = 464, containment and windows exact"
    return _run(4, "construction exactness", 5.0, body)


# ---------------------------------------------------------------- 5


def _sample_points(intervals, total: int, seed: int) -> list[Fraction]:
    pts = []
    for iv in intervals:
        a, b = iv.endpoints()
        pts.extend((a, b, iv.center))
    rng = random.Random(seed)
    while len(pts) < total:
        iv = intervals[rng.randrange(len(intervals))]
        a, _ = iv.endpoints()
        pts.append(a + iv.length * Fraction(rng.randint(1, 2 ** 20 - 1), 2 ** 20))
    return pts[:total]


def check_perturbation(total: int = 10_000, seed: int = 7) -> CriterionResult:
    def body():
        failures = []
        params = generate_sequence(Fraction(1, 2), 16, 2)
        fam = build_stages(params)[-1]
        pts = _sample_points(fam.intervals, total, seed)
        worst = 0.0
        with mpmath.workprec(working_precision()):
            for j, N in enumerate(params.N):
                bound = float_down(mpmath.pi / mpmath.root(N, params.delta.denominator)
                                   ** params.delta.numerator)
                for x in pts:
                    # |exp(i*pi*N*x) - 1| = 2 sin(pi*N*d/2), d = dist(x, 2Z/N)
                    d = circle_distance(x, N) * N
                    lhs = float_up(2 * mpmath.sin(mpmath.pi * d.numerator / (2 * d.denominator)))
                    worst = max(worst, lhs / bound)
                    if lhs > bound:
                        failures.append(f"x={x}, j={j + 1}: {lhs!r} > {bound!r}")
                        break
        return failures, f"{len(pts)} points, worst ratio to bound {worst:.4f}"
    return _run(5, "perturbation bound", None, body)


# ---------------------------------------------------------------- 6


def check_selection_lemma1() -> CriterionResult:
    def body():
        failures = []
        cert = select(dirac(0), [4 ** j for j in range(1, 13)], 1, 3)
        if len(cert.table) != 27:
            failures.append(f"{len(cert.table)} table entries")
        if any(abs(e.abs - 0.5) > 1e-12 for e in cert.table):
            failures.append("Dirac table entry differs from 0.5")
        if any(abs(g - 0.5) > 1e-12 for g in cert.gamma_chain):
            failures.append(f"gamma chain {cert.gamma_chain}")
        windows = ConstructionParams(1, tuple(4 ** j for j in range(1, 7)))
        mu = normalized_lebesgue_on(truncation_set(windows, Fraction(1, 2)).intervals)
        desk = select(mu, list(windows.N), 1, 3)
        for k in range(1, 4):
            table = coefficient_table(mu, desk.shift, desk.frequencies[:k])
            floor = desk.gamma_chain[k - 1] / 2 * (1 - 1e-9)
            low = min(e.abs for e in table)
            if low < floor:
                failures.append(f"step {k}: entry {low!r} below {floor!r}")
        return failures, (f"Dirac: 27 entries at 0.5; window measure: frequencies {desk.frequencies}, "
                          f"gamma chain {[round(g, 12) for g in desk.gamma_chain]}")
    return _run(6, "selection certificate (lemma1)", 60.0, body)


# ---------------------------------------------------------------- 7


def lemma2_measure(params: ConstructionParams, count: int = 6) -> Measure:
    """Atoms ``2^-t`` at points whose truncation level lies in ``(t - 1, t]``.

    ``x_t`` is a grid point of the finest scale at distance about
    ``(2t - 1) / 128`` from 0, so that ``dist(x_t, 2Z/N_1) * L_1`` is
    close to ``t - 1/2``.
    """
    fine = params.N[-1]
    atoms = []
    for t in range(1, count + 1):
        m = round(Fraction(2 * t - 1, 128) * fine / 2)
        atoms.append((Fraction(2 * m, fine), Fraction(1, 2 ** t)))
    return Measure(atoms=tuple(atoms))


def check_selection_lemma2() -> CriterionResult:
    def body():
        failures = []
        params = generate_sequence(Fraction(1, 2), 16, 3)
        mu = lemma2_measure(params)
        levels = [truncation_level(params, p) for p, _ in mu.atoms]
        if any(not (t - 1 < lv <= t) for t, lv in enumerate(levels, start=1)):
            failures.append(f"atom levels {[float(v) for v in levels]} not on successive sets")
        cert = select(mu, list(params.N), params.delta, 2, mode="lemma2", truncation_params=params)
        gamma = cert.gamma_chain[-2]
        if cert.mode != "lemma2" or cert.depth != 2:
            failures.append(f"mode {cert.mode}, depth {cert.depth}")
        if cert.lower_bound != gamma / 6:
            failures.append(f"lower bound {cert.lower_bound!r} is not gamma/6 = {gamma / 6!r}")
        table = coefficient_table(mu, cert.shift, cert.frequencies)
        if [e.value for e in table] != [e.value for e in cert.table]:
            failures.append("certificate table differs from the original measure")
        low = min(e.abs for e in table)
        if low < cert.lower_bound:
            failures.append(f"entry {low!r} below lower bound")
        for step in cert.steps:
            tail = total_variation(mu) - total_variation(
                restrict_to_truncation(mu, params, step.truncation_t))
            if not tail < Fraction(step.gamma_before) / 3:
                failures.append(f"t={step.truncation_t}: tail mass {float(tail)} >= gamma/3")
        return failures, (f"frequencies {cert.frequencies}, t = {[s.truncation_t for s in cert.steps]}, "
                          f"lower bound {cert.lower_bound:.6g}, min entry {low:.6g}")
    return _run(7, "selection certificate (lemma2)", None, body)


# ---------------------------------------------------------------- 8

DIMENSION_ESTIMATE_D2 = 0.5188265304757074  # log(928) / log(2 * L_2)


def exact_box_count(intervals, scale: Fraction) -> int:
    """Boxes ``[-1 + i*l, -1 + (i+1)*l)`` with positive-length overlap, by direct test."""
    hit = set()
    for iv in intervals:
        for a, b in iv.pieces():
            i = math.floor((a + 1) / scale) - 1
            while -1 + i * scale < b:
                lo, hi = max(a, -1 + i * scale), min(b, -1 + (i + 1) * scale)
                if hi > lo and i >= 0:
                    hit.add(i)
                i += 1
    return len(hit)


def check_dimension() -> CriterionResult:
    def body():
        failures = []
        params = generate_sequence(Fraction(1, 2), 16, 2)
        fams = build_stages(params)
        mu = stage_measure(params, 2, fams[-1])
        worst = []
        for s in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5)):
            rep = mass_ratio_audit(mu, s, Fraction(1, params.N[-1]), params=params)
            if not rep.passed:
                bad = [r.scale for r in rep.per_scale_breakdown if r.passed is False]
                failures.append(f"s={s}: audit fails at scales {bad[:3]}")
            worst.append(max(r.max_ratio / r.theoretical_c for r in rep.per_scale_breakdown
                             if r.theoretical_c is not None))
            c1, c2 = stage_constant(params, 1, s), stage_constant(params, 2, s)
            if not c2 < c1:
                failures.append(f"s={s}: c_2 = {c2} not below c_1 = {c1}")
        scale = Fraction(1, params.L[-1])
        count = box_count(fams[-1], scale)
        oracle = exact_box_count(fams[-1].intervals, scale)
        if count != oracle:
            failures.append(f"box count {count} differs from direct count {oracle}")
        est = dimension_estimate(fams[-1])
        if not 0.44 <= est <= 0.55:
            failures.append(f"dimension estimate {est} outside [0.44, 0.55]")
        if est != DIMENSION_ESTIMATE_D2:
            failures.append(f"dimension estimate {est!r} differs from pinned {DIMENSION_ESTIMATE_D2!r}")
        return failures, (f"worst empirical/theoretical {max(worst):.4f}, boxes {count}, "
                          f"estimate {est:.6f}")
    return _run(8, "dimension audit", 60.0, body)


# ---------------------------------------------------------------- 9

DETERMINISM_COMMANDS = (
    ["gen-seq", "--alpha", "1/2", "--n1", "16", "--depth", "2"],
    ["build", "--alpha", "1/2", "--n1", "16", "--depth", "2", "--summary", "{dir}/summary.csv"],
    ["fourier", "--measure", "dirac", "--n-min", "-64", "--n-max", "64"],
    ["omega", "--terms", "1,3,9", "--depth", "3"],
    ["riesz", "--terms", "1,3,9", "--depth", "3", "--frequencies", "0,5,13"],
    ["select", "--measure", "dirac", "--candidates", "powers:4:12", "--delta", "1", "--steps", "3",
     "--table", "{dir}/table.csv"],
    ["dim-audit", "--alpha", "1/2", "--n1", "16", "--depth", "1", "--s", "1/4,2/5",
     "--csv", "{dir}/audit.csv"],
)


def _cli_artifacts(argv: list[str], workdir: str) -> dict[str, bytes]:
    from .cli import main

    out = os.path.join(workdir, "out")
    argv = [a.replace("{dir}", workdir) for a in argv] + ["--out", out]
    with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
        status = main(argv)
    if status != 0:
        raise RuntimeError(f"{' '.join(argv[:1])} exited with {status}")
    files = {}
    for name in sorted(os.listdir(workdir)):
        with open(os.path.join(workdir, name), "rb") as fh:
            files[name] = fh.read()
    return files


def _bits(values) -> list[bytes]:
    return [struct.pack("<dd", v.real, v.imag) for v in values]


def check_determinism() -> CriterionResult:
    def body():
        failures = []
        for argv in DETERMINISM_COMMANDS:
            runs = []
            for _ in range(2):
                with tempfile.TemporaryDirectory() as d:
                    runs.append(_cli_artifacts(argv, d))
            if runs[0] != runs[1]:
                failures.append(f"{argv[0]} artifacts differ between runs")
        params = generate_sequence(Fraction(1, 2), 16, 2)
        mu = stage_measure(params, 2)
        ns = list(range(-512, 513)) + [params.N[-1] * 3 + 1, 10 ** 15 + 1]
        seq = _bits(coefficient(mu, n).value for n in ns)
        for threads in (1, 4):
            batch = _bits(c.value for c in coefficients_batch(mu, ns, threads=threads))
            if batch != seq:
                failures.append(f"batch ({threads} threads) differs from sequential")
        return failures, f"{len(DETERMINISM_COMMANDS)} commands byte-identical; batch bit-identical"
    return _run(9, "determinism", None, body)


CHECKS = {
    1: check_omega,
    2: check_fourier_oracle,
    3: check_riesz,
    4: check_construction,
    5: check_perturbation,
    6: check_selection_lemma1,
    7: check_selection_lemma2,
    8: check_dimension,
    9: check_determinism,
}


def run_all(only=None) -> list[CriterionResult]:
    numbers = sorted(CHECKS) if not only else sorted(set(only))
    return [CHECKS[k]() for k in numbers]
