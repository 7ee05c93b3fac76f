import cmath
import math
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parisian.numerics import (
    Phase,
    as_rational,
    circle_distance,
    cos_sin_pi,
    float_down,
    float_up,
    guard_bits,
    iroot_ceil,
    iroot_floor,
    max_grid_distance,
    rational_from_json,
    rational_to_json,
    reduce_phase,
    to_circle,
    unit_exponential,
    window_length,
    working_precision,
)

from conftest import rationals


def test_as_rational_rejects_floats():
    with pytest.raises(TypeError):
        as_rational(0.5)
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(7) == 7


def test_to_circle_range():
    assert to_circle(-1) == 1
    assert to_circle(3) == 1
    assert to_circle(Fraction(5, 2)) == Fraction(1, 2)


class TestReducePhase:
    def test_zero_frequency(self):
        assert reduce_phase(0, Fraction(7, 9)).reduced == 0

    def test_half_turn(self):
        assert reduce_phase(2, Fraction(1, 2)).reduced == 1

    def test_huge_frequency_against_decimal_oracle(self):
        # independent route: 60-digit decimal division, then subtract 2*floor(y/2)
        n = 10 ** 15 + 1
        getcontext().prec = 60
        y = Decimal(2 * n) / Decimal(3)
        expected = y - 2 * (y / 2).to_integral_value(rounding="ROUND_FLOOR")
        got = reduce_phase(n, Fraction(2, 3)).reduced
        assert abs(Decimal(got.numerator) / Decimal(got.denominator) - expected) < Decimal("1e-40")
        assert got == Fraction(4, 3)

    @given(st.integers(-10 ** 30, 10 ** 30), rationals())
    def test_difference_is_even_integer(self, n, x):
        r = reduce_phase(n, x).reduced
        assert 0 <= r < 2
        d = n * x - r
        assert d.denominator == 1 and d.numerator % 2 == 0

    @given(st.integers(-10 ** 30, 10 ** 30), rationals())
    def test_negation_sums_to_zero_or_two(self, n, x):
        assert reduce_phase(-n, x).reduced + reduce_phase(n, x).reduced in (0, 2)


class TestUnitExponential:
    @pytest.mark.parametrize("reduced, expected", [
        (Fraction(0), 1 + 0j), (Fraction(1), -1 + 0j), (Fraction(1, 2), 1j)])
    def test_exact_turns(self, reduced, expected):
        assert unit_exponential(Phase(reduced)) == expected

    def test_phase_range_checked(self):
        with pytest.raises(ValueError):
            Phase(Fraction(2))

    @given(st.integers(-10 ** 6, 10 ** 6), st.fractions(-1, 1, max_denominator=10 ** 5))
    def test_agrees_with_naive_evaluation_within_its_error(self, n, x):
        # the naive route rounds n*x to a double first: error about pi*|n*x|*2^-53
        t = float(n * x)
        naive = cmath.exp(1j * math.pi * t)
        assert abs(unit_exponential(reduce_phase(n, x)) - naive) <= 1e-12 + 8e-16 * abs(t)

    @pytest.mark.parametrize("n, x", [
        (1, Fraction(1, 3)), (3465, Fraction(3466, 3467)),
        (2 ** 20 + 1, Fraction(2, 3)), (2 ** 39 - 1, Fraction(999, 1000))])
    def test_agrees_with_naive_evaluation_fixed_tolerance(self, n, x):
        # the flat 1e-12 agreement is demanded up to |n*x| < 2^40; the naive
        # reference itself drifts past 1e-12 once |n*x| exceeds about 10^3
        assert abs(n * x) < 2 ** 40
        naive = cmath.exp(1j * math.pi * float(n * x))
        assert abs(unit_exponential(reduce_phase(n, x)) - naive) <= 1e-12

    @pytest.mark.parametrize("n, x", [
        (1, Fraction(1, 3)), (3465, Fraction(3466, 3467)),
        (2 ** 20 + 1, Fraction(2, 3)), (2 ** 39 - 1, Fraction(999, 1000)),
        (10 ** 300 + 7, Fraction(5, 7))])
    def test_matches_high_precision_oracle(self, n, x):
        import mpmath
        with mpmath.workprec(200 + 4 * len(str(n))):
            t = mpmath.mpf(n) * x.numerator / x.denominator
            ref = complex(mpmath.cospi(t), mpmath.sinpi(t))
        assert abs(unit_exponential(reduce_phase(n, x)) - ref) <= 2e-16

    @given(st.integers(1, 10 ** 9), st.data())
    def test_fast_kernel_matches_extended(self, q, data):
        r = data.draw(st.integers(0, 2 * q - 1))
        c, s = cos_sin_pi(r, q)
        z = unit_exponential(Phase(Fraction(r, q)))
        assert abs(complex(c, s) - z) <= 4e-16

    def test_fast_kernel_quarter_turns_exact(self):
        assert cos_sin_pi(0, 4) == (1.0, 0.0)
        assert cos_sin_pi(2, 4) == (0.0, 1.0)
        assert cos_sin_pi(4, 4) == (-1.0, 0.0)
        assert cos_sin_pi(6, 4) == (0.0, -1.0)


class TestCircleDistance:
    def test_grid_point(self):
        assert circle_distance(0, 5) == 0

    def test_midpoint(self):
        assert circle_distance(Fraction(1, 5), 5) == Fraction(1, 5)

    def test_across_the_wrap_against_brute_force(self):
        x = Fraction(-1) + Fraction(1, 1000)
        grid = [Fraction(2 * m, 4) for m in range(-2, 3)]
        brute = min(min(abs(x - g), 2 - abs(x - g)) for g in grid)
        assert circle_distance(x, 4) == brute == Fraction(1, 1000)

    @given(rationals(), st.integers(1, 10 ** 6))
    def test_symmetric(self, x, N):
        assert circle_distance(x, N) == circle_distance(-x, N)

    @given(rationals(), st.integers(1, 10 ** 6), st.integers(-50, 50))
    def test_grid_translation_invariant(self, x, N, m):
        assert circle_distance(x, N) == circle_distance(x + Fraction(2 * m, N), N)

    @given(rationals(), st.integers(1, 1000))
    def test_matches_brute_force(self, x, N):
        grid = [Fraction(2 * m, N) for m in range(-N, N + 1)]
        assert circle_distance(x, N) == min(abs(x - g) for g in grid)

    def test_max_grid_distance(self):
        assert max_grid_distance(Fraction(0), Fraction(1, 10), 4) == Fraction(1, 10)
        assert max_grid_distance(Fraction(0), Fraction(1, 2), 4) == Fraction(1, 4)


class TestRoots:
    @given(st.integers(0, 10 ** 40), st.integers(1, 7))
    def test_iroot_brackets(self, x, q):
        lo, hi = iroot_floor(x, q), iroot_ceil(x, q)
        assert lo ** q <= x <= hi ** q
        assert hi - lo <= 1
        assert (lo + 1) ** q > x

    def test_window_length(self):
        assert window_length(16, Fraction(1, 2)) == 64
        assert window_length(4097, Fraction(1, 2)) == 262241
        assert window_length(4, 1) == 16

    @given(st.integers(2, 10 ** 12), st.fractions(Fraction(1, 10), 1, max_denominator=12))
    def test_window_length_minimal(self, N, delta):
        L, p, q = window_length(N, delta), delta.numerator, delta.denominator
        assert L ** q >= N ** (p + q) > (L - 1) ** q


def test_directed_rounding():
    import mpmath
    with mpmath.workprec(200):
        third = mpmath.mpf(1) / 3
        assert float_down(third) < float_up(third)
        assert Fraction(float_down(third)) < Fraction(1, 3) < Fraction(float_up(third))


def test_guard_bits_env(monkeypatch):
    monkeypatch.setenv("PARISIAN_GUARD_BITS", "100")
    assert guard_bits() == 100 and working_precision() == 153
    monkeypatch.setenv("PARISIAN_GUARD_BITS", "5")
    with pytest.raises(ValueError):
        guard_bits()


@given(rationals())
def test_rational_json_round_trip(x):
    assert rational_from_json(rational_to_json(x)) == x
    assert rational_from_json(f"{x.numerator}/{x.denominator}") == x
