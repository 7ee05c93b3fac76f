from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parisian.measure import (
    Measure,
    RationalInterval,
    dirac,
    lebesgue,
    measure_from_json,
    measure_to_json,
    modulate,
    normalized_lebesgue_on,
    restrict,
    total_variation,
    uniform_on,
)

from conftest import measures

FULL = RationalInterval(0, 1)


class TestInterval:
    def test_from_endpoints(self):
        iv = RationalInterval.from_endpoints(0, Fraction(1, 2))
        assert iv.center == Fraction(1, 4) and iv.length == Fraction(1, 2)

    def test_wrap_pieces(self):
        iv = RationalInterval(1, Fraction(1, 4))
        assert iv.pieces() == [(-1, Fraction(-3, 4)), (Fraction(3, 4), 1)]
        assert iv.contains_point(-1) and iv.contains_point(Fraction(-3, 4))
        assert not iv.contains_point(0)

    def test_containment_across_wrap(self):
        outer = RationalInterval(1, Fraction(1, 4))
        assert outer.contains(RationalInterval(Fraction(-15, 16), Fraction(1, 32)))
        assert not outer.contains(RationalInterval(Fraction(-3, 4), Fraction(1, 32)))

    def test_bad_half_length(self):
        with pytest.raises(ValueError):
            RationalInterval(0, 0)
        with pytest.raises(ValueError):
            RationalInterval(0, 2)


class TestMeasure:
    def test_overlap_rejected(self):
        a = RationalInterval.from_endpoints(0, Fraction(1, 2))
        b = RationalInterval.from_endpoints(Fraction(1, 4), 1)
        with pytest.raises(ValueError):
            Measure(uniform=((a, 1), (b, 1)))

    def test_touching_allowed(self):
        a = RationalInterval.from_endpoints(0, Fraction(1, 2))
        b = RationalInterval.from_endpoints(Fraction(1, 2), 1)
        Measure(uniform=((a, 1), (b, 1)))

    def test_duplicate_atoms_rejected(self):
        with pytest.raises(ValueError):
            Measure(atoms=((Fraction(1), 1), (Fraction(-1), 1)))


class TestTotalVariation:
    def test_probability(self):
        mu = uniform_on([RationalInterval(0, Fraction(1, 4)), RationalInterval(Fraction(1, 2), Fraction(1, 8))])
        assert total_variation(mu) == 1

    def test_atom(self):
        assert total_variation(dirac(0, 2)) == 2

    def test_signed_parts(self):
        mu = Measure(uniform=((RationalInterval(Fraction(-1, 2), Fraction(1, 4)), Fraction(1, 2)),
                              (RationalInterval(Fraction(1, 2), Fraction(1, 4)), Fraction(-1, 2))))
        assert total_variation(mu) == 1

    @given(measures(), measures())
    def test_subadditive_on_disjoint_sums(self, mu, nu):
        # shift nu's parts into the other half so supports are disjoint
        nu_far = Measure(
            tuple((RationalInterval(iv.center / 2 + Fraction(1, 2), iv.half_length / 2), w)
                  for iv, w in nu.uniform), ())
        mu_near = Measure(
            tuple((RationalInterval(iv.center / 2 - Fraction(1, 2), iv.half_length / 2), w)
                  for iv, w in mu.uniform), ())
        total = mu_near + nu_far
        assert total_variation(total) <= total_variation(mu_near) + total_variation(nu_far)


class TestLebesgue:
    def test_unit(self):
        mu = lebesgue(1)
        assert mu.uniform[0][0].is_full_circle and total_variation(mu) == 1

    def test_mass_two(self):
        assert total_variation(lebesgue(2)) == 2

    def test_zero(self):
        assert lebesgue(0).is_zero


class TestRestrict:
    def test_full_circle_unchanged(self):
        mu = Measure(uniform=((RationalInterval(0, Fraction(1, 4)), Fraction(3, 4)),),
                     atoms=((Fraction(1, 2), Fraction(1, 4)),))
        assert restrict(mu, [FULL]) == mu

    def test_atom_dropped(self):
        assert restrict(dirac(0), [RationalInterval(Fraction(1, 2), Fraction(1, 4))]).is_zero

    def test_proportional_length(self):
        mu = Measure(uniform=((RationalInterval.from_endpoints(0, Fraction(1, 2)), 1),))
        out = restrict(mu, [RationalInterval.from_endpoints(0, Fraction(1, 4))])
        # proportional-length oracle: weight * |keep| / |part|
        expected = Fraction(1) * Fraction(1, 4) / Fraction(1, 2)
        assert out.uniform == ((RationalInterval.from_endpoints(0, Fraction(1, 4)), expected),)

    def test_atom_at_wrap_point(self):
        mu = dirac(1)
        assert restrict(mu, [RationalInterval(-1, Fraction(1, 8))]) == mu

    @given(measures(), st.lists(st.tuples(st.fractions(-1, 1, max_denominator=64),
                                          st.fractions(Fraction(1, 64), Fraction(1, 4), max_denominator=64)),
                                min_size=1, max_size=1))
    def test_never_increases_variation_and_idempotent(self, mu, keep):
        keep = [RationalInterval(c, h) for c, h in keep]
        once = restrict(mu, keep)
        assert total_variation(once) <= total_variation(mu)
        assert restrict(once, keep) == once


@given(measures())
def test_json_round_trip(mu):
    assert measure_from_json(measure_to_json(mu)) == mu


def test_json_round_trip_modulated():
    mu = modulate(dirac(Fraction(1, 3)), 5)
    assert measure_from_json(measure_to_json(mu)) == mu


def test_json_unknown_field():
    with pytest.raises(ValueError):
        measure_from_json({"atoms": [], "weights": []})


def test_normalized_lebesgue_proportional():
    a, b = RationalInterval(0, Fraction(1, 8)), RationalInterval(Fraction(1, 2), Fraction(1, 16))
    mu = normalized_lebesgue_on([a, b])
    assert dict((iv, w) for iv, w in mu.uniform) == {a: Fraction(2, 3), b: Fraction(1, 3)}
