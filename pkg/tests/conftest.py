from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from parisian.construction import build_stages, generate_sequence
from parisian.measure import Measure, RationalInterval

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def rationals(max_den=10 ** 6, lo=-1, hi=1):
    return st.builds(
        lambda num, den: Fraction(num, den),
        st.integers(lo * max_den, hi * max_den), st.just(max_den),
    ) | st.fractions(min_value=lo, max_value=hi, max_denominator=1000)


@st.composite
def measures(draw, max_parts=3, max_atoms=3, signed=True):
    """Disjoint uniform parts on a coarse grid plus atoms off the grid."""
    cells = draw(st.lists(st.integers(0, 15), min_size=0, max_size=max_parts, unique=True))
    weight = st.fractions(-2 if signed else 0, 2, max_denominator=50)
    uniform = []
    for c in sorted(cells):
        # cell c is [-1 + c/8, -1 + (c+1)/8]; use a sub-arc of it
        shrink = draw(st.fractions(Fraction(1, 16), 1, max_denominator=64))
        half = Fraction(1, 16) * shrink
        center = Fraction(-1) + Fraction(2 * c + 1, 16)
        uniform.append((RationalInterval(center, half), draw(weight)))
    pts = draw(st.lists(st.fractions(-1, 1, max_denominator=997).filter(lambda p: p != -1),
                        max_size=max_atoms, unique=True))
    atoms = [(p, draw(weight)) for p in pts]
    return Measure(tuple(uniform), tuple(atoms))


@pytest.fixture(scope="session")
def half_params():
    """alpha = 1/2, N_1 = 16, depth 2."""
    return generate_sequence(Fraction(1, 2), 16, 2)


@pytest.fixture(scope="session")
def half_families(half_params):
    return build_stages(half_params)
