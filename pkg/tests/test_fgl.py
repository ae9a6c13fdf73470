import pytest
from hypothesis import given, strategies as st

from k2local import fgl
from k2local.core_algebra import F4_ELEMENTS, ONE, ZERO
from k2local.fgl import TruncSeries

LAW = fgl.honda_gamma2(16, 8)
scalars = st.sampled_from(F4_ELEMENTS)


def mono(e, c=ONE, cap=16):
    return TruncSeries.monomial(("x",), cap, (e,), c)


def test_law_low_degree_terms():
    x2y2 = TruncSeries.monomial(("x", "y"), 9, (2, 2), ONE)
    xy = ("x", "y")
    expected = TruncSeries.variable("x", xy, 9) + TruncSeries.variable("y", xy, 9) + x2y2
    assert LAW.law.truncate(9) == expected


def test_two_series_is_x4():
    assert fgl.n_series(LAW, 2) == mono(4)


def test_formal_inverse_is_sum_of_4_powers():
    expected = fgl.formal_sum(LAW, [mono(1), mono(4), mono(16)])
    assert LAW.inverse() == expected
    assert str(LAW.inverse()) == "x + x^4 + x^10 + x^16 + O(deg 17)"


def test_inverse_composes_to_zero():
    assert LAW.add(LAW.x(), LAW.inverse()).is_zero()


def test_axioms():
    assert fgl.check_axioms(LAW, 12) == {"commutative": True, "unit": True, "associative": True}


def test_n_series_additive():
    three = fgl.n_series(LAW, 3)
    assert three == LAW.add(fgl.n_series(LAW, 2), LAW.x())
    assert fgl.n_series(LAW, -1) == LAW.inverse()
    assert fgl.n_series(LAW, 4) == mono(16)


def test_formal_sum_rejects_constants():
    with pytest.raises(ValueError):
        fgl.formal_sum(LAW, [TruncSeries(("x",), 16, {(0,): ONE})])


def test_degree_cap_validation():
    with pytest.raises(ValueError):
        fgl.honda_gamma2(2)


@given(st.lists(scalars, min_size=5, max_size=5))
def test_endomorphism_peel_round_trip(digits):
    f = fgl.endomorphism_series(LAW, digits)
    assert fgl.peel_endomorphism(LAW, f) == digits


@given(st.lists(scalars, min_size=5, max_size=5))
def test_endomorphisms_are_homomorphisms(digits):
    f = fgl.endomorphism_series(LAW.__class__(LAW.law.truncate(8)), digits)
    law8 = LAW.law.truncate(8)
    xy = ("x", "y")
    x, y = TruncSeries.variable("x", xy, 8), TruncSeries.variable("y", xy, 8)
    fx, fy = f.embed(xy).compose([x, y]), f.embed(xy).compose([y, x])
    assert f.compose([law8]) == law8.compose([fx, fy])
