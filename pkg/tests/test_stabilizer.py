import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from k2local import stabilizer as stz
from k2local.cohomology import random_filtered_unit
from k2local.core_algebra import F4_ELEMENTS, ONE, OMEGA, OMEGA2, ZERO, WittApprox
from k2local.stabilizer import O2Element, TtildeProfile, o2_det, o2_inv, o2_mul, ttilde_profile

K = 8
NAMED = stz.named_elements(K)
ONE_EL = O2Element.one(K)

witt = st.builds(lambda a, b: WittApprox(a, b, K), st.integers(0, 255), st.integers(0, 255))
o2 = st.builds(O2Element, witt, witt)
units = st.integers(0, 2 ** 32 - 1).map(lambda s: random_filtered_unit(np.random.default_rng(s), K))


def test_T_relations():
    T, w = O2Element.T(K), O2Element.omega(K)
    assert T * T == 2 * ONE_EL
    assert T * w == O2Element.scalar(w.a.sigma()) * T


@given(o2, o2, o2)
def test_o2_associative(x, y, z):
    assert (x * y) * z == x * (y * z)


@given(o2, o2)
def test_det_multiplicative(x, y):
    assert o2_det(x * y) == o2_det(x) * o2_det(y)
    assert o2_det(x).is_rational()


@given(units)
def test_inverse(g):
    assert o2_mul(g, o2_inv(g)) == ONE_EL


def test_quaternion_relations():
    i, j, k = NAMED["i"], NAMED["j"], NAMED["k"]
    assert i * i == -ONE_EL and j * j == -ONE_EL and k * k == -ONE_EL
    assert i * j == k
    assert j * i == -k
    assert i ** 4 == ONE_EL


def test_omega_normalizes_quaternions():
    w = NAMED["w"]
    w_inv = o2_inv(w)
    assert w_inv * NAMED["i"] * w == NAMED["j"]
    assert w_inv * NAMED["j"] * w == NAMED["k"]
    assert w ** 3 == ONE_EL


@pytest.mark.parametrize("name,profile", [
    ("1", (ONE, ZERO, ZERO)), ("-1", (ONE, ZERO, ONE)),
    ("i", (ONE, ONE, OMEGA)), ("-i", (ONE, ONE, OMEGA2)),
    ("j", (ONE, OMEGA, OMEGA)), ("-j", (ONE, OMEGA, OMEGA2)),
    ("k", (ONE, OMEGA2, OMEGA)), ("-k", (ONE, OMEGA2, OMEGA2)),
    ("w", (OMEGA2, ZERO, ZERO)), ("alpha", (ONE, ZERO, OMEGA)),
])
def test_frozen_profiles(name, profile):
    assert ttilde_profile(NAMED[name]).as_tuple() == profile


@given(units)
def test_profile_two_routes(g):
    assert ttilde_profile(g) == stz.profile_via_series(g)


@given(units, units)
def test_product_tk_on_random_units(g, h):
    assert stz.product_tk_check(g, h)


def test_alpha_pi():
    alpha, pi = stz.construct_alpha_pi(K)
    assert o2_det(alpha) == -1
    assert o2_det(pi) == 3
    gamma = o2_inv(alpha) * pi
    assert stz.filtration_level(gamma) >= 2
    assert ttilde_profile(gamma) == TtildeProfile(ONE, ZERO, ZERO)
    assert not stz.in_norm_one(pi)
    assert stz.in_norm_one(alpha)


def test_filtration_levels():
    assert stz.filtration_level(ONE_EL) == math.inf
    assert stz.filtration_level(NAMED["i"]) == Fraction(1, 2)
    assert stz.filtration_level(NAMED["-1"]) == 1
    assert stz.filtration_level(o2_inv(NAMED["alpha"]) * NAMED["pi"]) >= 2


@given(st.lists(st.sampled_from(F4_ELEMENTS), min_size=4, max_size=4))
def test_digits_round_trip(digits):
    assert stz.residue_digits(stz.from_digits(digits, K), 4) == tuple(digits)


def test_pi_preserves_t1_mod_f22():
    pi = NAMED["pi"]
    conj = pi * NAMED["i"] * o2_inv(pi)
    assert ttilde_profile(conj).t1 == ONE


def test_precision_guard():
    with pytest.raises(Exception):
        ttilde_profile(O2Element.one(3))
