import numpy as np
import pytest
from hypothesis import given, strategies as st

from k2local import action as ac
from k2local import comodule as cm
from k2local import stabilizer as stz
from k2local.cohomology import random_filtered_unit
from k2local.core_algebra import (F4_ELEMENTS, ONE, OMEGA, OMEGA2, ZERO, Poly4, f4_det, f4_identity,
                                  f4_random, f4_rank)
from k2local.stabilizer import O2Element, TtildeProfile, o2_mul, ttilde_profile

K = 8
PARAMS = [(0, 0), (0, 1), (1, 0), (1, 1)]
Q8 = ac.q8_elements(K)
ALPHA, PI = stz.construct_alpha_pi(K)
FAMILY = cm.solve_comodule_family()

params_st = st.sampled_from(PARAMS)
profiles = st.builds(TtildeProfile, st.sampled_from(F4_ELEMENTS[1:]), st.sampled_from(F4_ELEMENTS),
                     st.sampled_from(F4_ELEMENTS))
named = st.sampled_from(list(Q8.values()) + [ALPHA])
units = st.tuples(st.integers(0, 2 ** 32 - 1), st.integers(0, 2)).map(
    lambda t: o2_mul(O2Element.omega(K) ** t[1], random_filtered_unit(np.random.default_rng(t[0]), K)))


def random_block_upper(seed):
    rng = np.random.default_rng(seed)
    while True:
        s = f4_random(rng, (8, 8))
        s[4:, :4] = 0
        if f4_det(s) != ZERO:
            return s


@given(profiles, params_st)
def test_table_agrees_with_coaction(profile, params):
    assert ac.action_matrix(profile, params) == ac.derived_action_matrix(profile, FAMILY[params])


def test_uncorrected_entry_is_the_only_disagreement():
    bad = ac.uncorrected_action_matrix(TtildeProfile(ONE, OMEGA, ZERO), (0, 0))
    good = ac.action_matrix(TtildeProfile(ONE, OMEGA, ZERO), (0, 0))
    diff = np.argwhere(bad.mat != good.mat)
    assert [tuple(d) for d in diff] == [(ac.IDX["y6"], ac.IDX["y10"])]
    assert ac.uncorrected_action_matrix(TtildeProfile(ONE, ONE, OMEGA), (1, 1)) == \
        ac.action_matrix(TtildeProfile(ONE, ONE, OMEGA), (1, 1))


@given(profiles, params_st)
def test_matrices_are_block_upper_triangular(profile, params):
    m = ac.action_matrix(profile, params)
    assert m.is_block_upper_triangular()
    assert m.image("x0") == {"x0": ONE}


@given(named, named, params_st)
def test_composition_compat(g, h, params):
    assert ac.composition_compat(g, h, params)


@given(units, units, params_st)
def test_full_group_action_is_a_homomorphism(g, h, params):
    lhs = ac.group_action_matrix(o2_mul(g, h), params)
    assert lhs == ac.group_action_matrix(g, params) @ ac.group_action_matrix(h, params)


def test_omega_twists_u():
    m = ac.group_action_matrix(O2Element.omega(K), (0, 0))
    assert m.u_twist == OMEGA
    assert m.image("x2") == {"x2": OMEGA} and m.image("x4") == {"x4": OMEGA2}


@pytest.mark.parametrize("params", PARAMS)
def test_q8_modules_repr(params):
    assert not ac.q8_module(params, K).homomorphism_failures()
    assert not ac.conjugate_q8_module(params, K).homomorphism_failures()


@pytest.mark.parametrize("params,corner", [((0, 0), 0), ((0, 1), 1), ((1, 0), 1), ((1, 1), 0)])
def test_regularity_frozen(params, corner):
    for spec in (ac.q8_module(params, K), ac.conjugate_q8_module(params, K)):
        v = ac.regularity_test(spec)
        assert v.verdict == "regular"
        assert v.extension.diag == 1 and v.extension.corner == corner
        assert v.xy_form_holds and v.normalization == "fixed/fixed"
        assert v.translate_rank == 8 and v.minus_one_defect_rank == 4


def test_split_module_not_regular():
    v = ac.regularity_test(ac.split_module())
    assert v.verdict == "not_regular"
    assert v.witness_det == ZERO and v.translate_rank == 4


@given(st.integers(0, 2 ** 32 - 1), params_st)
def test_regularity_basis_independent(seed, params):
    s = random_block_upper(seed)
    assert ac.regularity_test(ac.q8_module(params, K).conjugated(s)).regular
    assert not ac.regularity_test(ac.split_module().conjugated(s)).regular


def test_non_v4_block_rejected():
    rep = dict(ac.split_module().rep)
    m = rep["i"].mat.copy()
    m[:4, :4] = f4_identity(4)
    rep["i"] = ac.ActionMatrix(m, ONE)
    with pytest.raises(ac.NotNormalizable):
        ac.regularity_test(ac.GModuleSpec(ac.quaternion_group(), rep))


def test_symbolic_certificate():
    assert ac.regularity_certificate() == Poly4.var("c") ** 4
    assert ac.symbolic_relations_hold()


@given(st.sampled_from(F4_ELEMENTS), st.sampled_from(F4_ELEMENTS), st.sampled_from(F4_ELEMENTS),
       st.sampled_from(F4_ELEMENTS))
def test_certificate_specializes(a, b, c, d):
    from k2local.core_algebra import f4_array
    env = {"a": a, "b": b, "c": c, "d": d}
    sym = ac.witness_matrix_symbolic()
    numeric = f4_array([[p.evaluate(env).value for p in row] for row in sym])
    assert f4_det(numeric) == c ** 4


@pytest.mark.parametrize("name", ac.Q8_NAMES)
@pytest.mark.parametrize("params", PARAMS)
def test_rank_nullity_fixed_points(name, params):
    m = ac.action_matrix(ttilde_profile(Q8[name]), params).mat
    assert len(ac.fixed_points([m])) == 8 - f4_rank(m ^ f4_identity(8))


@pytest.mark.parametrize("params", PARAMS)
def test_fixed_points_and_triviality(params):
    x_span = ac.span_of(["x0", "x2", "x4", "x6"])
    for g in (Q8["-1"], ALPHA):
        assert np.array_equal(ac.fixed_points([ac.action_matrix(ttilde_profile(g), params).mat]), x_span)
    assert all(ac.triviality_checks(params, K).values())


def test_q8_fixed_points_are_bottom_class():
    spec = ac.q8_module((0, 0), K)
    assert ac.basis_names(ac.fixed_points(spec.matrices().values())) == ["x0"]


def test_group_structures():
    g = ac.quaternion_group()
    assert g.is_group() and g.order == 8
    assert g.word(["i", "j"]) == "k"
    assert ac.group_from_elements(ac.g24_elements(K)).is_group()
    assert ac.cyclic_group(6).is_group()
