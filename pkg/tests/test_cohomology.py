import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from k2local import action as ac
from k2local import cohomology as co
from k2local.core_algebra import ZERO, f4_det, f4_inv, f4_matmul, f4_random

Q8 = co.q8_group()
PARAMS = [(0, 0), (0, 1), (1, 0), (1, 1)]
SUBGROUPS = [["1"], ["1", "-1"], ["1", "-1", "i", "-i"], ["1", "-1", "j", "-j"], ["1", "-1", "k", "-k"],
             list(ac.Q8_NAMES)]


def direct_sum(mods):
    group = mods[0].group
    dim = sum(m.dim for m in mods)
    mats = {}
    for g in group.elements:
        out = np.zeros((dim, dim), dtype=np.uint8)
        at = 0
        for m in mods:
            out[at:at + m.dim, at:at + m.dim] = m.mats[g]
            at += m.dim
        mats[g] = out
    return co.FGModule(group, dim, mats)


def random_module(seed, sub_names):
    rng = np.random.default_rng(seed)
    sub = Q8.subgroup(sub_names)
    pieces = [co.trivial_module(sub, int(rng.integers(1, 3))), co.regular_module(sub),
              co.module_of_spec(ac.q8_module(PARAMS[int(rng.integers(0, 4))])).restrict(sub)]
    chosen = [pieces[n] for n in sorted(set(rng.integers(0, 3, size=2)))]
    m = direct_sum(chosen)
    while True:
        s = f4_random(rng, (m.dim, m.dim))
        if f4_det(s) != ZERO:
            break
    s_inv = f4_inv(s)
    return co.FGModule(sub, m.dim, {g: f4_matmul(f4_matmul(s_inv, a), s) for g, a in m.mats.items()})


modules = st.tuples(st.integers(0, 2 ** 32 - 1), st.sampled_from(SUBGROUPS)).map(
    lambda t: (random_module(*t), t[1]))


def test_frozen_small_groups():
    c2 = co.c2_group()
    for method in ("resolution", "bar"):
        assert [co.bar_cohomology(co.trivial_module(c2), 3, method).rank(p) for p in range(4)] == [1, 1, 1, 1]
    assert [co.bar_cohomology(co.trivial_module(Q8), 4).rank(p) for p in range(5)] == [1, 2, 2, 1, 1]
    assert [co.bar_cohomology(co.trivial_module(Q8), 2, "bar").rank(p) for p in range(3)] == [1, 2, 2]


def test_minimal_resolution_ranks():
    res = co.free_resolution(Q8, 5)
    assert res.ranks[:6] == [1, 2, 2, 1, 1, 2]
    assert res.is_exact()


def test_regular_module_acyclic():
    assert [co.bar_cohomology(co.regular_module(Q8), 4).rank(p) for p in range(5)] == [1, 0, 0, 0, 0]


@given(modules)
def test_h0_is_fixed_points(mod_sub):
    m, _ = mod_sub
    assert m.validate()
    assert co.bar_cohomology(m, 1).rank(0) == len(co.fixed_submodule(m))


@given(modules)
def test_rank_nullity_in_each_degree(mod_sub):
    m, _ = mod_sub
    res = co.bar_cohomology(m, 3)
    for p in range(4):
        prev = res.coboundary_ranks.get(p - 1, 0)
        assert res.rank(p) + res.coboundary_ranks[p] + prev == res.cochain_dims[p]
    # truncated Euler characteristic
    lhs = sum((-1) ** p * res.rank(p) for p in range(4))
    rhs = sum((-1) ** p * res.cochain_dims[p] for p in range(4)) + res.coboundary_ranks[3]
    assert lhs == rhs


@settings(max_examples=15)
@given(modules)
def test_bar_and_resolution_agree(mod_sub):
    m, sub_names = mod_sub
    p_max = 2 if len(sub_names) > 2 else 3
    if m.group.order ** (p_max + 1) * m.dim > co.BAR_SIZE_LIMIT:
        p_max = 1
    r = co.bar_cohomology(m, p_max, "resolution")
    b = co.bar_cohomology(m, p_max, "bar")
    assert r.dims == b.dims


@pytest.mark.parametrize("seed", range(20))
def test_shapiro_on_random_induced_modules(seed):
    sub = SUBGROUPS[seed % 5]
    m = random_module(seed, sub)
    assert co.shapiro_check(Q8, sub, m, 3)


def test_bar_route_size_limit():
    big = co.regular_module(Q8)
    with pytest.raises(co.GroupTooLarge):
        co.bar_cohomology(co.tensor_module(big, big), 4, "bar")


@pytest.mark.parametrize("params", PARAMS)
def test_q8_on_e0(params):
    res = co.q8_cohomology(params, 4)
    assert [res.dims[(p, 0)] for p in range(5)] == [1, 0, 0, 0, 0]


def test_q8_on_e0_bar_route():
    res = co.q8_cohomology((0, 1), 2, method="bar")
    assert [res.dims[(p, 0)] for p in range(3)] == [1, 0, 0]


@pytest.mark.parametrize("conjugate", [False, True])
def test_g24_periodic_line(conjugate):
    res = co.g24_cohomology((1, 0), 4, conjugate=conjugate)
    assert {k: v for k, v in res.dims.items() if v} == {(0, 0): 1}


def test_g24_direct_matches_sylow_route():
    elements = ac.g24_elements(8)
    group = ac.group_from_elements(elements)
    sylow = co.g24_cohomology((0, 0), 2)
    for t in (0, 2, 4):
        direct = co.direct_cohomology(group, elements, (0, 0), t, 2)
        assert direct == {p: sylow.dims[(p, t)] for p in range(3)}


def test_c6_rank_four_in_degree_zero():
    res = co.c6_cohomology((0, 0), 4)
    assert {k: v for k, v in res.dims.items() if v} == {(0, 0): 2, (0, 2): 1, (0, 4): 1}


def test_k1_ring():
    ring = co.K1Ring()
    assert ring.dims() == (1, 3, 3, 1, 0)
    assert ring.respects_relations(ring.omega_on_generators)
    assert ring.respects_relations(ring.galois_on_generators)


def test_s12_frozen():
    res = co.s12_via_k1()
    degrees = {p: sorted(t for (q, t), d in res.dims.items() if q == p and d) for p in range(4)}
    assert degrees == {0: [0], 1: [0, 2, 4], 2: [0, 2, 4], 3: [0]}
    assert res.labels[(3, 0)] == ["y0*y1*y2"]


@settings(max_examples=8)
@given(st.integers(0, 2 ** 16), st.sampled_from(PARAMS))
def test_d1_random_pairs(seed, params):
    rep = co.duality_d1(params, samples=3, seed=seed)
    assert rep.ok and not rep.pair_failures


@pytest.mark.parametrize("params", PARAMS)
def test_duality_routes_agree(params):
    e2 = co.duality_e2(params)
    k1 = co.s12_via_k1()
    assert e2.dims == {key: k1.dims[key] for key in e2.dims}
    assert e2.labels[(2, 0)] == ["x_{2,2}", "x_{2,4}", "x_{2,6}"]


def test_e1_before_d1():
    e1 = co.duality_e1((0, 0), 2)
    assert [e1.rank(p) for p in range(4)] == [1, 4, 4, 1]
