import numpy as np
import pytest
from hypothesis import given, strategies as st

from k2local.core_algebra import (F4_ELEMENTS, ONE, OMEGA, OMEGA2, ZERO, F4Scalar, Poly4, PrecisionError,
                                  WittApprox, f4_array, f4_det, f4_identity, f4_inv, f4_matmul,
                                  f4_nullspace, f4_random, f4_rank, f4_rref, poly_det, teichmuller_lift)

scalars = st.sampled_from(F4_ELEMENTS)
units = st.sampled_from(F4_ELEMENTS[1:])


def test_f4_tables():
    assert OMEGA * OMEGA == OMEGA2
    assert OMEGA * OMEGA2 == ONE
    assert OMEGA + ONE == OMEGA2
    assert OMEGA.frobenius() == OMEGA2
    assert F4Scalar.parse("w2") == OMEGA2
    assert str(OMEGA) == "w"


@given(scalars, scalars, scalars)
def test_f4_field_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x + x == ZERO
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()


@given(units)
def test_f4_inverse(x):
    assert x * x.inverse() == ONE
    assert x ** 3 == ONE


def test_witt_omega_relation():
    w = WittApprox.omega(8)
    assert w * w + w + 1 == WittApprox.of(0, 8)
    assert w.sigma() == -1 - w


@given(st.integers(), st.integers(), st.integers(), st.integers())
def test_witt_ring_and_norm(a, b, c, d):
    x, y = WittApprox(a, b, 8), WittApprox(c, d, 8)
    assert (x * y).sigma() == x.sigma() * y.sigma()
    assert (x * y).norm() == x.norm() * y.norm() % 256
    if x.is_unit():
        assert x * x.inverse() == WittApprox.of(1, 8)


@given(scalars)
def test_teichmuller(x):
    t = teichmuller_lift(x, 8)
    assert t ** 4 == t
    assert t.reduce() == x


def test_precision_mismatch():
    with pytest.raises(PrecisionError):
        WittApprox(1, 0, 4) + WittApprox(1, 0, 8)


def test_poly_canonical_form():
    a, b = Poly4.var("a"), Poly4.var("b")
    assert (a + b) * (a + b) == a * a + b * b
    assert (a + a).is_zero()
    assert ((a + 1) * b).subs({"a": 1}).is_zero()
    assert (a * b + OMEGA).evaluate({"a": 1, "b": OMEGA}) == ZERO


def test_poly_det_small():
    a, b, c, d = (Poly4.var(v) for v in "abcd")
    assert poly_det([[a, b], [c, d]]) == a * d + b * c
    assert poly_det([[c, a], [Poly4.zero(), c]]) == c * c


@given(st.lists(scalars, min_size=9, max_size=9), st.lists(scalars, min_size=4, max_size=4))
def test_specialization_commutes_with_det(entries, values):
    names = "abcd"
    vars_ = [Poly4.var(v) for v in names]
    mat = [[vars_[(r + c) % 4] * Poly4.const(entries[3 * r + c]) + entries[(r * c) % 9] for c in range(3)]
           for r in range(3)]
    env = dict(zip(names, values))
    numeric = f4_array([[mat[r][c].evaluate(env).value for c in range(3)] for r in range(3)])
    assert poly_det(mat).evaluate(env) == f4_det(numeric)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_rank_nullity(seed, rows, cols):
    a = f4_random(np.random.default_rng(seed), (rows, cols))
    null = f4_nullspace(a)
    assert f4_rank(a) + null.shape[1] == cols
    assert not f4_matmul(a, null).any()


@given(st.integers(0, 2 ** 32 - 1))
def test_inverse_and_det(seed):
    rng = np.random.default_rng(seed)
    a = f4_random(rng, (5, 5))
    b = f4_random(rng, (5, 5))
    assert f4_det(f4_matmul(a, b)) == f4_det(a) * f4_det(b)
    if f4_det(a) != ZERO:
        assert np.array_equal(f4_matmul(a, f4_inv(a)), f4_identity(5))
    else:
        assert f4_rank(a) < 5


def test_rref_matches_frozen():
    r, piv = f4_rref(f4_array([[0, 1, "w"], [0, "w", "w2"], [1, 0, 1]]))
    assert piv == (0, 1)
    assert np.array_equal(r, f4_array([[1, 0, 1], [0, 1, "w"], [0, 0, 0]]))
