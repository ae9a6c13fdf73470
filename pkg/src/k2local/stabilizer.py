"""Arithmetic in the maximal order O2 = W(F4)<T>/(T^2 - 2, Tw - w^sigma T) and cocycle extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .core_algebra import (DEFAULT_PRECISION, F4Scalar, F4_ELEMENTS, ONE, OMEGA, OMEGA2, ZERO,
                           PrecisionError, WittApprox, teichmuller_lift)
from . import fgl

Level = Union[Fraction, float]


@dataclass(frozen=True)
class O2Element:
    """a + bT with a, b in W(F4)/2^k."""

    a: WittApprox
    b: WittApprox

    def __post_init__(self):
        if self.a.k != self.b.k:
            raise PrecisionError("both coordinates must share one precision")

    @property
    def k(self) -> int:
        return self.a.k

    @classmethod
    def scalar(cls, c: Union[int, WittApprox], k: int = DEFAULT_PRECISION) -> "O2Element":
        if isinstance(c, WittApprox):
            return cls(c, WittApprox(0, 0, c.k))
        return cls(WittApprox(c, 0, k), WittApprox(0, 0, k))

    @classmethod
    def T(cls, k: int = DEFAULT_PRECISION) -> "O2Element":
        return cls(WittApprox(0, 0, k), WittApprox(1, 0, k))

    @classmethod
    def omega(cls, k: int = DEFAULT_PRECISION) -> "O2Element":
        return cls.scalar(teichmuller_lift(OMEGA, k))

    @classmethod
    def one(cls, k: int = DEFAULT_PRECISION) -> "O2Element":
        return cls.scalar(1, k)

    def __add__(self, other: "O2Element") -> "O2Element":
        other = _lift(other, self.k)
        return O2Element(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other: "O2Element") -> "O2Element":
        other = _lift(other, self.k)
        return O2Element(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _lift(other, self.k) - self

    def __neg__(self) -> "O2Element":
        return O2Element(-self.a, -self.b)

    def __mul__(self, other) -> "O2Element":
        return o2_mul(self, _lift(other, self.k))

    def __rmul__(self, other) -> "O2Element":
        return o2_mul(_lift(other, self.k), self)

    def __pow__(self, n: int) -> "O2Element":
        if n < 0:
            return o2_inv(self) ** (-n)
        out = O2Element.one(self.k)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_unit(self) -> bool:
        return self.a.is_unit()

    def truncate(self, k: int) -> "O2Element":
        return O2Element(self.a.truncate(k), self.b.truncate(k))

    def to_json(self) -> Dict[str, object]:
        return {"a": [str(self.a.c0), str(self.a.c1)], "b": [str(self.b.c0), str(self.b.c1)], "k": self.k}

    @classmethod
    def from_json(cls, obj: Dict[str, object]) -> "O2Element":
        k = int(obj["k"])
        a, b = obj["a"], obj["b"]
        return cls(WittApprox(int(a[0]), int(a[1]), k), WittApprox(int(b[0]), int(b[1]), k))

    def __str__(self):
        return f"({self.a}) + ({self.b})T"


def _lift(x, k: int) -> O2Element:
    if isinstance(x, O2Element):
        if x.k != k:
            raise PrecisionError(f"precision mismatch: {k} vs {x.k}")
        return x
    if isinstance(x, (int, WittApprox)):
        return O2Element.scalar(x, k)
    raise TypeError(f"cannot combine O2Element with {type(x).__name__}")


def o2_mul(g1: O2Element, g2: O2Element) -> O2Element:
    if g1.k != g2.k:
        raise PrecisionError(f"precision mismatch: {g1.k} vs {g2.k}")
    a, b, c, d = g1.a, g1.b, g2.a, g2.b
    return O2Element(a * c + 2 * (b * d.sigma()), a * d + b * c.sigma())


def o2_inv(g: O2Element) -> O2Element:
    """Inverse via Newton iteration x <- x(2 - g x), exact mod 2^k."""
    if not g.is_unit():
        raise ZeroDivisionError(f"{g} is not a unit of O2")
    one = O2Element.one(g.k)
    x = O2Element.scalar(g.a.inverse())
    for _ in range(2 * g.k.bit_length() + 4):
        if g * x == one:
            break
        x = x * (2 * one - g * x)
    if g * x != one or x * g != one:
        raise ArithmeticError("Newton inversion failed to converge")
    return x


def o2_det(g: O2Element) -> WittApprox:
    """a sigma(a) - 2 b sigma(b); lands in the Z/2^k subring."""
    return g.a * g.a.sigma() - 2 * (g.b * g.b.sigma())


def t_valuation(g: O2Element) -> float:
    """Largest n with g in T^n O2 (inf when g vanishes mod 2^k)."""
    va = 2 * g.a.valuation() if not g.a.is_zero() else math.inf
    vb = 2 * g.b.valuation() + 1 if not g.b.is_zero() else math.inf
    return min(va, vb)


def filtration_level(g: O2Element) -> Level:
    """n/2 for the largest n with g = 1 mod T^n; inf for g = 1 mod 2^k."""
    n = t_valuation(g - O2Element.one(g.k))
    return math.inf if n == math.inf else Fraction(int(n), 2)


def t_digits(g: O2Element, count: int) -> List[WittApprox]:
    """Teichmuller digits a_n with g = sum a_n T^n (digits on the left); needs count <= k."""
    if count > g.k:
        raise PrecisionError(f"{count} digits need precision at least {count}")
    digits: List[WittApprox] = []
    delta = g
    while True:
        t = teichmuller_lift(delta.a.reduce(), delta.k)
        digits.append(t)
        if len(digits) == count:
            return digits
        rest = delta - O2Element.scalar(t)
        # rest = x + yT = (y + (x/2) T) T, one bit of precision is spent
        x_half = rest.a.halve()
        delta = O2Element(rest.b.truncate(x_half.k), x_half)


def residue_digits(g: O2Element, count: int = 3) -> Tuple[F4Scalar, ...]:
    return tuple(t.reduce() for t in t_digits(g, count))


def from_digits(digits: Sequence[F4Scalar], k: int = DEFAULT_PRECISION) -> O2Element:
    """sum teich(d_n) T^n, evaluated by Horner from the top digit."""
    acc = O2Element.scalar(0, k)
    T = O2Element.T(k)
    for d in reversed(digits):
        acc = O2Element.scalar(teichmuller_lift(d, k)) + acc * T
    return acc


@dataclass(frozen=True)
class TtildeProfile:
    t0: F4Scalar
    t1: F4Scalar
    t2: F4Scalar

    def __post_init__(self):
        if self.t0.is_zero():
            raise ValueError("t0 must be a unit")

    def as_tuple(self) -> Tuple[F4Scalar, F4Scalar, F4Scalar]:
        return (self.t0, self.t1, self.t2)

    def __str__(self):
        return f"({self.t0}, {self.t1}, {self.t2})"


@lru_cache(maxsize=4)
def _gamma2(D: int = 16) -> fgl.FglHandle:
    return fgl.honda_gamma2(D)


def ttilde_profile(g: O2Element) -> TtildeProfile:
    """(t0, t1, t2)(g): the Gamma2-expansion coefficients of g^{-1} mod (2, u1)."""
    if g.k < 4:
        raise PrecisionError("profile extraction needs precision at least 4")
    inv = o2_inv(g)
    digits = residue_digits(inv, 3)
    F = _gamma2()
    series = fgl.endomorphism_series(F, digits)
    peeled = fgl.peel_endomorphism(F, series)
    return TtildeProfile(*peeled[:3])


def endomorphism_of(g: O2Element, F: Optional[fgl.FglHandle] = None) -> fgl.TruncSeries:
    """The series of g acting on Gamma2: integers via n-series, w by x -> w x, T by x -> x^2."""
    F = F or _gamma2()
    x = F.x()
    s0, s1 = g.a.signed()
    d0, d1 = g.b.signed()
    wx = x.scale(OMEGA)
    sq = fgl.TruncSeries.monomial(("x",), F.cap, (2,), ONE)
    parts = [fgl.n_series(F, s0), fgl.n_series(F, s1).compose([wx]),
             fgl.n_series(F, d0).compose([sq]), fgl.n_series(F, d1).compose([wx]).compose([sq])]
    return fgl.formal_sum(F, [p for p in parts if not p.is_zero()])


def profile_via_series(g: O2Element) -> TtildeProfile:
    """Independent route: expand g^{-1} through n-series and peel the endomorphism."""
    F = _gamma2()
    peeled = fgl.peel_endomorphism(F, endomorphism_of(o2_inv(g), F))
    return TtildeProfile(*peeled[:3])


# Profiles are read off g^-1, so they compose by the convolution rule
# t_k(g.h) = sum_i t_i(g) t_{k-i}(h)^(2^i) for the opposite product g.h = h g in O2.
# The action on E_*Z composes with the plain product o2_mul.
def automorphism_compose(g: O2Element, h: O2Element) -> O2Element:
    return o2_mul(h, g)


def compose_profiles(p: TtildeProfile, q: TtildeProfile) -> TtildeProfile:
    a, b = p.as_tuple(), q.as_tuple()
    out = []
    for k in range(3):
        acc = ZERO
        for i in range(k + 1):
            acc = acc + a[i] * b[k - i] ** (2 ** i)
        out.append(acc)
    return TtildeProfile(*out)


def product_tk_check(g1: O2Element, g2: O2Element) -> bool:
    lhs = ttilde_profile(automorphism_compose(g1, g2))
    return lhs == compose_profiles(ttilde_profile(g1), ttilde_profile(g2))


# ------------------------------------------------------------ constructions

class SearchExhausted(RuntimeError):
    """No digit sequence satisfied the constraints at the requested precision."""


def _digit_search(constraints: Sequence[Callable[[O2Element], O2Element]], prefix: Sequence[F4Scalar],
                  depth: int, k: int) -> Optional[Tuple[F4Scalar, ...]]:
    """Depth-first search over T-digits in the fixed order 0, 1, w, w^2.

    Each constraint maps a candidate to an expression that must vanish mod T^n once n digits are
    fixed; such expressions depend only on the candidate mod T^n.
    """
    def ok(digits):
        g = from_digits(digits, k)
        n = len(digits)
        return all(t_valuation(c(g)) >= n for c in constraints)

    for n in range(1, len(prefix) + 1):
        if not ok(prefix[:n]):
            return None
    stack = [tuple(prefix)]
    while stack:
        cur = stack.pop()
        if len(cur) == depth:
            return cur
        for d in reversed(F4_ELEMENTS):
            nxt = cur + (d,)
            if ok(nxt):
                stack.append(nxt)
    return None


def _conj(x: O2Element, g: O2Element) -> O2Element:
    return x * g * o2_inv(x)


def find_quaternion_embedding(k: int = DEFAULT_PRECISION, normalized: bool = True) -> Tuple[O2Element, O2Element]:
    """i, j with i^2 = j^2 = -1, j i j^-1 = i^-1, t0 = 1 and t1(i) = 1, t1(j) = w.

    With `normalized`, j is taken as the conjugate of i by the Teichmuller w, and i is chosen so
    that w-conjugation permutes i -> j -> ij; then w normalizes the quaternion group.
    """
    if k < 4:
        raise PrecisionError("quaternion search needs precision at least 4")
    depth = 2 * k
    one = O2Element.one(k)
    w = O2Element.omega(k)
    w_inv = o2_inv(w)

    def square_plus_one(g):
        return g * g + one

    if normalized:
        for conj_by in (w, w_inv):
            def jj(g, c=conj_by):
                return _conj(c, g)

            def anti(g, jj=jj):
                j = jj(g)
                return g * j + j * g

            def cyc(g, jj=jj):
                return jj(jj(g)) - g * jj(g)

            found = _digit_search([square_plus_one, anti, cyc], (ONE, ONE), depth, k)
            if found is None:
                continue
            i = from_digits(found, k)
            j = jj(i)
            if _verify_quaternions(i, j):
                return i, j
    found = _digit_search([square_plus_one], (ONE, ONE), depth, k)
    if found is None:
        raise SearchExhausted("no square root of -1 with the required profile")
    i = from_digits(found, k)
    found_j = _digit_search([square_plus_one, lambda g: i * g + g * i], (ONE, OMEGA), depth, k)
    if found_j is None:
        raise SearchExhausted("no anticommuting partner with the required profile")
    j = from_digits(found_j, k)
    if not _verify_quaternions(i, j):
        raise SearchExhausted("quaternion candidates failed verification")
    return i, j


def _verify_quaternions(i: O2Element, j: O2Element) -> bool:
    one = O2Element.one(i.k)
    if i * i != -one or j * j != -one:
        return False
    if j * i * o2_inv(j) != o2_inv(i):
        return False
    pi, pj = ttilde_profile(i), ttilde_profile(j)
    return pi.t0 == ONE and pj.t0 == ONE and pi.t1 == ONE and pj.t1 == OMEGA


def quaternion_elements(i: O2Element, j: O2Element) -> Dict[str, O2Element]:
    """The eight elements, with k = i j."""
    one = O2Element.one(i.k)
    kk = i * j
    return {"1": one, "-1": -one, "i": i, "-i": -i, "j": j, "-j": -j, "k": kk, "-k": -kk}


def _hensel_root(f: Callable[[int], int], df: Callable[[int], int], start: int, k: int) -> int:
    m = 1 << k
    y = start
    for _ in range(k + 2):
        y = (y - f(y) * pow(df(y) % m, -1, m)) % m
    if f(y) % m:
        raise ArithmeticError("Hensel lifting failed")
    return y


def construct_alpha_pi(k: int = DEFAULT_PRECISION) -> Tuple[O2Element, O2Element]:
    """pi = 1 + 2w and alpha = 1 + y w with y^2 - y + 2 = 0, y = 2 mod 4; all properties verified."""
    if k < 4:
        raise PrecisionError("construction needs precision at least 4")
    w = teichmuller_lift(OMEGA, k)
    pi = O2Element.scalar(1 + 2 * w)
    f = lambda y: y * y - y + 2
    df = lambda y: 2 * y - 1
    errors = []
    for start in (2, 1):
        y = _hensel_root(f, df, start, k)
        alpha = O2Element.scalar(1 + y * w)
        problems = []
        if o2_det(alpha) != -1:
            problems.append("det(alpha) != -1")
        if o2_det(pi) != 3:
            problems.append("det(pi) != 3")
        if filtration_level(o2_inv(alpha) * pi) < 2:
            problems.append("alpha^-1 pi not in F_{4/2}")
        if alpha.is_unit() and ttilde_profile(alpha) != TtildeProfile(ONE, ZERO, OMEGA):
            problems.append("profile(alpha) != (1, 0, w)")
        if not problems:
            return alpha, pi
        errors.append(f"root {y}: {', '.join(problems)}")
    raise ArithmeticError("; ".join(errors))


def in_norm_one(g: O2Element) -> bool:
    """Membership in the kernel of the reduced norm: det(g) = +-1 mod 2^k."""
    d = o2_det(g)
    return d == 1 or d == -1


def named_elements(k: int = DEFAULT_PRECISION) -> Dict[str, O2Element]:
    i, j = find_quaternion_embedding(k)
    alpha, pi = construct_alpha_pi(k)
    out = quaternion_elements(i, j)
    out["w"] = O2Element.omega(k)
    out["alpha"] = alpha
    out["pi"] = pi
    return out
