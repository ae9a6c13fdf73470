"""Exact arithmetic: F4, truncated Witt vectors W(F4)/2^k, sparse polynomials, F4 matrices."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

DEFAULT_PRECISION = 8

# F4 elements are encoded as ints c0 + 2*c1 meaning c0 + c1*w, with w^2 = w + 1.
_LOG = {1: 0, 2: 1, 3: 2}
_EXP = (1, 2, 3)
MUL = np.zeros((4, 4), dtype=np.uint8)
for _x in range(1, 4):
    for _y in range(1, 4):
        MUL[_x, _y] = _EXP[(_LOG[_x] + _LOG[_y]) % 3]
INV = np.array([0, 1, 3, 2], dtype=np.uint8)
FROB = (0, 1, 3, 2)
_NAMES = ("0", "1", "w", "w2")


class F4Scalar:
    """Element of F4 = {0, 1, w, w^2}; immutable, interned."""

    __slots__ = ("value",)
    _cache: Dict[int, "F4Scalar"] = {}

    def __new__(cls, value: int = 0):
        value = int(value)
        if value not in (0, 1, 2, 3):
            raise ValueError(f"F4 code must be in 0..3, got {value}")
        obj = cls._cache.get(value)
        if obj is None:
            obj = super().__new__(cls)
            object.__setattr__(obj, "value", value)
            cls._cache[value] = obj
        return obj

    def __setattr__(self, *_):
        raise AttributeError("F4Scalar is immutable")

    def __reduce__(self):
        return (F4Scalar, (self.value,))

    @classmethod
    def parse(cls, text: str) -> "F4Scalar":
        text = text.strip()
        aliases = {"0": 0, "1": 1, "w": 2, "w2": 3, "w^2": 3}
        if text not in aliases:
            raise ValueError(f"cannot parse F4 element {text!r}")
        return cls(aliases[text])

    def __add__(self, other):
        other = _as_f4(other)
        if other is NotImplemented:
            return other
        return F4Scalar(self.value ^ other.value)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        other = _as_f4(other)
        if other is NotImplemented:
            return other
        return F4Scalar(int(MUL[self.value, other.value]))

    __rmul__ = __mul__

    def inverse(self) -> "F4Scalar":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F4")
        return F4Scalar(int(INV[self.value]))

    def __truediv__(self, other):
        return self * _as_f4(other).inverse()

    def __pow__(self, n: int):
        if self.value == 0:
            if n < 0:
                raise ZeroDivisionError("0 has no inverse in F4")
            return F4Scalar(1 if n == 0 else 0)
        return F4Scalar(_EXP[(_LOG[self.value] * n) % 3])

    def frobenius(self) -> "F4Scalar":
        return F4Scalar(FROB[self.value])

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self):
        return self.value != 0

    def __eq__(self, other):
        if isinstance(other, F4Scalar):
            return self.value == other.value
        if isinstance(other, int) and other in (0, 1):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(("F4", self.value))

    def __repr__(self):
        return f"F4Scalar({_NAMES[self.value]})"

    def __str__(self):
        return _NAMES[self.value]


def _as_f4(x):
    if isinstance(x, F4Scalar):
        return x
    if isinstance(x, (int, np.integer)):
        return F4Scalar(int(x) & 1)
    return NotImplemented


ZERO = F4Scalar(0)
ONE = F4Scalar(1)
OMEGA = F4Scalar(2)
OMEGA2 = F4Scalar(3)
F4_ELEMENTS = (ZERO, ONE, OMEGA, OMEGA2)


class PrecisionError(ValueError):
    """Raised when values carrying different 2-adic precisions are combined."""


@dataclass(frozen=True)
class WittApprox:
    """c0 + c1*w in (Z/2^k)[w]/(w^2+w+1), a truncation of W(F4)."""

    c0: int
    c1: int
    k: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("precision must be at least 1")
        m = 1 << self.k
        object.__setattr__(self, "c0", self.c0 % m)
        object.__setattr__(self, "c1", self.c1 % m)

    @classmethod
    def of(cls, n: int, k: int = DEFAULT_PRECISION) -> "WittApprox":
        return cls(n, 0, k)

    @classmethod
    def omega(cls, k: int = DEFAULT_PRECISION) -> "WittApprox":
        return cls(0, 1, k)

    def _coerce(self, other) -> "WittApprox":
        if isinstance(other, WittApprox):
            if other.k != self.k:
                raise PrecisionError(f"precision mismatch: {self.k} vs {other.k}")
            return other
        if isinstance(other, (int, np.integer)):
            return WittApprox(int(other), 0, self.k)
        raise TypeError(f"cannot combine WittApprox with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return WittApprox(self.c0 + o.c0, self.c1 + o.c1, self.k)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return WittApprox(self.c0 - o.c0, self.c1 - o.c1, self.k)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return WittApprox(-self.c0, -self.c1, self.k)

    def __mul__(self, other):
        o = self._coerce(other)
        a0, a1, b0, b1 = self.c0, self.c1, o.c0, o.c1
        # w^2 = -1 - w
        return WittApprox(a0 * b0 - a1 * b1, a0 * b1 + a1 * b0 - a1 * b1, self.k)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = WittApprox(1, 0, self.k)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def sigma(self) -> "WittApprox":
        """Frobenius lift w -> w^2 = -1 - w."""
        return WittApprox(self.c0 - self.c1, -self.c1, self.k)

    def norm(self) -> int:
        """x * sigma(x) as an integer mod 2^k."""
        return (self.c0 * self.c0 - self.c0 * self.c1 + self.c1 * self.c1) % (1 << self.k)

    def reduce(self) -> F4Scalar:
        return F4Scalar((self.c0 & 1) | ((self.c1 & 1) << 1))

    def is_unit(self) -> bool:
        return not self.reduce().is_zero()

    def inverse(self) -> "WittApprox":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self} is not a unit mod 2")
        n_inv = pow(self.norm(), -1, 1 << self.k)
        return self.sigma() * n_inv

    def valuation(self) -> int:
        """2-adic valuation, capped at k for zero."""
        v = self.k
        for c in (self.c0, self.c1):
            if c:
                v = min(v, (c & -c).bit_length() - 1)
        return v

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    def is_rational(self) -> bool:
        return self.c1 == 0

    def halve(self) -> "WittApprox":
        """Exact division by 2; the result is known mod 2^(k-1)."""
        if self.c0 & 1 or self.c1 & 1:
            raise ValueError(f"{self} is not divisible by 2")
        return WittApprox(self.c0 >> 1, self.c1 >> 1, self.k - 1)

    def truncate(self, k: int) -> "WittApprox":
        if k > self.k:
            raise PrecisionError(f"cannot raise precision from {self.k} to {k}")
        return WittApprox(self.c0, self.c1, k)

    def lift(self, k: int) -> "WittApprox":
        """Re-embed with the same residues at precision k (caller vouches for the extra bits)."""
        return WittApprox(self.c0, self.c1, k)

    def signed(self) -> Tuple[int, int]:
        m = 1 << self.k
        return tuple(c - m if c >= m // 2 else c for c in (self.c0, self.c1))

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            return self == WittApprox(int(other), 0, self.k)
        if not isinstance(other, WittApprox):
            return NotImplemented
        return (self.k, self.c0, self.c1) == (other.k, other.c0, other.c1)

    def __hash__(self):
        return hash((self.c0, self.c1, self.k))

    def __str__(self):
        s0, s1 = self.signed()
        if s1 == 0:
            body = f"{s0}"
        elif s0 == 0:
            body = f"{s1}w"
        else:
            body = f"{s0}{'+' if s1 > 0 else '-'}{abs(s1)}w"
        return f"{body} (mod 2^{self.k})"


def teichmuller_lift(x: F4Scalar, k: int = DEFAULT_PRECISION) -> WittApprox:
    """The unique t with t^4 = t and t = x mod 2."""
    if k < 1:
        raise ValueError("precision must be at least 1")
    if x.is_zero():
        return WittApprox(0, 0, k)
    t = WittApprox(x.value & 1, x.value >> 1, k)
    # x -> x^4 contracts to the fixed point; k iterations suffice
    for _ in range(k + 1):
        nxt = t ** 4
        if nxt == t:
            return t
        t = nxt
    raise AssertionError("Teichmuller iteration failed to stabilize")


# ---------------------------------------------------------------- polynomials

Monomial = Tuple[Tuple[str, int], ...]


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


class Poly4:
    """Sparse polynomial over F4 (F2 when all coefficients are 0/1) in named variables."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, F4Scalar] | None = None):
        clean: Dict[Monomial, F4Scalar] = {}
        for mono, c in (terms or {}).items():
            c = _as_f4(c)
            if c.is_zero():
                continue
            key = tuple(sorted((v, e) for v, e in mono if e))
            clean[key] = clean.get(key, ZERO) + c
            if clean[key].is_zero():
                del clean[key]
        self.terms = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def var(cls, name: str) -> "Poly4":
        return cls({((name, 1),): ONE})

    @classmethod
    def const(cls, c) -> "Poly4":
        return cls({(): _as_f4(c)})

    @classmethod
    def zero(cls) -> "Poly4":
        return cls()

    @classmethod
    def one(cls) -> "Poly4":
        return cls({(): ONE})

    @staticmethod
    def _coerce(x) -> "Poly4":
        if isinstance(x, Poly4):
            return x
        if isinstance(x, (F4Scalar, int, np.integer)):
            return Poly4.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Poly4")

    @property
    def indeterminates(self) -> Tuple[str, ...]:
        return tuple(sorted({v for m in self.terms for v, _ in m}))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return Poly4(out)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        other = self._coerce(other)
        out: Dict[Monomial, F4Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, ZERO) + c1 * c2
        return Poly4(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = Poly4.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def subs(self, values: Mapping[str, Union["Poly4", F4Scalar, int]]) -> "Poly4":
        out = Poly4()
        for m, c in self.terms.items():
            term = Poly4.const(c)
            for v, e in m:
                term = term * (self._coerce(values[v]) ** e if v in values else Poly4({((v, e),): ONE}))
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, Union[F4Scalar, int]]) -> F4Scalar:
        p = self.subs(values)
        if not p.is_constant():
            raise ValueError(f"unassigned indeterminates in {p}")
        return p.constant()

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant(self) -> F4Scalar:
        return self.terms.get((), ZERO)

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=-1)

    def coefficient(self, mono: Monomial) -> F4Scalar:
        return self.terms.get(tuple(sorted(mono)), ZERO)

    def linear_part(self) -> Tuple[Dict[str, F4Scalar], F4Scalar]:
        """Split an affine polynomial into variable coefficients and constant."""
        coeffs: Dict[str, F4Scalar] = {}
        for m, c in self.terms.items():
            if m == ():
                continue
            if len(m) != 1 or m[0][1] != 1:
                raise ValueError(f"{self} is not affine")
            coeffs[m[0][0]] = c
        return coeffs, self.constant()

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (F4Scalar, int)):
            other = Poly4.const(other)
        if not isinstance(other, Poly4):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly4({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(str(c))
            elif c == ONE:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


def poly_det(m: Sequence[Sequence[Poly4]]) -> Poly4:
    """Determinant by Laplace expansion along rows, memoized on the remaining column set."""
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("poly_det needs a square matrix")
    if n == 0:
        return Poly4.one()
    rows = [[Poly4._coerce(x) for x in row] for row in m]
    memo: Dict[int, Poly4] = {}

    def minor(r: int, cols: int) -> Poly4:
        # determinant of rows r.. against the column bitmask cols; char 2 so no signs
        if r == n:
            return Poly4.one()
        if cols in memo:
            return memo[cols]
        acc = Poly4()
        for c in range(n):
            if cols >> c & 1 and rows[r][c]:
                sub = minor(r + 1, cols & ~(1 << c))
                if sub:
                    acc = acc + rows[r][c] * sub
        memo[cols] = acc
        return acc

    return minor(0, (1 << n) - 1)


# ------------------------------------------------------------- F4 matrices

def f4_array(rows) -> np.ndarray:
    """Build a uint8 code matrix from nested F4Scalar / int / str entries."""
    def code(x):
        if isinstance(x, F4Scalar):
            return x.value
        if isinstance(x, str):
            return F4Scalar.parse(x).value
        return int(x)
    arr = np.array([[code(x) for x in row] for row in rows], dtype=np.uint8)
    if arr.size and arr.max() > 3:
        raise ValueError("F4 codes must be in 0..3")
    return arr


def f4_identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def f4_scale(c: int, a: np.ndarray) -> np.ndarray:
    return MUL[int(c), a]


def f4_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product over F4 via the F2 bit planes: (A0 + wA1)(B0 + wB1)."""
    a0, a1 = (a & 1).astype(np.int64), (a >> 1).astype(np.int64)
    b0, b1 = (b & 1).astype(np.int64), (b >> 1).astype(np.int64)
    p00, p11 = (a0 @ b0) & 1, (a1 @ b1) & 1
    p01, p10 = (a0 @ b1) & 1, (a1 @ b0) & 1
    real = p00 ^ p11
    wpart = p01 ^ p10 ^ p11
    return (real | (wpart << 1)).astype(np.uint8)


def f4_rref(a: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    r = np.array(a, dtype=np.uint8, copy=True)
    if r.ndim != 2:
        raise ValueError("expected a matrix")
    nrows, ncols = r.shape
    pivots = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        p = row + int(nz[0])
        if p != row:
            r[[row, p]] = r[[p, row]]
        r[row] = MUL[INV[r[row, col]], r[row]]
        factors = r[:, col].copy()
        factors[row] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            r[hit] ^= MUL[factors[hit][:, None], r[row][None, :]]
        pivots.append(col)
        row += 1
    return r, tuple(pivots)


def f4_rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(f4_rref(a)[1])


def f4_nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of {x : a x = 0} as the columns of the returned matrix."""
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return f4_identity(ncols)
    r, piv = f4_rref(a)
    free = [c for c in range(ncols) if c not in piv]
    basis = np.zeros((ncols, len(free)), dtype=np.uint8)
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, p in enumerate(piv):
            basis[p, j] = r[i, f]  # char 2: -r = r
    return basis


def f4_inv(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    r, piv = f4_rref(np.concatenate([a, f4_identity(n)], axis=1))
    if piv[:n] != tuple(range(n)):
        raise ZeroDivisionError("matrix is singular over F4")
    return r[:, n:]


def f4_det(a: np.ndarray) -> F4Scalar:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("determinant needs a square matrix")
    r = np.array(a, dtype=np.uint8, copy=True)
    det = 1
    for col in range(n):
        nz = np.nonzero(r[col:, col])[0]
        if nz.size == 0:
            return ZERO
        p = col + int(nz[0])
        if p != col:
            r[[col, p]] = r[[p, col]]
        piv = int(r[col, col])
        det = int(MUL[det, piv])
        r[col] = MUL[INV[piv], r[col]]
        below = r[col + 1:, col].copy()
        hit = np.nonzero(below)[0] + col + 1
        if hit.size:
            r[hit] ^= MUL[r[hit, col][:, None], r[col][None, :]]
    return F4Scalar(det)


def f4_colspace_contains(basis: np.ndarray, vecs: np.ndarray) -> bool:
    return f4_rank(np.concatenate([basis, vecs], axis=1)) == f4_rank(basis)


def f4_frobenius(a: np.ndarray) -> np.ndarray:
    return np.array(FROB, dtype=np.uint8)[a]


def f4_to_strings(a: np.ndarray) -> list:
    return [[_NAMES[int(x)] for x in row] for row in a]


def f4_random(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.integers(0, 4, size=shape, dtype=np.uint8)


def all_f4_tuples(n: int) -> Iterable[Tuple[F4Scalar, ...]]:
    return product(F4_ELEMENTS, repeat=n)
