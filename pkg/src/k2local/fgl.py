"""Truncated formal group laws: the height-2 Honda law over F4, n-series, inverses, peeling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core_algebra import F4Scalar, ONE, ZERO

DEFAULT_DEGREE = 16
DEFAULT_LIFT_PRECISION = 8
ASSOC_DEGREE = 12

EXACT = 1 << 30  # absolute precision marker for exactly known dyadics


class IntegralityError(ArithmeticError):
    """A reduced coefficient could not be certified 2-integral."""


@dataclass(frozen=True)
class Dyadic:
    """num / 2^shift, known modulo 2^prec (absolute 2-adic precision)."""

    num: int
    shift: int = 0
    prec: int = EXACT

    def __post_init__(self):
        num, shift, prec = self.num, self.shift, self.prec
        if prec < EXACT:
            if prec + shift <= 0:
                num = 0
            else:
                num %= 1 << (prec + shift)
        if num == 0:
            shift = 0
        while shift > 0 and num % 2 == 0:
            num //= 2
            shift -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "shift", shift)

    def valuation(self) -> int:
        if self.num == 0:
            return self.prec
        v = (self.num & -self.num).bit_length() - 1
        return min(v - self.shift, self.prec)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        s = max(self.shift, other.shift)
        num = (self.num << (s - self.shift)) + (other.num << (s - other.shift))
        return Dyadic(num, s, min(self.prec, other.prec))

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.shift, self.prec)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        prec = min(self.valuation() + other.prec, other.valuation() + self.prec, EXACT)
        return Dyadic(self.num * other.num, self.shift + other.shift, prec)

    def halve(self, times: int = 1) -> "Dyadic":
        return Dyadic(self.num, self.shift + times, self.prec - times if self.prec < EXACT else EXACT)

    def is_zero(self) -> bool:
        # only exact zeros may be dropped from a series; approximate zeros carry precision
        return self.num == 0 and self.prec >= EXACT

    def reduce_mod2(self) -> F4Scalar:
        if self.shift > 0:
            raise IntegralityError(f"{self} is not 2-integral")
        if self.prec < 1:
            raise IntegralityError(f"{self} is not known modulo 2")
        return F4Scalar(self.num & 1)

    def __str__(self):
        p = "" if self.prec >= EXACT else f" + O(2^{self.prec})"
        return f"{self.num}/2^{self.shift}{p}"


Mono = Tuple[int, ...]


class TruncSeries:
    """Power series in named variables, truncated at total degree `cap`."""

    __slots__ = ("vars", "cap", "coeffs")

    def __init__(self, vars: Sequence[str], cap: int, coeffs: Optional[Dict[Mono, object]] = None):
        self.vars = tuple(vars)
        self.cap = cap
        clean = {}
        for m, c in (coeffs or {}).items():
            if len(m) != len(self.vars):
                raise ValueError(f"monomial {m} does not match variables {self.vars}")
            if sum(m) <= cap and not c.is_zero():
                clean[tuple(m)] = c
        self.coeffs = clean

    @classmethod
    def variable(cls, name: str, vars: Sequence[str], cap: int, one=ONE) -> "TruncSeries":
        m = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, cap, {m: one})

    @classmethod
    def monomial(cls, vars: Sequence[str], cap: int, mono: Mono, coeff) -> "TruncSeries":
        return cls(vars, cap, {tuple(mono): coeff})

    def _check(self, other: "TruncSeries"):
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out[m] + c if m in out else c
        return TruncSeries(self.vars, min(self.cap, other.cap), out)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.vars, self.cap, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        cap = min(self.cap, other.cap)
        out: Dict[Mono, object] = {}
        for m1, c1 in self.coeffs.items():
            d1 = sum(m1)
            for m2, c2 in other.coeffs.items():
                if d1 + sum(m2) > cap:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                p = c1 * c2
                out[m] = out[m] + p if m in out else p
        return TruncSeries(self.vars, cap, out)

    def scale(self, c) -> "TruncSeries":
        return TruncSeries(self.vars, self.cap, {m: c * v for m, v in self.coeffs.items()})

    def map_coeffs(self, f: Callable) -> "TruncSeries":
        return TruncSeries(self.vars, self.cap, {m: f(c) for m, c in self.coeffs.items()})

    def power(self, n: int, one=ONE) -> "TruncSeries":
        out = TruncSeries(self.vars, self.cap, {(0,) * len(self.vars): one})
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def compose(self, subs: Sequence["TruncSeries"], one=ONE) -> "TruncSeries":
        """Substitute subs[i] for self.vars[i]; every substituted series needs zero constant term."""
        if len(subs) != len(self.vars):
            raise ValueError("one substitution per variable required")
        target = subs[0]
        for s in subs:
            target._check(s)
            if s.constant() is not None:
                raise ValueError("substituted series must have zero constant term")
        cap = min(min(s.cap for s in subs), self.cap)
        powers: List[Dict[int, TruncSeries]] = [{} for _ in subs]

        def pw(i: int, e: int) -> TruncSeries:
            if e not in powers[i]:
                if e == 0:
                    powers[i][0] = TruncSeries(target.vars, cap, {(0,) * len(target.vars): one})
                else:
                    powers[i][e] = pw(i, e - 1) * subs[i]
            return powers[i][e]

        out = TruncSeries(target.vars, cap, {})
        for m, c in self.coeffs.items():
            term = None
            for i, e in enumerate(m):
                if e:
                    term = pw(i, e) if term is None else term * pw(i, e)
            if term is None:
                term = TruncSeries(target.vars, cap, {(0,) * len(target.vars): one})
            out = out + term.scale(c)
        return out

    def embed(self, vars: Sequence[str]) -> "TruncSeries":
        """View the series inside a larger variable set."""
        idx = [vars.index(v) for v in self.vars]
        out = {}
        for m, c in self.coeffs.items():
            full = [0] * len(vars)
            for i, e in zip(idx, m):
                full[i] = e
            out[tuple(full)] = c
        return TruncSeries(vars, self.cap, out)

    def truncate(self, cap: int) -> "TruncSeries":
        return TruncSeries(self.vars, min(cap, self.cap), self.coeffs)

    def coefficient(self, mono: Mono, zero=ZERO):
        return self.coeffs.get(tuple(mono), zero)

    def constant(self):
        return self.coeffs.get((0,) * len(self.vars))

    def degrees(self) -> List[int]:
        return sorted({sum(m) for m in self.coeffs})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.vars == other.vars and self.cap == other.cap and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.vars, self.cap, tuple(sorted(self.coeffs.items()))))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for m in sorted(self.coeffs, key=lambda m: (sum(m), tuple(-e for e in m))):
            c = self.coeffs[m]
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(self.vars, m) if e)
            cs = str(c)
            parts.append(mono if cs == "1" and mono else (f"{cs}*{mono}" if mono else cs))
        return " + ".join(parts) + f" + O(deg {self.cap + 1})"

    __repr__ = __str__


@dataclass
class FglHandle:
    """A formal group law F(x, y) over F4 with its cached formal inverse."""

    law: TruncSeries
    base: str = "F4"
    inverse_series: Optional[TruncSeries] = None
    lift_precision: int = 0
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def cap(self) -> int:
        return self.law.cap

    def add(self, f: TruncSeries, g: TruncSeries) -> TruncSeries:
        return self.law.compose([f, g])

    def inverse(self, f: Optional[TruncSeries] = None) -> TruncSeries:
        if self.inverse_series is None:
            self.inverse_series = _formal_inverse(self.law)
        if f is None:
            return self.inverse_series
        return self.inverse_series.compose([f])

    def x(self) -> TruncSeries:
        return TruncSeries.variable("x", ("x",), self.cap)


def _formal_inverse(law: TruncSeries, one=ONE) -> TruncSeries:
    x = TruncSeries.variable(law.vars[0], (law.vars[0],), law.cap, one)
    inv = -x
    for _ in range(law.cap + 2):
        nxt = inv - law.compose([x, inv], one)
        if nxt == inv:
            return inv
        inv = nxt
    raise ArithmeticError("formal inverse iteration did not converge")


def _honda_lift(cap: int, prec: int) -> TruncSeries:
    """log^{-1}(log x + log y) with log t = sum t^(4^i)/2^i, over precision-capped dyadics."""
    one = Dyadic(1, 0, prec)
    t_vars = ("t",)
    log_terms = {}
    i = 0
    while 4 ** i <= cap:
        log_terms[(4 ** i,)] = Dyadic(1, i, prec - i)
        i += 1
    t = TruncSeries.variable("t", t_vars, cap, one)
    # exp = log^{-1} solves g = t - sum_{i>=1} g^(4^i)/2^i
    g = t
    for _ in range(cap + 1):
        nxt = t
        for (deg,), c in log_terms.items():
            if deg > 1:
                nxt = nxt - g.power(deg, one).scale(c)
        if nxt == g:
            break
        g = nxt
    xy = ("x", "y")
    lx = TruncSeries(xy, cap, {(d, 0): c for (d,), c in log_terms.items()})
    ly = TruncSeries(xy, cap, {(0, d): c for (d,), c in log_terms.items()})
    return g.compose([lx + ly], one)


def honda_gamma2(D: int = DEFAULT_DEGREE, precision: int = DEFAULT_LIFT_PRECISION,
                 max_retries: int = 4) -> FglHandle:
    """The Honda law of height 2 over F4 to total degree D, certified integral."""
    if D < 4:
        raise ValueError("degree cap must be at least 4")
    prec = precision
    last_error: Optional[Exception] = None
    for _ in range(max_retries + 1):
        lifted = _honda_lift(D, prec)
        try:
            reduced = {m: c.reduce_mod2() for m, c in lifted.coeffs.items()}
            # every monomial of degree <= D must be certified, including approximate zeros
            for m, c in lifted.coeffs.items():
                if c.prec < 1:
                    raise IntegralityError(f"coefficient of {m} known only mod 2^{c.prec}")
        except IntegralityError as exc:
            last_error = exc
            prec *= 2
            continue
        law = TruncSeries(("x", "y"), D, reduced)
        return FglHandle(law=law, base="F4", lift_precision=prec,
                         meta={"min_coeff_precision": min(c.prec for c in lifted.coeffs.values())})
    raise IntegralityError(f"integrality not certified after {max_retries} retries: {last_error}")


def n_series(F: FglHandle, n: int) -> TruncSeries:
    x = F.x()
    if n == 0:
        return TruncSeries(("x",), F.cap, {})
    if n < 0:
        return F.inverse(n_series(F, -n))
    if n == 1:
        return x
    if n % 2 == 0:
        two = F.add(x, x)
        return n_series(F, n // 2).compose([two])
    return F.add(n_series(F, n - 1), x)


def formal_sum(F: FglHandle, terms: Sequence[TruncSeries]) -> TruncSeries:
    acc: Optional[TruncSeries] = None
    for t in terms:
        if t.constant() is not None:
            raise ValueError("formal sum terms must have zero constant term")
        acc = t if acc is None else F.add(acc, t)
    return acc if acc is not None else TruncSeries(("x",), F.cap, {})


def endomorphism_series(F: FglHandle, digits: Sequence[F4Scalar]) -> TruncSeries:
    """Formal sum of digits[n] * x^(2^n) truncated at the law's degree cap."""
    terms = []
    for n, a in enumerate(digits):
        if 2 ** n > F.cap:
            break
        if not a.is_zero():
            terms.append(TruncSeries.monomial(("x",), F.cap, (2 ** n,), a))
    return formal_sum(F, terms)


def peel_endomorphism(F: FglHandle, f: TruncSeries) -> List[F4Scalar]:
    """Digits (a_0, a_1, ...) with f = formal sum of a_n x^(2^n), one per 2-power degree <= cap."""
    if f.constant() is not None:
        raise ValueError("endomorphism series must vanish at 0")
    ndigits = F.cap.bit_length()
    digits = [ZERO] * ndigits
    residual = f.truncate(F.cap)
    while not residual.is_zero():
        e = residual.degrees()[0]
        if e & (e - 1):
            raise ValueError(f"residual has a nonzero coefficient in non-2-power degree {e}")
        a = residual.coefficient((e,))
        digits[e.bit_length() - 1] = a
        step = TruncSeries.monomial(("x",), F.cap, (e,), a)
        residual = F.add(residual, F.inverse(step))
    return digits


def check_axioms(F: FglHandle, degree: int = ASSOC_DEGREE) -> Dict[str, bool]:
    """Commutativity, unit and associativity coefficientwise up to total degree `degree`."""
    d = min(degree, F.cap)
    law = F.law.truncate(d)
    xy = ("x", "y")
    x = TruncSeries.variable("x", xy, d)
    y = TruncSeries.variable("y", xy, d)
    zero = TruncSeries(xy, d, {})
    commutative = law.compose([y, x]) == law
    unit = law.compose([x, zero]) == x and law.compose([zero, y]) == y
    xyz = ("x", "y", "z")
    X, Y, Z = (TruncSeries.variable(v, xyz, d) for v in xyz)
    left = law.compose([law.compose([X, Y]), Z])
    right = law.compose([X, law.compose([Y, Z])])
    return {"commutative": commutative, "unit": unit, "associative": left == right}
