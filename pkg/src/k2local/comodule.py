"""Coaction data of BP_*Z mod (2, v1): ansatz solver, counit/coassociativity, reductions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .core_algebra import Poly4

# monomial t1^e1 t2^e2 v2^ev
Mono = Tuple[int, int, int]
Key = Tuple[Mono, str]
Table = Dict[Key, Poly4]

T_DEGREES = (2, 6, 6)
UNIT: Mono = (0, 0, 0)
GENERATORS = ("x0", "x2", "x4", "x6", "y6", "y8", "y10", "y12")
DEGREES = {g: int(g[1:]) for g in GENERATORS}
M_GENERATORS = ("g0", "g2", "g4", "g6")
M_DEGREES = {g: int(g[1:]) for g in M_GENERATORS}
# truncation ideal of the polynomial coalgebra; no generator has degree >= 16 so it never bites
T1_CAP, T2_CAP = 8, 4


def mono_degree(m: Mono) -> int:
    return sum(e * d for e, d in zip(m, T_DEGREES))


def mono_str(m: Mono) -> str:
    if m == UNIT:
        return "1"
    out = ""
    for name, e in (("v2", m[2]), ("t1", m[0]), ("t2", m[1])):
        if e:
            out += name if e == 1 else f"{name}^{e}"
    return out


def parse_mono(text: str) -> Mono:
    text = text.strip()
    if text == "1":
        return UNIT
    exps = {"t1": 0, "t2": 0, "v2": 0}
    i = 0
    while i < len(text):
        name = text[i:i + 2]
        if name not in exps:
            raise ValueError(f"bad monomial {text!r}")
        i += 2
        e = 1
        if i < len(text) and text[i] == "^":
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            e = int(text[i + 1:j])
            i = j
        exps[name] += e
    return (exps["t1"], exps["t2"], exps["v2"])


def mono_mul(a: Mono, b: Mono) -> Mono:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def monomials_of_degree(d: int) -> List[Mono]:
    out = []
    for e2 in range(d // 6 + 1):
        for ev in range((d - 6 * e2) // 6 + 1):
            rest = d - 6 * e2 - 6 * ev
            if rest % 2 == 0:
                out.append((rest // 2, e2, ev))
    return sorted(out)


def parse_row(text: str) -> Dict[Key, Poly4]:
    """Parse 'mono|gen + mono|gen' with optional parenthesized sums of monomials."""
    row: Dict[Key, Poly4] = {}
    depth, start, parts = 0, 0, []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    for part in parts:
        left, gen = part.split("|")
        left = left.strip().strip("()")
        for m in left.split("+"):
            key = (parse_mono(m), gen.strip())
            row[key] = row.get(key, Poly4()) + Poly4.one()
    return {k: v for k, v in row.items() if v}


@dataclass
class ComoduleStructure:
    """A left coaction psi(g) = sum c * mono | h on named generators with even degrees."""

    generators: Tuple[str, ...]
    degrees: Dict[str, int]
    coaction: Dict[str, Table]
    params: Optional[Tuple[int, int]] = None

    def row(self, g: str) -> Table:
        return self.coaction.get(g, {})

    def unknowns(self) -> Tuple[str, ...]:
        names = set()
        for row in self.coaction.values():
            for c in row.values():
                names.update(c.indeterminates)
        return tuple(sorted(names))

    def substitute(self, values: Mapping[str, object]) -> "ComoduleStructure":
        out = {}
        for g, row in self.coaction.items():
            new = {}
            for key, c in row.items():
                c2 = c.subs(values)
                if c2:
                    new[key] = c2
            out[g] = new
        return ComoduleStructure(self.generators, dict(self.degrees), out, self.params)

    def flipped(self, g: str, key: Key) -> "ComoduleStructure":
        out = {h: dict(r) for h, r in self.coaction.items()}
        row = out.setdefault(g, {})
        c = row.get(key, Poly4()) + Poly4.one()
        if c:
            row[key] = c
        else:
            row.pop(key, None)
        return ComoduleStructure(self.generators, dict(self.degrees), out, self.params)

    def is_homogeneous(self) -> bool:
        return all(mono_degree(m) + self.degrees[h] == self.degrees[g]
                   for g, row in self.coaction.items() for (m, h) in row)

    def format_row(self, g: str) -> str:
        return format_table(self.row(g), self.generators)

    def to_json(self) -> Dict[str, object]:
        return {
            "params": list(self.params) if self.params is not None else None,
            "coaction": {g: [{"mono": mono_str(m), "target": h, "coeff": str(c)}
                             for (m, h), c in _ordered(self.row(g), self.generators)]
                         for g in self.generators},
        }

    def __eq__(self, other):
        if not isinstance(other, ComoduleStructure):
            return NotImplemented
        return self.generators == other.generators and all(
            self.row(g) == other.row(g) for g in self.generators)


def _ordered(row: Table, gens: Sequence[str]):
    order = {g: i for i, g in enumerate(gens)}
    return sorted(row.items(), key=lambda kv: (order[kv[0][1]], kv[0][0]))


def format_table(row: Table, gens: Sequence[str]) -> str:
    by_target: Dict[str, List[str]] = {}
    for (m, h), c in _ordered(row, gens):
        coeff = "" if c == Poly4.one() else f"[{c}]"
        by_target.setdefault(h, []).append(coeff + mono_str(m))
    parts = []
    for h, ms in by_target.items():
        left = ms[0] if len(ms) == 1 else "(" + " + ".join(ms) + ")"
        parts.append(f"{left}|{h}")
    return " + ".join(parts) if parts else "0"


def structure_from_rows(rows: Mapping[str, str], gens=GENERATORS, degrees=None, params=None) -> ComoduleStructure:
    return ComoduleStructure(tuple(gens), dict(degrees or DEGREES),
                             {g: parse_row(rows[g]) for g in gens}, params)


# ---------------------------------------------------------------- Hopf data

class HopfData:
    """Coproducts mod (2, v1); v2 is primitive and central since eta_R(v2) = v2 mod (2, v1)."""

    @staticmethod
    def delta_generator(i: int) -> Dict[Tuple[Mono, Mono], int]:
        if i == 1:
            return {((1, 0, 0), UNIT): 1, (UNIT, (1, 0, 0)): 1}
        if i == 2:
            return {((0, 1, 0), UNIT): 1, ((1, 0, 0), (2, 0, 0)): 1, (UNIT, (0, 1, 0)): 1}
        raise ValueError("only t1 and t2 are modeled")

    @classmethod
    def delta(cls, m: Mono) -> Dict[Tuple[Mono, Mono], int]:
        """Coproduct of t1^e1 t2^e2 (v2 factors are handled by the caller)."""
        out = {(UNIT, UNIT): 1}
        for i, e in ((1, m[0]), (2, m[1])):
            for _ in range(e):
                out = _tensor_mul(out, cls.delta_generator(i))
        return out

    @classmethod
    def coassociative(cls) -> bool:
        for i in (1, 2):
            left: Dict[Tuple[Mono, Mono, Mono], int] = {}
            right: Dict[Tuple[Mono, Mono, Mono], int] = {}
            for (a, b), c in cls.delta_generator(i).items():
                for (a1, a2), c1 in cls.delta(a).items():
                    key = (a1, a2, b)
                    left[key] = (left.get(key, 0) + c * c1) % 2
                for (b1, b2), c2 in cls.delta(b).items():
                    key = (a, b1, b2)
                    right[key] = (right.get(key, 0) + c * c2) % 2
            if {k for k, v in left.items() if v} != {k for k, v in right.items() if v}:
                return False
        return True


def _tensor_mul(x, y):
    out = {}
    for (a1, a2), c1 in x.items():
        for (b1, b2), c2 in y.items():
            key = (mono_mul(a1, b1), mono_mul(a2, b2))
            out[key] = (out.get(key, 0) + c1 * c2) % 2
    return {k: v for k, v in out.items() if v}


# ------------------------------------------------------------- checks

def counit_image(psi: ComoduleStructure, g: str) -> Dict[Tuple[int, str], Poly4]:
    """(eps x id) psi(g): keep t-free terms; v2 survives as a scalar of BP_*."""
    out: Dict[Tuple[int, str], Poly4] = {}
    for (m, h), c in psi.row(g).items():
        if m[0] == 0 and m[1] == 0:
            key = (m[2], h)
            out[key] = out.get(key, Poly4()) + c
    return {k: v for k, v in out.items() if v}


def counit_equations(psi: ComoduleStructure) -> List[Tuple[str, Poly4]]:
    eqs = []
    for g in psi.generators:
        img = counit_image(psi, g)
        target = dict(img)
        target[(0, g)] = target.get((0, g), Poly4()) + Poly4.one()
        for key, c in sorted(target.items()):
            if c:
                eqs.append((g, c))
    return eqs


def check_counit(psi: ComoduleStructure) -> bool:
    return not counit_equations(psi)


class TruncationError(AssertionError):
    """A monomial outside the retained range appeared during expansion."""


def _coassoc_difference(psi: ComoduleStructure, g: str) -> Dict[Tuple[Mono, Mono, str], Poly4]:
    diff: Dict[Tuple[Mono, Mono, str], Poly4] = {}

    def add(key, c):
        if key[0][0] >= T1_CAP or key[1][0] >= T1_CAP or key[0][1] >= T2_CAP or key[1][1] >= T2_CAP:
            raise TruncationError(f"term {key} would be discarded by the truncation ideal")
        diff[key] = diff.get(key, Poly4()) + c

    for (m, h), c in psi.row(g).items():
        # (Delta x id): v2 is primitive and central, gather it on the left factor
        for (a, b), n in HopfData.delta((m[0], m[1], 0)).items():
            if n:
                add(((a[0], a[1], m[2]), b, h), c)
        # (id x psi)
        for (m2, h2), c2 in psi.row(h).items():
            add(((m[0], m[1], m[2] + m2[2]), (m2[0], m2[1], 0), h2), c * c2)
    return {k: v for k, v in diff.items() if v}


@dataclass
class CoassocResult:
    ok: bool
    failing: Optional[str] = None

    def __bool__(self):
        return self.ok


def coassoc_equations(psi: ComoduleStructure, g: str) -> List[Poly4]:
    diff = _coassoc_difference(psi, g)
    return [diff[k] for k in sorted(diff)]


def check_coassoc(psi: ComoduleStructure) -> CoassocResult:
    for g in psi.generators:
        if coassoc_equations(psi, g):
            return CoassocResult(False, g)
    return CoassocResult(True)


# ------------------------------------------------------------- input data

# coaction of the dual of A(2) on H_*Z; keys are (xi1 exponent, xi2 exponent) on both sides
A2_COACTION_TEXT = {
    (0, 0): "1|0,0",
    (2, 0): "2,0|0,0 + 0,0|2,0",
    (4, 0): "4,0|0,0 + 0,0|4,0",
    (6, 0): "6,0|0,0 + 4,0|2,0 + 2,0|4,0 + 0,0|6,0",
    (0, 2): "0,2|0,0 + 4,0|2,0 + 0,0|0,2",
    (2, 2): "2,2|0,0 + 6,0|2,0 + 0,2|2,0 + 2,0|0,2 + 4,0|4,0 + 0,0|2,2",
    (4, 2): "4,2|0,0 + 8,0|2,0 + 4,0|0,2 + 0,2|4,0 + 4,0|6,0 + 0,0|4,2",
    (6, 2): "6,2|0,0 + 4,2|2,0 + 10,0|2,0 + 2,2|4,0 + 8,0|4,0 + 6,0|0,2 + 0,2|6,0 + 6,0|6,0"
            " + 4,0|2,2 + 2,0|4,2 + 0,0|6,2",
}


def a2_coaction() -> Dict[Tuple[int, int], Dict[Tuple[Tuple[int, int], Tuple[int, int]], int]]:
    out = {}
    for src, text in A2_COACTION_TEXT.items():
        row: Dict = {}
        for part in text.split("+"):
            left, right = part.strip().split("|")
            lk = (0, 0) if left == "1" else tuple(int(v) for v in left.split(","))
            rk = tuple(int(v) for v in right.split(","))
            row[(lk, rk)] = row.get((lk, rk), 0) ^ 1
        out[src] = {k: v for k, v in row.items() if v}
    return out


GEN_TO_HOMOLOGY = {"x0": (0, 0), "x2": (2, 0), "x4": (4, 0), "x6": (6, 0),
                   "y6": (0, 2), "y8": (2, 2), "y10": (4, 2), "y12": (6, 2)}

# reduction of the coaction modulo (v2, t1^4, t2^2), as recorded for comparison
MOD_SMALL_TEXT = {
    "x0": "1|x0",
    "x2": "t1|x0 + 1|x2",
    "x4": "t1^2|x0 + 1|x4",
    "x6": "t1^3|x0 + t1^2|x2 + t1|x4 + 1|x6",
    "y6": "(t2 + t1^3)|x0 + t1^2|x2 + 1|y6",
    "y8": "t1t2|x0 + t2|x2 + t1^2|x4 + t1|y6 + 1|y8",
    "y10": "t1^2t2|x0 + (t1^3 + t2)|x4 + t1^2|x6 + t1^2|y6 + 1|y10",
    "y12": "t1^3t2|x0 + t1^2t2|x2 + t1t2|x4 + t2|x6 + t1^3|y6 + t1^2|y8 + t1|y10 + 1|y12",
}

M_STAR_TEXT = {
    "g0": "1|g0",
    "g2": "t1|g0 + 1|g2",
    "g4": "t1^2|g0 + 1|g4",
    "g6": "t1^3|g0 + t1^2|g2 + t1|g4 + 1|g6",
}


def mod_small_reference() -> Dict[str, Table]:
    return {g: parse_row(MOD_SMALL_TEXT[g]) for g in GENERATORS}


def m_star() -> ComoduleStructure:
    return structure_from_rows(M_STAR_TEXT, M_GENERATORS, M_DEGREES)


def four_structures_reference(a: int, b: int) -> ComoduleStructure:
    """The reference family of four coactions with (a, b) substituted."""
    rows = dict(MOD_SMALL_TEXT)
    rows["y8"] = ("t1^4|x0" if a else "") + " + t1t2|x0 + t2|x2 + t1^2|x4 + t1|y6 + 1|y8"
    rows["y10"] = "(t1^5 + t1^2t2)|x0 + t1^4|x2 + (t1^3 + t2)|x4 + t1^2|x6 + t1^2|y6 + 1|y10"
    y12_x0 = ["t1^3t2"] + (["t1^6"] if (b + 1) % 2 else []) + (["t2^2"] if (a + b) % 2 else [])
    y12_x4 = ["t1t2"] + (["t1^4"] if b else [])
    rows["y12"] = (f"({' + '.join(y12_x0)})|x0 + t1^2t2|x2 + ({' + '.join(y12_x4)})|x4 + t2|x6"
                   " + t1^3|y6 + t1^2|y8 + t1|y10 + 1|y12")
    rows = {g: r.strip().lstrip("+ ").strip() for g, r in rows.items()}
    return structure_from_rows(rows, params=(a, b))


# ------------------------------------------------------------- reductions

def in_small_ideal(m: Mono) -> bool:
    return m[2] > 0 or m[0] >= 4 or m[1] >= 2


def reduce_mod_small(psi: ComoduleStructure) -> Dict[str, Table]:
    return {g: {k: c for k, c in psi.row(g).items() if not in_small_ideal(k[0])} for g in psi.generators}


def _xi_image(m: Mono) -> Dict[Tuple[int, int], int]:
    """t1 -> xi1^2, t2 -> xi2^2 + xi1^6, v2 -> 0."""
    if m[2]:
        return {}
    out = {(0, 0): 1}
    for factor, e in (({(2, 0): 1}, m[0]), ({(0, 2): 1, (6, 0): 1}, m[1])):
        for _ in range(e):
            nxt: Dict[Tuple[int, int], int] = {}
            for (p, q), c in out.items():
                for (r, s), d in factor.items():
                    key = (p + r, q + s)
                    nxt[key] = nxt.get(key, 0) ^ (c & d)
            out = {k: v for k, v in nxt.items() if v}
    return out


def _a2_truncate(d: Mapping) -> Dict:
    return {k: v for k, v in d.items() if v and k[0][0] < 8 and k[0][1] < 4}


def steenrod_double_image(psi: ComoduleStructure, truncate: bool = True) -> Dict[Tuple[int, int], Dict]:
    """Image of the coaction in A(2)_* (x) H_*Z under the doubling map, keyed by homology class."""
    names = GEN_TO_HOMOLOGY if psi.generators == GENERATORS else {
        g: (DEGREES_M_TO_XI[g], 0) for g in psi.generators}
    out = {}
    for g in psi.generators:
        row: Dict = {}
        for (m, h), c in psi.row(g).items():
            if not c.is_constant():
                raise ValueError("doubling check needs a concrete structure")
            if c.constant().is_zero():
                continue
            for xi, n in _xi_image(m).items():
                key = (xi, names[h])
                row[key] = row.get(key, 0) ^ n
        row = {k: v for k, v in row.items() if v}
        out[names[g]] = _a2_truncate(row) if truncate else row
    return out


DEGREES_M_TO_XI = {"g0": 0, "g2": 2, "g4": 4, "g6": 6}


def steenrod_double_check(psi: ComoduleStructure) -> bool:
    image = steenrod_double_image(psi)
    ref = a2_coaction()
    return all(image[src] == _a2_truncate(ref[src]) for src in image)


def exact_sequence_check(psi: ComoduleStructure) -> bool:
    """iota(g_i) = x_i and tau(y_i) = Sigma^6 g_{i-6}, tau(x_i) = 0 are comodule maps."""
    m = m_star()
    iota = {"g0": "x0", "g2": "x2", "g4": "x4", "g6": "x6"}
    tau = {"y6": "g0", "y8": "g2", "y10": "g4", "y12": "g6"}
    for g, x in iota.items():
        # psi(iota g) = (id x iota) psi_M(g)
        if psi.row(x) != {(mm, iota[h]): c for (mm, h), c in m.row(g).items()}:
            return False
    for gen in psi.generators:
        pushed: Table = {}
        for (mm, h), c in psi.row(gen).items():
            if h in tau:
                key = (mm, tau[h])
                pushed[key] = pushed.get(key, Poly4()) + c
        pushed = {k: v for k, v in pushed.items() if v}
        expected = m.row(tau[gen]) if gen in tau else {}
        if pushed != expected:
            return False
    return True


# ------------------------------------------------------------- solver

def slot_name(g: str, m: Mono, h: str) -> str:
    return f"{g}[{mono_str(m)}|{h}]"


def homogeneous_slots(gens=GENERATORS, degrees=None) -> List[Tuple[str, Mono, str]]:
    degrees = degrees or DEGREES
    out = []
    for g in gens:
        for h in gens:
            d = degrees[g] - degrees[h]
            if d < 0:
                continue
            for m in monomials_of_degree(d):
                out.append((g, m, h))
    return out


def build_ansatz() -> ComoduleStructure:
    """Known part from the reduction mod (v2, t1^4, t2^2); an unknown F2 coefficient on every
    degree-homogeneous slot inside that ideal (excluding the forced identity terms)."""
    known = mod_small_reference()
    coaction: Dict[str, Table] = {g: dict(known[g]) for g in GENERATORS}
    for g, m, h in homogeneous_slots():
        if in_small_ideal(m):
            coaction[g][(m, h)] = Poly4.var(slot_name(g, m, h))
    return ComoduleStructure(GENERATORS, dict(DEGREES), coaction)


@dataclass
class BasisChange:
    """psi(g') with g' = g + sum coeff * v2^power * h for each listed g."""

    shifts: Dict[str, List[Tuple[Poly4, int, str]]]

    def describe(self) -> Dict[str, str]:
        return {g: " + ".join(f"({c}){'v2' if p == 1 else f'v2^{p}'}{h}" for c, p, h in terms)
                for g, terms in self.shifts.items()}


def _row_add(dst: Table, src: Mapping[Key, Poly4], coeff: Poly4, v2: int):
    for (m, h), c in src.items():
        key = ((m[0], m[1], m[2] + v2), h)
        dst[key] = dst.get(key, Poly4()) + coeff * c


def apply_basis_change(psi: ComoduleStructure, change: BasisChange) -> ComoduleStructure:
    gens = psi.generators
    # old generators in terms of new: e = sum_k (-N)^k e' with N nilpotent (v2-divisible)
    expansion: Dict[str, Table] = {g: {(UNIT, g): Poly4.one()} for g in gens}
    for g in gens:
        layer: Table = {(UNIT, g): Poly4.one()}
        for _ in range(len(gens)):
            nxt: Table = {}
            for (m, h), c in layer.items():
                for coeff, p, j in change.shifts.get(h, []):
                    key = ((m[0], m[1], m[2] + p), j)
                    nxt[key] = nxt.get(key, Poly4()) + c * coeff
            layer = {k: v for k, v in nxt.items() if v}
            if not layer:
                break
            for k, v in layer.items():
                expansion[g][k] = expansion[g].get(k, Poly4()) + v
        else:
            raise ValueError("basis change is not unipotent")
    out: Dict[str, Table] = {}
    for g in gens:
        row: Table = dict(psi.row(g))
        for coeff, p, h in change.shifts.get(g, []):
            _row_add(row, psi.row(h), coeff, p)
        new: Table = {}
        for (m, h), c in row.items():
            for (m2, j), c2 in expansion[h].items():
                key = ((m[0], m[1], m[2] + m2[2]), j)
                new[key] = new.get(key, Poly4()) + c * c2
        out[g] = {k: v for k, v in new.items() if v}
    return ComoduleStructure(gens, dict(psi.degrees), out, psi.params)


def derive_basis_change(psi: ComoduleStructure, bottom: str = "x0") -> BasisChange:
    """Choose v2-shifts g' = g + sum c_h v2 h cancelling every v2-divisible term on the bottom cell.

    Shifts are sought among generators h of degree deg(g) - 6 whose own bottom-cell row has
    constant coefficients; the resulting triangular system is solved over F2.
    """
    shifts: Dict[str, List[Tuple[Poly4, int, str]]] = {}
    for g in psi.generators:
        targets = {m: c for (m, h), c in psi.row(g).items() if h == bottom and m[2] == 1}
        if not targets:
            continue
        cands = [h for h in psi.generators if psi.degrees[h] == psi.degrees[g] - 6]
        rows = {}
        for h in cands:
            vec = {}
            for (m, j), c in psi.row(h).items():
                if j == bottom and m[2] == 0:
                    if not c.is_constant():
                        raise ValueError(f"non-constant bottom row for {h}")
                    vec[(m[0], m[1], 1)] = c.constant()
            rows[h] = vec
        monos = sorted(set(targets) | {m for v in rows.values() for m in v})
        # solve sum_h c_h rows[h][m] = targets[m] by elimination on constant matrices
        system = [([rows[h].get(m, 0) for h in cands], targets.get(m, Poly4())) for m in monos]
        sol = _solve_constant_system(system, len(cands))
        shifts[g] = [(sol[i], 1, h) for i, h in enumerate(cands) if sol[i]]
    return BasisChange(shifts)


def _solve_constant_system(system, n):
    """Solve A c = rhs with constant F2 matrix A and Poly4 right-hand sides."""
    rows = [([int(bool(v)) for v in a], r) for a, r in system]
    sol = [Poly4() for _ in range(n)]
    pivots = []
    r = 0
    for col in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][0][col]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][0][col]:
                rows[i] = ([x ^ y for x, y in zip(rows[i][0], rows[r][0])], rows[i][1] + rows[r][1])
        pivots.append(col)
        r += 1
    for a, rhs in rows[r:]:
        if rhs:
            raise ValueError("basis change system is inconsistent")
    for i, col in enumerate(pivots):
        sol[col] = rows[i][1]
    return sol


class InconsistentSystem(ArithmeticError):
    pass


class F2LinearSystem:
    """Affine equations over F2 in named unknowns, eliminated in a fixed column order."""

    def __init__(self, order: Sequence[str]):
        self.order = list(order)
        self.index = {v: i for i, v in enumerate(self.order)}
        self.rows: Dict[int, int] = {}  # pivot column -> bitmask (bit len(order) = constant)

    def _mask(self, p: Poly4) -> int:
        coeffs, const = p.linear_part()
        mask = 0
        for v, c in coeffs.items():
            if c.value not in (0, 1):
                raise ValueError("F2 system received an F4 coefficient")
            if v not in self.index:
                raise ValueError(f"undeclared unknown {v}")
            mask |= c.value << self.index[v]
        if const.value not in (0, 1):
            raise ValueError("F2 system received an F4 constant")
        return mask | (const.value << len(self.order))

    def _reduce(self, mask: int) -> int:
        for col in sorted(self.rows):
            if mask >> col & 1:
                mask ^= self.rows[col]
        return mask

    def add(self, p: Poly4) -> bool:
        """Insert an equation p = 0; returns True when it was new information."""
        mask = self._reduce(self._mask(p))
        var_bits = mask & ((1 << len(self.order)) - 1)
        if var_bits == 0:
            if mask:
                raise InconsistentSystem(f"equation {p} = 0 contradicts earlier ones")
            return False
        col = (var_bits & -var_bits).bit_length() - 1
        for c in list(self.rows):
            if self.rows[c] >> col & 1:
                self.rows[c] ^= mask
        self.rows[col] = mask
        return True

    def pivot_values(self) -> Dict[str, Poly4]:
        """Each pivot unknown expressed through the free ones."""
        out = {}
        n = len(self.order)
        for col, mask in self.rows.items():
            expr = Poly4.const(mask >> n & 1)
            for j in range(n):
                if j != col and mask >> j & 1:
                    expr = expr + Poly4.var(self.order[j])
            out[self.order[col]] = expr
        return out

    def free(self) -> List[str]:
        return [v for i, v in enumerate(self.order) if i not in self.rows]

    def relations(self) -> List[str]:
        n = len(self.order)
        out = []
        for col in sorted(self.rows):
            mask = self.rows[col]
            names = [self.order[j] for j in range(n) if mask >> j & 1]
            out.append(" + ".join(names) + f" = {mask >> n & 1}")
        return out


def relations_of(equations: Sequence[Poly4], order: Sequence[str]) -> List[str]:
    sys = F2LinearSystem(order)
    for e in equations:
        sys.add(e)
    return sys.relations()


@dataclass
class SolveTrace:
    unknowns: List[str]
    counit_relations: List[str]
    basis_change: Dict[str, str]
    coassoc_relations: Dict[str, List[str]]
    free: List[str]
    discarded_terms: int = 0


# unknowns kept free so that they become the family parameters
PARAM_A = slot_name("y8", (4, 0, 0), "x0")
PARAM_B = slot_name("y12", (6, 0, 0), "x0")


def solve_comodule_family(with_trace: bool = False):
    ansatz = build_ansatz()
    unknowns = [u for u in ansatz.unknowns() if u not in (PARAM_A, PARAM_B)] + [PARAM_A, PARAM_B]
    # counit: linear conditions on the t-free slots
    counit = F2LinearSystem(unknowns)
    for _, eq in counit_equations(ansatz):
        counit.add(eq)
    psi = ansatz.substitute(counit.pivot_values())
    change = derive_basis_change(psi)
    psi = apply_basis_change(psi, change)
    if not check_counit(psi):
        raise InconsistentSystem("basis change broke counitality")
    system = F2LinearSystem(unknowns)
    for r in counit.rows.values():
        system.rows[(r & -r).bit_length() - 1] = r
    per_gen: Dict[str, List[str]] = {}
    for g in psi.generators:
        eqs = coassoc_equations(psi, g)
        if eqs:
            for e in eqs:
                system.add(e)
        per_gen[g] = relations_of(eqs, unknowns)
    general = psi.substitute(system.pivot_values())
    params = [v for v in general.unknowns()]
    if sorted(params) != sorted([PARAM_A, PARAM_B]):
        raise InconsistentSystem(f"unexpected free parameters {params}")
    family = {}
    for mu8, mu12 in product((0, 1), repeat=2):
        s = general.substitute({PARAM_A: mu8, PARAM_B: mu12})
        a, b = mu8, (mu12 + 1) % 2
        s.params = (a, b)
        family[(a, b)] = s
    if with_trace:
        trace = SolveTrace(unknowns=list(ansatz.unknowns()), counit_relations=counit.relations(),
                           basis_change=change.describe(), coassoc_relations=per_gen,
                           free=system.free())
        return family, trace, general
    return family


def family_to_json(family: Mapping[Tuple[int, int], ComoduleStructure]) -> str:
    return json.dumps({f"{a},{b}": s.to_json() for (a, b), s in sorted(family.items())},
                      sort_keys=True, indent=1)


def family_to_text(family: Mapping[Tuple[int, int], ComoduleStructure]) -> str:
    lines = []
    for (a, b), s in sorted(family.items()):
        lines.append(f"(a, b) = ({a}, {b})")
        for g in s.generators:
            lines.append(f"  psi({g}) = {s.format_row(g)}")
    return "\n".join(lines)
