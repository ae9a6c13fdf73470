"""Finite group cohomology over F4, Sylow reductions, the K1 ring, and the two routes to H*(S2^1; E_*Z)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import action, stabilizer
from .action import FiniteGroup, GModuleSpec
from .core_algebra import (F4Scalar, ONE, OMEGA, ZERO, f4_colspace_contains, f4_det, f4_frobenius,
                           f4_identity, f4_matmul, f4_nullspace, f4_rank, f4_rref, f4_scale)
from .stabilizer import O2Element, o2_mul

INTERNAL_DEGREES = (0, 2, 4)  # even internal degrees mod 6; odd degrees vanish
PERIOD = 6
BAR_SIZE_LIMIT = 60000


class GroupTooLarge(ValueError):
    pass


class ConcentrationError(ArithmeticError):
    """Higher cohomology of the Sylow subgroup is nonzero, so the invariant shortcut does not apply."""


class RouteDisagreement(AssertionError):
    pass


# ------------------------------------------------------------ modules

@dataclass
class FGModule:
    group: FiniteGroup
    dim: int
    mats: Dict[str, np.ndarray]

    def validate(self) -> bool:
        eye = f4_identity(self.dim)
        if not np.array_equal(self.mats[self.group.identity], eye):
            return False
        return all(np.array_equal(self.mats[self.group.mul(g, h)], f4_matmul(self.mats[g], self.mats[h]))
                   for g in self.group.elements for h in self.group.elements)

    def restrict(self, sub: FiniteGroup) -> "FGModule":
        return FGModule(sub, self.dim, {g: self.mats[g] for g in sub.elements})


def trivial_module(group: FiniteGroup, dim: int = 1) -> FGModule:
    return FGModule(group, dim, {g: f4_identity(dim) for g in group.elements})


def regular_permutation(group: FiniteGroup, g: str) -> np.ndarray:
    """Left multiplication by g on F4[G] in the basis of group elements."""
    idx = {h: n for n, h in enumerate(group.elements)}
    n = group.order
    m = np.zeros((n, n), dtype=np.uint8)
    for h in group.elements:
        m[idx[group.mul(g, h)], idx[h]] = 1
    return m


def regular_module(group: FiniteGroup) -> FGModule:
    return FGModule(group, group.order, {g: regular_permutation(group, g) for g in group.elements})


def tensor_module(m1: FGModule, m2: FGModule) -> FGModule:
    return FGModule(m1.group, m1.dim * m2.dim, {g: _kron(m1.mats[g], m2.mats[g]) for g in m1.group.elements})


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=np.uint8)
    for r in range(a.shape[0]):
        for c in range(a.shape[1]):
            if a[r, c]:
                out[r * b.shape[0]:(r + 1) * b.shape[0], c * b.shape[1]:(c + 1) * b.shape[1]] = f4_scale(a[r, c], b)
    return out


def coset_representatives(group: FiniteGroup, sub: FiniteGroup) -> List[str]:
    reps, seen = [], set()
    for g in group.elements:
        if g in seen:
            continue
        reps.append(g)
        seen.update(group.mul(g, h) for h in sub.elements)
    return reps


def induced_module(group: FiniteGroup, sub: FiniteGroup, m: FGModule) -> FGModule:
    """F4[G] tensored over F4[H] with M, in the basis g_i (x) m for left coset representatives g_i."""
    reps = coset_representatives(group, sub)
    where = {}
    for n, r in enumerate(reps):
        for h in sub.elements:
            where[group.mul(r, h)] = (n, h)
    d = m.dim
    mats = {}
    for g in group.elements:
        mat = np.zeros((len(reps) * d, len(reps) * d), dtype=np.uint8)
        for n, r in enumerate(reps):
            tgt, h = where[group.mul(g, r)]
            mat[tgt * d:(tgt + 1) * d, n * d:(n + 1) * d] = m.mats[h]
        mats[g] = mat
    return FGModule(group, len(reps) * d, mats)


def fixed_submodule(m: FGModule) -> np.ndarray:
    return action.fixed_points(m.mats.values(), m.dim)


# ------------------------------------------------------------ free resolutions

@dataclass
class FreeResolution:
    """P_p = F4[G]^(ranks[p]); boundaries[p] is the matrix of P_p -> P_{p-1} (p >= 1)."""

    group: FiniteGroup
    ranks: List[int]
    boundaries: Dict[int, np.ndarray]

    def is_exact(self) -> bool:
        n = self.group.order
        aug = np.ones((1, n), dtype=np.uint8)
        prev = aug
        for p in range(1, len(self.ranks)):
            d = self.boundaries[p]
            if f4_matmul(prev, d).any():
                return False
            ker = self.ranks[p - 1] * n - f4_rank(prev)
            if f4_rank(d) != ker:
                return False
            prev = d
        return True


def _act_on_free(group: FiniteGroup, rank: int, g: str, v: np.ndarray) -> np.ndarray:
    perm = regular_permutation(group, g)
    n = group.order
    out = np.zeros_like(v)
    for k in range(rank):
        out[k * n:(k + 1) * n] = f4_matmul(perm, v[k * n:(k + 1) * n])
    return out


def _is_two_group(group: FiniteGroup) -> bool:
    n = group.order
    return n & (n - 1) == 0


def _minimal_generators(group: FiniteGroup, rank: int, kernel: np.ndarray) -> List[np.ndarray]:
    """For a 2-group: lifts of a basis of K / I K, I the augmentation ideal; these generate minimally."""
    moved = [_act_on_free(group, rank, g, kernel) ^ kernel for g in group.elements if g != group.identity]
    ik = np.concatenate(moved, axis=1) if moved else np.zeros((kernel.shape[0], 0), dtype=np.uint8)
    span = ik
    gens = []
    for col in range(kernel.shape[1]):
        v = kernel[:, col:col + 1]
        if span.shape[1] and f4_colspace_contains(span, v):
            continue
        gens.append(v)
        span = np.concatenate([span, v], axis=1)
    return gens


def _generators_of(group: FiniteGroup, rank: int, kernel: np.ndarray) -> List[np.ndarray]:
    """F4[G]-generators of the submodule spanned by the kernel columns (minimal for 2-groups)."""
    if _is_two_group(group):
        return _minimal_generators(group, rank, kernel)
    target = f4_rank(kernel)
    gens: List[np.ndarray] = []
    span = np.zeros((kernel.shape[0], 0), dtype=np.uint8)
    for col in range(kernel.shape[1]):
        if span.shape[1] and f4_rank(span) == target:
            break
        v = kernel[:, col:col + 1]
        if span.shape[1] and f4_colspace_contains(span, v):
            continue
        gens.append(v)
        orbit = [_act_on_free(group, rank, g, v) for g in group.elements]
        span = np.concatenate([span] + orbit, axis=1)
        r, piv = f4_rref(span.T)
        span = r[:len(piv)].T.copy()
    return gens


@lru_cache(maxsize=32)
def _resolution_cached(group_key, length: int):
    group = _GROUPS[group_key]
    n = group.order
    ranks = [1]
    boundaries = {}
    prev = np.ones((1, n), dtype=np.uint8)
    for p in range(1, length + 1):
        kernel = f4_nullspace(prev)
        gens = _generators_of(group, ranks[-1], kernel)
        cols = []
        for v in gens:
            for g in group.elements:
                cols.append(_act_on_free(group, ranks[-1], g, v))
        d = np.concatenate(cols, axis=1) if cols else np.zeros((ranks[-1] * n, 0), dtype=np.uint8)
        ranks.append(len(gens))
        boundaries[p] = d
        prev = d
    return FreeResolution(group, ranks, boundaries)


_GROUPS: Dict[Tuple, FiniteGroup] = {}


def _group_key(group: FiniteGroup) -> Tuple:
    key = (group.elements, tuple(sorted(group.table.items())))
    _GROUPS.setdefault(key, group)
    return key


def free_resolution(group: FiniteGroup, length: int) -> FreeResolution:
    return _resolution_cached(_group_key(group), length)


# ------------------------------------------------------------ cohomology

@dataclass
class CohomologyResult:
    dims: Dict[Tuple[int, int], int]
    cocycles: Optional[Dict[Tuple[int, int], np.ndarray]] = None
    cochain_dims: Dict[int, int] = field(default_factory=dict)
    coboundary_ranks: Dict[int, int] = field(default_factory=dict)
    labels: Dict[Tuple[int, int], List[str]] = field(default_factory=dict)

    def by_degree(self, p: int) -> Dict[int, int]:
        return {t: d for (q, t), d in sorted(self.dims.items()) if q == p}

    def rank(self, p: int) -> int:
        return sum(d for (q, _), d in self.dims.items() if q == p)

    def table(self) -> List[Dict[str, int]]:
        return [{"p": p, "t_mod_6": t, "dim": d} for (p, t), d in sorted(self.dims.items())]


def _resolution_cochains(m: FGModule, p_max: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    res = free_resolution(m.group, p_max + 1)
    n = m.group.order
    d = m.dim
    dims, ranks = {}, {}
    for p in range(p_max + 2):
        dims[p] = res.ranks[p] * d
    for p in range(p_max + 1):
        bd = res.boundaries[p + 1]  # P_{p+1} -> P_p
        delta = np.zeros((res.ranks[p + 1] * d, res.ranks[p] * d), dtype=np.uint8)
        for l in range(res.ranks[p + 1]):
            col = bd[:, l * n]  # image of the generator e_l
            for k in range(res.ranks[p]):
                block = np.zeros((d, d), dtype=np.uint8)
                for hi, h in enumerate(m.group.elements):
                    c = col[k * n + hi]
                    if c:
                        block ^= f4_scale(c, m.mats[h])
                delta[l * d:(l + 1) * d, k * d:(k + 1) * d] = block
        ranks[p] = f4_rank(delta)
    return dims, ranks


def _bar_cochains(m: FGModule, p_max: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Standard inhomogeneous cochains C^p = Maps(G^p, M)."""
    els = m.group.elements
    n, d = len(els), m.dim
    if n ** (p_max + 1) * d > BAR_SIZE_LIMIT:
        raise GroupTooLarge(f"bar complex of size {n ** (p_max + 1) * d} exceeds the direct limit")
    idx = {g: i for i, g in enumerate(els)}
    dims, ranks = {}, {}
    for p in range(p_max + 2):
        dims[p] = n ** p * d
    for p in range(p_max + 1):
        rows, cols = n ** (p + 1) * d, n ** p * d
        delta = np.zeros((rows, cols), dtype=np.uint8)

        def index(tup):
            out = 0
            for g in tup:
                out = out * n + idx[g]
            return out

        for tup in product(els, repeat=p + 1):
            r0 = index(tup) * d
            # g1 f(g2, ..)
            c0 = index(tup[1:]) * d
            delta[r0:r0 + d, c0:c0 + d] ^= m.mats[tup[0]]
            for i in range(p):
                merged = tup[:i] + (m.group.mul(tup[i], tup[i + 1]),) + tup[i + 2:]
                c = index(merged) * d
                delta[r0:r0 + d, c:c + d] ^= f4_identity(d)
            c = index(tup[:p]) * d
            delta[r0:r0 + d, c:c + d] ^= f4_identity(d)
        ranks[p] = f4_rank(delta)
    return dims, ranks


def bar_cohomology(m: FGModule, p_max: int = 4, method: str = "resolution") -> CohomologyResult:
    """dims of H^p(G; M), p <= p_max, as a single internal degree 0 column.

    method "resolution" uses Hom_G(P_*, M) for a free resolution P_*; "bar" uses the standard
    inhomogeneous cochains directly and is limited to small cases.
    """
    if m.group.order > 8:
        raise GroupTooLarge("direct computation is limited to groups of order at most 8")
    return _cohomology(m, p_max, method)


def _cohomology(m: FGModule, p_max: int, method: str) -> CohomologyResult:
    if method == "resolution":
        dims, ranks = _resolution_cochains(m, p_max)
    elif method == "bar":
        dims, ranks = _bar_cochains(m, p_max)
    else:
        raise ValueError(f"unknown method {method}")
    out = {}
    for p in range(p_max + 1):
        prev = ranks[p - 1] if p > 0 else 0
        out[(p, 0)] = dims[p] - ranks[p] - prev
    return CohomologyResult(out, cochain_dims=dims, coboundary_ranks=ranks)


def group_cohomology(m: FGModule, p_max: int = 4) -> CohomologyResult:
    """Resolution route without the order restriction (used as an independent check)."""
    return _cohomology(m, p_max, "resolution")


def shapiro_check(group: FiniteGroup, sub_names: Sequence[str], m: FGModule, p_max: int = 3,
                  method: str = "resolution") -> bool:
    sub = group.subgroup(sub_names)
    if m.group.elements != sub.elements:
        m = FGModule(sub, m.dim, {g: m.mats[g] for g in sub.elements})
    ind = induced_module(group, sub, m)
    lhs = bar_cohomology(ind, p_max, method).by_degree
    rhs = bar_cohomology(m, p_max, method).by_degree
    return all(lhs(p) == rhs(p) for p in range(p_max + 1))


# ------------------------------------------------------------ E_*Z as modules

def q8_group() -> FiniteGroup:
    return action.quaternion_group()


def module_of_spec(spec: GModuleSpec) -> FGModule:
    return FGModule(spec.group, 8, spec.matrices())


def graded_module(group: FiniteGroup, elements: Mapping[str, O2Element], params: Tuple[int, int],
                  degree: int) -> FGModule:
    """E_degree Z = u^(-degree/2) E_0 Z for the group generated by the given units."""
    if degree % 2:
        return FGModule(group, 0, {g: np.zeros((0, 0), dtype=np.uint8) for g in group.elements})
    half = degree // 2
    mats = {}
    for n, x in elements.items():
        rep = action.group_action_matrix(x, params)
        scale = rep.u_twist ** (-half % 3)
        mats[n] = f4_scale(scale.value, rep.mat)
    return FGModule(group, 8, mats)


def _twisted_fixed(elements: Mapping[str, O2Element], basis_rows: np.ndarray, params, degree: int,
                   generators: Sequence[str]) -> np.ndarray:
    """Invariants of the given units inside the span of basis_rows, in internal degree `degree`."""
    half = degree // 2
    mats = []
    for name in generators:
        rep = action.group_action_matrix(elements[name], params)
        mats.append(f4_scale((rep.u_twist ** (-half % 3)).value, rep.mat))
    vecs = basis_rows.T
    if vecs.shape[1] == 0:
        return basis_rows
    # coordinates c with (g - 1) V c = 0 for all generators
    stacked = np.concatenate([f4_matmul(m ^ f4_identity(8), vecs) for m in mats], axis=0)
    ker = f4_nullspace(stacked)
    sol = f4_matmul(vecs, ker)
    if sol.shape[1] == 0:
        return np.zeros((0, 8), dtype=np.uint8)
    r, piv = f4_rref(sol.T)
    return r[:len(piv)]


def q8_cohomology(params: Tuple[int, int], p_max: int = 4, k: int = 8, method: str = "resolution") -> CohomologyResult:
    spec = action.q8_module(params, k)
    m = module_of_spec(spec)
    col = bar_cohomology(m, p_max, method)
    dims = {(p, t): col.dims[(p, 0)] for p in range(p_max + 1) for t in INTERNAL_DEGREES}
    fixed = action.fixed_points(spec.matrices().values())
    return CohomologyResult(dims, cocycles={(0, t): fixed for t in INTERNAL_DEGREES},
                            cochain_dims=col.cochain_dims, coboundary_ranks=col.coboundary_ranks)


def _sylow_route(sylow_module: FGModule, elements, params, p_max: int, normalizer: Sequence[str],
                 generator_of: str, prefix: str) -> CohomologyResult:
    col = bar_cohomology(sylow_module, p_max)
    higher = [p for p in range(1, p_max + 1) if col.dims[(p, 0)]]
    if higher:
        raise ConcentrationError(f"Sylow cohomology is nonzero in degrees {higher}")
    fixed = fixed_submodule(sylow_module)
    dims, cocycles, labels = {}, {}, {}
    for t in INTERNAL_DEGREES:
        inv = _twisted_fixed(elements, fixed, params, t, normalizer)
        dims[(0, t)] = inv.shape[0]
        cocycles[(0, t)] = inv
        labels[(0, t)] = action.basis_names(inv)
        for p in range(1, p_max + 1):
            dims[(p, t)] = 0
    return CohomologyResult(dims, cocycles, labels=labels)


def g24_cohomology(params: Tuple[int, int], p_max: int = 4, k: int = 8, conjugate: bool = False) -> CohomologyResult:
    """H^p(G24; E_t Z) = H^p(Q8; E_t Z)^{C3}; with `conjugate`, the same for pi G24 pi^-1."""
    els = action.g24_elements(k)
    if conjugate:
        _, pi = stabilizer.construct_alpha_pi(k)
        els = action.conjugate_elements(els, pi)
    q8 = {n: els[n] for n in action.Q8_NAMES}
    spec = action.module_from_elements(q8, params)
    return _sylow_route(module_of_spec(spec), els, params, p_max, ["w*1"], "w*1", "x0")


def c2_group() -> FiniteGroup:
    return action.quaternion_group().subgroup(["1", "-1"])


def c6_elements(k: int = 8) -> Dict[str, O2Element]:
    g24 = action.g24_elements(k)
    return {n: g24[n] for n in ("1", "-1", "w*1", "w*-1", "w2*1", "w2*-1")}


def c6_cohomology(params: Tuple[int, int], p_max: int = 4, k: int = 8) -> CohomologyResult:
    """H^q(C6; E_t Z) = H^q(C2; E_t Z)^{C3} with C2 generated by -1."""
    els = c6_elements(k)
    c2 = c2_group()
    mats = {n: action.group_action_matrix(els[n], params).mat for n in c2.elements}
    return _sylow_route(FGModule(c2, 8, mats), els, params, p_max, ["w*1"], "w*1", "x")


def direct_cohomology(group: FiniteGroup, elements: Mapping[str, O2Element], params, degree: int,
                      p_max: int = 2) -> Dict[int, int]:
    """Independent check: resolve over the whole group instead of passing to a Sylow subgroup."""
    res = group_cohomology(graded_module(group, elements, params, degree), p_max)
    return {p: res.dims[(p, 0)] for p in range(p_max + 1)}


# ------------------------------------------------------------ the K1 ring

K1_VARS = ("y0", "y1", "y2")
# rewriting rules y0^2 -> 0, y1^2 -> y0 y1, y2^2 -> y0 y2
_SQUARE_RULES = {0: (), 1: (0, 1), 2: (0, 2)}


def _reduce_monomial(mono: Tuple[int, ...]) -> Dict[Tuple[int, ...], int]:
    """Normal form of a product of variables (indices) as a dict of squarefree sorted monomials."""
    pending = {tuple(sorted(mono)): 1}
    out: Dict[Tuple[int, ...], int] = {}
    while pending:
        m, c = pending.popitem()
        rep = next((v for v in set(m) if m.count(v) > 1), None)
        if rep is None:
            out[m] = out.get(m, 0) ^ c
            continue
        rest = list(m)
        rest.remove(rep)
        rest.remove(rep)
        if rep == 0:
            continue
        new = tuple(sorted(rest + list(_SQUARE_RULES[rep])))
        pending[new] = pending.get(new, 0) ^ c
        if not pending[new]:
            del pending[new]
    return {m: c for m, c in out.items() if c}


@dataclass
class K1Ring:
    """F2[y0, y1, y2]/(y0^2, y1^2 + y0 y1, y2^2 + y0 y2) with the C3-action induced by w."""

    omega_on_generators: Tuple[Tuple[int, ...], ...] = ((1, 0, 0), (0, 1, 1), (0, 1, 0))
    galois_on_generators: Tuple[Tuple[int, ...], ...] = ((1, 0, 0), (0, 0, 1), (0, 1, 0))

    def basis(self, degree: int) -> List[Tuple[int, ...]]:
        return [m for m in _squarefree(degree)]

    def dims(self, top: int = 4) -> Tuple[int, ...]:
        return tuple(len(self.basis(d)) for d in range(top + 1))

    def multiply(self, x: Mapping[Tuple[int, ...], int], y: Mapping[Tuple[int, ...], int]) -> Dict[Tuple[int, ...], int]:
        out: Dict[Tuple[int, ...], int] = {}
        for m1, c1 in x.items():
            for m2, c2 in y.items():
                if c1 and c2:
                    for m, c in _reduce_monomial(m1 + m2).items():
                        out[m] = out.get(m, 0) ^ c
        return {m: c for m, c in out.items() if c}

    def _apply_linear(self, images, mono: Tuple[int, ...]) -> Dict[Tuple[int, ...], int]:
        acc = {(): 1}
        for v in mono:
            img = {(n,): 1 for n in range(3) if images[n][v]}
            acc = self.multiply(acc, img)
        return acc

    def operator(self, images, degree: int) -> np.ndarray:
        """Matrix (columns are images) of the ring endomorphism with the given action on y0, y1, y2."""
        basis = self.basis(degree)
        idx = {m: n for n, m in enumerate(basis)}
        mat = np.zeros((len(basis), len(basis)), dtype=np.uint8)
        for n, m in enumerate(basis):
            for tgt, c in self._apply_linear(images, m).items():
                mat[idx[tgt], n] ^= c
        return mat

    def omega_matrix(self, degree: int) -> np.ndarray:
        return self.operator(self.omega_on_generators, degree)

    def galois_matrix(self, degree: int) -> np.ndarray:
        return self.operator(self.galois_on_generators, degree)

    def respects_relations(self, images) -> bool:
        """The substitution kills the three defining relations."""
        for rel in ((0, 0), (1, 1), (2, 2)):
            lhs = self._apply_linear(images, rel)
            extra = {(0, 0): {}, (1, 1): {(0, 1): 1}, (2, 2): {(0, 2): 1}}[rel]
            rhs = self._apply_linear(images, tuple(v for m in extra for v in m)) if extra else {}
            if lhs != rhs:
                return False
        return True

    def monomial_name(self, m: Tuple[int, ...]) -> str:
        return "*".join(K1_VARS[v] for v in m) if m else "1"


def _squarefree(degree: int) -> List[Tuple[int, ...]]:
    from itertools import combinations
    return [c for c in combinations(range(3), degree)] if 0 <= degree <= 3 else []


def galois_descent_dim(basis_cols: np.ndarray, semilinear: np.ndarray) -> int:
    """F2-dimension of the fixed points of v -> B frob(v) on the F4-span of basis_cols.

    The span must be stable; the answer then equals the F4-dimension.
    """
    n, r = basis_cols.shape
    if r == 0:
        return 0
    image = f4_matmul(semilinear, f4_frobenius(basis_cols))
    if not f4_colspace_contains(basis_cols, image):
        raise ValueError("subspace is not Galois stable")
    # real coordinates: c = c0 + w c1 over F2, the map c -> tau(Vc) - Vc as F2-linear
    cols = []
    for j in range(r):
        for scal in (ONE, OMEGA):
            c = np.zeros((r, 1), dtype=np.uint8)
            c[j, 0] = scal.value
            v = f4_matmul(basis_cols, c)
            diff = f4_matmul(semilinear, f4_frobenius(v)) ^ v
            cols.append(np.concatenate([diff & 1, diff >> 1], axis=0))
    mat = np.concatenate(cols, axis=1)
    return 2 * r - f4_rank(mat)


def s12_via_k1(ring: Optional[K1Ring] = None, top: int = 4) -> CohomologyResult:
    """((H^s(K1; F2) (x) F4[u^+-1])^{C3}) per (s, internal degree), with Galois descent checked."""
    ring = ring or K1Ring()
    twist = _omega_u_twist()
    dims, cocycles, labels = {}, {}, {}
    for s in range(top + 1):
        basis = ring.basis(s)
        for t in INTERNAL_DEGREES:
            if not basis:
                dims[(s, t)] = 0
                continue
            a = ring.omega_matrix(s)
            scale = twist ** (-(t // 2) % 3)
            op = f4_scale(scale.value, a) ^ f4_identity(len(basis))
            inv = f4_nullspace(op)
            dims[(s, t)] = inv.shape[1]
            descended = galois_descent_dim(inv, ring.galois_matrix(s))
            if descended != inv.shape[1]:
                raise RouteDisagreement(f"Galois descent changes the rank at {(s, t)}")
            cocycles[(s, t)] = inv
            labels[(s, t)] = [" + ".join(f"{'' if c == 1 else F4Scalar(int(c))}{ring.monomial_name(basis[r])}"
                                         for r, c in enumerate(col) if c) for col in inv.T]
    return CohomologyResult(dims, cocycles, labels=labels)


def _omega_u_twist(k: int = 8) -> F4Scalar:
    return action.group_action_matrix(O2Element.omega(k), (0, 0)).u_twist


# ------------------------------------------------------------ the duality resolution

E1_COLUMNS = ("G24", "C6", "C6", "G24'")


@dataclass
class DualityPage:
    dims: Dict[Tuple[int, int, int], int]  # (p, q, t mod 6)
    labels: Dict[int, List[Tuple[str, int]]]  # p -> [(name, internal degree)]

    def rank(self, p: int, q: int = 0) -> int:
        return sum(d for (pp, qq, _), d in self.dims.items() if pp == p and qq == q)

    def degrees(self, p: int) -> List[int]:
        return sorted(t for _, t in self.labels.get(p, []))


def _labels_from(res: CohomologyResult, p: int) -> List[Tuple[str, int]]:
    out = []
    for t in INTERNAL_DEGREES:
        rows = res.cocycles[(0, t)]
        for row in rows:
            gens = [action.BASIS[n] for n, c in enumerate(row) if c]
            n = int(gens[-1][1:])
            degree = n if n else 0
            # x_n lives in internal degree n; x_6 and x_0 both sit at 0 mod 6
            out.append((f"x_{{{p},{n}}}", degree))
    return sorted(out, key=lambda x: (x[1], x[0]))


def duality_e1(params: Tuple[int, int], p_max: int = 2, k: int = 8) -> DualityPage:
    cols = [g24_cohomology(params, p_max, k), c6_cohomology(params, p_max, k), c6_cohomology(params, p_max, k),
            g24_cohomology(params, p_max, k, conjugate=True)]
    dims, labels = {}, {}
    for p, res in enumerate(cols):
        for (q, t), d in res.dims.items():
            dims[(p, q, t)] = d
        labels[p] = _labels_from(res, p)
    return DualityPage(dims, labels)


@dataclass
class D1Report:
    alpha_kills_bottom: bool
    norm_operator_kills_classes: bool
    sampled_pairs: int
    pair_failures: List[str]
    nonzero_pairs: int
    d1_constant: int = 1

    @property
    def ok(self) -> bool:
        return self.alpha_kills_bottom and self.norm_operator_kills_classes and not self.pair_failures


def random_filtered_unit(rng: np.random.Generator, k: int = 8) -> O2Element:
    """A random g in S2^1: leading digit 1, everything else random."""
    from .core_algebra import WittApprox
    mod = 1 << k
    a0 = int(rng.integers(0, mod // 2)) * 2 + 1
    a1 = int(rng.integers(0, mod // 2)) * 2
    b0, b1 = (int(x) for x in rng.integers(0, mod, size=2))
    return O2Element(WittApprox(a0, a1, k), WittApprox(b0, b1, k))


def duality_d1(params: Tuple[int, int], samples: int = 60, seed: int = 0, k: int = 8) -> D1Report:
    eye = f4_identity(8)
    alpha, pi = stabilizer.construct_alpha_pi(k)
    rep = lambda g: action.group_action_matrix(g, params).mat
    x_span = action.span_of(["x0", "x2", "x4", "x6"]).T
    bottom = action.span_of(["x0"]).T
    alpha_ok = not f4_matmul(eye ^ rep(alpha), bottom).any()
    q8 = action.q8_elements(k)
    norm = eye ^ rep(q8["i"]) ^ rep(q8["j"]) ^ rep(q8["k"])  # e + i + j + k
    norm_operator = f4_matmul(f4_matmul(f4_matmul(rep(pi), norm), eye ^ rep(stabilizer.o2_inv(alpha))),
                      rep(stabilizer.o2_inv(pi)))
    norm_ok = not f4_matmul(norm_operator, x_span).any()
    rng = np.random.default_rng(seed)
    named = [q8[n] for n in ("i", "j", "k", "-i", "-j", "-k")] + [alpha, pi]
    pairs = [(g, h) for g in named for h in named]
    pairs += [(random_filtered_unit(rng, k), random_filtered_unit(rng, k)) for _ in range(samples)]
    failures, nonzero = [], 0
    for g, h in pairs:
        op = f4_matmul(eye ^ rep(g), eye ^ rep(h))
        img = f4_matmul(op, x_span)
        t1g, t1h = stabilizer.ttilde_profile(g).t1, stabilizer.ttilde_profile(h).t1
        expect = t1h * t1g ** 2 + t1h ** 2 * t1g
        want = np.zeros((8, 4), dtype=np.uint8)
        want[0, 3] = expect.value
        if not np.array_equal(img, want):
            failures.append(f"{g} / {h}")
        nonzero += bool(expect)
    return D1Report(alpha_ok, norm_ok, len(pairs), failures, nonzero)


def duality_e2(params: Tuple[int, int], k: int = 8) -> CohomologyResult:
    """E2 = E_infinity of the duality spectral sequence on the bottom row."""
    e1 = duality_e1(params, 1, k)
    report = duality_d1(params, k=k)
    if not report.ok:
        raise RouteDisagreement("d1 structure check failed")
    k1 = s12_via_k1()
    dims = {(p, t): e1.dims[(p, 0, t)] for p in range(4) for t in INTERNAL_DEGREES}
    # the only possible d1 is x_{1,6} -> c v2 x_{2,0} for a constant c, both in degree 0 mod 6
    rank_if_zero = sum(dims[(1, t)] for t in INTERNAL_DEGREES)
    constant_nonzero = rank_if_zero - 1 == k1.rank(1)
    if not constant_nonzero and rank_if_zero != k1.rank(1):
        raise RouteDisagreement("no value of the d1 constant matches the first cohomology rank")
    if constant_nonzero:
        dims[(1, 0)] -= 1
        dims[(2, 0)] -= 1
    for t in INTERNAL_DEGREES:
        dims[(4, t)] = 0
    killed = {"x_{1,6}", "x_{2,0}"} if constant_nonzero else set()
    labels = {(p, 0): [n for n, _ in e1.labels[p] if n not in killed] for p in range(4)}
    result = CohomologyResult(dims, labels=labels)
    if result.dims != {key: k1.dims[key] for key in result.dims}:
        raise RouteDisagreement("duality route and K1 route disagree")
    return result
