"""Spec(A), Over(A), L(A) and finite families of semistar operations as spaces.

Point ids are text: primes are ``(0)``, ``m1``, ...; overrings are index
sets like ``{1,2}`` (``{}`` is ``K``); operations are their expression text.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .expr import LocFin, Wedge, mask_text, parse_mask_text, prime_text
from .semistar import (
    SemistarOp, _probe_family, enumerate_all_ops, eq, finite_type_closure,
    inf, is_finite_type, make_op, popcount, spectral_op,
)
from .topology import (
    FinSpace, check_continuous, check_embedding, check_retraction,
    from_subbasis,
)
from .valmodel import (
    ModelError, ModelSpec, ModuleVec, contains_one, integral_modules, is_submodule,
    localization, overring_module, probe, probe_modules,
)

__all__ = [
    "OpSpace", "spec_space", "over_space", "local_space", "lambda_map", "sstar_space",
    "phi_embedding", "phi_report", "finite_type_space", "finite_type_retraction",
    "retraction_report", "sigma_map", "sigma_report", "compactness_propositions",
    "check_continuous", "check_embedding", "check_retraction", "prime_ideal",
    "all_ops_space", "semistar_ft_space", "spec_D", "over_B", "iota_map", "V",
]


def prime_ideal(m: ModelSpec, p: int) -> Optional[ModuleVec]:
    """``m_p`` as a module (``None`` for the zero ideal)."""
    return None if p == 0 else probe(m.k, 0, 1 << (p - 1))


def _D(m: ModelSpec, a: ModuleVec) -> List[str]:
    """``D(a)``: primes not containing the nonzero ideal ``a``."""
    out = [prime_text(0)]
    for p in range(1, m.k + 1):
        if not is_submodule(a, prime_ideal(m, p)):
            out.append(prime_text(p))
    return out


@lru_cache(maxsize=None)
def spec_space(m: ModelSpec) -> FinSpace:
    points = [prime_text(p) for p in range(m.k + 1)]
    return from_subbasis(points, [_D(m, a) for a in integral_modules(m.k, 1)], f"Spec {m}")


def spec_D(m: ModelSpec, a: ModuleVec) -> frozenset:
    return frozenset(_D(m, a))


def _overring_points(k: int) -> List[int]:
    return sorted(range(1 << k), key=lambda T: (popcount(T), T))


@lru_cache(maxsize=None)
def over_space(m: ModelSpec, depth: int = 1) -> FinSpace:
    """Basic opens ``B_F = {T : F ⊆ B_T}`` over fractional probes ``F``."""
    Ts = _overring_points(m.k)
    points = [mask_text(T) for T in Ts]
    sub = []
    for F in probe_modules(m.k, depth):
        if F.is_fractional:
            sub.append([mask_text(T) for T in Ts if is_submodule(F, overring_module(m, T))])
    return from_subbasis(points, sub, f"Over {m}")


def over_B(m: ModelSpec, F: ModuleVec) -> frozenset:
    return frozenset(mask_text(T) for T in range(1 << m.k) if is_submodule(F, overring_module(m, T)))


@lru_cache(maxsize=None)
def local_space(m: ModelSpec) -> FinSpace:
    over = over_space(m)
    pts = [mask_text(T) for T in _overring_points(m.k) if popcount(T) <= 1]
    return over.subspace(pts, f"L {m}")


def lambda_map(m: ModelSpec) -> Dict[str, str]:
    """Local overring ``C`` to ``m_C ∩ A``, found as the prime with ``A_p = C``."""
    out = {}
    for T in _overring_points(m.k):
        if popcount(T) > 1:
            continue
        B = overring_module(m, T)
        (p,) = [p for p in range(m.k + 1) if localization(m, p) == B]
        out[mask_text(T)] = prime_text(p)
    return out


def iota_map(m: ModelSpec) -> Dict[str, str]:
    """``p -> A_p``."""
    out = {}
    for p in range(m.k + 1):
        B = localization(m, p)
        (T,) = [T for T in range(1 << m.k) if overring_module(m, T) == B]
        out[prime_text(p)] = mask_text(T)
    return out


# ------------------------------------------------------------------ SStar spaces

@dataclass(frozen=True, eq=False)
class OpSpace(FinSpace):
    ops: Tuple[SemistarOp, ...] = ()

    def op(self, name: str) -> SemistarOp:
        return self.ops[self.points.index(name)]

    def point_of(self, op: SemistarOp) -> str:
        for o in self.ops:
            if eq(o, op):
                return o.name
        raise ModelError(f"{op.name} is not in the family")


def _dedupe(ops: Iterable[SemistarOp]) -> List[SemistarOp]:
    seen, out = set(), []
    for o in ops:
        if o.nf is None:
            raise ModelError(f"{o.name} is not a semistar operation")
        if o.nf not in seen:
            seen.add(o.nf)
            out.append(o)
    return out


def V(ops: Sequence[SemistarOp], F: ModuleVec) -> List[str]:
    return [o.name for o in ops if contains_one(o.evaluate(F))]


def sstar_space(m: ModelSpec, ops: Iterable[SemistarOp],
                probes: Optional[Iterable[ModuleVec]] = None, name: str = "") -> OpSpace:
    """Subbasis ``V_F ∩ ops``; membership of 1 in ``F^⋆`` depends only on ``(S(F), P(F))``."""
    ops = _dedupe(ops)
    probes = list(_probe_family(m.k) if probes is None else probes)
    sub = set()
    idx = {o.name: i for i, o in enumerate(ops)}
    for F in probes:
        sub.add(sum(1 << idx[n] for n in V(ops, F)))
    return OpSpace(tuple(o.name for o in ops), tuple(sorted(sub)), name or f"SStar {m}", ops)


def all_ops_space(m: ModelSpec) -> OpSpace:
    return sstar_space(m, enumerate_all_ops(m), name=f"SStar {m}")


def finite_type_space(m: ModelSpec, ops: Optional[Iterable[SemistarOp]] = None) -> OpSpace:
    ops = enumerate_all_ops(m) if ops is None else ops
    return sstar_space(m, [o for o in ops if is_finite_type(o)], name=f"SStar_f {m}")


def semistar_ft_space(m: ModelSpec) -> OpSpace:
    """(Semi)star operations of finite type: ``A^⋆ = A`` and finite type."""
    ops = [o for o in enumerate_all_ops(m) if is_finite_type(o) and o.nf(0) == 0]
    return sstar_space(m, ops, name=f"(semi)star_f {m}")


# ------------------------------------------------------------------ phi, Phi

def phi_embedding(m: ModelSpec) -> Dict[str, SemistarOp]:
    """``T -> ∧_{B_T}``."""
    return {mask_text(T): make_op(m, _wedge_expr(T)) for T in range(1 << m.k)}


def _wedge_expr(T: int):
    return Wedge((T,))


def phi_report(m: ModelSpec) -> Dict[str, object]:
    over = over_space(m)
    ft = finite_type_space(m)
    phi = phi_embedding(m)
    fmap = {T: ft.point_of(o) for T, o in phi.items()}
    emb = check_embedding(fmap, over, ft)
    surjective = set(fmap.values()) == set(ft.points)
    back = {v: k for k, v in fmap.items()}
    homeo = surjective and bool(check_continuous(back, ft, over))
    return {"embedding": emb.ok, "reason": emb.reason, "surjective": surjective,
            "homeomorphism": homeo, "map": fmap}


def finite_type_retraction(m: ModelSpec, ops: Iterable[SemistarOp]) -> Dict[str, str]:
    """``⋆ -> ⋆_f`` on a family closed under finite-type closure."""
    ops = list(ops)
    out = {}
    for o in ops:
        f = finite_type_closure(o, check=False)
        hits = [p.name for p in ops if eq(p, f)]
        if not hits:
            raise ModelError(f"family is not closed under finite-type closure ({o.name})")
        out[o.name] = hits[0]
    return out


def retraction_report(m: ModelSpec) -> Dict[str, object]:
    X = all_ops_space(m)
    Y = finite_type_space(m, X.ops)
    Phi = finite_type_retraction(m, X.ops)
    incl = {y: y for y in Y.points}
    ret = check_retraction(Phi, X, Y, incl)
    idem = all(Phi[Phi[x]] == Phi[x] for x in X.points)
    # Phi^{-1}(U_F) = V_F for fractional probes
    pre_ok = True
    for F in _probe_family(m.k):
        if not F.is_fractional:
            continue
        U = set(V(Y.ops, F))
        if {x for x in X.points if Phi[x] in U} != set(V(X.ops, F)):
            pre_ok = False
    return {"retraction": ret.ok, "reason": ret.reason, "idempotent": idem,
            "preimage_identity": pre_ok, "image_size": len(set(Phi.values()))}


# ------------------------------------------------------------------ sigma

def sigma_map(m: ModelSpec, T: int, opB: SemistarOp) -> SemistarOp:
    """``F -> (F B_T)^{⋆} ∩ K`` for an operation on the sub-model of ``B_T``."""
    if not T:
        raise ModelError("sigma needs a nonempty index set")
    if opB.model != m.sub(T):
        raise ModelError(f"{opB.name} is not an operation on B_{mask_text(T)}")
    return make_op(m, LocFin(((T, opB.expr),)))


def _restrict_B(F: ModuleVec, T: int) -> ModuleVec:
    return ModuleVec(tuple(c for i, c in enumerate(F.comps) if T >> i & 1))


def sigma_report(m: ModelSpec, T: int) -> Dict[str, object]:
    sub = m.sub(T)
    B_ops = enumerate_all_ops(sub)
    images = [sigma_map(m, T, o) for o in B_ops]
    A_ops = enumerate_all_ops(m)
    injective = len({o.nf for o in images}) == len(images)
    ft_both_ways = all(is_finite_type(o) == is_finite_type(s) for o, s in zip(B_ops, images))
    B = overring_module(m, T)
    wanted = {o.nf for o in A_ops if is_submodule(B, o.evaluate(ModuleVec.A(m.k)))}
    image_ok = {o.nf for o in images} == wanted
    # sigma(⋆) restricted to B-modules is ⋆
    restrict_ok = all(
        _restrict_B(s.evaluate(F), T) == o.evaluate(_restrict_B(F, T))
        for o, s in zip(B_ops, images)
        for F in probe_modules(m.k, 1)
        if all(c is None for i, c in enumerate(F.comps) if not T >> i & 1)
    )
    XB = sstar_space(sub, B_ops, name=f"SStar {sub}")
    XA = sstar_space(m, A_ops)
    fmap = {o.name: XA.point_of(s) for o, s in zip(B_ops, images)}
    cont = check_continuous(fmap, XB, XA)
    emb = check_embedding(fmap, XB, XA)
    return {
        "T": mask_text(T), "injective": injective, "finite_type_both_ways": ft_both_ways,
        "image_is_ops_above_B": image_ok, "image_size": len(wanted),
        "restriction_identity": restrict_ok, "continuous": cont.ok, "embedding": emb.ok,
    }


# ------------------------------------------------------------------ compactness

def _nonempty_subsets(items, limit: int, seed: int):
    n = len(items)
    if (1 << n) - 1 <= limit:
        for r in range(1, n + 1):
            yield from itertools.combinations(items, r)
        return
    rng = random.Random(seed)
    for r in (1, 2):
        yield from itertools.combinations(items, r)
    for _ in range(limit):
        r = rng.randint(3, n)
        yield tuple(sorted(rng.sample(items, r), key=items.index))


def compactness_propositions(m: ModelSpec, limit: int = 512, seed: int = 0) -> Dict[str, dict]:
    """Compactness versus finite type, for every applicable subset (or a seeded sample)."""
    res: Dict[str, dict] = {}
    spec = spec_space(m)
    L = local_space(m)
    over = over_space(m)
    lam = lambda_map(m)

    def compact(space, pts):
        return space.quasi_compact(space.mask(pts))[0]

    def wedge_of(ts):
        return make_op(m, Wedge(tuple(ts)))

    # λ(Y) compact whenever ∧_Y is of finite type; with λ|Y an embedding, iff
    bad = []
    n = 0
    for Y in _nonempty_subsets(list(L.points), limit, seed):
        n += 1
        ts = [_mask(p) for p in Y]
        ft = is_finite_type(wedge_of(ts))
        lamY = [lam[p] for p in Y]
        if ft and not compact(spec, lamY):
            bad.append(Y)
        sub_map = {p: lam[p] for p in Y}
        if check_embedding(sub_map, L.subspace(Y), spec) and ft != compact(L, Y):
            bad.append(Y)
    res["local_overrings"] = {"ok": not bad, "checked": n, "failures": [list(b) for b in bad]}

    # s_Δ of finite type iff Δ compact
    bad, n = [], 0
    for D in _nonempty_subsets(list(spec.points), limit, seed):
        n += 1
        ps = [0 if p == "(0)" else int(p[1:]) for p in D]
        if is_finite_type(spectral_op(m, ps)) != compact(spec, D):
            bad.append(D)
    res["spectral"] = {"ok": not bad, "checked": n, "failures": [list(b) for b in bad]}

    # valuation overrings: V_i and K
    vals = list(L.points)
    bad, n = [], 0
    for Y in _nonempty_subsets(vals, limit, seed):
        n += 1
        if is_finite_type(wedge_of([_mask(p) for p in Y])) != compact(L, Y):
            bad.append(Y)
    res["valuations"] = {"ok": not bad, "checked": n, "failures": [list(b) for b in bad]}

    # compact subspace of Over(A) gives ∧_Y of finite type
    bad, n = [], 0
    for Y in _nonempty_subsets(list(over.points), limit, seed):
        n += 1
        if compact(over, Y) and not is_finite_type(wedge_of([_mask(p) for p in Y])):
            bad.append(Y)
    res["overrings"] = {"ok": not bad, "checked": n, "failures": [list(b) for b in bad]}

    # compact family of finite-type operations has finite-type infimum
    ft = finite_type_space(m)
    bad, n = [], 0
    for D in _nonempty_subsets(list(ft.points), limit, seed):
        n += 1
        if compact(ft, D) and not is_finite_type(inf([ft.op(p) for p in D])):
            bad.append(D)
    res["finite_type_family"] = {"ok": not bad, "checked": n, "failures": [list(b) for b in bad]}
    return res


def _mask(text: str) -> int:
    return parse_mask_text(text)
