"""Semistar operations on a model, with a decidable support-map normal form.

Every semistar operation on a semilocal PID is a *support map*: a closure
operator ``g`` on subsets of prime indices acting by ``F -> F`` with the
components in ``g(S(F))`` replaced by ``K``.  Scaling moves the finite part
of a module anywhere, so an operation can only blow components up to ``K``;
idempotency together with monotonicity against ``K``-padded majorants rules
out any shift of the surviving components.  The normal form of an expression
is read off the probes ``probe(S, ∅)`` and then cross-checked against
definitional evaluation on the whole probe family.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .expr import (
    Compose, Divisorial, Expr, FieldOp, FiniteType, Identity, Inf, LocFin,
    Spectral, StableClosure, Sup, Wedge, contains_compose, evaluate_expr,
    mask_text, parse_expr,
)
from .valmodel import (
    ElementVec, ModelError, ModelSpec, ModuleVec, contains_one, intersect,
    integral_modules, is_submodule, probe, probe_modules, scale, support,
)

PrimeSet = FrozenSet[int]  # 0 is the zero ideal, i > 0 is m_i

MAX_ENUM_K = 4


class NormalizationError(RuntimeError):
    """Normal form and definitional evaluation disagree: a constructor is broken."""


class NotSemistarError(ValueError):
    """The operation is not a semistar operation (or has no normal form)."""


def popcount(x: int) -> int:
    return bin(x).count("1")


# ------------------------------------------------------------------ support maps

@dataclass(frozen=True)
class SupportMap:
    k: int
    table: Tuple[int, ...]

    def __call__(self, S: int) -> int:
        return self.table[S]

    @property
    def full(self) -> int:
        return (1 << self.k) - 1

    def apply(self, F: ModuleVec) -> ModuleVec:
        blown = self.table[support(F)]
        return ModuleVec(tuple(None if blown >> i & 1 else c for i, c in enumerate(F.comps)))

    def is_extensive(self) -> bool:
        return all(g & S == S for S, g in enumerate(self.table))

    def is_monotone(self) -> bool:
        n = len(self.table)
        return all(self.table[S] & self.table[T] == self.table[S]
                   for S in range(n) for T in range(n) if S & T == S)

    def is_idempotent(self) -> bool:
        return all(self.table[g] == g for g in self.table)

    def is_closure(self) -> bool:
        return self.is_extensive() and self.is_monotone() and self.is_idempotent()

    def leq(self, other: "SupportMap") -> bool:
        return all(a & b == a for a, b in zip(self.table, other.table))

    def meet(self, other: "SupportMap") -> "SupportMap":
        return SupportMap(self.k, tuple(a & b for a, b in zip(self.table, other.table)))

    def closed_sets(self) -> List[int]:
        return [S for S, g in enumerate(self.table) if g == S]

    def text(self) -> str:
        return ", ".join(f"{mask_text(S)} -> {mask_text(g)}" for S, g in enumerate(self.table))

    def __str__(self) -> str:
        return self.text()

    @classmethod
    def identity(cls, k: int) -> "SupportMap":
        return cls(k, tuple(range(1 << k)))

    @classmethod
    def top(cls, k: int) -> "SupportMap":
        return cls(k, ((1 << k) - 1,) * (1 << k))

    @classmethod
    def wedge(cls, k: int, T: int) -> "SupportMap":
        """``∧_{B_T}``: blow up everything outside ``T``."""
        off = ((1 << k) - 1) & ~T
        return cls(k, tuple(S | off for S in range(1 << k)))

    @classmethod
    def from_closed_sets(cls, k: int, closed: Iterable[int]) -> "SupportMap":
        full = (1 << k) - 1
        closed = set(closed) | {full}
        return cls(k, tuple(reduce(lambda a, b: a & b, (C for C in closed if C & S == S), full)
                            for S in range(1 << k)))


# ------------------------------------------------------------------ operations

@dataclass(frozen=True, eq=False)
class SemistarOp:
    model: ModelSpec
    expr: Expr
    nf: Optional[SupportMap]

    @property
    def name(self) -> str:
        return self.expr.text()

    @property
    def genuine(self) -> bool:
        return self.nf is not None

    def evaluate(self, F: ModuleVec, depth: int = 2) -> ModuleVec:
        if self.nf is not None:
            return self.nf.apply(F)
        return evaluate_expr(self.model, self.expr, F, depth)

    def __repr__(self) -> str:
        return f"SemistarOp({self.name})"

    def __str__(self) -> str:
        return self.name

    # cached classification flags; recomputed per instance, never shared
    @cached_property
    def finite_type(self) -> bool:
        return is_finite_type(self)

    @cached_property
    def stable(self) -> bool:
        return is_stable(self)[0]

    @cached_property
    def spectral(self) -> bool:
        return is_spectral_op(self)

    @cached_property
    def semifinite(self) -> bool:
        return is_semifinite(self)[0]


def _probe_family(k: int) -> Iterable[ModuleVec]:
    for S in range(1 << k):
        rest = ((1 << k) - 1) & ~S
        P = rest
        while True:
            yield probe(k, S, P)
            if P == 0:
                break
            P = (P - 1) & rest


def normalize(m: ModelSpec, expr: Expr, depth: int = 2) -> SupportMap:
    """Read the support map of ``expr`` off the probes ``probe(S, ∅)``."""
    table = []
    for S in range(1 << m.k):
        H = evaluate_expr(m, expr, probe(m.k, S), depth)
        if any(c not in (None, 0) for c in H.comps):
            raise NormalizationError(f"{expr} shifts finite components of {probe(m.k, S)}: {H}")
        table.append(support(H))
    return SupportMap(m.k, tuple(table))


def _check_agreement(m: ModelSpec, expr: Expr, nf: SupportMap, depth: int,
                     modules: Optional[Iterable[ModuleVec]] = None) -> None:
    for F in (modules if modules is not None else _probe_family(m.k)):
        want = evaluate_expr(m, expr, F, depth)
        got = nf.apply(F)
        if got != want:
            raise NormalizationError(f"{expr} at {F}: normal form gives {got}, definition gives {want}")


def make_op(m: ModelSpec, expr: Expr, depth: int = 2, nf: Optional[SupportMap] = None,
            check: bool = True) -> SemistarOp:
    """Build an operation, normalizing ``expr`` and oracle-checking the result.

    Compose-rooted expressions (and anything containing a composition that
    turns out not to be a closure operator) come back with ``nf=None``.
    """
    if isinstance(expr, Compose):
        return SemistarOp(m, expr, None)
    if nf is None:
        nf = normalize(m, expr, depth)
    if not nf.is_closure():
        if contains_compose(expr):
            return SemistarOp(m, expr, None)
        raise NormalizationError(f"{expr} normalizes to a non-closure map {nf}")
    if check:
        _check_agreement(m, expr, nf, depth)
    return SemistarOp(m, expr, nf)


def parse_op(m: ModelSpec, text: str, depth: int = 2) -> SemistarOp:
    return make_op(m, parse_expr(text, m.k), depth)


def evaluate(op: SemistarOp, F: ModuleVec) -> ModuleVec:
    return op.evaluate(F)


def normal_form(op: SemistarOp) -> SupportMap:
    if op.nf is None:
        raise NotSemistarError(f"{op.name} has no normal form (composition root or not idempotent)")
    return op.nf


def _nf(op: SemistarOp) -> SupportMap:
    return normal_form(op)


def leq(a: SemistarOp, b: SemistarOp) -> bool:
    return _nf(a).leq(_nf(b))


def eq(a: SemistarOp, b: SemistarOp) -> bool:
    return _nf(a) == _nf(b)


def canonical_expr(g: SupportMap) -> Expr:
    """A short constructor expression denoting ``g``.

    Every closure operator is the meet of the operators ``C -> C, else K``
    over its meet-irreducible closed sets ``C``; such an operator is
    ``∧_{B_T}`` when ``T = complement of C`` is a singleton, ``v`` when ``C``
    is empty, and ``σ`` of the divisorial operation of ``B_T`` otherwise.
    """
    k, full = g.k, g.full
    if g == SupportMap.identity(k):
        return Identity()
    if g == SupportMap.top(k):
        return FieldOp()
    g0 = g(0)
    if all(g(S) == S | g0 for S in range(1 << k)):
        return Wedge((full & ~g0,))
    closed = g.closed_sets()
    parts = []
    for C in closed:
        if C == full:
            continue
        above = [D for D in closed if D != C and D & C == C]
        if reduce(lambda a, b: a & b, above, full) == C:
            continue
        T = full & ~C
        if T == full:
            parts.append(Divisorial())
        elif popcount(T) == 1:
            parts.append(Wedge((T,)))
        else:
            parts.append(LocFin(((T, Divisorial()),)))
    return parts[0] if len(parts) == 1 else Inf(tuple(parts))


def op_from_table(m: ModelSpec, g: SupportMap, check: bool = True) -> SemistarOp:
    return make_op(m, canonical_expr(g), nf=g, check=check)


# ------------------------------------------------------------------ axioms

@dataclass
class Verdict:
    ok: bool
    failed: Optional[str] = None
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.ok


def _module_key(F: ModuleVec):
    return (sum(c is None for c in F.comps),
            sum(abs(c) for c in F.comps if c is not None),
            tuple(10 ** 6 if c is None else c for c in F.comps))


def _sorted_probes(k: int, depth: int) -> List[ModuleVec]:
    return sorted(probe_modules(k, depth), key=_module_key)


def check_axioms(op: SemistarOp, depth: int = 2) -> Verdict:
    """Exhaustive check of the four semistar axioms on depth-``depth`` probes.

    Evaluates through the expression, so compositions are checked as maps.
    """
    m = op.model
    mods = _sorted_probes(m.k, depth)
    ev = {F: evaluate_expr(m, op.expr, F, depth) for F in mods}

    for F in mods:
        if not is_submodule(F, ev[F]):
            return Verdict(False, "extensivity", {"F": str(F), "F*": str(ev[F])})
    for F in mods:
        twice = evaluate_expr(m, op.expr, ev[F], depth)
        if twice != ev[F]:
            return Verdict(False, "idempotency", {"F": str(F), "F*": str(ev[F]), "F**": str(twice)})
    for F in mods:
        for G in mods:
            if is_submodule(F, G) and not is_submodule(ev[F], ev[G]):
                return Verdict(False, "monotonicity",
                               {"F": str(F), "G": str(G), "F*": str(ev[F]), "G*": str(ev[G])})
    for vals in itertools.product((-1, 0, 1), repeat=m.k):
        x = ElementVec.realize(vals, m)
        for F in mods:
            lhs = evaluate_expr(m, op.expr, scale(F, x), depth)
            rhs = scale(ev[F], x)
            if lhs != rhs:
                return Verdict(False, "scaling", {"F": str(F), "x": str(x.witness),
                                                   "(xF)*": str(lhs), "xF*": str(rhs)})
    return Verdict(True)


# ------------------------------------------------------------------ finite type

def finite_type_closure(op: SemistarOp, depth: int = 2, check: bool = True) -> SemistarOp:
    """``⋆_f = ∧_{B_T}`` with ``T`` the complement of ``g(∅)``.

    With ``check`` the union over finitely generated submodules is evaluated
    on every probe and compared.
    """
    g = _nf(op)
    m = op.model
    h = SupportMap.wedge(m.k, g.full & ~g(0))
    res = make_op(m, canonical_expr(h), nf=h)
    if check:
        _check_agreement(m, FiniteType(op.expr), res.nf, depth)
    return res


def is_finite_type(op: SemistarOp) -> bool:
    g = _nf(op)
    return all(g(S) == S | g(0) for S in range(1 << g.k))


def finite_type_witness(op: SemistarOp, depth: int = 2) -> Optional[dict]:
    """A module ``F`` with ``F^⋆`` strictly larger than the union over its f.g. submodules."""
    m = op.model
    for F in _sorted_probes(m.k, depth):
        full = op.evaluate(F)
        fg = evaluate_expr(m, FiniteType(op.expr), F, depth)
        if full != fg:
            return {"F": str(F), "F*": str(full), "fg_join": str(fg)}
    return None


# ------------------------------------------------------------------ inf / sup

def inf(ops: Sequence[SemistarOp]) -> SemistarOp:
    ops = list(ops)
    if not ops:
        raise ValueError("inf of an empty family")
    if len(ops) == 1:
        return ops[0]
    m = ops[0].model
    g = reduce(SupportMap.meet, (_nf(o) for o in ops))
    if not g.is_closure():
        raise NormalizationError("meet of closure operators is not a closure operator")
    return make_op(m, Inf(tuple(o.expr for o in ops)), nf=g)


def sup_table(maps: Sequence[SupportMap]) -> SupportMap:
    """Composition fixpoint on supports; at most ``k`` rounds since supports only grow."""
    k = maps[0].k
    out = []
    for S in range(1 << k):
        X = S
        for _ in range(k + 1):
            nxt = reduce(lambda a, b: a | b, (g(X) for g in maps))
            if nxt == X:
                break
            X = nxt
        else:
            raise NormalizationError("composition fixpoint did not stabilize")
        out.append(X)
    return SupportMap(k, tuple(out))


def sup(ops: Sequence[SemistarOp]) -> SemistarOp:
    ops = list(ops)
    if not ops:
        raise ValueError("sup of an empty family")
    if len(ops) == 1:
        return ops[0]
    return make_op(ops[0].model, Sup(tuple(o.expr for o in ops)),
                   nf=sup_table([_nf(o) for o in ops]))


# ------------------------------------------------------------------ quasi-ideals

def quasi_ideal_test(op: SemistarOp, a: ModuleVec) -> bool:
    if not a.is_integral:
        raise ModelError(f"{a} is not an integral ideal")
    return intersect(op.evaluate(a), ModuleVec.A(a.k)) == a


def _prime_ideal(k: int, i: int) -> ModuleVec:
    return probe(k, 0, 1 << (i - 1))


def qspec(op: SemistarOp) -> PrimeSet:
    k = op.model.k
    return frozenset([0] + [i for i in range(1, k + 1) if quasi_ideal_test(op, _prime_ideal(k, i))])


def qmax(op: SemistarOp) -> PrimeSet:
    """Maximal proper quasi-ideals.

    The zero ideal counts as a quasi-ideal, so it is quasi-maximal exactly
    when no nonzero proper ideal is quasi.  Maximal ideals of ``A`` have 0/1
    exponent patterns, so depth-1 candidates suffice.
    """
    k = op.model.k
    cands = [a for a in integral_modules(k, 1) if not contains_one(a) and quasi_ideal_test(op, a)]
    if not cands:
        return frozenset([0])
    maximal = [a for a in cands if not any(b != a and is_submodule(a, b) for b in cands)]
    out = set()
    for a in maximal:
        ones = [i for i, c in enumerate(a.comps) if c]
        if len(ones) != 1:
            raise NormalizationError(f"quasi-maximal ideal {a} is not prime")
        out.add(ones[0] + 1)
    return frozenset(out)


def is_semifinite(op: SemistarOp, depth: int = 2) -> Tuple[bool, Optional[dict]]:
    """Every proper quasi-ideal lies under a quasi-prime.

    Exhaustive over nonzero integral ideals of the given depth, plus the
    structural criterion that every ``m_i`` with ``i`` outside ``g(∅)`` is quasi.
    """
    g = _nf(op)
    k = op.model.k
    qs = qspec(op)
    for a in integral_modules(k, depth):
        if contains_one(a) or not quasi_ideal_test(op, a):
            continue
        if not any(p and a.comps[p - 1] >= 1 for p in qs):
            return False, {"ideal": str(a), "qspec": sorted(qs)}
    g0 = g(0)
    for i in range(1, k + 1):
        if not g0 >> (i - 1) & 1 and i not in qs:
            return False, {"ideal": str(_prime_ideal(k, i)), "qspec": sorted(qs)}
    return True, None


# ------------------------------------------------------------------ stability

def is_stable(op: SemistarOp, depth: int = 1) -> Tuple[bool, Optional[dict]]:
    m = op.model
    mods = _sorted_probes(m.k, depth)
    pairs = sorted(itertools.product(mods, mods),
                   key=lambda fg: (_module_key(fg[0])[1] + _module_key(fg[1])[1],
                                   _module_key(fg[0])[0] + _module_key(fg[1])[0],
                                   _module_key(fg[0]), _module_key(fg[1])))
    for F, G in pairs:
        lhs = op.evaluate(intersect(F, G))
        rhs = intersect(op.evaluate(F), op.evaluate(G))
        if lhs != rhs:
            return False, {"F": str(F), "G": str(G), "(F∩G)*": str(lhs), "F*∩G*": str(rhs)}
    return True, None


@lru_cache(maxsize=None)
def spectral_ops(m: ModelSpec) -> Tuple[Tuple[PrimeSet, SupportMap], ...]:
    """``s_Δ`` for every nonempty ``Δ ⊆ Spec(A)``, normalized definitionally."""
    out = []
    for r in range(1, m.k + 2):
        for delta in itertools.combinations(range(m.k + 1), r):
            out.append((frozenset(delta), make_op(m, Spectral(delta)).nf))
    return tuple(out)


def spectral_op(m: ModelSpec, delta: Iterable[int]) -> SemistarOp:
    return make_op(m, Spectral(tuple(sorted(delta))))


def is_spectral_op(op: SemistarOp) -> bool:
    g = _nf(op)
    return any(h == g for _, h in spectral_ops(op.model))


# ------------------------------------------------------------------ stable closure

def stable_closure_routes(op: SemistarOp, depth: int = 2) -> Dict[str, SupportMap]:
    """The stable closure computed three independent ways."""
    from .spectralops import spec_inverse_closure

    m = op.model
    _nf(op)
    definitional = normalize(m, StableClosure(op.expr), depth)
    _check_agreement(m, StableClosure(op.expr), definitional, depth)
    ft = finite_type_closure(op, depth, check=False)
    via_qmax = spectral_op(m, qmax(ft)).nf
    semi, _ = is_semifinite(op)
    base = qspec(op) if semi else qmax(ft)
    via_inverse = spectral_op(m, spec_inverse_closure(m, base)).nf
    return {"definitional": definitional, "qmax": via_qmax, "inverse_closure": via_inverse}


def stable_closure(op: SemistarOp, depth: int = 2) -> SemistarOp:
    routes = stable_closure_routes(op, depth)
    tables = set(routes.values())
    if len(tables) != 1:
        raise NormalizationError(
            f"stable closure routes disagree for {op.name}: "
            + "; ".join(f"{k}: {v}" for k, v in routes.items()))
    return op_from_table(op.model, tables.pop())


def equivalence_stable_ft_spectral(op: SemistarOp) -> Dict[str, bool]:
    ft = is_finite_type(op)
    res = {
        "equals_stable_closure": eq(op, stable_closure(op)),
        "stable_and_finite_type": is_stable(op)[0] and ft,
        "spectral_and_finite_type": is_spectral_op(op) and ft,
    }
    res["agree"] = len(set(res.values())) == 1
    return res


# ------------------------------------------------------------------ locfin / sigma

def locfin_build(m: ModelSpec, pairs: Sequence[Tuple[int, SemistarOp]]) -> SemistarOp:
    """``F -> ∩ (F B_T)^{⋆_T}``; finite type whenever every ``⋆_T`` is."""
    for T, sub_op in pairs:
        if sub_op.model != m.sub(T):
            raise ModelError(f"operation {sub_op.name} does not live on B_{mask_text(T)}")
    op = make_op(m, LocFin(tuple((T, o.expr) for T, o in pairs)))
    if all(is_finite_type(o) for _, o in pairs) and not is_finite_type(op):
        raise NormalizationError(f"{op.name} built from finite-type pieces is not of finite type")
    return op


def is_locally_finite(m: ModelSpec, ts: Sequence[int], depth: int = 2) -> Tuple[bool, dict]:
    """Each probe element is a non-unit in only finitely many ``B_T``.

    Always true for a finite family; the counts are returned as evidence.
    """
    worst = 0
    for vals in itertools.product(range(-depth, depth + 1), repeat=m.k):
        if not any(vals):
            continue
        nonunit = sum(1 for T in ts if any(vals[i] != 0 for i in range(m.k) if T >> i & 1))
        worst = max(worst, nonunit)
    return True, {"family_size": len(ts), "max_nonunit_count": worst}


# ------------------------------------------------------------------ enumeration

@lru_cache(maxsize=None)
def closure_operators(k: int) -> Tuple[SupportMap, ...]:
    """All closure operators on the subsets of ``{1..k}``, via Moore families."""
    if k > MAX_ENUM_K:
        raise ModelError(f"enumeration guarded to k <= {MAX_ENUM_K}, got {k}")
    full = (1 << k) - 1
    others = [S for S in range(1 << k) if S != full]
    out = set()
    for bits in range(1 << len(others)):
        fam = [others[i] for i in range(len(others)) if bits >> i & 1] + [full]
        fs = set(fam)
        if all(a & b in fs for a in fam for b in fam):
            out.add(SupportMap.from_closed_sets(k, fam))
    return tuple(sorted(out, key=lambda g: (sum(map(popcount, g.table)), g.table)))


@lru_cache(maxsize=None)
def enumerate_all_ops(m: ModelSpec) -> Tuple[SemistarOp, ...]:
    if m.k > MAX_ENUM_K:
        raise ModelError(f"enumeration guarded to k <= {MAX_ENUM_K}, got {m.k}")
    return tuple(op_from_table(m, g) for g in closure_operators(m.k))


def finite_type_ops(m: ModelSpec) -> List[SemistarOp]:
    return [o for o in enumerate_all_ops(m) if is_finite_type(o)]


def identity_op(m: ModelSpec) -> SemistarOp:
    return make_op(m, Identity())


def field_op(m: ModelSpec) -> SemistarOp:
    return make_op(m, FieldOp())


def divisorial_op(m: ModelSpec) -> SemistarOp:
    return make_op(m, Divisorial())


def wedge_op(m: ModelSpec, T: int) -> SemistarOp:
    return make_op(m, Wedge((T,)))
