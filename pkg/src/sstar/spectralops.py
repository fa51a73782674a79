"""Spectral operations, weak equivalence, DW and semifinite stable closures.

Prime sets are frozensets of indices: 0 is the zero ideal, ``i`` is ``m_i``.
"""
from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Iterable, Iterator

from .expr import prime_text
from .semistar import (
    SemistarOp, divisorial_op, eq, finite_type_closure, identity_op, is_semifinite,
    qmax, qspec, spectral_op, stable_closure,
)
from .spaces import spec_D, spec_space
from .valmodel import ModelError, ModelSpec, ModuleVec, integral_modules

PrimeSet = FrozenSet[int]


def _labels(Y: Iterable[int]):
    return [prime_text(p) for p in Y]


def _indices(labels: Iterable[str]) -> PrimeSet:
    return frozenset(0 if p == "(0)" else int(p[1:]) for p in labels)


def spec_inverse_closure(m: ModelSpec, Y: Iterable[int]) -> PrimeSet:
    return _indices(spec_space(m).inverse_closure(_labels(Y)))


def prime_subsets(m: ModelSpec) -> Iterator[PrimeSet]:
    """Nonempty subsets of Spec(A)."""
    for r in range(1, m.k + 2):
        for c in itertools.combinations(range(m.k + 1), r):
            yield frozenset(c)


def _patterns(m: ModelSpec):
    # D(a) depends only on the zero set of a, so 0/1 exponents are enough
    return list(integral_modules(m.k, 1))


def weakly_equivalent(m: ModelSpec, Y: Iterable[int], Z: Iterable[int]) -> Dict[str, object]:
    Y, Z = frozenset(Y), frozenset(Z)
    if not Y or not Z:
        raise ModelError("weak equivalence needs nonempty prime sets")
    i = eq(stable_closure(spectral_op(m, Y)), stable_closure(spectral_op(m, Z)))
    ii = spec_inverse_closure(m, Y) == spec_inverse_closure(m, Z)
    iii, witness = True, None
    Yl, Zl = set(_labels(Y)), set(_labels(Z))
    for a in _patterns(m):
        D = spec_D(m, a)
        if (Yl <= D) != (Zl <= D):
            iii, witness = False, {"ideal": str(a), "D": sorted(D)}
            break
    return {"stable_closures_equal": i, "inverse_closures_equal": ii, "same_D_covers": iii,
            "agree": i == ii == iii, "equivalent": i, "witness": witness}


def stable_closure_spectral(m: ModelSpec, Y: Iterable[int]) -> SemistarOp:
    """``s`` over the inverse closure of ``Y``, checked against the stable closure of ``s_Y``."""
    Y = frozenset(Y)
    if not Y:
        raise ModelError("spectral operation needs a nonempty prime set")
    op = spectral_op(m, spec_inverse_closure(m, Y))
    if not eq(op, stable_closure(spectral_op(m, Y))):
        raise ModelError(f"stable closure of s over {sorted(Y)} is not s over its inverse closure")
    return op


def dw_check(m: ModelSpec) -> Dict[str, object]:
    """The three DW conditions and whether they agree.

    Every model is a PID, hence DW; the value is the agreement itself.
    """
    d = identity_op(m)
    t = finite_type_closure(divisorial_op(m))
    whole = frozenset(range(m.k + 1))
    c1 = eq(stable_closure(t), d)
    c2, witness = True, None
    A = ModuleVec.A(m.k)
    for Y in prime_subsets(m):
        if spectral_op(m, Y).evaluate(A) == A and spec_inverse_closure(m, Y) != whole:
            c2, witness = False, {"Y": _labels(sorted(Y))}
            break
    c3 = spec_inverse_closure(m, qmax(t)) == whole
    return {"w_equals_d": c1, "representations_dense": c2, "qmax_t_dense": c3,
            "agree": c1 == c2 == c3, "dw": c1, "qmax_t": _labels(sorted(qmax(t))),
            "witness": witness}


def semifinite_stable(m: ModelSpec, op: SemistarOp) -> Dict[str, object]:
    semi, bad = is_semifinite(op)
    if not semi:
        raise ModelError(f"{op.name} is not semifinite; failing quasi-ideal {bad}")
    qs = qspec(op)
    closure = spec_inverse_closure(m, qs)
    tilde = stable_closure(op)
    formula = eq(tilde, spectral_op(m, closure))
    dense = closure == frozenset(range(m.k + 1))
    is_d = eq(tilde, identity_op(m))
    return {"qspec": _labels(sorted(qs)), "inverse_closure": _labels(sorted(closure)),
            "stable_closure": tilde.name, "formula_holds": formula,
            "dense": dense, "tilde_is_d": is_d, "corollary_holds": dense == is_d}
