"""Semistar expression trees, their text syntax, and definitional evaluation.

Definitional evaluation follows the defining formulas literally (products with
overrings, double colons, unions over finitely generated submodules, unions of
colons, composition fixpoints).  Unions are truncated at a probe depth and
extrapolated by comparing depth ``d`` with ``d + 1``: a component that keeps
moving is unbounded, hence ``K``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

from .valmodel import (
    ModelError, ModelSpec, ModuleVec, add, colon, intersect, localization,
    multiply, overring_module,
)

__all__ = [
    "Expr", "Identity", "Wedge", "Spectral", "Divisorial", "FieldOp",
    "FiniteType", "StableClosure", "Inf", "Sup", "Compose", "LocFin",
    "ExprSyntaxError", "parse_expr", "evaluate_expr", "contains_compose",
    "mask_text", "parse_mask_text", "prime_text",
]


def mask_text(mask: int) -> str:
    return "{" + ",".join(str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1) + "}"


def prime_text(p: int) -> str:
    return "(0)" if p == 0 else f"m{p}"


def parse_mask_text(text: str) -> int:
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise ExprSyntaxError(f"bad index set {text!r}")
    mask = 0
    for tok in filter(None, (t.strip() for t in s[1:-1].split(","))):
        if not tok.isdigit() or int(tok) < 1:
            raise ExprSyntaxError(f"bad index {tok!r}")
        mask |= 1 << (int(tok) - 1)
    return mask


class Expr:
    """Base class of expression nodes."""

    def text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.text()


@dataclass(frozen=True)
class Identity(Expr):
    def text(self):
        return "d"


@dataclass(frozen=True)
class FieldOp(Expr):
    def text(self):
        return "field"


@dataclass(frozen=True)
class Divisorial(Expr):
    def text(self):
        return "v"


@dataclass(frozen=True)
class Wedge(Expr):
    """``F -> ∩ F B_T`` over a nonempty set of overrings given by index masks."""

    ts: Tuple[int, ...]

    def __post_init__(self):
        if not self.ts:
            raise ExprSyntaxError("wedge needs at least one overring")
        object.__setattr__(self, "ts", tuple(sorted(set(self.ts))))

    def text(self):
        if len(self.ts) == 1:
            return "wedge" + mask_text(self.ts[0])
        return "wedge[" + ",".join(mask_text(t) for t in self.ts) + "]"


@dataclass(frozen=True)
class Spectral(Expr):
    """``s_X``; prime 0 is the zero ideal, ``i`` is ``m_i``."""

    primes: Tuple[int, ...]

    def __post_init__(self):
        if not self.primes:
            raise ExprSyntaxError("spectral operation needs a nonempty set of primes")
        object.__setattr__(self, "primes", tuple(sorted(set(self.primes))))

    def text(self):
        return "s{" + ",".join("0" if p == 0 else f"m{p}" for p in self.primes) + "}"


@dataclass(frozen=True)
class FiniteType(Expr):
    child: Expr

    def text(self):
        return f"finite({self.child.text()})"


@dataclass(frozen=True)
class StableClosure(Expr):
    child: Expr

    def text(self):
        return f"stable({self.child.text()})"


@dataclass(frozen=True)
class Inf(Expr):
    children: Tuple[Expr, ...]

    def text(self):
        return "inf(" + ",".join(c.text() for c in self.children) + ")"


@dataclass(frozen=True)
class Sup(Expr):
    children: Tuple[Expr, ...]

    def text(self):
        return "sup(" + ",".join(c.text() for c in self.children) + ")"


@dataclass(frozen=True)
class Compose(Expr):
    """``children[0] ∘ children[1] ∘ ...``; the last child is applied first."""

    children: Tuple[Expr, ...]

    def text(self):
        return "compose(" + ",".join(c.text() for c in self.children) + ")"


@dataclass(frozen=True)
class LocFin(Expr):
    """``F -> ∩ (F B_T)^{op_T}``; each ``op_T`` lives on the sub-model of ``T``.

    Sub-model expressions index the primes of ``T`` as ``1..|T|`` in
    increasing order.
    """

    pairs: Tuple[Tuple[int, Expr], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ExprSyntaxError("locfin needs at least one pair")
        for T, _ in self.pairs:
            if not T:
                raise ExprSyntaxError("locfin overrings need a nonempty index set")

    def text(self):
        return "locfin(" + ";".join(f"{mask_text(T)}:{e.text()}" for T, e in self.pairs) + ")"


def contains_compose(e: Expr) -> bool:
    if isinstance(e, Compose):
        return True
    if isinstance(e, (FiniteType, StableClosure)):
        return contains_compose(e.child)
    if isinstance(e, (Inf, Sup)):
        return any(contains_compose(c) for c in e.children)
    if isinstance(e, LocFin):
        return any(contains_compose(c) for _, c in e.pairs)
    return False


# ----------------------------------------------------------------- parsing

class ExprSyntaxError(ModelError):
    pass


_TOKEN = re.compile(r"\s*(?:(\{[^{}]*\})|([A-Za-z_][A-Za-z_0-9]*)|([()\[\],;:]))")


def _tokenize(text: str) -> List[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ExprSyntaxError(f"unexpected token at {text[pos:]!r}")
        out.append(mt.group(mt.lastindex))
        pos = mt.end()
    return out


_ATOMS = {
    "d": Identity(),
    "field": FieldOp(),
    "v": Divisorial(),
    "t": FiniteType(Divisorial()),
    "w": StableClosure(FiniteType(Divisorial())),
}


def _parse_primes(tok: str) -> Tuple[int, ...]:
    out = []
    for p in filter(None, (t.strip() for t in tok[1:-1].split(","))):
        if p in ("0", "(0)", "eta"):
            out.append(0)
        elif re.fullmatch(r"m[1-9][0-9]*", p):
            out.append(int(p[1:]))
        else:
            raise ExprSyntaxError(f"bad prime {p!r}")
    return tuple(out)


class _Parser:
    def __init__(self, text: str, k: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.k = k

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want=None):
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression")
        if want is not None and tok != want:
            raise ExprSyntaxError(f"expected {want!r}, got {tok!r}")
        self.i += 1
        return tok

    def expr(self, k) -> Expr:
        tok = self.take()
        if tok in _ATOMS:
            return _ATOMS[tok]
        if tok == "b":
            if k is None:
                raise ExprSyntaxError("'b' needs a model")
            return Wedge(tuple(1 << i for i in range(k)) + (0,))
        if tok == "wedge":
            nxt = self.take()
            if nxt.startswith("{"):
                return Wedge((self.mask(nxt, k),))
            if nxt != "[":
                raise ExprSyntaxError(f"expected index set after wedge, got {nxt!r}")
            ts = [self.mask(self.take(), k)]
            while self.peek() == ",":
                self.take()
                ts.append(self.mask(self.take(), k))
            self.take("]")
            return Wedge(tuple(ts))
        if tok == "s":
            nxt = self.take()
            if not nxt.startswith("{"):
                raise ExprSyntaxError(f"expected prime set after s, got {nxt!r}")
            primes = _parse_primes(nxt)
            if k is not None and any(p > k for p in primes):
                raise ExprSyntaxError(f"prime out of range in {nxt!r}")
            return Spectral(primes)
        if tok in ("finite", "stable"):
            self.take("(")
            child = self.expr(k)
            self.take(")")
            return FiniteType(child) if tok == "finite" else StableClosure(child)
        if tok in ("inf", "sup", "compose"):
            self.take("(")
            kids = [self.expr(k)]
            while self.peek() == ",":
                self.take()
                kids.append(self.expr(k))
            self.take(")")
            return {"inf": Inf, "sup": Sup, "compose": Compose}[tok](tuple(kids))
        if tok == "locfin":
            self.take("(")
            pairs = [self.pair(k)]
            while self.peek() == ";":
                self.take()
                pairs.append(self.pair(k))
            self.take(")")
            return LocFin(tuple(pairs))
        raise ExprSyntaxError(f"unknown operation {tok!r}")

    def pair(self, k):
        T = self.mask(self.take(), k)
        self.take(":")
        return T, self.expr(None if k is None else bin(T).count("1"))

    def mask(self, tok, k):
        mask = parse_mask_text(tok)
        if k is not None and mask >> k:
            raise ExprSyntaxError(f"index out of range in {tok!r}")
        return mask


def parse_expr(text: str, k: int | None = None) -> Expr:
    p = _Parser(text, k)
    e = p.expr(k)
    if p.peek() is not None:
        raise ExprSyntaxError(f"trailing input at {p.peek()!r}")
    return e


# ------------------------------------------------------ definitional evaluation

def _stabilized(lo: ModuleVec, hi: ModuleVec) -> ModuleVec:
    return ModuleVec(tuple(None if a is None or b is None or a != b else a
                           for a, b in zip(lo.comps, hi.comps)))


def _join(mods) -> ModuleVec:
    it = iter(mods)
    acc = next(it)
    for M in it:
        acc = add(acc, M)
    return acc


def _restrict(F: ModuleVec, T: int) -> ModuleVec:
    return ModuleVec(tuple(c for i, c in enumerate(F.comps) if T >> i & 1))


def _lift(F: ModuleVec, T: int, k: int) -> ModuleVec:
    it = iter(F.comps)
    return ModuleVec(tuple(next(it) if T >> i & 1 else None for i in range(k)))


def _finite_type_join(m, child, F, depth, d):
    ranges = [range(-d, d + 1) if c is None else range(c, c + d + 1) for c in F.comps]
    return _join(evaluate_expr(m, child, ModuleVec(G), depth)
                 for G in itertools.product(*ranges))


def _stable_join(m, child, F, depth, d):
    A = ModuleVec.A(m.k)
    A_star = evaluate_expr(m, child, A, depth)
    mods = []
    for a in itertools.product(range(d + 1), repeat=m.k):
        a = ModuleVec(a)
        if evaluate_expr(m, child, a, depth) == A_star:
            mods.append(colon(F, a))
    return _join(mods)


@lru_cache(maxsize=None)
def evaluate_expr(m: ModelSpec, e: Expr, F: ModuleVec, depth: int = 2) -> ModuleVec:
    """Evaluate ``F`` under ``e`` straight from the defining formulas."""
    if isinstance(e, Identity):
        return F
    if isinstance(e, FieldOp):
        return ModuleVec.K(m.k)
    if isinstance(e, Divisorial):
        A = ModuleVec.A(m.k)
        return colon(A, colon(A, F))
    if isinstance(e, Wedge):
        return _intersect_all(multiply(F, overring_module(m, T)) for T in e.ts)
    if isinstance(e, Spectral):
        return _intersect_all(multiply(F, localization(m, p)) for p in e.primes)
    if isinstance(e, Inf):
        return _intersect_all(evaluate_expr(m, c, F, depth) for c in e.children)
    if isinstance(e, Compose):
        for c in reversed(e.children):
            F = evaluate_expr(m, c, F, depth)
        return F
    if isinstance(e, Sup):
        H = F
        for _ in range(m.k + 2):
            nxt = _join(evaluate_expr(m, c, H, depth) for c in e.children)
            if nxt == H:
                return H
            H = nxt
        raise RuntimeError(f"composition fixpoint of {e} did not stabilize")
    if isinstance(e, LocFin):
        out = []
        for T, c in e.pairs:
            sub = m.sub(T)
            FB = multiply(F, overring_module(m, T))
            out.append(_lift(evaluate_expr(sub, c, _restrict(FB, T), depth), T, m.k))
        return _intersect_all(out)
    if isinstance(e, FiniteType):
        return _stabilized(_finite_type_join(m, e.child, F, depth, depth),
                           _finite_type_join(m, e.child, F, depth, depth + 1))
    if isinstance(e, StableClosure):
        return _stabilized(_stable_join(m, e.child, F, depth, depth),
                           _stable_join(m, e.child, F, depth, depth + 1))
    raise TypeError(f"unknown expression node {e!r}")


def _intersect_all(mods) -> ModuleVec:
    it = iter(mods)
    acc = next(it)
    for M in it:
        acc = intersect(acc, M)
    return acc

