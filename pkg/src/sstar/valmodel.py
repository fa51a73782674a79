"""Exact arithmetic for the submodule lattice of a semilocal PID.

The ring is ``A = Z`` localized away from ``k`` chosen primes, i.e. the
intersection of the discrete valuation rings ``V_i = Z_(p_i)``.  Every nonzero
``A``-submodule ``F`` of ``K = Q`` satisfies ``F = F V_1 ∩ ... ∩ F V_k`` and
each ``F V_i`` is either ``p_i^e V_i`` or ``K``, so ``F`` is encoded by a
vector of exponents where ``None`` marks a ``K``-full component.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

Comp = Optional[int]  # None = K-FULL

__all__ = [
    "Comp", "ModelError", "ModelSpec", "ModuleVec", "ElementVec", "ZERO",
    "make_model", "valuation", "module_from_generators", "is_submodule",
    "contains_one", "multiply", "intersect", "add", "scale", "colon",
    "overring_module", "localization", "support", "parse_module",
    "probe", "probe_modules", "integral_modules",
]


class ModelError(ValueError):
    """Invalid model definition or malformed module text."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, int(n ** 0.5) + 1):
        if n % q == 0:
            return False
    return True


@dataclass(frozen=True)
class ModelSpec:
    primes: Tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.primes)

    @property
    def full(self) -> int:
        """Bitmask of all prime indices."""
        return (1 << self.k) - 1

    def sub(self, T: int) -> "ModelSpec":
        """The model of the overring ``B_T`` (primes indexed by the mask ``T``)."""
        if not T:
            raise ModelError("sub-model needs at least one prime")
        return ModelSpec(tuple(p for i, p in enumerate(self.primes) if T >> i & 1))

    def __str__(self) -> str:
        return "Z_(" + ",".join(map(str, self.primes)) + ")"


def make_model(primes: Iterable[int]) -> ModelSpec:
    primes = tuple(int(p) for p in primes)
    if not primes:
        raise ModelError("at least one prime is required")
    seen = set()
    for p in primes:
        if p in seen:
            raise ModelError(f"duplicate prime {p}")
        if not _is_prime(p):
            raise ModelError(f"{p} is not a prime")
        seen.add(p)
    return ModelSpec(primes)


class _Zero:
    """The zero module; a possible value of a colon, outside the lattice."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "ZERO"

    def __str__(self) -> str:
        return "0"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


@dataclass(frozen=True)
class ModuleVec:
    comps: Tuple[Comp, ...]

    @property
    def k(self) -> int:
        return len(self.comps)

    @property
    def is_fractional(self) -> bool:
        return all(c is not None for c in self.comps)

    @property
    def is_integral(self) -> bool:
        return all(c is not None and c >= 0 for c in self.comps)

    def __str__(self) -> str:
        return "<" + ",".join("K" if c is None else str(c) for c in self.comps) + ">"

    def __repr__(self) -> str:
        return f"ModuleVec({self})"

    def contains(self, x: Union[Fraction, int], m: ModelSpec) -> bool:
        """Membership of a rational in the module."""
        x = Fraction(x)
        if x == 0:
            return True
        return all(c is None or valuation(x, p) >= c for c, p in zip(self.comps, m.primes))

    @classmethod
    def A(cls, k: int) -> "ModuleVec":
        return cls((0,) * k)

    @classmethod
    def K(cls, k: int) -> "ModuleVec":
        return cls((None,) * k)


@dataclass(frozen=True)
class ElementVec:
    """Valuations of a nonzero element of ``K`` plus an optional rational witness."""

    vals: Tuple[int, ...]
    witness: Optional[Fraction] = None

    @classmethod
    def of(cls, x: Union[Fraction, int], m: ModelSpec) -> "ElementVec":
        x = Fraction(x)
        if x == 0:
            raise ModelError("zero has no valuation vector")
        return cls(tuple(valuation(x, p) for p in m.primes), x)

    @classmethod
    def realize(cls, vals: Sequence[int], m: ModelSpec) -> "ElementVec":
        x = Fraction(1)
        for p, a in zip(m.primes, vals):
            x *= Fraction(p) ** a
        return cls(tuple(vals), x)


def valuation(x: Union[Fraction, int], p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise ModelError("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def module_from_generators(m: ModelSpec, gens: Iterable[Union[Fraction, int]]) -> ModuleVec:
    vals = [ElementVec.of(g, m).vals for g in gens]
    if not vals:
        raise ModelError("at least one generator is required")
    return ModuleVec(tuple(min(col) for col in zip(*vals)))


def support(F: ModuleVec) -> int:
    """Bitmask of the K-full components."""
    return sum(1 << i for i, c in enumerate(F.comps) if c is None)


def is_submodule(F: ModuleVec, G: ModuleVec) -> bool:
    """``F ⊆ G``."""
    for f, g in zip(F.comps, G.comps):
        if g is None:
            continue
        if f is None or f < g:
            return False
    return True


def contains_one(F: ModuleVec) -> bool:
    return all(c is None or c <= 0 for c in F.comps)


def multiply(F: ModuleVec, G: ModuleVec) -> ModuleVec:
    return ModuleVec(tuple(None if f is None or g is None else f + g
                           for f, g in zip(F.comps, G.comps)))


def add(F: ModuleVec, G: ModuleVec) -> ModuleVec:
    """Module sum ``F + G``; also the union of a directed pair."""
    return ModuleVec(tuple(None if f is None or g is None else min(f, g)
                           for f, g in zip(F.comps, G.comps)))


def intersect(F: ModuleVec, G: ModuleVec) -> ModuleVec:
    out = []
    for f, g in zip(F.comps, G.comps):
        if f is None:
            out.append(g)
        elif g is None:
            out.append(f)
        else:
            out.append(max(f, g))
    return ModuleVec(tuple(out))


def scale(F: ModuleVec, x: ElementVec) -> ModuleVec:
    return ModuleVec(tuple(None if c is None else c + a for c, a in zip(F.comps, x.vals)))


def colon(F: ModuleVec, G) -> Union[ModuleVec, _Zero]:
    """``(F:G) = {x in K : xG ⊆ F}``; ``G`` may be ``ZERO``."""
    if G is ZERO:
        return ModuleVec.K(F.k)
    out = []
    for f, g in zip(F.comps, G.comps):
        if f is None:
            out.append(None)
        elif g is None:
            return ZERO
        else:
            out.append(f - g)
    return ModuleVec(tuple(out))


def overring_module(m: ModelSpec, T: int) -> ModuleVec:
    """``B_T``, the intersection of the ``V_i`` with ``i`` in the mask ``T``."""
    return ModuleVec(tuple(0 if T >> i & 1 else None for i in range(m.k)))


def localization(m: ModelSpec, p: int) -> ModuleVec:
    """``A_p`` for the prime with index ``p`` (0 is the zero ideal, i>0 is ``m_i``)."""
    if p == 0:
        return ModuleVec.K(m.k)
    if not 1 <= p <= m.k:
        raise ModelError(f"no prime m{p} in a model with k={m.k}")
    return overring_module(m, 1 << (p - 1))


def parse_module(text: str, k: Optional[int] = None) -> ModuleVec:
    s = text.strip()
    if not (s.startswith("<") and s.endswith(">")):
        raise ModelError(f"module must look like <e1,...,ek>: {text!r}")
    comps = []
    for tok in s[1:-1].split(","):
        tok = tok.strip()
        if tok == "K":
            comps.append(None)
        else:
            try:
                comps.append(int(tok))
            except ValueError:
                raise ModelError(f"bad module component {tok!r}") from None
    if k is not None and len(comps) != k:
        raise ModelError(f"module {text!r} has {len(comps)} components, model has {k}")
    return ModuleVec(tuple(comps))


def probe(k: int, S: int, P: int = 0) -> ModuleVec:
    """K-full on ``S``, exponent 1 on ``P``, 0 elsewhere."""
    return ModuleVec(tuple(None if S >> i & 1 else (1 if P >> i & 1 else 0) for i in range(k)))


def probe_modules(k: int, depth: int = 2) -> Iterator[ModuleVec]:
    """All vectors with components in ``{K} ∪ [-depth, depth]``."""
    values = [None] + list(range(-depth, depth + 1))
    for comps in itertools.product(values, repeat=k):
        yield ModuleVec(comps)


def integral_modules(k: int, depth: int = 2) -> Iterator[ModuleVec]:
    for comps in itertools.product(range(depth + 1), repeat=k):
        yield ModuleVec(comps)
