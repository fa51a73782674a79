"""Seeded random constructor expressions for the oracle-equivalence checks."""
import random

from sstar.expr import (
    Divisorial, FieldOp, FiniteType, Identity, Inf, LocFin, Spectral, StableClosure, Sup, Wedge,
)

LEAVES = ("d", "field", "v", "wedge", "spectral")
NODES = ("finite", "stable", "inf", "sup", "locfin")


def _mask(rng, k, nonempty=False):
    lo = 1 if nonempty else 0
    return rng.randint(lo, (1 << k) - 1)


def random_expr(rng: random.Random, k: int, depth: int = 2):
    kinds = LEAVES if depth <= 0 else LEAVES + NODES + NODES
    kind = rng.choice(kinds)
    if kind == "d":
        return Identity()
    if kind == "field":
        return FieldOp()
    if kind == "v":
        return Divisorial()
    if kind == "wedge":
        return Wedge(tuple(_mask(rng, k) for _ in range(rng.randint(1, 2))))
    if kind == "spectral":
        return Spectral(tuple(rng.sample(range(k + 1), rng.randint(1, k + 1))))
    if kind == "finite":
        return FiniteType(random_expr(rng, k, depth - 1))
    if kind == "stable":
        return StableClosure(random_expr(rng, k, depth - 1))
    if kind in ("inf", "sup"):
        kids = tuple(random_expr(rng, k, depth - 1) for _ in range(rng.randint(2, 3)))
        return Inf(kids) if kind == "inf" else Sup(kids)
    pairs = []
    for _ in range(rng.randint(1, 2)):
        T = _mask(rng, k, nonempty=True)
        pairs.append((T, random_expr(rng, bin(T).count("1"), depth - 1)))
    return LocFin(tuple(pairs))


def corpus(k: int, n: int, seed: int = 0, depth: int = 2):
    rng = random.Random(seed * 1000 + k)
    seen, out = set(), []
    while len(out) < n:
        e = random_expr(rng, k, depth)
        if e.text() not in seen:
            seen.add(e.text())
            out.append(e)
    return out
