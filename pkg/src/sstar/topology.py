"""Finite topological spaces generated by a subbasis.

A finite topology is determined by the minimal open neighbourhood of each
point (the intersection of the subbasic opens containing it), so most
questions are answered from those without listing every open set.  Listing
opens is only done for spaces of at most ``MAX_LIST_POINTS`` points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

MAX_LIST_POINTS = 20

Point = Hashable


class TopologyError(ValueError):
    pass


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True, eq=False)
class FinSpace:
    points: Tuple[Point, ...]
    subbasis: Tuple[int, ...]
    name: str = ""
    _index: Dict[Point, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {p: i for i, p in enumerate(self.points)}
        if len(index) != len(self.points):
            raise TopologyError("duplicate points")
        object.__setattr__(self, "_index", index)

    # ------------------------------------------------------------ masks
    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def mask(self, Y: Iterable[Point]) -> int:
        out = 0
        for y in Y:
            if y not in self._index:
                raise TopologyError(f"{y!r} is not a point of {self.name or 'the space'}")
            out |= 1 << self._index[y]
        return out

    def ids(self, mask: int) -> List[Point]:
        return [self.points[i] for i in _bits(mask)]

    def idset(self, mask: int) -> frozenset:
        return frozenset(self.ids(mask))

    # ------------------------------------------------------------ structure
    @cached_property
    def nbhd(self) -> Tuple[int, ...]:
        """Minimal open neighbourhood of each point (empty intersection = whole space)."""
        out = []
        for i in range(self.n):
            acc = self.full
            for U in self.subbasis:
                if U >> i & 1:
                    acc &= U
            out.append(acc)
        return tuple(out)

    def is_open(self, U: int) -> bool:
        return all(self.nbhd[i] & U == self.nbhd[i] for i in _bits(U))

    def is_closed(self, C: int) -> bool:
        return self.is_open(self.full & ~C)

    def opens(self) -> List[int]:
        """Every open set, canonically ordered (size, then mask)."""
        if self.n > MAX_LIST_POINTS:
            raise TopologyError(f"refusing to list opens of a {self.n}-point space")
        fam = {0}
        for B in set(self.nbhd):
            fam |= {U | B for U in fam}
        return sorted(fam, key=lambda U: (bin(U).count("1"), U))

    def closure_mask(self, Y: int) -> int:
        return sum(1 << i for i in range(self.n) if self.nbhd[i] & Y)

    def closure(self, Y: Iterable[Point]) -> frozenset:
        return self.idset(self.closure_mask(self.mask(Y)))

    def smallest_open(self, Y: int) -> int:
        out = 0
        for i in _bits(Y):
            out |= self.nbhd[i]
        return out

    def leq(self, x: Point, y: Point) -> bool:
        """Specialization preorder: ``x <= y`` iff ``x`` lies in the closure of ``y``."""
        return bool(self.nbhd[self._index[x]] >> self._index[y] & 1)

    def specialization(self) -> Dict[Point, frozenset]:
        """``x -> {y : x <= y}``."""
        return {x: self.idset(self.nbhd[i]) for i, x in enumerate(self.points)}

    def hasse_edges(self) -> List[Tuple[Point, Point]]:
        """Covering pairs ``(x, y)`` with ``x < y`` strictly and nothing in between."""
        n = self.n
        lt = [[bool(self.nbhd[i] >> j & 1) and not self.nbhd[j] >> i & 1 for j in range(n)]
              for i in range(n)]
        edges = []
        for i in range(n):
            for j in range(n):
                if lt[i][j] and not any(lt[i][c] and lt[c][j] for c in range(n)):
                    edges.append((self.points[i], self.points[j]))
        return edges

    def subspace(self, Y: Iterable[Point], name: str = "") -> "FinSpace":
        Y = list(Y)
        idx = [self._index[y] for y in Y]

        def trace(U):
            return sum(1 << a for a, i in enumerate(idx) if U >> i & 1)

        return FinSpace(tuple(Y), tuple(sorted({trace(U) for U in self.subbasis})), name)

    # ------------------------------------------------------------ axioms
    def is_T0(self) -> bool:
        return len(set(self.nbhd)) == self.n

    def quasi_compact(self, Y: Optional[int] = None,
                      cover: Optional[Sequence[int]] = None) -> Tuple[bool, List[int]]:
        """Reduce an open cover of ``Y`` to an irredundant finite subcover.

        The default cover is the minimal neighbourhoods of the points of
        ``Y``.  Finite covers always reduce, so the answer is True whenever
        the family actually covers ``Y``.
        """
        Y = self.full if Y is None else Y
        cover = list(self.nbhd[i] for i in _bits(Y)) if cover is None else list(cover)
        for U in cover:
            if not self.is_open(U):
                raise TopologyError("cover member is not open")
        union = 0
        for U in cover:
            union |= U
        if union & Y != Y:
            raise TopologyError("family does not cover the subset")
        sub = list(dict.fromkeys(cover))
        changed = True
        while changed:
            changed = False
            for U in list(sub):
                rest = 0
                for W in sub:
                    if W != U:
                        rest |= W
                if rest & Y == Y and len(sub) > 1:
                    sub.remove(U)
                    changed = True
                    break
        return True, sub

    def compact_open_basis_ok(self) -> bool:
        """Compact opens form a basis closed under finite intersections."""
        basis = set(self.nbhd)
        if self.n <= MAX_LIST_POINTS:
            compact = [U for U in self.opens() if self.quasi_compact(U)[0]]
            cs = set(compact)
            if not all(U & W in cs for U in compact for W in compact):
                return False
            return basis <= cs
        return all(self.is_open(U & W) and self.quasi_compact(U & W)[0]
                   for U in basis for W in basis)

    def is_sober(self) -> Tuple[bool, str]:
        """Every irreducible closed set has exactly one generic point.

        Small spaces: every closed set is enumerated and tested for
        irreducibility directly.  Larger ones: irreducible closed sets of a
        finite space are point closures, so only those are examined.
        """
        if self.n <= MAX_LIST_POINTS:
            closed = [self.full & ~U for U in self.opens()]
            for C in closed:
                if not C:
                    continue
                proper = [D for D in closed if D != C and D & C == D]
                # a decomposition C = D1 ∪ D2 survives enlarging each part to a maximal proper one
                top = [D for D in proper if not any(E != D and E & D == D for E in proper)]
                if any(D1 | D2 == C for D1 in top for D2 in top):
                    continue
                generic = [i for i in _bits(C) if self.closure_mask(1 << i) == C]
                if len(generic) != 1:
                    return False, "enumerated"
            return True, "enumerated"
        for i in range(self.n):
            C = self.closure_mask(1 << i)
            if sum(1 for j in _bits(C) if self.closure_mask(1 << j) == C) != 1:
                return False, "point-closures"
        return True, "point-closures"

    def spectral_report(self) -> Dict[str, bool]:
        rep = {
            "T0": self.is_T0(),
            "quasi_compact": self.quasi_compact()[0],
            "compact_open_basis": self.compact_open_basis_ok(),
            "sober": self.is_sober()[0],
        }
        rep["spectral"] = all(rep.values())
        return rep

    def is_spectral(self) -> bool:
        return self.spectral_report()["spectral"]

    # ------------------------------------------------------------ inverse topology
    @cached_property
    def _inverse(self) -> "FinSpace":
        if not self.is_spectral():
            raise TopologyError(f"{self.name or 'space'} is not spectral")
        # closed basis = compact opens = all opens; point closures generate them as opens
        sub = tuple(sorted({self.closure_mask(1 << i) for i in range(self.n)}))
        inv = FinSpace(self.points, sub, (self.name + "^inv") if self.name else "inv")
        for i in range(self.n):
            for j in range(self.n):
                lhs = inv.closure_mask(1 << i) & ~inv.closure_mask(1 << j) == 0
                rhs = self.closure_mask(1 << j) & ~self.closure_mask(1 << i) == 0
                if lhs != rhs:
                    raise TopologyError("inverse topology fails the closure exchange property")
        return inv

    def inverse(self) -> "FinSpace":
        return self._inverse

    def inverse_closure(self, Y: Iterable[Point]) -> frozenset:
        Ym = self.mask(Y)
        via_space = self._inverse.closure_mask(Ym)
        if via_space != self.smallest_open(Ym):
            raise TopologyError("inverse closure differs from generization closure")
        return self.idset(via_space)

    # ------------------------------------------------------------ export
    def same_topology(self, other: "FinSpace") -> bool:
        if self.points != other.points:
            return False
        return self.nbhd == other.nbhd

    def to_json(self) -> dict:
        out = {"space": self.name, "points": [str(p) for p in self.points]}
        if self.n <= MAX_LIST_POINTS:
            out["opens"] = [[self.points.index(p) for p in self.ids(U)] for U in self.opens()]
        else:
            out["basis"] = [[self.points.index(p) for p in self.ids(U)] for U in self.nbhd]
        return out

    def to_dot(self) -> str:
        lines = [f'digraph "{self.name or "space"}" {{', "  rankdir=BT;"]
        for i, p in enumerate(self.points):
            lines.append(f'  n{i} [label="{p}"];')
        for x, y in self.hasse_edges():
            lines.append(f"  n{self._index[x]} -> n{self._index[y]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def from_subbasis(points: Sequence[Point], subbasis: Iterable[Iterable[Point]],
                  name: str = "") -> FinSpace:
    points = tuple(points)
    index = {p: i for i, p in enumerate(points)}
    masks = set()
    for U in subbasis:
        mask = 0
        for p in U:
            if p not in index:
                raise TopologyError(f"subbasis member mentions stray point {p!r}")
            mask |= 1 << index[p]
        masks.add(mask)
    return FinSpace(points, tuple(sorted(masks)), name)


# ------------------------------------------------------------------ maps

Map = Mapping[Point, Point]


@dataclass
class MapVerdict:
    ok: bool
    reason: str = ""
    witness: Optional[dict] = None

    def __bool__(self):
        return self.ok


def _preimage(f: Map, X: FinSpace, Y: FinSpace, V: int) -> int:
    targets = Y.idset(V)
    return X.mask(x for x in X.points if f[x] in targets)


def check_continuous(f: Map, X: FinSpace, Y: FinSpace) -> MapVerdict:
    """Preimages of the subbasic opens of ``Y`` are open in ``X``."""
    for V in Y.subbasis:
        pre = _preimage(f, X, Y, V)
        if not X.is_open(pre):
            return MapVerdict(False, "preimage not open",
                              {"open": sorted(map(str, Y.ids(V))), "preimage": sorted(map(str, X.ids(pre)))})
    return MapVerdict(True)


def check_embedding(f: Map, X: FinSpace, Y: FinSpace) -> MapVerdict:
    """Injective, continuous, and open onto its image with the subspace topology."""
    images = [f[x] for x in X.points]
    if len(set(images)) != len(images):
        return MapVerdict(False, "not injective")
    cont = check_continuous(f, X, Y)
    if not cont:
        return cont
    img = Y.mask(images)
    for i in range(X.n):
        U = X.nbhd[i]
        fU = Y.mask(f[x] for x in X.ids(U))
        for y in Y.ids(fU):
            if Y.nbhd[Y._index[y]] & img & ~fU:
                return MapVerdict(False, "image of an open is not open in the image",
                                  {"open": sorted(map(str, X.ids(U)))})
    return MapVerdict(True)


def check_retraction(r: Map, X: FinSpace, Y: FinSpace, section: Map) -> MapVerdict:
    """``r: X -> Y`` and ``section: Y -> X`` continuous with ``r ∘ section = id``."""
    for name, f, A, B in (("retraction", r, X, Y), ("section", section, Y, X)):
        v = check_continuous(f, A, B)
        if not v:
            return MapVerdict(False, f"{name} not continuous", v.witness)
    for y in Y.points:
        if r[section[y]] != y:
            return MapVerdict(False, "r ∘ section is not the identity", {"point": str(y)})
    return MapVerdict(True)
