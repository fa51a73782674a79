import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sstar.valmodel import (
    ZERO, ElementVec, ModelError, ModuleVec, add, colon, contains_one, integral_modules,
    intersect, is_submodule, localization, make_model, module_from_generators, multiply,
    overring_module, parse_module, probe, probe_modules, scale, support,
)

from conftest import model
from oracles import RatModule

M2 = model(2)
M3 = model(3)


def V(text, k=None):
    return parse_module(text, k)


# ------------------------------------------------------------------ construction

def test_make_model_basic():
    assert M2.k == 2 and str(M2) == "Z_(2,3)"
    assert make_model([5]).k == 1


@pytest.mark.parametrize("bad", [[], [2, 2], [4], [1], [0], [-3], [6, 5]])
def test_make_model_rejects(bad):
    with pytest.raises(ModelError):
        make_model(bad)


def test_duplicate_message():
    with pytest.raises(ModelError, match="duplicate"):
        make_model([2, 2])


def test_module_from_generators_examples():
    assert module_from_generators(M2, [Fraction(1, 2), 3]) == V("<-1,0>")
    assert module_from_generators(M2, [1]) == ModuleVec.A(2)
    assert module_from_generators(M2, [6]) == V("<1,1>")
    with pytest.raises(ModelError):
        module_from_generators(M2, [0, 1])


def test_render_and_parse_roundtrip():
    for F in probe_modules(3, 2):
        assert parse_module(str(F), 3) == F
    assert str(V("<-1,K>")) == "<-1,K>"
    with pytest.raises(ModelError):
        V("<1,2>", 3)
    with pytest.raises(ModelError):
        V("1,2")
    with pytest.raises(ModelError):
        V("<1,x>")


# ------------------------------------------------------------------ small examples

def test_order_examples():
    assert is_submodule(V("<1,0>"), V("<0,0>"))
    assert is_submodule(V("<0,0>"), V("<K,0>"))
    assert not is_submodule(V("<K,0>"), V("<0,0>"))
    assert contains_one(V("<-1,0>"))
    assert not contains_one(V("<1,0>"))
    assert contains_one(ModuleVec.K(2))


def test_arithmetic_examples():
    assert multiply(V("<1,0>"), V("<0,1>")) == V("<1,1>")
    assert intersect(V("<1,0>"), V("<0,1>")) == V("<1,1>")
    assert intersect(V("<K,0>"), V("<K,1>")) == V("<K,1>")
    assert scale(ModuleVec.A(2), ElementVec.realize((-1, -1), M2)) == V("<-1,-1>")
    assert colon(ModuleVec.A(2), V("<1,0>")) == V("<-1,0>")
    assert colon(ModuleVec.A(2), V("<K,0>")) is ZERO
    assert colon(V("<1,2>"), ZERO) == ModuleVec.K(2)


def test_overrings_and_localizations():
    assert overring_module(M2, 0b01) == V("<0,K>")
    assert overring_module(M2, 0b11) == ModuleVec.A(2)
    assert overring_module(M2, 0) == ModuleVec.K(2)
    assert localization(M2, 0) == ModuleVec.K(2)
    assert localization(M2, 1) == V("<0,K>")


def test_probe_family_sizes():
    assert len(list(probe_modules(2, 2))) == 6 ** 2
    assert len(list(integral_modules(3, 1))) == 8
    assert probe(2, 0b01, 0b10) == V("<K,1>")
    assert support(V("<K,1>")) == 0b01


def test_element_realization():
    x = ElementVec.realize((2, -1), M2)
    assert x.witness == Fraction(4, 3)
    assert ElementVec.of(Fraction(4, 3), M2).vals == (2, -1)
    with pytest.raises(ModelError):
        ElementVec.of(0, M2)


# ------------------------------------------------------------------ rational-witness oracle

SMALL = [2, 3, 5, 7, 11]


def _rational(es, sign):
    x = Fraction(sign)
    for p, e in zip(SMALL, es):
        x *= Fraction(p) ** e
    return x


rationals = st.builds(_rational, st.lists(st.integers(-2, 2), min_size=5, max_size=5),
                      st.sampled_from([1, -1]))


def _finite_mask(k):
    return st.integers(0, (1 << k) - 1)


def _as_vec(R):
    return ModuleVec(R.exponents())


@settings(max_examples=200, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=4), rationals)
def test_generated_module_membership_matches_oracle(gens, x):
    F = module_from_generators(M3, gens)
    R = RatModule.generated(gens, M3.primes)
    assert F == _as_vec(R)
    assert F.contains(x, M3) == R.contains(x)
    for g in gens:
        assert F.contains(g, M3)


def _rat_module(g, mask, m):
    return RatModule(g, [i for i in range(m.k) if mask >> i & 1], m.primes)


@settings(max_examples=200, deadline=None)
@given(rationals, _finite_mask(3), rationals, _finite_mask(3), rationals)
def test_products_intersections_colons_match_oracle(g1, t1, g2, t2, x):
    R1, R2 = _rat_module(g1, t1, M3), _rat_module(g2, t2, M3)
    F, G = _as_vec(R1), _as_vec(R2)
    assert F.contains(x, M3) == R1.contains(x)
    assert multiply(F, G) == _as_vec(R1.times(R2))
    assert intersect(F, G).contains(x, M3) == (R1.contains(x) and R2.contains(x))
    c, rc = colon(F, G), R1.colon(R2)
    if rc is None:
        assert c is ZERO
    else:
        assert c == _as_vec(rc)
    # x in (F:G) iff xG ⊆ F, with G sampled as g2 times powers of inverted primes
    off = [p for i, p in enumerate(M3.primes) if not t2 >> i & 1]
    samples = [Fraction(1)] + [Fraction(1, p ** 8) for p in off]
    inside = all(R1.contains(x * g2 * b) for b in samples)
    assert (c is not ZERO and c.contains(x, M3)) == inside


@settings(max_examples=100, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=3), st.lists(rationals, min_size=1, max_size=3))
def test_sum_matches_oracle(a, b):
    F, G = module_from_generators(M3, a), module_from_generators(M3, b)
    assert add(F, G) == _as_vec(RatModule.generated(a + b, M3.primes))


# ------------------------------------------------------------------ lattice invariants

comps = st.one_of(st.none(), st.integers(-2, 2))
vecs = st.lists(comps, min_size=3, max_size=3).map(lambda c: ModuleVec(tuple(c)))
elems = st.lists(st.integers(-2, 2), min_size=3, max_size=3)


@given(vecs, vecs, vecs)
def test_containment_is_partial_order(F, G, H):
    assert is_submodule(F, F)
    if is_submodule(F, G) and is_submodule(G, F):
        assert F == G
    if is_submodule(F, G) and is_submodule(G, H):
        assert is_submodule(F, H)


@given(vecs, vecs, vecs)
def test_multiply_intersect_monotone(F, G, H):
    if is_submodule(F, G):
        assert is_submodule(multiply(F, H), multiply(G, H))
        assert is_submodule(intersect(F, H), intersect(G, H))
        assert is_submodule(add(F, H), add(G, H))


@given(vecs, vecs)
def test_meet_and_join(F, G):
    I, S = intersect(F, G), add(F, G)
    assert is_submodule(I, F) and is_submodule(I, G)
    assert is_submodule(F, S) and is_submodule(G, S)
    assert intersect(F, S) == F and add(F, I) == F


@given(vecs)
def test_one_in_F_iff_A_below(F):
    assert contains_one(F) == is_submodule(ModuleVec.A(3), F)


@given(vecs, vecs, elems)
def test_scaling_invariants(F, G, vals):
    x = ElementVec.realize(vals, M3)
    assert is_submodule(scale(F, x), scale(G, x)) == is_submodule(F, G)
    assert support(scale(F, x)) == support(F)
    inv = ElementVec.realize([-v for v in vals], M3)
    assert scale(scale(F, x), inv) == F


def test_double_dual_exhaustive():
    A = ModuleVec.A(3)
    for c in itertools.product([None, -2, -1, 0, 1, 2], repeat=3):
        F = ModuleVec(c)
        dd = colon(A, colon(A, F))
        assert dd == (F if F.is_fractional else ModuleVec.K(3))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_union_of_finitely_generated_submodules(d):
    # join of bounded integer-vector submodules of F, as the bound grows
    for c in itertools.product([None, -1, 0, 1], repeat=2):
        F = ModuleVec(c)
        join = None
        for g in itertools.product(range(-d - 2, d + 1), repeat=2):
            G = ModuleVec(g)
            if is_submodule(G, F):
                join = G if join is None else add(join, G)
        want = tuple(-d - 2 if x is None else x for x in c)
        assert join.comps == want
