import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from sstar.expr import (
    Compose, Divisorial, ExprSyntaxError, Identity, LocFin, StableClosure, Wedge,
    evaluate_expr, parse_expr,
)
from sstar.semistar import (
    MAX_ENUM_K, NotSemistarError, SupportMap, check_axioms, closure_operators,
    enumerate_all_ops, eq, equivalence_stable_ft_spectral, field_op, finite_type_closure,
    finite_type_ops, finite_type_witness, identity_op, inf, is_finite_type, is_locally_finite,
    is_semifinite, is_spectral_op, is_stable, leq, locfin_build, make_op, normal_form,
    parse_op, qmax, qspec, quasi_ideal_test, stable_closure, stable_closure_routes, sup,
    wedge_op,
)
from sstar.valmodel import (
    ModelError, ModuleVec, integral_modules, intersect, is_submodule, parse_module,
    probe_modules,
)

from conftest import model
from exprgen import corpus
from oracles import brute_closure_operators, brute_lub, pointwise_leq

M1, M2, M3 = model(1), model(2), model(3)


def op(text, m=M2):
    return parse_op(m, text)


def V(text):
    return parse_module(text)


# ------------------------------------------------------------------ parsing and evaluation

def test_parse_and_render():
    for text in ["d", "v", "field", "wedge{1}", "wedge[{1},{2}]", "inf(v,wedge{1})",
                 "sup(wedge{1},wedge{2})", "finite(v)", "stable(finite(v))", "s{0,m1}",
                 "locfin({1}:d;{2}:d)", "compose(wedge{1},v)"]:
        assert parse_expr(text, 2).text() == text
    assert parse_expr("t", 2) == parse_expr("finite(v)", 2)
    assert parse_expr("w", 2) == parse_expr("stable(finite(v))", 2)


@pytest.mark.parametrize("bad", ["inf(", "wedge{3}", "s{m5}", "v v", "frobnicate", "inf()"])
def test_parse_errors(bad):
    with pytest.raises(ExprSyntaxError):
        parse_expr(bad, 2)


def test_evaluate_examples():
    assert op("v").evaluate(V("<K,0>")) == ModuleVec.K(2)
    assert op("v").evaluate(V("<1,5>")) == V("<1,5>")
    assert op("wedge{1}").evaluate(V("<1,5>")) == V("<1,K>")


def test_normal_form_examples():
    assert normal_form(op("d")) == SupportMap.identity(2)
    assert normal_form(op("v")).table == (0, 3, 3, 3)
    assert normal_form(op("wedge{1}")).table == tuple(S | 2 for S in range(4))
    assert normal_form(op("v")).text() == "{} -> {}, {1} -> {1,2}, {2} -> {1,2}, {1,2} -> {1,2}"


def test_compose_has_no_normal_form():
    c = op("compose(wedge{1},v)")
    assert not c.genuine
    with pytest.raises(NotSemistarError):
        normal_form(c)


# ------------------------------------------------------------------ oracle equivalence

@pytest.mark.parametrize("k", [1, 2, 3])
def test_normal_form_matches_definitional_evaluation(k):
    m = model(k)
    for e in corpus(k, 40, seed=1):
        o = make_op(m, e, check=False)
        for F in probe_modules(k, 2):
            assert o.nf.apply(F) == evaluate_expr(m, e, F, 2), (e.text(), str(F))


def test_stabilization_depth_three():
    for e in corpus(2, 30, seed=2):
        o = make_op(M2, e, check=False)
        for F in probe_modules(2, 3):
            assert o.nf.apply(F) == evaluate_expr(M2, e, F, 3)


# ------------------------------------------------------------------ order

def test_order_examples():
    assert leq(op("d"), op("v"))
    assert not leq(op("wedge{1}"), op("v"))
    assert leq(op("v"), op("field"))
    assert eq(op("wedge[{1},{2}]"), op("d"))


def test_leq_is_pointwise_module_containment():
    ops = enumerate_all_ops(M2)
    mods = list(probe_modules(2, 1))
    for a, b in itertools.product(ops, ops):
        pointwise = all(is_submodule(a.evaluate(F), b.evaluate(F)) for F in mods)
        assert leq(a, b) == pointwise


# ------------------------------------------------------------------ axioms

def test_axioms_pass_for_all_enumerated_ops():
    for m in (M1, M2):
        for o in enumerate_all_ops(m):
            assert check_axioms(o).ok, o.name


def test_axioms_pass_k3():
    for o in enumerate_all_ops(M3):
        assert check_axioms(o, depth=1).ok, o.name


def test_compose_fails_idempotency_with_witness():
    verdict = check_axioms(op("compose(wedge{1},v)"))
    assert not verdict.ok and verdict.failed == "idempotency"
    assert verdict.witness == {"F": "<0,0>", "F*": "<0,K>", "F**": "<K,K>"}


def test_non_closure_map_rejected():
    with pytest.raises(NotSemistarError):
        leq(op("compose(wedge{1},v)"), op("d"))


# ------------------------------------------------------------------ finite type

def test_finite_type_examples():
    v = op("v")
    assert eq(finite_type_closure(v), op("d"))
    assert not is_finite_type(v)
    assert is_finite_type(op("wedge{1}"))
    assert finite_type_witness(v)["F*"] == "<K,K>"


def test_finite_type_witness_for_v_at_B():
    w = op("v")
    F = V("<K,0>")
    assert w.evaluate(F) == ModuleVec.K(2)
    assert evaluate_expr(M2, parse_expr("finite(v)", 2), F, 2) == F


@pytest.mark.parametrize("k", [1, 2, 3])
def test_finite_type_ops_are_the_wedges(k):
    m = model(k)
    ft = {o.nf for o in finite_type_ops(m)}
    assert ft == {SupportMap.wedge(k, T) for T in range(1 << k)}


@pytest.mark.parametrize("k", [2, 3])
def test_finite_type_closure_idempotent_monotone(k):
    ops = enumerate_all_ops(model(k))
    for a in ops:
        fa = finite_type_closure(a, check=False)
        assert eq(finite_type_closure(fa, check=False), fa)
        assert leq(fa, a)
    for a, b in itertools.combinations(ops, 2):
        if leq(a, b):
            assert leq(finite_type_closure(a, check=False), finite_type_closure(b, check=False))


# ------------------------------------------------------------------ inf and sup

def test_inf_examples():
    m = inf([op("v"), op("wedge{1}")])
    assert m.nf.table == (0, 3, 2, 3)
    assert inf([op("v")]) is not None and eq(inf([op("v")]), op("v"))
    assert eq(inf([op("d"), op("v")]), op("d"))
    with pytest.raises(ValueError):
        inf([])


def test_sup_examples():
    assert eq(sup([op("wedge{1}"), op("wedge{2}")]), op("field"))
    assert eq(sup([op("v"), op("wedge{1}")]), op("field"))
    assert eq(sup([op("v")]), op("v"))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_inf_sup_are_glb_lub(k):
    ops = enumerate_all_ops(model(k))
    tables = [o.nf.table for o in ops]
    rng = random.Random(k)
    fams = list(itertools.combinations(range(len(ops)), 2))
    if len(fams) > 400:
        fams = rng.sample(fams, 400)
    for fam in fams:
        members = [ops[i] for i in fam]
        s = sup(members)
        assert s.nf.table == brute_lub(tables, [tables[i] for i in fam])
        i = inf(members)
        lower = [t for t in tables if all(pointwise_leq(t, tables[j]) for j in fam)]
        assert all(pointwise_leq(t, i.nf.table) for t in lower)
        assert i.nf.table in lower


# ------------------------------------------------------------------ enumeration

@pytest.mark.parametrize("k,count", [(1, 2), (2, 7), (3, 61)])
def test_enumeration_matches_brute_force(k, count):
    brute = {tuple(t) for t in brute_closure_operators(k)}
    enum = {g.table for g in closure_operators(k)}
    assert len(enum) == count and enum == brute


def test_enumeration_k2_names():
    names = [o.name for o in enumerate_all_ops(M2)]
    assert names == ["d", "inf(v,wedge{2})", "inf(v,wedge{1})", "v", "wedge{2}", "wedge{1}", "field"]
    semistar = [o.name for o in enumerate_all_ops(M2) if o.nf(0) == 0]
    assert semistar == ["d", "inf(v,wedge{2})", "inf(v,wedge{1})", "v"]


def test_enumeration_k4_count_and_guard():
    assert len(closure_operators(4)) == 2480
    with pytest.raises(ModelError):
        closure_operators(MAX_ENUM_K + 1)


def test_enumerated_names_reparse():
    for o in enumerate_all_ops(M3):
        assert eq(parse_op(M3, o.name), o)


# ------------------------------------------------------------------ quasi-ideals

def test_qspec_qmax_examples():
    w1 = op("wedge{1}")
    assert qspec(w1) == {0, 1} and qmax(w1) == {1}
    assert qspec(op("v")) == {0, 1, 2}
    assert qmax(op("v")) == {1, 2}
    assert qspec(op("field")) == {0}
    # the zero ideal is the only quasi-ideal left
    assert qmax(op("field")) == {0}


def test_quasi_ideal_rejects_non_integral():
    with pytest.raises(ModelError):
        quasi_ideal_test(op("v"), V("<-1,0>"))


@pytest.mark.parametrize("k", [2, 3])
def test_quasi_ideal_invariants(k):
    m = model(k)
    ops = enumerate_all_ops(m)
    A = ModuleVec.A(k)
    ideals = list(integral_modules(k, 2))
    for o in ops:
        for a in ideals:
            assert quasi_ideal_test(o, intersect(o.evaluate(a), A))
        assert qmax(o) <= qspec(o)
    for a, b in itertools.product(ops, ops):
        if leq(a, b):
            for i in ideals:
                if quasi_ideal_test(b, i):
                    assert quasi_ideal_test(a, i)


def test_semifinite_examples():
    assert is_semifinite(op("v"))[0]
    for T in range(4):
        assert is_semifinite(wedge_op(M2, T))[0]
    assert is_semifinite(inf([op("v"), op("wedge{2}")]))[0]


# ------------------------------------------------------------------ stability and stable closure

def test_stability_examples():
    ok, wit = is_stable(op("v"))
    assert not ok and wit["F"] == "<0,K>" and wit["G"] == "<K,0>"
    assert wit["(F∩G)*"] == "<0,0>" and wit["F*∩G*"] == "<K,K>"
    assert is_stable(op("wedge{1}"))[0] and is_spectral_op(op("wedge{1}"))
    assert eq(op("wedge{1}"), op("s{m1}"))
    assert is_stable(op("d"))[0]


def test_stable_closure_examples():
    assert eq(stable_closure(op("v")), op("d"))
    assert eq(stable_closure(op("wedge{1}")), op("wedge{1}"))
    assert eq(stable_closure(op("field")), op("field"))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_stable_closure_invariants(k):
    m = model(k)
    for o in enumerate_all_ops(m):
        routes = stable_closure_routes(o)
        assert len(set(routes.values())) == 1
        tilde = stable_closure(o)
        ft = finite_type_closure(o, check=False)
        assert leq(tilde, ft) and leq(ft, o)
        assert eq(stable_closure(tilde), tilde)
        assert qmax(ft) == qmax(tilde)
        assert is_stable(tilde)[0] and is_finite_type(tilde)


@pytest.mark.parametrize("text,expected", [("wedge{1}", True), ("v", False), ("inf(v,wedge{1})", False)])
def test_equivalence_of_stable_finite_spectral(text, expected):
    res = equivalence_stable_ft_spectral(op(text))
    assert res["agree"]
    assert res["equals_stable_closure"] is expected


@pytest.mark.parametrize("k", [1, 2, 3])
def test_spectral_equals_finite_type_here(k):
    for o in enumerate_all_ops(model(k)):
        assert is_spectral_op(o) == is_finite_type(o) == o.stable


# ------------------------------------------------------------------ locfin

def test_locfin_examples():
    d1, d2 = identity_op(M2.sub(1)), identity_op(M2.sub(2))
    assert eq(locfin_build(M2, [(1, d1), (2, d2)]), op("d"))
    assert eq(locfin_build(M2, [(1, field_op(M2.sub(1)))]), op("field"))
    assert eq(locfin_build(M2, [(1, d1)]), op("wedge{1}"))
    assert is_locally_finite(M2, [1, 2])[0]


def test_locfin_rejects_wrong_submodel():
    with pytest.raises(ModelError):
        locfin_build(M2, [(3, identity_op(M2.sub(1)))])


def test_locfin_with_stable_subexpr():
    o = make_op(M3, LocFin(((0b011, StableClosure(Divisorial())), (0b100, Identity()))))
    assert is_finite_type(o)


# ------------------------------------------------------------------ hypothesis: closure-operator laws

tables = st.sampled_from(closure_operators(3))


@settings(max_examples=100, deadline=None)
@given(tables, tables)
def test_meet_and_sup_of_closure_operators(g, h):
    m = g.meet(h)
    assert m.is_closure() and m.leq(g) and m.leq(h)
    from sstar.semistar import sup_table
    s = sup_table([g, h])
    assert s.is_closure() and g.leq(s) and h.leq(s)


@settings(max_examples=100, deadline=None)
@given(tables)
def test_closed_sets_roundtrip(g):
    assert SupportMap.from_closed_sets(3, g.closed_sets()) == g


def test_wedge_expression_is_meet_of_wedges():
    a = make_op(M3, Wedge((0b011, 0b101)))
    assert eq(a, inf([wedge_op(M3, 0b011), wedge_op(M3, 0b101)]))


def test_compose_evaluates_without_normal_form():
    c = make_op(M2, Compose((Wedge((1,)), Divisorial())))
    assert c.evaluate(ModuleVec.A(2)) == V("<0,K>")
