"""Claim catalog and suite runner.

Each check runs one statement about the Zariski topology on semistar
operations on one model and returns a :class:`VerdictReport`.  Reports carry
their evidence in ``witness``; a failing report always has one.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .expr import Sup, mask_text, prime_text
from .semistar import (
    MAX_ENUM_K, SupportMap, divisorial_op, enumerate_all_ops, eq, equivalence_stable_ft_spectral,
    field_op, finite_type_closure, finite_type_ops, identity_op, is_finite_type,
    is_locally_finite, is_semifinite, leq, locfin_build, make_op, stable_closure,
    stable_closure_routes, sup_table,
)
from .spaces import (
    all_ops_space, compactness_propositions, iota_map, lambda_map, local_space,
    phi_report, retraction_report, semistar_ft_space, sigma_report, spec_space,
    sstar_space,
)
from .spectralops import (
    dw_check, prime_subsets, semifinite_stable, stable_closure_spectral, weakly_equivalent,
)
from .topology import check_continuous, check_retraction
from .valmodel import ModelError, ModelSpec, overring_module, probe_modules

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass(frozen=True)
class VerdictReport:
    check_id: str
    paper_ref: str
    model: ModelSpec
    status: str
    witness: Optional[dict] = None
    runtime_ms: int = 0

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "check_id": self.check_id,
            "claim": self.paper_ref,
            "model": {"name": str(self.model), "primes": list(self.model.primes)},
            "status": self.status,
            "witness": self.witness,
        }
        if timings:
            out["runtime_ms"] = self.runtime_ms
        return out


class Skip(Exception):
    """Raised by a check that is degenerate on the given model."""


CheckFn = Callable[[ModelSpec, int], Tuple[bool, dict]]
CATALOG: Dict[str, Tuple[str, CheckFn]] = {}


def _check(check_id: str, claim: str):
    def deco(fn: CheckFn) -> CheckFn:
        CATALOG[check_id] = (claim, fn)
        return fn
    return deco


# ------------------------------------------------------------------ helpers

def _closed_code(g: SupportMap) -> int:
    return sum(1 << C for C in g.closed_sets())


def _up_masks(ops) -> List[int]:
    """``up[i]``: bitmask of the ops ``>= ops[i]``.

    ``g <= h`` iff every ``h``-closed set is ``g``-closed.
    """
    codes = [_closed_code(o.nf) for o in ops]
    up = []
    for cx in codes:
        u = 0
        for j, cy in enumerate(codes):
            if cy & ~cx == 0:
                u |= 1 << j
        up.append(u)
    return up


def _first_failure(items, pred):
    for it in items:
        if not pred(it):
            return it
    return None


# ------------------------------------------------------------------ the space of operations

@_check("REM-BASIC-A", "the field operation is generic; finite-type operations are dense")
def _rem_basic_a(m, depth):
    X = all_ops_space(m)
    generic = X.closure([field_op(m).name]) == frozenset(X.points)
    ft = [o.name for o in X.ops if is_finite_type(o)]
    dense = X.closure(ft) == frozenset(X.points)
    return generic and dense, {"points": X.n, "field_generic": generic,
                               "finite_type_dense": dense, "finite_type_count": len(ft)}


@_check("REM-BASIC-B", "the identity lies in every nonempty closed set")
def _rem_basic_b(m, depth):
    X = all_ops_space(m)
    d = X.points.index(identity_op(m).name)
    # a nonempty closed set contains some closure{x}; d is in it iff x is in nbhd(d)
    ok = X.nbhd[d] == X.full
    wit = {"points": X.n}
    if X.n <= 20:
        bad = [C for C in (X.full & ~U for U in X.opens()) if C and not C >> d & 1]
        ok = ok and not bad
        wit["closed_sets"] = len(X.opens())
        if bad:
            wit["closed_set_without_d"] = sorted(X.ids(bad[0]))
    return ok, wit


@_check("REM-BASIC-C", "open sets are up-sets for the pointwise order")
def _rem_basic_c(m, depth):
    X = all_ops_space(m)
    up = _up_masks(X.ops)
    for U in X.subbasis:
        for i in range(X.n):
            if U >> i & 1 and up[i] & ~U:
                j = (up[i] & ~U).bit_length() - 1
                return False, {"open": sorted(X.ids(U)), "member": X.points[i],
                               "above_but_outside": X.points[j]}
    return True, {"subbasic_opens": len(X.subbasis)}


@_check("REM-BASIC-D", "fractional probes generate the topology on finite-type operations")
def _rem_basic_d(m, depth):
    ops = finite_type_ops(m)
    full = sstar_space(m, ops)
    frac = sstar_space(m, ops, [F for F in probe_modules(m.k, depth) if F.is_fractional])
    deep = sstar_space(m, ops, probe_modules(m.k, depth))
    ok = full.same_topology(frac) and full.same_topology(deep)
    wit = {"points": full.n, "fractional_probes_agree": full.same_topology(frac),
           "depth_probes_agree": full.same_topology(deep)}
    return ok, wit


@_check("PROP-CHIUSURA", "closure of a point is its down-set; the identity is the only closed point")
def _prop_chiusura(m, depth):
    X = all_ops_space(m)
    up = _up_masks(X.ops)
    # closure{x} = {y : x in nbhd(y)} = down-set iff nbhd(y) = up-set(y) for all y
    for i in range(X.n):
        if X.nbhd[i] != up[i]:
            return False, {"point": X.points[i], "nbhd": sorted(X.ids(X.nbhd[i])),
                           "up_set": sorted(X.ids(up[i]))}
    closed_pts = [X.points[i] for i in range(X.n) if X.closure_mask(1 << i) == 1 << i]
    ok = closed_pts == [identity_op(m).name]
    return ok, {"points": X.n, "closed_points": closed_pts}


@_check("PROP-QUOZ", "finite-type closure is a topological retraction")
def _prop_quoz(m, depth):
    r = retraction_report(m)
    ok = r["retraction"] and r["idempotent"] and r["preimage_identity"]
    return ok, r


@_check("PROP-EMBED", "overrings embed into finite-type operations via wedges")
def _prop_embed(m, depth):
    r = phi_report(m)
    return r["embedding"], r


@_check("REM-T-EQ-D", "the finite-type closure of v is the identity")
def _rem_td(m, depth):
    t = finite_type_closure(divisorial_op(m), depth)
    return eq(t, identity_op(m)), {"t": t.name}


@_check("PROP-COMPACT-FT", "compact families of finite-type operations have finite-type infimum")
def _prop_compact_ft(m, depth):
    r = compactness_propositions(m)
    sub = {k: r[k] for k in ("finite_type_family", "overrings")}
    return all(v["ok"] for v in sub.values()), sub


@_check("PROP-LOCFIN", "locally finite families of finite-type operations give finite type")
def _prop_locfin(m, depth):
    Ts = list(range(1, 1 << m.k))
    rng = random.Random(0)
    fams = []
    for r in range(1, len(Ts) + 1):
        fams.extend(itertools.combinations(Ts, r))
    if len(fams) > 200:
        fams = fams[:len(Ts)] + rng.sample(fams[len(Ts):], 200)
    checked = 0
    for fam in fams:
        pairs = [(T, rng.choice(finite_type_ops(m.sub(T)))) for T in fam]
        ok_lf, _ = is_locally_finite(m, list(fam), depth)
        op = locfin_build(m, pairs)
        checked += 1
        if not (ok_lf and is_finite_type(op)):
            return False, {"family": [mask_text(T) for T in fam], "op": op.name}
    return True, {"families": checked}


@_check("PROP-APERTI", "intersections of subbasic opens are complete sublattices and compact")
def _prop_aperti(m, depth):
    X = all_ops_space(m)
    idx = {o.nf: i for i, o in enumerate(X.ops)}
    rng = random.Random(0)
    subs = sorted(set(X.subbasis))
    inters = sorted({a & b for a, b in itertools.combinations_with_replacement(subs, 2)} - {0})
    limit_pairs = 3000
    if len(inters) > 60:
        inters = rng.sample(inters, 60)
    for U in inters:
        mem = [i for i in range(X.n) if U >> i & 1]
        pairs = list(itertools.combinations(mem, 2))
        if len(pairs) > limit_pairs:
            pairs = rng.sample(pairs, limit_pairs)
        for i, j in pairs:
            a, b = X.ops[i].nf, X.ops[j].nf
            lo, hi = idx[a.meet(b)], idx[sup_table([a, b])]
            if not (U >> lo & 1 and U >> hi & 1):
                return False, {"open": sorted(X.ids(U)), "a": X.points[i], "b": X.points[j],
                               "inf": X.points[lo], "sup": X.points[hi]}
        if not X.quasi_compact(U)[0]:
            return False, {"open": sorted(X.ids(U)), "reason": "not quasi-compact"}
    return True, {"intersections": len(inters)}


@_check("LEMMA-SUP", "the supremum is the union of finite compositions")
def _lemma_sup(m, depth):
    ops = enumerate_all_ops(m)
    up = _up_masks(ops)
    idx = {o.nf: i for i, o in enumerate(ops)}
    rng = random.Random(0)
    pairs = list(itertools.combinations(range(len(ops)), 2))
    if len(pairs) > 2000:
        pairs = rng.sample(pairs, 2000)
    fams = [list(p) for p in pairs]
    for _ in range(100):
        fams.append(rng.sample(range(len(ops)), min(len(ops), rng.randint(3, 5))))
    for fam in fams:
        bounds = reduce_and(up[i] for i in fam)
        # least upper bound: the bound below all others
        lub = [j for j in range(len(ops)) if bounds >> j & 1 and up[j] & bounds == bounds]
        s = idx[sup_table([ops[i].nf for i in fam])]
        if lub != [s]:
            return False, {"family": [ops[i].name for i in fam], "sup": ops[s].name,
                           "lub": [ops[j].name for j in lub]}
    # definitional composition unions on small families
    for fam in fams[:20]:
        make_op(m, Sup(tuple(ops[i].expr for i in fam)), depth,
                nf=sup_table([ops[i].nf for i in fam]))
    return True, {"families": len(fams)}


def reduce_and(masks: Iterable[int]) -> int:
    out = -1
    for x in masks:
        out &= x
    return out


@_check("THM-SPECTRAL", "finite-type operations form a spectral space")
def _thm_spectral(m, depth):
    X = sstar_space(m, finite_type_ops(m), name=f"SStar_f {m}")
    rep = X.spectral_report()
    return all(rep.values()), {"points": X.n, **rep}


@_check("COR-SEMISTAR", "finite-type (semi)star operations form a spectral space")
def _cor_semistar(m, depth):
    X = semistar_ft_space(m)
    rep = X.spectral_report()
    return all(rep.values()), {"points": X.n, "ops": list(X.points), **rep}


# ------------------------------------------------------------------ overrings and local overrings

@_check("SEC3-SIGMA", "extension to an overring is an injective, type-preserving embedding")
def _sec3_sigma(m, depth):
    reps = [sigma_report(m, T) for T in range(1, 1 << m.k)]
    keys = ("injective", "finite_type_both_ways", "image_is_ops_above_B",
            "restriction_identity", "continuous", "embedding")
    bad = _first_failure(reps, lambda r: all(r[k] for k in keys))
    return bad is None, bad or {"overrings": [r["T"] for r in reps]}


@_check("SEC4-LAMBDA", "the center map on local overrings is a continuous retraction")
def _sec4_lambda(m, depth):
    L, S = local_space(m), spec_space(m)
    lam, iota = lambda_map(m), iota_map(m)
    cont = check_continuous(lam, L, S)
    ret = check_retraction(lam, L, S, iota)
    comp = compactness_propositions(m)
    sub = {k: comp[k] for k in ("local_overrings", "spectral", "valuations")}
    ok = cont.ok and ret.ok and all(v["ok"] for v in sub.values())
    return ok, {"lambda": lam, "continuous": cont.ok, "retraction": ret.ok,
                "reason": cont.reason or ret.reason, **sub}


# ------------------------------------------------------------------ spectral and stable operations

def _prime_labels(Y):
    return [prime_text(p) for p in sorted(Y)]


@_check("SEC5-WEQ", "three characterizations of weak equivalence agree")
def _sec5_weq(m, depth):
    subsets = list(prime_subsets(m))
    n = 0
    for Y, Z in itertools.combinations_with_replacement(subsets, 2):
        r = weakly_equivalent(m, Y, Z)
        n += 1
        if not r["agree"]:
            return False, {"Y": _prime_labels(Y), "Z": _prime_labels(Z), **r}
    for Y in subsets:
        try:
            stable_closure_spectral(m, Y)
        except ModelError as exc:
            return False, {"Y": _prime_labels(Y), "error": str(exc)}
    return True, {"pairs": n, "subsets": len(subsets)}


def _stable_sample(m: ModelSpec):
    ops = list(enumerate_all_ops(m))
    if len(ops) <= 100:
        return ops
    rng = random.Random(0)
    ft = [o for o in ops if is_finite_type(o)]
    return ft + rng.sample([o for o in ops if not is_finite_type(o)], 60)


@_check("SEC5-STABLE", "stable closure: union formula, qmax formula and inverse closure agree")
def _sec5_stable(m, depth):
    ops = _stable_sample(m)
    for o in ops:
        routes = stable_closure_routes(o, depth)
        if len(set(routes.values())) != 1:
            return False, {"op": o.name, **{k: str(v) for k, v in routes.items()}}
        tilde = stable_closure(o, depth)
        if not eq(tilde, stable_closure(finite_type_closure(o, depth), depth)):
            return False, {"op": o.name, "reason": "differs from stable closure of finite type"}
        eqv = equivalence_stable_ft_spectral(o)
        if not eqv["agree"]:
            return False, {"op": o.name, **eqv}
    return True, {"ops": len(ops)}


@_check("SEC5-DW", "DW criteria: w = d, dense representations, dense qmax of t")
def _sec5_dw(m, depth):
    r = dw_check(m)
    if not r["agree"]:
        return False, r
    raise Skip(f"every model is a PID, hence DW; the three conditions agree ({r['dw']})")


@_check("SEC5-SEMIFIN", "semifinite stable closure is s over the inverse closure of qspec")
def _sec5_semifin(m, depth):
    ops = _stable_sample(m)
    n = 0
    for o in ops:
        semi, bad = is_semifinite(o, depth)
        if not semi:
            continue
        n += 1
        r = semifinite_stable(m, o)
        if not (r["formula_holds"] and r["corollary_holds"]):
            return False, {"op": o.name, **r}
    return n > 0, {"semifinite_ops": n}


@_check("EX5-DEDEKIND", "v is semifinite but not of finite type; only the field operation lies above it")
def _ex5_dedekind(m, depth):
    if m.k < 2:
        raise Skip("needs k >= 2: a DVR has only the identity and the field operation")
    v = divisorial_op(m)
    B = overring_module(m, m.full & ~1)
    Bv = v.evaluate(B)
    fg = make_op(m, finite_type_closure(v, depth).expr).evaluate(B)
    semi, _ = is_semifinite(v, depth)
    above = [o.name for o in finite_type_ops(m) if leq(v, o)]
    ok = semi and not is_finite_type(v) and Bv != fg and above == [field_op(m).name]
    return ok, {"B": str(B), "B^v": str(Bv), "fg_join": str(fg), "semifinite": semi,
                "finite_type": is_finite_type(v), "finite_type_above_v": above}


# ------------------------------------------------------------------ runner

def check_ids() -> List[str]:
    return sorted(CATALOG)


def run_check(m: ModelSpec, check_id: str, depth: int = 2) -> VerdictReport:
    claim, fn = CATALOG[check_id]
    t0 = time.perf_counter()
    try:
        ok, wit = fn(m, depth)
        status = PASS if ok else FAIL
    except Skip as exc:
        status, wit = SKIP, {"reason": str(exc)}
    except (ModelError, ArithmeticError, RuntimeError) as exc:
        status, wit = FAIL, {"error": f"{type(exc).__name__}: {exc}"}
    if status == FAIL and not wit:
        wit = {"reason": "check returned false"}
    ms = int((time.perf_counter() - t0) * 1000)
    return VerdictReport(check_id, claim, m, status, wit, ms)


def run_suite(m: ModelSpec, check_ids: Optional[Sequence[str]] = None,
              depth: int = 2) -> List[VerdictReport]:
    if m.k > MAX_ENUM_K:
        raise ModelError(f"the suite needs k <= {MAX_ENUM_K}, got {m.k}")
    if depth < 1:
        raise ModelError("depth must be at least 1")
    ids = sorted(CATALOG) if check_ids is None else sorted(set(check_ids))
    unknown = [c for c in ids if c not in CATALOG]
    if unknown:
        raise ModelError(f"unknown check id: {unknown[0]}")
    return [run_check(m, c, depth) for c in ids]


def reports_json(reports: Sequence[VerdictReport], timings: bool = False) -> str:
    return json.dumps([r.to_dict(timings) for r in reports], indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"


def any_failed(reports: Sequence[VerdictReport]) -> bool:
    return any(r.status == FAIL for r in reports)
