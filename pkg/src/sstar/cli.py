"""Command-line front end.

Examples::

    sstar --primes 2,3 ops eval "v" "<K,0>"
    sstar --primes 2,3 enumerate
    sstar --primes 2,3 space sstar --format dot
    sstar --primes 2,3 verify --checks PROP-EMBED EX5-DEDEKIND
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from .expr import prime_text
from .semistar import (
    check_axioms, enumerate_all_ops, finite_type_closure, is_finite_type, is_semifinite,
    is_spectral_op, is_stable, leq, normal_form, parse_op, qmax, qspec, stable_closure,
)
from .spaces import all_ops_space, finite_type_space, local_space, over_space, semistar_ft_space, spec_space
from .topology import TopologyError
from .valmodel import ModelError, make_model, parse_module
from .verify import any_failed, check_ids, reports_json, run_suite

FORMATS = ("json", "dot", "text")


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, top: bool) -> None:
    # accepted both before and after the subcommand
    default = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--primes", default=default("2,3"), help="comma-separated primes (default 2,3)")
    p.add_argument("--depth", type=int, default=default(2), help="probe depth (default 2)")
    p.add_argument("--out", default=default(None), help="write the report to FILE")
    p.add_argument("--format", choices=FORMATS, default=default(None), help="output format")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sstar", description="Semistar operations on semilocal PIDs.")
    _common(p, True)
    sub = p.add_subparsers(dest="command", required=True)

    ops = sub.add_parser("ops", help="operation algebra")
    ops_sub = ops.add_subparsers(dest="action", required=True)
    a = ops_sub.add_parser("list", help="all semistar operations with their normal forms")
    _common(a, False)
    a = ops_sub.add_parser("eval", help="evaluate EXPR at MODULE")
    a.add_argument("expr")
    a.add_argument("module")
    _common(a, False)
    a = ops_sub.add_parser("order", help="compare two operations")
    a.add_argument("left")
    a.add_argument("right")
    _common(a, False)
    a = ops_sub.add_parser("classify", help="properties of one operation")
    a.add_argument("expr")
    _common(a, False)

    sp = sub.add_parser("space", help="space reports")
    sp.add_argument("kind", choices=("spec", "over", "local", "sstar"))
    sp.add_argument("--inverse", action="store_true", help="use the inverse topology")
    sp.add_argument("--family", choices=("all", "finite-type", "semistar-ft"), default="all",
                    help="operation family for sstar (default all)")
    _common(sp, False)

    en = sub.add_parser("enumerate", help="every semistar operation with classification flags")
    _common(en, False)

    ve = sub.add_parser("verify", help="run the claim suite")
    ve.add_argument("--checks", nargs="+", metavar="ID", help="restrict to these check ids")
    ve.add_argument("--timings", action="store_true", help="include runtime_ms (not byte-stable)")
    ve.add_argument("--list", action="store_true", help="list check ids and exit")
    _common(ve, False)
    return p


def _model(text: str):
    toks = [t.strip() for t in text.split(",")]
    primes = []
    for t in toks:
        try:
            primes.append(int(t))
        except ValueError:
            raise UsageError(f"invalid prime {t!r}") from None
    return make_model(primes)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _flags(op) -> dict:
    return {
        "finite_type": is_finite_type(op),
        "stable": is_stable(op)[0],
        "spectral": is_spectral_op(op),
        "semifinite": is_semifinite(op)[0],
    }


def _op_record(op) -> dict:
    return {"name": op.name, "table": normal_form(op).text(), **_flags(op)}


def _primes(Y) -> List[str]:
    return [prime_text(p) for p in sorted(Y)]


def _cmd_ops(args, m) -> str:
    fmt = args.format or "text"
    if args.action == "list":
        ops = enumerate_all_ops(m)
        if fmt == "json":
            return _dumps([{"name": o.name, "table": normal_form(o).text()} for o in ops])
        return "".join(f"{o.name}\t{normal_form(o).text()}\n" for o in ops)
    if args.action == "eval":
        op = parse_op(m, args.expr, args.depth)
        F = parse_module(args.module, m.k)
        res = op.evaluate(F, args.depth)
        if fmt == "json":
            return _dumps({"op": op.name, "module": str(F), "value": str(res)})
        return f"{res}\n"
    if args.action == "order":
        a, b = parse_op(m, args.left, args.depth), parse_op(m, args.right, args.depth)
        le, ge = leq(a, b), leq(b, a)
        rel = "=" if le and ge else "<=" if le else ">=" if ge else "incomparable"
        if fmt == "json":
            return _dumps({"left": a.name, "right": b.name, "relation": rel})
        return f"{a.name} {rel} {b.name}\n"
    # classify
    op = parse_op(m, args.expr, args.depth)
    ax = check_axioms(op, args.depth)
    rec = {
        **_op_record(op),
        "axioms": {"ok": ax.ok, "failed": ax.failed, "witness": ax.witness},
        "finite_type_closure": finite_type_closure(op, args.depth).name,
        "qspec": _primes(qspec(op)),
        "qmax": _primes(qmax(op)),
    }
    if op.nf is not None:
        rec["stable_closure"] = stable_closure(op, args.depth).name
    if fmt == "json":
        return _dumps(rec)
    return "".join(f"{k}: {v}\n" for k, v in rec.items())


def _cmd_space(args, m) -> str:
    fmt = args.format or "json"
    if args.kind == "spec":
        X = spec_space(m)
    elif args.kind == "over":
        X = over_space(m)
    elif args.kind == "local":
        X = local_space(m)
    elif args.family == "finite-type":
        X = finite_type_space(m)
    elif args.family == "semistar-ft":
        X = semistar_ft_space(m)
    else:
        X = all_ops_space(m)
    checks = X.spectral_report()
    if args.inverse:
        X = X.inverse()
    if fmt == "dot":
        return X.to_dot()
    if fmt == "json":
        return _dumps({**X.to_json(), "kind": args.kind.upper(), "inverse": args.inverse,
                       "checks": checks})
    lines = [f"{X.name}: {X.n} points"]
    for x in X.points:
        below = sorted(y for y in X.closure([x]) if y != x)
        lines.append(f"  {x}  specializations: {', '.join(map(str, below)) or '-'}")
    lines.append("  " + ", ".join(f"{k}={v}" for k, v in checks.items()))
    return "\n".join(lines) + "\n"


def _cmd_enumerate(args, m) -> str:
    fmt = args.format or "text"
    recs = [_op_record(o) for o in enumerate_all_ops(m)]
    n_ft = sum(r["finite_type"] for r in recs)
    if fmt == "json":
        return _dumps({"model": str(m), "count": len(recs), "finite_type": n_ft, "operations": recs})
    lines = [f"{m}: {len(recs)} operations, {n_ft} finite-type"]
    for r in recs:
        tags = [k for k in ("finite_type", "stable", "spectral", "semifinite") if r[k]]
        lines.append(f"  {r['name']}  [{' '.join(tags)}]")
    return "\n".join(lines) + "\n"


def _cmd_verify(args, m):
    if args.list:
        return "".join(c + "\n" for c in check_ids()), 0
    fmt = args.format or "json"
    reports = run_suite(m, args.checks, args.depth)
    code = 1 if any_failed(reports) else 0
    if fmt == "json":
        return reports_json(reports, args.timings), code
    lines = [f"{r.status:4}  {r.check_id}  {r.paper_ref}" for r in reports]
    return "\n".join(lines) + "\n", code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.depth < 1:
            raise UsageError("--depth must be at least 1")
        m = _model(args.primes)
        if args.format == "dot" and args.command != "space":
            raise UsageError("--format dot is only available for space reports")
        code = 0
        if args.command == "ops":
            text = _cmd_ops(args, m)
        elif args.command == "space":
            text = _cmd_space(args, m)
        elif args.command == "enumerate":
            text = _cmd_enumerate(args, m)
        else:
            text, code = _cmd_verify(args, m)
    except (UsageError, ModelError, TopologyError) as exc:
        print(f"sstar: error: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
