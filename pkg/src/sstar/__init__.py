"""Semistar operations on Z localized away from finitely many primes, and the
Zariski topology on them."""
from .valmodel import ModelError, ModelSpec, ModuleVec, make_model, parse_module
from .semistar import (
    SemistarOp, SupportMap, enumerate_all_ops, finite_type_closure, inf, is_finite_type,
    leq, normal_form, parse_op, qmax, qspec, stable_closure, sup,
)
from .verify import VerdictReport, run_suite

__all__ = [
    "ModelError", "ModelSpec", "ModuleVec", "make_model", "parse_module",
    "SemistarOp", "SupportMap", "enumerate_all_ops", "finite_type_closure", "inf",
    "is_finite_type", "leq", "normal_form", "parse_op", "qmax", "qspec",
    "stable_closure", "sup", "VerdictReport", "run_suite",
]
