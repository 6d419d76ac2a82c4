"""Typed specification language with differentiable-logic semantics."""
from .ast import Bool, Index, Real, Vec, alpha_eq
from .evaluator import SamplingConfig, SemanticContext, eval_expr, loss
from .logics import Logic, all_logics, logic
from .parser import parse, parse_expr, print_spec
from .pretty import pretty_print
from .typechecker import check_spec, typecheck

__all__ = [
    "Bool", "Index", "Real", "Vec", "alpha_eq",
    "SamplingConfig", "SemanticContext", "eval_expr", "loss",
    "Logic", "all_logics", "logic",
    "parse", "parse_expr", "print_spec", "pretty_print",
    "check_spec", "typecheck",
]

__version__ = "0.1.0"
