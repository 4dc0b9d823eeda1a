"""Termination checking for higher-order rewrite systems with sized types."""

from .constraints import ResourceExhausted, Solver, entails, equiv, evaluate, find_model, is_satisfiable, is_valid
from .parser import ParseError, Program, parse_constraint, parse_environment, parse_program, parse_size, parse_term, parse_type
from .pretty import show_constraint, show_size, show_term, show_type
from .rewriter import ground_size, head_beta_step, match_pattern, normalize, step
from .subtyping import SubtypeMismatch, check_sub, gen_sub
from .termination import Verdict, build_tau_less, check_program, derive_matching, infer_precedences, measure_constraint
from .typecheck import Checker, TypeCheckError, typecheck_gate

__version__ = "0.1.0"

__all__ = [
    "ResourceExhausted", "Solver", "entails", "equiv", "evaluate", "find_model", "is_satisfiable", "is_valid",
    "ParseError", "Program", "parse_constraint", "parse_environment", "parse_program", "parse_size",
    "parse_term", "parse_type", "show_constraint", "show_size", "show_term", "show_type",
    "ground_size", "head_beta_step", "match_pattern", "normalize", "step",
    "SubtypeMismatch", "check_sub", "gen_sub",
    "Verdict", "build_tau_less", "check_program", "derive_matching", "infer_precedences", "measure_constraint",
    "Checker", "TypeCheckError", "typecheck_gate",
]
