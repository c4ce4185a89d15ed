"""Optimal solution search, exhaustive oracle and independent verifier."""

from .constraints import LazyNogood, Violation, check_global_constraints, find_lazy_violations
from .factoring import canonical_factoring
from .oracle import OracleLimit, brute_force, brute_force_all
from .search import INFEASIBLE, OPTIMAL, TIMEOUT, SolveOptions, SolveResult, lower_bound_costs, solve
from .verify import VerifyResult, verify

__all__ = [
    "INFEASIBLE", "OPTIMAL", "TIMEOUT", "LazyNogood", "OracleLimit", "SolveOptions", "SolveResult",
    "Violation", "VerifyResult", "brute_force", "brute_force_all", "canonical_factoring",
    "check_global_constraints", "find_lazy_violations", "lower_bound_costs", "solve", "verify",
]
