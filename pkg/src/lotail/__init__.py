"""Exact and Monte-Carlo verification of tail domination for Bernoulli processes on an interval."""

from .family import ProcessFamily, StepFunction, gen_family, make_family, make_step
from .oracle import enumerate_exact, path_sup, phi_gap
from .chaining import family_bound, optimize_plan, paper_plan, total_constant
from .inequalities import derive_constants, run_check, verify_family

__all__ = [
    "ProcessFamily",
    "StepFunction",
    "gen_family",
    "make_family",
    "make_step",
    "enumerate_exact",
    "path_sup",
    "phi_gap",
    "family_bound",
    "optimize_plan",
    "paper_plan",
    "total_constant",
    "derive_constants",
    "run_check",
    "verify_family",
]
