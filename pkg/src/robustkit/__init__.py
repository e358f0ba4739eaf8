"""Robust discrete optimization toolkit.

Turns integrality-gap verifiers for a nominal covering problem (set cover
is the built-in reference) into approximation algorithms for cost-robust
versions under polyhedral and ellipsoidal uncertainty, and checks every
guarantee against brute-force oracles at desk scale.
"""

from robustkit.instances import SetCoverInstance, parse_instance, random_instance
from robustkit.lp_core import LpProblem, LpSolution, SolverTolerances, solve_lp
from robustkit.oracle import exact_robust_opt, verdict
from robustkit.reductions import ALGORITHMS, ReductionConfig, RobustSolution
from robustkit.uncertainty import (
    EllipsoidAffine,
    EllipsoidDirect,
    PolyhedralAffine,
    PolyhedralDirect,
    budget_set,
    normalize,
    parse_uncertainty,
    worst_case,
)
from robustkit.verifiers import GreedyVerifier, RoundingVerifier, make_verifier

__all__ = [
    "SetCoverInstance",
    "parse_instance",
    "random_instance",
    "LpProblem",
    "LpSolution",
    "SolverTolerances",
    "solve_lp",
    "exact_robust_opt",
    "verdict",
    "ALGORITHMS",
    "ReductionConfig",
    "RobustSolution",
    "EllipsoidAffine",
    "EllipsoidDirect",
    "PolyhedralAffine",
    "PolyhedralDirect",
    "budget_set",
    "normalize",
    "parse_uncertainty",
    "worst_case",
    "GreedyVerifier",
    "RoundingVerifier",
    "make_verifier",
]

__version__ = "0.1.0"
