"""Differential-equation solver combining constrained expressions with a
random-feature free function trained by least squares."""

from .activation import ActivationKind, activate
from .bench import RunConfig, RunReport, compare_table, monte_carlo, run_once, sweep
from .constrained import build_ce, ce_basis_row, ce_eval
from .elm import ElmBasis, basis_row, eval_g, init_elm
from .problems import PROBLEM_IDS, catalog, exact, get_problem
from .solver import SolveConfig, gauss_newton, lstsq_svd, solve

__all__ = [
    "ActivationKind", "activate", "ElmBasis", "init_elm", "basis_row", "eval_g",
    "build_ce", "ce_basis_row", "ce_eval", "SolveConfig", "lstsq_svd", "gauss_newton",
    "solve", "PROBLEM_IDS", "get_problem", "catalog", "exact", "RunConfig", "RunReport",
    "run_once", "monte_carlo", "sweep", "compare_table",
]
