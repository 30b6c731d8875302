"""Classical and generalized Laplace transformations of hyperbolic linear PDEs in the plane."""

from .cascade import LaplaceChain, cascade_run, cascade_solve, laplace_invariants_sys, x1_transform, x2_transform
from .charform import (
    CharSystem,
    SubstitutionRecord,
    first_order_to_charsys,
    nth_order_to_charsys,
    second_order_to_charsys,
)
from .dsl import parse_operator, parse_problem, parse_scalar, parse_solution
from .errors import HyperLaplaceError
from .expr import LogForm, Scalar, VarSpec
from .genlaplace import PivotChoice, generalized_transform
from .lpdo import LPDO, CharOperator
from .solver import DriverConfig, SolutionBundle, factorize_and_solve, solve_triangular
from .verify import RealizationSpec, operator_identity, residual_check

__version__ = "0.1.0"

__all__ = [
    "CharOperator",
    "CharSystem",
    "DriverConfig",
    "HyperLaplaceError",
    "LPDO",
    "LaplaceChain",
    "LogForm",
    "PivotChoice",
    "RealizationSpec",
    "Scalar",
    "SolutionBundle",
    "SubstitutionRecord",
    "VarSpec",
    "cascade_run",
    "cascade_solve",
    "factorize_and_solve",
    "first_order_to_charsys",
    "generalized_transform",
    "laplace_invariants_sys",
    "nth_order_to_charsys",
    "operator_identity",
    "parse_operator",
    "parse_problem",
    "parse_scalar",
    "parse_solution",
    "residual_check",
    "second_order_to_charsys",
    "solve_triangular",
    "x1_transform",
    "x2_transform",
]
