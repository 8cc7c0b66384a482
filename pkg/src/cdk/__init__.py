"""Canonical duality solvers for nonconvex problems with quadratic measures."""
from .core import (
    CanonicalFunction,
    CanonicalMeasure,
    GOperator,
    QuadraticCanonicalProblem,
    SolveReport,
    TrialityClass,
    TrialityKind,
    assemble_G,
    classify_triality,
    dual_gradient,
    dual_hessian,
    eval_dual,
    eval_measures,
    eval_primal,
    eval_total_complementary,
    recover_primal,
    verify_solution,
)
from .kernels import BACKEND
from .linalg import (
    Definiteness,
    DefinitenessKind,
    classify_definiteness,
    pinv_apply,
    real_cubic_roots,
    solve_spd,
    sym_eigen,
)

__version__ = "0.1.0"
