"""Flexible Krylov methods for l1/lp regularized linear inverse problems.

The flexible Golub-Kahan decomposition lives in ``decomp`` and the small
projected Tikhonov solves built on it in ``projsolve``.  ``solvers`` drives the
FLSQR/FLSMR family of hybrid methods.  Reweighting and FISTA baselines are in
``baselines``; test problem generators are in ``problems``.
"""

from .baselines import FistaConfig, IrnConfig, run_fista, run_irn, run_pirn
from .linop import ConfigurationError, LinearOperator, MatrixOperator, aslinearoperator
from .regparam import ParamPolicy
from .solvers import METHODS, SolverAbort, SolverConfig, SolverRun, solve
from .transforms import HaarTransform
from .weights import WeightPolicy

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "FistaConfig", "HaarTransform", "IrnConfig", "LinearOperator",
    "METHODS", "MatrixOperator", "ParamPolicy", "SolverAbort", "SolverConfig", "SolverRun",
    "WeightPolicy", "aslinearoperator", "run_fista", "run_irn", "run_pirn", "solve",
]
