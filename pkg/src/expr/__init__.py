"""
Scalar expressions with exact forward-mode derivatives.
"""
from .dual import DualNumber, gradient, hessian, jacobian, primal, seed
from .evaluator import ScalarExpr, constant, eval_with_derivatives, parse
from .parser import to_source

__all__ = [
    "DualNumber",
    "ScalarExpr",
    "constant",
    "eval_with_derivatives",
    "gradient",
    "hessian",
    "jacobian",
    "parse",
    "primal",
    "seed",
    "to_source",
]
