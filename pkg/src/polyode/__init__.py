"""Polynomial ODEs with variable coefficients: bounds, existence criteria and closed solutions."""

from .core import (BlowUp, DomainError, PolyODE, ReachedEnd, Trajectory, integrate,
                   reflect, sign_flipped)
from .expr import ExprDomainError, ExprSyntaxError, evaluate, parse_coefficient, unparse

__all__ = [
    "PolyODE", "Trajectory", "ReachedEnd", "BlowUp", "DomainError", "integrate",
    "reflect", "sign_flipped", "parse_coefficient", "evaluate", "unparse",
    "ExprSyntaxError", "ExprDomainError",
]
__version__ = "0.1.0"
