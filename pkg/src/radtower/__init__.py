"""Exact computer algebra for radical parametrizations.

The package computes, from a parametrization built with field operations and
nested roots plus an explicit branch choice: the implicit (radical) variety,
the tower variety, the tracing index, rational reparametrizations for a
supported class of tower varieties, and rationalizing substitutions for
integrals of radical functions of one variable.
"""

from .gaussian import GaussianRational
from .poly import MultiPoly, RatFunc, VarTable

__all__ = ["GaussianRational", "MultiPoly", "RatFunc", "VarTable"]

__version__ = "0.1.0"
