"""Analysis of complex vector fields homogeneous with respect to dilations.

A field ``L = r^(lam-1) (p(theta) d_theta - i q(theta) r d_r)`` is stored
through its complex degree and the periodic coefficients p, q.
"""

from .errors import ConvergenceError, PreconditionError
from .field import HomogeneousField, check_structure, compute_mu, field_build_pq
from .presets import get_preset

__all__ = ["ConvergenceError", "HomogeneousField", "PreconditionError", "check_structure",
           "compute_mu", "field_build_pq", "get_preset"]
__version__ = "0.1.0"
