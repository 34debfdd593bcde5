"""Two positive solutions of -Lap u = c(x) u + mu |grad u|^2 + f(x) on a box.

The quasilinear problem is mapped by v = (exp(mu u) - 1)/lam to a semilinear
one with a variational structure; its ball minimiser and mountain-pass point
are computed on a finite-difference grid and mapped back.
"""

from .errors import (ConfigError, ConvergenceError, DegenerateWeightError, GeometryError,
                     GridError, RegimeError, TransformDomainError, TwoSolveError)
from .functional import ProblemSpec, energy, gradient, residual_P, residual_Q
from .grid import Grid, build_grid, inner_h10, norm_h10, read_field, write_field
from .solvers import SolveOptions, SolveReport, solve_two
from .transform import u_from_v, v_from_u, verify_pair

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "DegenerateWeightError", "GeometryError",
    "GridError", "RegimeError", "TransformDomainError", "TwoSolveError",
    "ProblemSpec", "energy", "gradient", "residual_P", "residual_Q",
    "Grid", "build_grid", "inner_h10", "norm_h10", "read_field", "write_field",
    "SolveOptions", "SolveReport", "solve_two",
    "u_from_v", "v_from_u", "verify_pair",
]
