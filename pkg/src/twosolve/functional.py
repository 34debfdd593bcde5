"""Energy functional of the semilinear problem and residuals of both problems.

Notation: the quasilinear problem is

    -Lap u = c u + mu |grad u|^2 + f,                        (P)

and with v = (exp(mu u) - 1)/lam it becomes the semilinear problem

    -Lap v - (c + mu f) v = c g_lam(v) + (mu/lam) f,          (Q)

the Euler-Lagrange equation of

    I(v) = 1/2 int |grad v|^2 - (c + mu f)(v+)^2 - int c G_lam(v+) - (mu/lam) int f v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nonlinearity as nl
from .grid import Grid, inner_h10, integrate, norm_l2

__all__ = [
    "ProblemSpec",
    "EnergyBreakdown",
    "energy",
    "gradient",
    "gradient_norm",
    "residual_P",
    "residual_Q",
    "grad_sq_consistent",
    "grad_sq_centered",
]


@dataclass(eq=False)
class ProblemSpec:
    """Coefficients of (P) on a grid.

    ``q`` is only metadata: the Lebesgue exponent of c and f, used to check
    the admissible growth exponent in the geometry step.
    """

    grid: Grid
    c: np.ndarray
    f: np.ndarray
    mu: float
    q: float = float("inf")

    def __post_init__(self):
        n = self.grid.size
        self.c = np.array(np.broadcast_to(np.asarray(self.c, dtype=float), (n,)))
        self.f = np.array(np.broadcast_to(np.asarray(self.f, dtype=float), (n,)))
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.f))):
            raise ValueError("coefficients must be finite")
        if np.any(self.f < 0) or not np.any(self.f > 0):
            raise ValueError("f must be nonnegative with at least one positive node")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.q > self.grid.dimension / 2:
            raise ValueError(f"q must exceed N/2 = {self.grid.dimension / 2}, got {self.q}")
        self.mu = float(self.mu)

    @property
    def omega_plus(self) -> np.ndarray:
        return self.c > 0

    @property
    def omega_minus(self) -> np.ndarray:
        return self.c < 0

    def with_f(self, f) -> "ProblemSpec":
        return ProblemSpec(self.grid, self.c, f, self.mu, self.q)


@dataclass
class EnergyBreakdown:
    quadratic: float
    superquadratic: float
    linear: float
    total: float


def energy(spec: ProblemSpec, lam: float, v: np.ndarray) -> EnergyBreakdown:
    grid = spec.grid
    grid.check(v)
    vp = np.maximum(v, 0.0)
    quad = 0.5 * (inner_h10(grid, v, v) - integrate(grid, (spec.c + spec.mu * spec.f) * vp**2))
    sup = -integrate(grid, spec.c * nl.G(lam, vp))
    lin = -(spec.mu / lam) * integrate(grid, spec.f * v)
    return EnergyBreakdown(quad, sup, lin, quad + sup + lin)


def gradient(spec: ProblemSpec, lam: float, v: np.ndarray) -> np.ndarray:
    """Nodal field r with <r, phi>_quadrature = I'(v)[phi]."""
    grid = spec.grid
    grid.check(v)
    vp = np.maximum(v, 0.0)
    return (grid.laplacian @ v - (spec.c + spec.mu * spec.f) * vp
            - spec.c * nl.g(lam, vp) - (spec.mu / lam) * spec.f)


def gradient_norm(spec: ProblemSpec, lam: float, v: np.ndarray) -> float:
    return norm_l2(spec.grid, gradient(spec, lam, v))


def _expm1mx(x):
    """exp(x) - 1 - x without cancellation near 0."""
    x = np.asarray(x, dtype=float)
    out = np.expm1(x) - x
    small = np.abs(x) < 1e-2
    xs = x[small]
    out[small] = xs * xs * (0.5 + xs * (1 / 6 + xs * (1 / 24 + xs * (1 / 120 + xs / 720))))
    return out


def _neighbour_differences(grid: Grid, u: np.ndarray):
    """Yield (d_plus, d_minus, h) per axis: u_{i+1}-u_i and u_{i-1}-u_i."""
    arr = np.pad(grid.to_array(u), 1)
    inner = tuple(slice(1, -1) for _ in range(grid.dimension))
    centre = arr[inner]
    for axis, h in enumerate(grid.spacing):
        up = list(inner)
        dn = list(inner)
        up[axis] = slice(2, None)
        dn[axis] = slice(0, -2)
        yield arr[tuple(up)] - centre, arr[tuple(dn)] - centre, h


def grad_sq_consistent(grid: Grid, u: np.ndarray, mu: float) -> np.ndarray:
    """Edge-based stencil for mu |grad u|^2.

    sum over neighbours j of (exp(mu d_j) - 1 - mu d_j) / (mu h^2), d_j = u_j - u_i.
    Second-order consistent, and it makes the nodewise substitution
    v = (exp(mu u) - 1)/lam map the discrete (P) onto the discrete (Q) exactly.
    """
    total = np.zeros(grid.interior_shape)
    for dp, dm, h in _neighbour_differences(grid, u):
        total += (_expm1mx(mu * dp) + _expm1mx(mu * dm)) / (mu * h * h)
    return grid.to_field(total)


def grad_sq_centered(grid: Grid, u: np.ndarray, mu: float) -> np.ndarray:
    """mu |grad u|^2 from centred differences (boundary neighbours are zero)."""
    total = np.zeros(grid.interior_shape)
    for dp, dm, h in _neighbour_differences(grid, u):
        total += ((dp - dm) / (2 * h)) ** 2
    return mu * grid.to_field(total)


def residual_P(spec: ProblemSpec, u: np.ndarray, *, form: str = "consistent") -> float:
    """Quadrature L2 norm of -Lap u - c u - mu |grad u|^2 - f."""
    grid = spec.grid
    grid.check(u)
    if form == "consistent":
        gsq = grad_sq_consistent(grid, u, spec.mu)
    elif form == "centered":
        gsq = grad_sq_centered(grid, u, spec.mu)
    else:
        raise ValueError(f"unknown gradient form {form!r}")
    r = grid.laplacian @ u - spec.c * u - gsq - spec.f
    return norm_l2(grid, r)


def residual_Q(spec: ProblemSpec, lam: float, v: np.ndarray) -> float:
    """Quadrature L2 norm of the residual of (Q) written as

    -Lap v = (1/lam) c (1+lam v) ln(1+lam v) + (mu/lam) f (1+lam v).
    """
    grid = spec.grid
    grid.check(v)
    one = 1.0 + lam * v
    if np.any(one <= 0):
        raise ValueError("residual_Q needs 1 + lam v > 0")
    rhs = spec.c * one * np.log1p(lam * v) / lam + (spec.mu / lam) * spec.f * one
    return norm_l2(grid, grid.laplacian @ v - rhs)
