"""Change of variables v = (exp(mu u) - 1)/lam between (P) and (Q)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TransformDomainError
from .functional import ProblemSpec, residual_P, residual_Q

__all__ = ["TransformPair", "v_from_u", "u_from_v", "verify_pair", "roundtrip_error",
           "CLAMP_TOL"]

CLAMP_TOL = 1e-6
_EXP_LIMIT = 700.0


@dataclass
class TransformPair:
    u: np.ndarray
    v: np.ndarray
    mu: float
    lam: float
    roundtrip_error: float
    residual_P: float
    residual_Q: float
    residual_P_centered: float
    positivity_margin: float
    ok: bool


def v_from_u(u, mu: float, lam: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lam must be positive")
    if u.size and mu * float(np.max(u)) > _EXP_LIMIT:
        raise TransformDomainError(f"exp overflow: mu * max(u) = {mu * np.max(u):.4g} > 700")
    return np.expm1(mu * u) / lam


def u_from_v(v, mu: float, lam: float) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lam must be positive")
    if v.size and float(np.min(lam * v)) <= -1.0:
        raise TransformDomainError("u_from_v needs 1 + lam v > 0 at every node")
    return np.log1p(lam * v) / mu


def roundtrip_error(u, mu: float, lam: float) -> float:
    """max |u - u_from_v(v_from_u(u))|."""
    u = np.asarray(u, dtype=float)
    if not u.size:
        return 0.0
    return float(np.max(np.abs(u - u_from_v(v_from_u(u, mu, lam), mu, lam))))


def _away_from_boundary(grid) -> np.ndarray:
    """Mask of interior nodes that are not adjacent to the boundary."""
    mask = np.zeros(grid.interior_shape, dtype=bool)
    mask[tuple(slice(1, -1) for _ in range(grid.dimension))] = True
    if not mask.any():
        mask[:] = True
    return grid.to_field(mask).astype(bool)


def verify_pair(spec: ProblemSpec, lam: float, v_solution: np.ndarray,
                *, tol_P: float = 1e-6) -> TransformPair:
    """Map a solution of (Q) to (P) and collect the diagnostics.

    Values of v within ``CLAMP_TOL`` below zero are clamped; anything more
    negative cannot come from a critical point and is rejected.
    """
    v = np.asarray(v_solution, dtype=float)
    spec.grid.check(v)
    if v.size and float(np.min(v)) < -CLAMP_TOL:
        raise TransformDomainError(
            f"v has min {np.min(v):.3g} < -{CLAMP_TOL}: not a critical point")
    v = np.maximum(v, 0.0)
    u = u_from_v(v, spec.mu, lam)
    roundtrip = roundtrip_error(u, spec.mu, lam)
    rP = residual_P(spec, u)
    rQ = residual_Q(spec, lam, v)
    rPc = residual_P(spec, u, form="centered")
    margin = float(np.min(u[_away_from_boundary(spec.grid)]))
    ok = rP <= tol_P and margin > 0
    return TransformPair(u, v, spec.mu, lam, roundtrip, rP, rQ, rPc, margin, ok)
