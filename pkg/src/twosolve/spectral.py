"""Principal eigenvalues of the linear operators that gate the existence regime.

Every routine here is an inverse iteration ``x <- K^{-1} B x`` on a symmetric
pencil ``(K, B)`` with ``K`` positive definite, so a single sparse LU of ``K``
serves the whole iteration:

* ``principal_eigen``:   K = -Lap + V - sigma I,  B = I
* ``weighted_eigen``:    K = -Lap - c,            B = diag(f)   (f may vanish)
* ``coercivity_pencil``: K = -Lap + V,            B = -Lap
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConvergenceError, DegenerateWeightError, RegimeError
from .grid import Grid

__all__ = [
    "EigenResult",
    "principal_eigen",
    "weighted_eigen",
    "coercivity_pencil",
    "coercivity_constant",
    "alpha_c",
    "lambda1_scan",
    "TOL",
    "MAXITER",
]

TOL = 1e-10
MAXITER = 10_000
RAYLEIGH_FLOOR = 1e-14


@dataclass
class EigenResult:
    value: float
    eigenfunction: np.ndarray
    iterations: int
    residual: float


def _l2(w, x):
    return float(np.sqrt(w * np.dot(x, x)))


def _inverse_iteration(K, B, w, *, tol, maxiter, what):
    """Dominant eigenvector of K^{-1} B; returns (theta, x, its, residual).

    ``theta`` is the Rayleigh quotient x.Kx / x.Bx, i.e. the smallest
    eigenvalue of K x = theta B x. ``x`` has unit quadrature L2 norm.
    """
    n = K.shape[0]
    lu = splu(sp.csc_matrix(K))
    x = np.ones(n)
    x /= _l2(w, x)
    theta, res, seen_nondegenerate = np.nan, np.inf, False
    for it in range(1, maxiter + 1):
        y = lu.solve(B @ x)
        nrm = _l2(w, y)
        if not np.isfinite(nrm) or nrm == 0.0:
            break
        x = y / nrm
        Kx, Bx = K @ x, B @ x
        den = float(np.dot(x, Bx))
        if den <= RAYLEIGH_FLOOR * float(np.dot(x, x)):
            continue
        seen_nondegenerate = True
        theta = float(np.dot(x, Kx)) / den
        r = Kx - theta * Bx
        res = _l2(w, r)
        if res <= tol * max(1.0, _l2(w, Kx)):
            break
    else:
        it = maxiter
        if seen_nondegenerate:
            raise ConvergenceError(
                f"{what}: inverse iteration did not converge in {maxiter} steps",
                residual=res, iterations=it, stage="spectral")
    if not seen_nondegenerate:
        raise DegenerateWeightError(
            f"{what}: weighted norm degenerate for every iterate", stage="spectral")
    if x.sum() < 0:
        x = -x
    return theta, x, it, res


def _gershgorin_lower(K) -> float:
    K = sp.csr_matrix(K)
    diag = K.diagonal()
    off = np.asarray(abs(K).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - off))


def _principal_of(K, w, *, tol, maxiter, what):
    n = K.shape[0]
    sigma = _gershgorin_lower(K) - 1.0
    shifted = (K - sigma * sp.identity(n, format="csr")).tocsc()
    eye = sp.identity(n, format="csr")
    theta, x, its, res = _inverse_iteration(shifted, eye, w, tol=tol, maxiter=maxiter,
                                            what=what)
    value = theta + sigma
    # residual against the unshifted operator (same vector, same Rayleigh quotient)
    res = _l2(w, K @ x - value * x)
    return EigenResult(value, x, its, res)


def principal_eigen(V, grid: Grid, *, tol: float = TOL, maxiter: int = MAXITER) -> EigenResult:
    """Smallest eigenvalue of -Lap + V with zero Dirichlet data.

    Shift-and-invert power iteration with the shift placed below the
    Gershgorin lower bound, so the shifted matrix is an SPD M-matrix and
    the iterates stay positive from the all-ones start.
    """
    V = np.broadcast_to(np.asarray(V, dtype=float), (grid.size,))
    if not np.all(np.isfinite(V)):
        raise ValueError("potential must be finite")
    K = grid.laplacian + sp.diags(V)
    return _principal_of(K, grid.cell_volume, tol=tol, maxiter=maxiter,
                         what="principal_eigen")


def weighted_eigen(c, f, grid: Grid, *, tol: float = TOL,
                   maxiter: int = MAXITER) -> EigenResult:
    """gamma_1(-c, f): smallest gamma with -Lap u - c u = gamma f u."""
    c = np.broadcast_to(np.asarray(c, dtype=float), (grid.size,))
    f = np.broadcast_to(np.asarray(f, dtype=float), (grid.size,))
    if np.any(f < 0) or not np.any(f > 0):
        raise ValueError("weight f must be nonnegative and not identically zero")
    base = principal_eigen(-c, grid, tol=tol, maxiter=maxiter)
    if base.value <= 0:
        raise RegimeError(
            f"lambda1(-c) = {base.value:.6g} <= 0: gamma1(-c,f) is undefined",
            condition="lambda1(-c) > 0", stage="spectral")
    K = (grid.laplacian - sp.diags(c)).tocsc()
    B = sp.diags(f).tocsr()
    gamma, x, its, res = _inverse_iteration(K, B, grid.cell_volume, tol=tol,
                                            maxiter=maxiter, what="weighted_eigen")
    return EigenResult(gamma, x, its, res)


def coercivity_pencil(V, grid: Grid, *, tol: float = TOL,
                      maxiter: int = MAXITER) -> EigenResult:
    """Smallest kappa with (-Lap + V) x = kappa (-Lap) x."""
    V = np.broadcast_to(np.asarray(V, dtype=float), (grid.size,))
    lam1 = principal_eigen(V, grid, tol=tol, maxiter=maxiter)
    if lam1.value <= 0:
        raise RegimeError(
            f"lambda1(V) = {lam1.value:.6g} <= 0: the quadratic form is not coercive",
            condition="lambda1(V) > 0", stage="spectral")
    K = (grid.laplacian + sp.diags(V)).tocsc()
    kappa, x, its, res = _inverse_iteration(K, grid.laplacian, grid.cell_volume,
                                            tol=tol, maxiter=maxiter,
                                            what="coercivity_constant")
    if kappa <= 0:
        raise RegimeError(f"coercivity pencil value {kappa:.6g} <= 0",
                          condition="kappa > 0", stage="spectral")
    return EigenResult(kappa, x, its, res)


def coercivity_constant(V, grid: Grid, *, tol: float = TOL,
                        maxiter: int = MAXITER) -> float:
    """K1 = min(1, kappa) so that int |grad v|^2 + V (v^+)^2 >= K1 ||v||^2."""
    V = np.broadcast_to(np.asarray(V, dtype=float), (grid.size,))
    if np.all(V >= 0):
        # kappa >= 1 by inspection; only the positivity of lambda1 needs checking
        if principal_eigen(V, grid, tol=tol, maxiter=maxiter).value <= 0:
            raise RegimeError("lambda1(V) <= 0", condition="lambda1(V) > 0",
                              stage="spectral")
        return 1.0
    return min(1.0, coercivity_pencil(V, grid, tol=tol, maxiter=maxiter).value)


def alpha_c(c, f, mu: float, grid: Grid, *, tol: float = TOL,
            maxiter: int = MAXITER) -> float:
    """Discrete surrogate of alpha_c: lambda1(-mu f) on the zero set of c.

    The zero set is ``|c| <= 1e-12 * max|c|``; nodes outside it carry
    homogeneous Dirichlet data. Returns ``inf`` when the zero set is empty.
    """
    c = np.broadcast_to(np.asarray(c, dtype=float), (grid.size,))
    f = np.broadcast_to(np.asarray(f, dtype=float), (grid.size,))
    c_tol = 1e-12 * float(np.max(np.abs(c))) if c.size else 0.0
    zero = np.flatnonzero(np.abs(c) <= c_tol)
    if zero.size == 0:
        return float("inf")
    A = grid.laplacian
    K = A[zero][:, zero] - sp.diags(mu * f[zero])
    return _principal_of(K.tocsr(), grid.cell_volume, tol=tol, maxiter=maxiter,
                         what="alpha_c").value


def lambda1_scan(c, f, mus, grid: Grid, **kw) -> np.ndarray:
    """lambda1(-c - mu f) tabulated over ``mus``."""
    c = np.broadcast_to(np.asarray(c, dtype=float), (grid.size,))
    f = np.broadcast_to(np.asarray(f, dtype=float), (grid.size,))
    return np.array([principal_eigen(-c - mu * f, grid, **kw).value for mu in mus])
