"""The nonlinearity g_lambda and its relatives, vectorised over ``s``.

With ``t = lam * s`` every kernel reduces to a one-variable profile:

    g(lam, s) = phi(t) / lam          phi(t) = (1+t) ln(1+t) - t
    G(lam, s) = Phi(t) / lam**2       Phi(t) = ((1+t)^2 (2 ln(1+t) - 1) + 1)/4 - t^2/2
    H(lam, s) = Psi(t) / lam**2       Psi(t) = t^2/4 + t/2 - (1+t) ln(1+t)/2

All three profiles lose every significant digit to cancellation as t -> 0,
so below ``_SERIES_CUTOFF`` they are summed from their Taylor series.
"""

from __future__ import annotations

import numpy as np

__all__ = ["g", "g_prime", "G", "H", "growth_bound_constant", "superlinear_threshold"]

_SERIES_CUTOFF = 0.25
_SERIES_TERMS = 32

_k = np.arange(2, 2 + _SERIES_TERMS, dtype=float)
_sign = (-1.0) ** _k
# coefficients of t^k, t^(k+1), t^(k+1) respectively
_PHI_COEF = _sign / (_k * (_k - 1))
_BIGPHI_COEF = _sign / ((_k + 1) * _k * (_k - 1))
_PSI_COEF = _sign / (2 * _k * (_k + 1))


def _series(t, coef, first_power):
    # Horner in t, then multiply by t**first_power
    acc = np.zeros_like(t)
    for c in coef[::-1]:
        acc = acc * t + c
    return acc * t**first_power


def _profile(lam, s, closed, coef, first_power):
    s = np.asarray(s, dtype=float)
    t = lam * np.maximum(s, 0.0)
    small = t < _SERIES_CUTOFF
    out = np.empty_like(t)
    with np.errstate(invalid="ignore", over="ignore"):
        big = ~small
        out[big] = closed(t[big])
    out[small] = _series(t[small], coef, first_power)
    return out


def _phi(t):
    return (1 + t) * np.log1p(t) - t


def _bigphi(t):
    return ((1 + t) ** 2 * (2 * np.log1p(t) - 1) + 1) / 4 - t**2 / 2


def _psi(t):
    return t**2 / 4 + t / 2 - (1 + t) * np.log1p(t) / 2


def _scalar_out(s, out):
    return float(out) if np.ndim(s) == 0 else out


def g(lam: float, s):
    """(1/lam)(1+lam s)ln(1+lam s) - s for s >= 0, zero for s <= 0."""
    out = _profile(lam, s, _phi, _PHI_COEF, 2) / lam
    return _scalar_out(s, out)


def g_prime(lam: float, s):
    s = np.asarray(s, dtype=float)
    out = np.log1p(lam * np.maximum(s, 0.0))
    return _scalar_out(s, out)


def G(lam: float, s):
    """Antiderivative of ``g`` in ``s`` vanishing at 0."""
    out = _profile(lam, s, _bigphi, _BIGPHI_COEF, 3) / lam**2
    return _scalar_out(s, out)


def H(lam: float, s):
    """g(lam,s) s / 2 - G(lam,s), from its own closed form."""
    out = _profile(lam, s, _psi, _PSI_COEF, 3) / lam**2
    return _scalar_out(s, out)


def growth_bound_constant(eps: float, p: float, s_max: float, lam_max: float,
                          n_s: int = 400, n_lam: int = 120,
                          safety: float = 1.1) -> float:
    """Sampled constant C with G(lam,s) <= eps s^2 + C (1+ln lam) s^(p+1).

    The supremum of ``(G - eps s^2) / ((1+ln lam) s^(p+1))`` is taken over a
    log-spaced lattice of ``(0, s_max] x [1, lam_max]`` and inflated by
    ``safety``. The result is evidence, not a bound: it grows with
    ``lam_max`` because G(lam, s) ~ (s^2/2) ln(lam s) at fixed s.
    """
    if p <= 1:
        raise ValueError(f"growth exponent p must exceed 1, got {p}")
    if eps <= 0 or s_max <= 0 or lam_max < 1:
        raise ValueError("need eps > 0, s_max > 0 and lam_max >= 1")
    # below s_lo, G <= lam s^3/6 <= eps s^2 / 10 for every sampled lam
    s_lo = min(s_max, 0.6 * eps / lam_max) * 1e-3
    s = np.geomspace(s_lo, s_max, n_s)
    lam = np.geomspace(1.0, lam_max, n_lam) if lam_max > 1 else np.array([1.0])
    best = 0.0
    for lm in lam:
        ratio = (G(lm, s) - eps * s**2) / ((1 + np.log(lm)) * s ** (p + 1))
        best = max(best, float(ratio.max()))
    return safety * best


def superlinear_threshold(eps: float, lam_max: float, s_hi: float = 1.0,
                          iterations: int = 200) -> float:
    """Largest ``s0`` (by bisection) with sup g(lam,s)/s <= eps on (0,s0] x [1,lam_max].

    g(lam, s)/s = phi(lam s)/(lam s) is increasing in lam s, so the sup over the
    box is attained at ``lam = lam_max``; bisection on that slice suffices.
    """
    lo, hi = 0.0, s_hi
    if g(lam_max, hi) / hi <= eps:
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(lam_max, mid) / mid <= eps:
            lo = mid
        else:
            hi = mid
    return lo
