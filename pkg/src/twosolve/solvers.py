"""Critical points of the energy: ball minimiser, mountain pass, Newton polish.

All descent steps use the H^1_0 (Sobolev) gradient ``s = (-Lap)^{-1} r``,
where ``r`` is the nodal gradient from :func:`functional.gradient`. In that
metric the Hessian is a compact perturbation of the identity, so step sizes
and iteration counts do not degrade under mesh refinement.
"""

from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import scipy.sparse as sp
from scipy import ndimage
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import LinearOperator, minres, spsolve

from . import nonlinearity as nl
from . import spectral
from .errors import ConvergenceError, GeometryError, RegimeError
from .functional import ProblemSpec, energy, gradient
from .grid import Grid, inner_h10, norm_h10, norm_l2
from .transform import TransformPair, verify_pair

log = logging.getLogger(__name__)

__all__ = [
    "GeometryParams",
    "CriticalPoint",
    "admissible_exponent",
    "select_lambda",
    "minimize_in_ball",
    "minimize_global",
    "construct_v0",
    "omega_plus_profile",
    "mountain_pass",
    "newton_refine",
    "SolveOptions",
    "SolutionBlock",
    "SolveReport",
    "solve_two",
]

ARMIJO_C = 1e-4
BACKTRACK = 0.5


@dataclass
class GeometryParams:
    lam: float
    theta: float
    p: float
    radius: float
    sphere_min: float
    K1: float = float("nan")
    probes: int = 0
    lam_history: list = field(default_factory=list)


@dataclass
class CriticalPoint:
    v: np.ndarray
    energy: float
    gradient_norm: float
    kind: str
    level: float = float("nan")
    iterations: int = 0
    converged: bool = True
    history: list = field(default_factory=list)
    trace: np.ndarray | None = None


def _I(spec, lam, v):
    return energy(spec, lam, v).total


def _sobolev(grid: Grid, r):
    return grid.riesz(r)


def admissible_exponent(p: float, q: float, dimension: int) -> bool:
    """(p+1) q' < 2*, with 2* = +inf when N = 2."""
    if p <= 1:
        return False
    if dimension == 2:
        return True
    q_conj = 1.0 if math.isinf(q) else q / (q - 1.0)
    return (p + 1) * q_conj < 2 * dimension / (dimension - 2)


def _regime_gate(spec: ProblemSpec, stage: str) -> float:
    lam1 = spectral.principal_eigen(-spec.c - spec.mu * spec.f, spec.grid).value
    if lam1 <= 0:
        raise RegimeError(
            f"lambda1(-c - mu f) = {lam1:.6g} <= 0", condition="lambda1(-c - mu f) > 0",
            stage=stage)
    return lam1


# --- probes and sphere geometry ---------------------------------------------

def omega_plus_profile(spec: ProblemSpec) -> np.ndarray:
    """Distance-to-boundary profile on the largest connected component of {c > 0}."""
    grid = spec.grid
    plus = grid.to_array(spec.omega_plus)
    labels, count = ndimage.label(plus)
    if count == 0:
        raise GeometryError("c+ vanishes identically: no region where c > 0",
                            stage="construct_v0")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, count + 1))
    biggest = 1 + int(np.argmax(sizes))  # argmax: lowest label on ties
    comp = np.pad(labels == biggest, 1)
    dist = ndimage.distance_transform_edt(comp, sampling=grid.spacing)
    inner = tuple(slice(1, -1) for _ in range(grid.dimension))
    return grid.to_field(dist[inner])


def _probe_directions(spec: ProblemSpec, count: int, seed: int) -> list[np.ndarray]:
    """Unit H^1_0 directions: principal mode, Omega_+ bump, then smooth random fields."""
    grid = spec.grid
    dirs = [spectral.principal_eigen(-spec.c - spec.mu * spec.f, grid).eigenfunction]
    if np.any(spec.omega_plus):
        dirs.append(omega_plus_profile(spec))
    rng = np.random.default_rng(seed)
    for k in range(count):
        d = _sobolev(grid, rng.standard_normal(grid.size))
        if k % 2 == 0:
            d = np.abs(d)
        dirs.append(d)
    return [d / norm_h10(grid, d) for d in dirs]


def _sphere_descent(spec, lam, v, radius, *, maxiter, rtol=1e-8):
    """Projected Sobolev descent of I on the sphere ||v|| = radius."""
    grid = spec.grid
    e = _I(spec, lam, v)
    for _ in range(maxiter):
        s = _sobolev(grid, gradient(spec, lam, v))
        s_t = s - inner_h10(grid, s, v) / radius**2 * v
        slope = inner_h10(grid, s_t, s_t)
        if math.sqrt(slope) <= rtol * radius:
            break
        alpha = 1.0 / (1.0 + math.sqrt(slope))
        while alpha > 1e-12:
            trial = v - alpha * s_t
            trial *= radius / norm_h10(grid, trial)
            et = _I(spec, lam, trial)
            if et <= e - ARMIJO_C * alpha * slope:
                break
            alpha *= BACKTRACK
        else:
            break
        if e - et <= 1e-15 * max(1.0, abs(e)):
            v, e = trial, et
            break
        v, e = trial, et
    return v, e


def select_lambda(spec: ProblemSpec, theta: float = 0.5, p: float = 1.5,
                  lam_start: float = 1.0, *, probes: int = 64, seed: int = 0,
                  lam_cap: float = 1e12, sphere_iters: int = 400,
                  descent_starts: int = 3) -> GeometryParams:
    """Double lambda until I is positive on the sphere ||v|| = lambda^(-theta).

    A probe with I <= 0 rejects lambda outright. Otherwise the sphere
    minimum is estimated by constrained descent from the ``descent_starts``
    lowest probes and lambda is accepted when that estimate is positive.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not admissible_exponent(p, spec.q, spec.grid.dimension):
        raise ValueError(f"growth exponent p = {p} violates (p+1) q' < 2* for q = {spec.q}")
    _regime_gate(spec, "select_lambda")
    K1 = spectral.coercivity_constant(-spec.c - spec.mu * spec.f, spec.grid)
    dirs = _probe_directions(spec, probes, seed)
    lam = float(lam_start)
    history = []
    while lam <= lam_cap:
        radius = lam ** (-theta)
        values = np.array([_I(spec, lam, radius * d) for d in dirs])
        if values.min() <= 0:
            history.append((lam, float(values.min())))
            lam *= 2.0
            continue
        best = float("inf")
        for k in np.argsort(values, kind="stable")[:descent_starts]:
            _, e = _sphere_descent(spec, lam, radius * dirs[k], radius, maxiter=sphere_iters)
            best = min(best, e)
        history.append((lam, best))
        if best > 0:
            log.info("select_lambda: lam=%g R=%g M=%g", lam, radius, best)
            return GeometryParams(lam, theta, p, radius, best, K1, len(dirs), history)
        lam *= 2.0
    raise RegimeError(f"no lambda <= {lam_cap:g} gives positive energy on the sphere",
                      condition="mountain-pass geometry", stage="select_lambda")


# --- descent ----------------------------------------------------------------

def _descent(spec, lam, v, *, tol, maxiter, radius=None, stage):
    """Sobolev steepest descent with Armijo backtracking; optional ball projection."""
    grid = spec.grid
    e = _I(spec, lam, v)
    history = []
    for it in range(1, maxiter + 1):
        r = gradient(spec, lam, v)
        rn = norm_l2(grid, r)
        history.append(rn)
        if rn <= tol:
            return v, e, rn, it - 1, True, history
        s = _sobolev(grid, r)
        snorm = norm_h10(grid, s)
        alpha = 1.0 / (1.0 + snorm)
        while True:
            trial = v - alpha * s
            if radius is not None:
                tn = norm_h10(grid, trial)
                if tn > radius:
                    trial *= radius / tn
            et = _I(spec, lam, trial)
            # projected Armijo: sufficient decrease against the actual displacement
            if et <= e + ARMIJO_C * float(np.dot(r, trial - v)) * grid.cell_volume:
                break
            alpha *= BACKTRACK
            if alpha < 1e-14:
                return v, e, rn, it, False, history
        v, e = trial, et
    rn = norm_l2(grid, gradient(spec, lam, v))
    return v, e, rn, maxiter, rn <= tol, history


def minimize_in_ball(spec: ProblemSpec, geom: GeometryParams, *, tol: float = 1e-8,
                     maxiter: int = 20_000) -> CriticalPoint:
    """Minimiser of I in the closed H^1_0 ball of radius ``geom.radius``."""
    grid, lam, radius = spec.grid, geom.lam, geom.radius
    phi = spectral.principal_eigen(-spec.c - spec.mu * spec.f, grid).eigenfunction
    tau = 0.5 * radius / norm_h10(grid, phi)
    for _ in range(200):
        if _I(spec, lam, tau * phi) < 0:
            break
        tau *= 0.5
    else:
        tau = 0.0
    v, e, rn, its, ok, hist = _descent(spec, lam, tau * phi, tol=tol, maxiter=maxiter,
                                       radius=radius, stage="minimize_in_ball")
    if not ok:
        raise ConvergenceError("ball minimisation did not reach the gradient tolerance",
                               residual=rn, iterations=its, stage="minimize_in_ball")
    if norm_h10(grid, v) >= radius * (1 - 1e-9):
        raise GeometryError("ball minimiser touches the sphere ||v|| = R",
                            stage="minimize_in_ball")
    return CriticalPoint(v, e, rn, "ball-minimizer", iterations=its, history=hist)


def minimize_global(spec: ProblemSpec, lam: float, v_start: np.ndarray, *,
                    tol: float = 1e-8, maxiter: int = 20_000) -> CriticalPoint:
    """Unconstrained descent from ``v_start`` (coercive regimes)."""
    v, e, rn, its, ok, hist = _descent(spec, lam, np.asarray(v_start, dtype=float),
                                       tol=tol, maxiter=maxiter, stage="minimize_global")
    if not ok:
        raise ConvergenceError("descent did not reach the gradient tolerance",
                               residual=rn, iterations=its, stage="minimize_global")
    return CriticalPoint(v, e, rn, "minimizer", iterations=its, history=hist)


def construct_v0(spec: ProblemSpec, geom: GeometryParams, *,
                 max_doublings: int = 200) -> np.ndarray:
    """A point outside the ball with negative energy, supported where c > 0."""
    grid, lam = spec.grid, geom.lam
    psi = omega_plus_profile(spec)
    t = geom.radius / norm_h10(grid, psi)
    for _ in range(max_doublings):
        v0 = t * psi
        if norm_h10(grid, v0) > geom.radius and _I(spec, lam, v0) < 0:
            return v0
        t *= 2.0
        if not np.isfinite(t * psi.max()) or t * psi.max() > 1e150:
            break
    raise GeometryError(
        "no negative-energy point found along the Omega_+ ray (region too thin for the grid?)",
        stage="construct_v0")


# --- mountain pass ----------------------------------------------------------

def _ray_maximum(spec, lam, w, t_guess, *, max_expand=200):
    """Maximiser t* > 0 of t -> I(t w) and the value I(t* w)."""
    f = lambda t: -_I(spec, lam, t * w)
    b = float(t_guess)
    a, c = 0.5 * b, 2.0 * b
    fa, fb, fc = f(a), f(b), f(c)
    for _ in range(max_expand):
        if fc < fb:
            a, fa, b, fb = b, fb, c, fc
            c = 2.0 * c
            fc = f(c)
        elif fa < fb:
            c, fc, b, fb = b, fb, a, fa
            a = 0.5 * a
            fa = f(a)
        else:
            break
    else:
        raise GeometryError("energy along the ray has no interior maximum",
                            stage="mountain_pass")
    res = minimize_scalar(f, bracket=(a, b, c), tol=1e-10)
    return float(res.x), -float(res.fun)


def _ray_trace(spec, lam, w, t_star, nodes):
    """Energy along the ray path 0 -> T w, T the first doubling of t* with I < 0."""
    T = 2.0 * t_star
    for _ in range(200):
        if _I(spec, lam, T * w) < 0:
            break
        T *= 2.0
    ts = np.linspace(0.0, T, nodes)
    return np.column_stack([ts, [_I(spec, lam, t * w) for t in ts]])


def mountain_pass(spec: ProblemSpec, geom: GeometryParams, v0: np.ndarray, *,
                  nodes: int = 41, tol: float = 1e-6, newton_tol: float = 1e-10,
                  maxiter: int = 20_000) -> CriticalPoint:
    """Mountain-pass point by minimax over rays from the origin.

    Paths are rays ``t -> t w`` with ``||w|| = 1``, started from the direction
    of ``v0`` so the first path is the segment [0, v0]. The path maximum
    J(w) = max_t I(t w) is lowered by Armijo steps along the tangential
    Sobolev gradient ``t* (s - <s, w> w)``, which is the gradient of J on the
    unit sphere. Every ray crosses the sphere ``||v|| = R``, so the level
    never drops below the sphere minimum unless that estimate was wrong.
    """
    grid, lam = spec.grid, geom.lam
    if _I(spec, lam, v0) >= 0 or norm_h10(grid, v0) <= geom.radius:
        raise GeometryError("v0 must lie outside the ball with negative energy",
                            stage="mountain_pass")
    w = v0 / norm_h10(grid, v0)
    res = minimize_scalar(lambda t: -_I(spec, lam, t * w),
                          bounds=(0.0, norm_h10(grid, v0)), method="bounded",
                          options={"xatol": 1e-10})
    t, J = _ray_maximum(spec, lam, w, res.x)
    history = []
    rn = float("inf")
    alpha = None
    for it in range(1, maxiter + 1):
        if J < geom.sphere_min * (1 - 1e-6):
            raise GeometryError(
                f"path maximum {J:.6g} fell below the sphere minimum "
                f"{geom.sphere_min:.6g}; rerun lambda selection with a larger lambda",
                stage="mountain_pass")
        r = gradient(spec, lam, t * w)
        rn = norm_l2(grid, r)
        history.append((J, rn))
        if rn <= tol:
            break
        s = _sobolev(grid, r)
        d = s - inner_h10(grid, s, w) * w
        dn2 = inner_h10(grid, d, d)
        # first step follows the 1/(1+|grad|) rule, later ones may double
        alpha = 1.0 / (1.0 + t * math.sqrt(dn2)) if alpha is None else min(1.0, 2 * alpha)
        while True:
            trial = w - alpha * d
            trial /= norm_h10(grid, trial)
            t_new, J_new = _ray_maximum(spec, lam, trial, t)
            if J_new <= J - ARMIJO_C * alpha * t * dn2:
                break
            alpha *= BACKTRACK
            if alpha < 1e-14:
                raise ConvergenceError("mountain-pass line search stalled", residual=rn,
                                       iterations=it, stage="mountain_pass")
        w, t, J = trial, t_new, J_new
        if it % 50 == 0:
            log.debug("mountain_pass it=%d level=%.10g |r|=%.3e", it, J, rn)
    else:
        raise ConvergenceError("mountain-pass iteration did not converge", residual=rn,
                               iterations=maxiter, stage="mountain_pass")
    cp = newton_refine(spec, lam, t * w, tol=newton_tol)
    if not cp.converged:
        raise ConvergenceError("Newton polish of the mountain-pass point failed",
                               residual=cp.gradient_norm, iterations=cp.iterations,
                               stage="mountain_pass")
    if cp.energy < geom.sphere_min * (1 - 1e-6):
        raise GeometryError(
            f"mountain-pass level {cp.energy:.6g} below sphere minimum {geom.sphere_min:.6g}",
            stage="mountain_pass")
    cp.kind = "mountain-pass"
    cp.level = cp.energy
    cp.iterations = it
    cp.history = history + [(cp.energy, h) for h in cp.history]
    cp.trace = _ray_trace(spec, lam, w, t, nodes)
    return cp


# --- Newton -----------------------------------------------------------------

def _jacobian(spec, lam, v):
    active = (v > 0).astype(float)
    diag = ((spec.c + spec.mu * spec.f) + spec.c * nl.g_prime(lam, v)) * active
    return (spec.grid.laplacian - sp.diags(diag)).tocsr()


def _linear_solve(grid, J, rhs):
    """MINRES on the symmetric (possibly indefinite) Jacobian, Laplacian-preconditioned."""
    prec = LinearOperator(J.shape, matvec=grid.riesz, dtype=float)
    x, info = minres(J, rhs, M=prec, rtol=1e-13, maxiter=500)
    if info != 0 or not np.all(np.isfinite(x)):
        x = spsolve(J.tocsc(), rhs)
    return x


def newton_refine(spec: ProblemSpec, lam: float, v_init: np.ndarray, *,
                  tol: float = 1e-10, maxiter: int = 50, gate: float = 1e-3,
                  kind: str = "newton") -> CriticalPoint:
    """Damped Newton on the nodal gradient; the merit function is ||r||_2."""
    grid = spec.grid
    v = np.array(v_init, dtype=float)
    r = gradient(spec, lam, v)
    rn = norm_l2(grid, r)
    history = [rn]
    if rn > gate:
        return CriticalPoint(v, _I(spec, lam, v), rn, kind, iterations=0,
                             converged=False, history=history)
    it = 0
    while rn > tol and it < maxiter:
        it += 1
        delta = _linear_solve(grid, _jacobian(spec, lam, v), -r)
        alpha = 1.0
        while alpha >= 1e-8:
            trial = v + alpha * delta
            rt = gradient(spec, lam, trial)
            rtn = norm_l2(grid, rt)
            if rtn <= (1 - ARMIJO_C * alpha) * rn:
                break
            alpha *= BACKTRACK
        else:
            break
        v, r, rn = trial, rt, rtn
        history.append(rn)
    return CriticalPoint(v, _I(spec, lam, v), rn, kind, iterations=it,
                         converged=rn <= tol, history=history)


# --- full pipeline ----------------------------------------------------------

@dataclass
class SolveOptions:
    theta: float = 0.5
    p: float = 1.5
    lam: float | None = None
    lam_start: float = 1.0
    lam_cap: float = 1e12
    probes: int = 64
    seed: int = 0
    min_tol: float = 1e-8
    mp_tol: float = 1e-6
    newton_tol: float = 1e-10
    maxiter: int = 20_000
    path_nodes: int = 41
    distinct_rel: float = 1e-3
    restarts: int = 10


@dataclass
class SolutionBlock:
    """One converged solution, in both variables."""

    name: str
    kind: str
    point: CriticalPoint
    pair: TransformPair

    @property
    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "energy": self.point.energy,
            "gradient_norm": self.point.gradient_norm,
            "residual_P": self.pair.residual_P,
            "residual_P_centered": self.pair.residual_P_centered,
            "residual_Q": self.pair.residual_Q,
            "positivity_margin": self.pair.positivity_margin,
            "roundtrip_error": self.pair.roundtrip_error,
            "v_min": float(self.pair.v.min()),
            "v_max": float(self.pair.v.max()),
            "u_min": float(self.pair.u.min()),
            "u_max": float(self.pair.u.max()),
            "iterations": self.point.iterations,
        }


@dataclass
class SolveReport:
    mode: str
    spectral: dict
    geometry: GeometryParams
    solutions: list
    distinctness: dict = field(default_factory=dict)
    uniqueness_spread: float = float("nan")
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


def _spectral_data(spec: ProblemSpec) -> dict:
    grid = spec.grid
    lam1_c = spectral.principal_eigen(-spec.c, grid).value
    out = {"lambda1(-c)": lam1_c}
    lam1_cmf = _regime_gate(spec, "spectral")
    out["lambda1(-c-mu f)"] = lam1_cmf
    out["gamma1(-c,f)"] = (spectral.weighted_eigen(spec.c, spec.f, grid).value
                           if lam1_c > 0 else float("nan"))
    out["K1"] = spectral.coercivity_constant(-spec.c - spec.mu * spec.f, grid)
    out["alpha_c"] = spectral.alpha_c(spec.c, spec.f, spec.mu, grid)
    return out


def _block(spec, lam, name, cp):
    if cp.v.size and float(np.min(cp.v)) < -1e-6:
        raise GeometryError(f"{name}: critical point has min v = {np.min(cp.v):.3g} < 0",
                            stage="transform")
    pair = verify_pair(spec, lam, cp.v)
    return SolutionBlock(name, cp.kind, cp, pair)


def _random_start(grid, rng, scale):
    d = _sobolev(grid, rng.standard_normal(grid.size))
    return scale * d / norm_h10(grid, d)


def solve_two(spec: ProblemSpec, options: SolveOptions | None = None) -> SolveReport:
    """Run the whole pipeline and return every diagnostic.

    With c+ nonzero this looks for a ball minimiser v1 and a mountain-pass
    point w1. With c <= 0 there is at most one solution: the report then
    holds the global minimiser and the spread of repeated minimisations
    from random starts.
    """
    opt = options or SolveOptions()
    grid = spec.grid
    timings = {}
    clock = partial(_timed, timings)

    with clock("spectral"):
        data = _spectral_data(spec)
    with clock("select_lambda"):
        geom = select_lambda(spec, opt.theta, opt.p,
                             opt.lam if opt.lam is not None else opt.lam_start,
                             probes=opt.probes, seed=opt.seed, lam_cap=opt.lam_cap)
    if opt.lam is not None and geom.lam != opt.lam:
        raise RegimeError(f"lambda = {opt.lam:g} does not give positive energy on the sphere "
                          f"(smallest passing lambda from there: {geom.lam:g})",
                          condition="mountain-pass geometry", stage="select_lambda")
    lam = geom.lam
    notes = []

    if not np.any(spec.omega_plus):
        notes.append("c <= 0: uniqueness regime, single-solution mode")
        with clock("minimize"):
            starts = [spectral.principal_eigen(-spec.c - spec.mu * spec.f,
                                               grid).eigenfunction * geom.radius]
            rng = np.random.default_rng(opt.seed)
            starts += [_random_start(grid, rng, geom.radius * (1 + k))
                       for k in range(opt.restarts)]
            points = []
            for v in starts:
                cp = minimize_global(spec, lam, v, tol=opt.min_tol, maxiter=opt.maxiter)
                cp = _polish(spec, lam, cp, opt.newton_tol, "global-minimizer")
                points.append(cp)
        spread = max(float(np.max(np.abs(cp.v - points[0].v))) for cp in points)
        with clock("transform"):
            blocks = [_block(spec, lam, "1", points[0])]
        return SolveReport("single-solution", data, geom, blocks, uniqueness_spread=spread,
                           timings=timings, notes=notes)

    with clock("minimize_in_ball"):
        v1 = minimize_in_ball(spec, geom, tol=opt.min_tol, maxiter=opt.maxiter)
        v1 = _polish(spec, lam, v1, opt.newton_tol, "ball-minimizer")
    with clock("construct_v0"):
        v0 = construct_v0(spec, geom)
    with clock("mountain_pass"):
        w1 = mountain_pass(spec, geom, v0, nodes=opt.path_nodes, tol=opt.mp_tol,
                           newton_tol=opt.newton_tol, maxiter=opt.maxiter)
        dist = norm_h10(grid, v1.v - w1.v)
        delta = opt.distinct_rel * max(norm_h10(grid, v1.v), norm_h10(grid, w1.v))
        if dist < delta:
            notes.append("mountain pass met the minimiser; rerun from a perturbed v0")
            rng = np.random.default_rng(opt.seed)
            v0b = 2.0 * v0 + _random_start(grid, rng, geom.radius)
            w1 = mountain_pass(spec, geom, v0b, nodes=opt.path_nodes, tol=opt.mp_tol,
                               newton_tol=opt.newton_tol, maxiter=opt.maxiter)
            dist = norm_h10(grid, v1.v - w1.v)
            if dist < delta:
                raise GeometryError(
                    f"minimiser and mountain-pass point coincide (distance {dist:.3g})",
                    stage="solve_two")
    if not v1.energy < 0 < geom.sphere_min <= w1.energy * (1 + 1e-6):
        raise GeometryError(
            f"energy ordering violated: I(v1)={v1.energy:.6g}, M={geom.sphere_min:.6g}, "
            f"I(w1)={w1.energy:.6g}", stage="solve_two")
    with clock("transform"):
        blocks = [_block(spec, lam, "1", v1), _block(spec, lam, "2", w1)]
    u1, u2 = blocks[0].pair.u, blocks[1].pair.u
    distinct = {
        "v_distance": dist,
        "v_threshold": delta,
        "u_distance": norm_h10(grid, u1 - u2),
        "u_threshold": opt.distinct_rel * max(norm_h10(grid, u1), norm_h10(grid, u2)),
    }
    return SolveReport("two-solution", data, geom, blocks, distinct, timings=timings,
                       notes=notes)


def _polish(spec, lam, cp, tol, kind):
    """Newton-polish a descent result to ``tol``."""
    nr = newton_refine(spec, lam, cp.v, tol=tol, kind=kind)
    if not nr.converged:
        raise ConvergenceError(f"Newton polish of the {kind} failed",
                               residual=nr.gradient_norm, iterations=nr.iterations,
                               stage="newton_refine")
    nr.iterations = cp.iterations
    nr.history = list(cp.history) + nr.history
    return nr


@contextmanager
def _timed(sink: dict, name: str):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        sink[name] = sink.get(name, 0.0) + time.perf_counter() - t0
