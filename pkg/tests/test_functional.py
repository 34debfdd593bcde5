import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twosolve import nonlinearity as nl
from twosolve.functional import (ProblemSpec, energy, grad_sq_centered, grad_sq_consistent,
                                 gradient, gradient_norm, residual_P, residual_Q)
from twosolve.grid import build_grid
from twosolve.transform import v_from_u

from _helpers import manufactured, smooth_field


def nodewise_energy(grid, c, f, mu, lam, v):
    """Independent evaluation with explicit loops over nodes and edges."""
    shape = grid.interior_shape
    arr = np.zeros(tuple(m + 2 for m in shape))
    arr[tuple(slice(1, -1) for _ in shape)] = v.reshape(shape, order="F")
    dirichlet = 0.0
    for axis, h in enumerate(grid.spacing):
        for idx in np.ndindex(*arr.shape):
            nb = list(idx)
            nb[axis] += 1
            if nb[axis] < arr.shape[axis]:
                dirichlet += (arr[tuple(nb)] - arr[idx]) ** 2 / h**2
    total = 0.5 * dirichlet * grid.cell_volume
    for k in range(grid.size):
        vp = max(v[k], 0.0)
        t = lam * vp
        Gk = ((1 + t) ** 2 * (2 * math.log1p(t) - 1) + 1) / 4 / lam**2 - vp**2 / 2
        total -= grid.cell_volume * (0.5 * (c[k] + mu * f[k]) * vp**2 + c[k] * Gk
                                     + mu / lam * f[k] * v[k])
    return total


def nodewise_gradient(grid, c, f, mu, lam, v):
    A = grid.laplacian.toarray()
    r = np.empty(grid.size)
    for k in range(grid.size):
        vp = max(v[k], 0.0)
        gk = (1 + lam * vp) * math.log1p(lam * vp) / lam - vp
        r[k] = A[k] @ v - (c[k] + mu * f[k]) * vp - c[k] * gk - mu / lam * f[k]
    return r


@pytest.fixture
def small(rng):
    g = build_grid(2, (1.0, 1.0), (8, 8))
    c = 5 * rng.standard_normal(g.size)
    f = np.abs(rng.standard_normal(g.size))
    return g, ProblemSpec(g, c, f, 0.7)


def test_energy_matches_nodewise_sum(small, rng):
    g, spec = small
    for lam in (1.0, 16.0):
        for _ in range(5):
            v = 2 * rng.standard_normal(g.size)
            ref = nodewise_energy(g, spec.c, spec.f, spec.mu, lam, v)
            assert energy(spec, lam, v).total == pytest.approx(ref, abs=1e-12 * max(1, abs(ref)))


def test_gradient_matches_nodewise(small, rng):
    g, spec = small
    v = 2 * rng.standard_normal(g.size)
    ref = nodewise_gradient(g, spec.c, spec.f, spec.mu, 3.0, v)
    assert np.allclose(gradient(spec, 3.0, v), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_energy_breakdown_sums(small, rng):
    g, spec = small
    e = energy(spec, 2.0, rng.standard_normal(g.size))
    assert e.total == pytest.approx(e.quadratic + e.superquadratic + e.linear, rel=1e-15)


def test_energy_at_zero_and_gradient_at_zero(small):
    g, spec = small
    assert energy(spec, 5.0, np.zeros(g.size)).total == 0.0
    assert np.allclose(gradient(spec, 5.0, np.zeros(g.size)), -(spec.mu / 5.0) * spec.f)


def test_directional_derivatives(paper_spec, rng):
    spec, g = paper_spec, paper_spec.grid
    lam = 32.0
    for _ in range(10):
        v = smooth_field(g, rng, 0.4)
        d = smooth_field(g, rng, 1.0)
        h = 1e-6
        fd = (energy(spec, lam, v + h * d).total - energy(spec, lam, v - h * d).total) / (2 * h)
        exact = g.cell_volume * gradient(spec, lam, v) @ d
        assert fd == pytest.approx(exact, rel=1e-5)


def test_gradient_norm_is_quadrature_l2(small, rng):
    g, spec = small
    v = rng.standard_normal(g.size)
    r = gradient(spec, 2.0, v)
    assert gradient_norm(spec, 2.0, v) == pytest.approx(np.sqrt(g.cell_volume * r @ r))


@pytest.mark.parametrize("kwargs,match", [
    (dict(c=0.0, f=-1.0, mu=1.0), "nonnegative"),
    (dict(c=0.0, f=0.0, mu=1.0), "nonnegative"),
    (dict(c=0.0, f=1.0, mu=0.0), "mu"),
    (dict(c=np.nan, f=1.0, mu=1.0), "finite"),
    (dict(c=0.0, f=1.0, mu=1.0, q=0.5), "q"),
])
def test_problem_spec_validation(kwargs, match):
    g = build_grid(2, (1.0, 1.0), (6, 6))
    with pytest.raises(ValueError, match=match):
        ProblemSpec(g, **kwargs)


def test_omega_sets():
    g = build_grid(2, (1.0, 1.0), (5, 5))
    spec = ProblemSpec(g, np.array([1, 0, -1, 1, 0, -1, 1, 0, -1.0]), 1.0, 1.0)
    assert spec.omega_plus.sum() == 3 and spec.omega_minus.sum() == 3
    assert np.array_equal(spec.with_f(2.0).f, np.full(9, 2.0))


def test_gradient_stencils_exact_on_linear_profile():
    # u linear in x: both stencils give mu u_x^2 at nodes away from the boundary
    g = build_grid(2, (1.0, 1.0), (11, 11))
    x, y = g.coordinates
    u = 0.3 * x
    mu = 0.9
    inner = (x > 0.15) & (x < 0.85) & (y > 0.15) & (y < 0.85)
    assert np.allclose(grad_sq_centered(g, u, mu)[inner], mu * 0.09, rtol=1e-12)
    # the consistent stencil carries an O(h^2) correction cosh(mu d)-1 ~ (mu d)^2/2
    h = g.spacing[0]
    d = 0.3 * h
    expected = 2 * (math.cosh(mu * d) - 1) / (mu * h * h)
    assert np.allclose(grad_sq_consistent(g, u, mu)[inner], expected, rtol=1e-12)


def test_consistent_stencil_makes_transform_exact(paper_spec, rng):
    """r_Q = (mu/lam)(1 + lam v) r_P nodewise when u = ln(1+lam v)/mu."""
    spec, g = paper_spec, paper_spec.grid
    lam = 32.0
    u = smooth_field(g, rng, 0.05, positive=True)
    v = v_from_u(u, spec.mu, lam)
    rP = g.laplacian @ u - spec.c * u - grad_sq_consistent(g, u, spec.mu) - spec.f
    one = 1 + lam * v
    rQ = g.laplacian @ v - spec.c * one * np.log1p(lam * v) / lam - spec.mu / lam * spec.f * one
    assert np.allclose(rQ, spec.mu / lam * one * rP, rtol=1e-8, atol=1e-9 * np.abs(rQ).max())


def test_residual_P_form_validated(paper_spec):
    with pytest.raises(ValueError):
        residual_P(paper_spec, np.zeros(paper_spec.grid.size), form="upwind")


def test_residual_Q_domain(paper_spec):
    with pytest.raises(ValueError):
        residual_Q(paper_spec, 2.0, np.full(paper_spec.grid.size, -0.6))


def observed_orders(errors):
    errors = np.asarray(errors)
    # refinements 33 -> 65 -> 129 halve h exactly
    return np.log2(errors[:-1] / errors[1:])


def test_manufactured_residual_orders():
    rP, rPc, rQ = [], [], []
    lam = 4.0
    for n in (33, 65, 129):
        g, spec, u = manufactured(n)
        assert np.all(spec.f >= 0)
        rP.append(residual_P(spec, u))
        rPc.append(residual_P(spec, u, form="centered"))
        rQ.append(residual_Q(spec, lam, v_from_u(u, spec.mu, lam)))
    for errs in (rP, rPc, rQ):
        assert np.all(observed_orders(errs) >= 1.9), errs


G7 = build_grid(2, (1.0, 1.0), (9, 9))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.0, 100.0))
def test_gradient_directional_derivative_property(seed, lam):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(G7, smooth_field(G7, rng, 10.0), smooth_field(G7, rng, 2.0, True) + 0.1,
                       0.5)
    v = smooth_field(G7, rng, 1.0)
    d = smooth_field(G7, rng, 1.0)
    h = 1e-6
    fd = (energy(spec, lam, v + h * d).total - energy(spec, lam, v - h * d).total) / (2 * h)
    exact = G7.cell_volume * gradient(spec, lam, v) @ d
    assert fd == pytest.approx(exact, rel=1e-5, abs=1e-9)
