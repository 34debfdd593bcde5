import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from twosolve.errors import TransformDomainError
from twosolve.functional import ProblemSpec, residual_P, residual_Q
from twosolve.grid import build_grid
from twosolve.transform import CLAMP_TOL, roundtrip_error, u_from_v, v_from_u, verify_pair

from _helpers import smooth_field


def test_known_values():
    assert v_from_u(np.log(2.0), 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert u_from_v(math.e - 1, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert v_from_u(0.0, 2.0, 3.0) == 0.0
    assert u_from_v(0.0, 2.0, 3.0) == 0.0


def test_tiny_values_keep_precision():
    # expm1 / log1p: v ~ mu u / lam without cancellation
    assert v_from_u(1e-20, 2.0, 4.0) == pytest.approx(0.5e-20, rel=1e-15)
    assert u_from_v(1e-20, 2.0, 4.0) == pytest.approx(2e-20, rel=1e-15)


def test_overflow_guard():
    with pytest.raises(TransformDomainError, match="700"):
        v_from_u(np.array([0.0, 800.0]), 1.0, 1.0)


def test_domain_guard():
    with pytest.raises(TransformDomainError):
        u_from_v(np.array([-0.5001]), 1.0, 2.0)
    u_from_v(np.array([-0.4999]), 1.0, 2.0)


def test_parameters_must_be_positive():
    with pytest.raises(ValueError):
        v_from_u(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        u_from_v(1.0, 1.0, -1.0)


def test_roundtrip_on_random_bounded_fields(rng):
    # mu u >= -5: further down 1 + lam v = exp(mu u) sinks below double resolution
    for _ in range(20):
        mu, lam = rng.uniform(0.1, 10), 10 ** rng.uniform(0, 6)
        u = rng.uniform(-5, 50, 1000) / mu
        assert roundtrip_error(u, mu, lam) <= 1e-12


def test_verify_pair_degenerate_zero():
    g = build_grid(2, (1.0, 1.0), (9, 9))
    # f must be nonzero for a ProblemSpec; a tiny f keeps the example degenerate
    spec = ProblemSpec(g, 0.0, 1e-300, 1.0)
    pair = verify_pair(spec, 1.0, np.zeros(g.size))
    assert np.all(pair.u == 0)
    assert pair.residual_P == 0.0 and pair.residual_Q == 0.0
    assert pair.positivity_margin == 0.0
    assert not pair.ok


def test_verify_pair_clamps_rounding_negatives(paper_report, paper_spec):
    v = paper_report.solutions[0].pair.v.copy()
    v[0] = -0.5 * CLAMP_TOL
    pair = verify_pair(paper_spec, paper_report.geometry.lam, v)
    assert pair.v.min() >= 0
    v[0] = -10 * CLAMP_TOL
    with pytest.raises(TransformDomainError):
        verify_pair(paper_spec, paper_report.geometry.lam, v)


def test_converged_solutions_verify(paper_report):
    for block in paper_report.solutions:
        assert block.pair.ok
        assert block.pair.residual_P <= 1e-6
        assert block.pair.positivity_margin > 0


def test_residual_transfer_constant(paper_report, paper_spec, rng):
    """residual_P <= C residual_Q with C = max lam / (mu (1 + lam v)) <= lam / mu."""
    lam = paper_report.geometry.lam
    spec, g = paper_spec, paper_spec.grid
    base = paper_report.solutions[1].pair.v
    for eps in (1e-3, 1e-5, 1e-7):
        v = base + eps * smooth_field(g, rng, 1.0, positive=True)
        C = np.max(lam / (spec.mu * (1 + lam * v)))
        rq = residual_Q(spec, lam, v)
        rp = residual_P(spec, u_from_v(v, spec.mu, lam))
        assert rp <= C * rq * (1 + 1e-6) + 1e-13
        assert C <= lam / spec.mu


def derivative_identity_error(n):
    g = build_grid(2, (1.0, 1.0), (n, n))
    x, y = g.coordinates
    u = np.sin(np.pi * x) * np.sin(np.pi * y) * (1 + x)
    mu, lam = 1.5, 3.0
    v = v_from_u(u, mu, lam)

    def dx(w):
        a = np.pad(g.to_array(w), 1)
        return g.to_field((a[2:, 1:-1] - a[:-2, 1:-1]) / (2 * g.spacing[0]))

    inner = (x > 0.2) & (x < 0.8) & (y > 0.2) & (y < 0.8)
    err = dx(u) - lam / mu * dx(v) / (1 + lam * v)
    return np.max(np.abs(err[inner]))


def test_derivative_identity_second_order():
    e1, e2 = derivative_identity_error(41), derivative_identity_error(81)
    assert np.log2(e1 / e2) > 1.9


finite = st.floats(-20, 20, allow_nan=False)
# mu * u must not underflow to zero for the sign test
normal = st.one_of(st.just(0.0), st.floats(1e-300, 20), st.floats(-20, -1e-300))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 16, elements=finite), st.floats(0.05, 20), st.floats(1, 1e6))
def test_roundtrip_property(u, mu, lam):
    assume(mu * u.max() <= 700 and mu * u.min() >= -5)
    assert roundtrip_error(u, mu, lam) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 16, elements=finite), arrays(np.float64, 16, elements=finite),
       st.floats(0.05, 20), st.floats(1, 1e6))
def test_monotone_property(a, b, mu, lam):
    assume(mu * max(a.max(), b.max()) <= 700)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    assert np.all(v_from_u(lo, mu, lam) <= v_from_u(hi, mu, lam))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 16, elements=normal), st.floats(0.05, 20), st.floats(1, 1e6))
def test_sign_equivalence(u, mu, lam):
    assume(mu * u.max() <= 700)
    v = v_from_u(u, mu, lam)
    assert np.array_equal(v >= 0, u >= 0)
