import math

import numpy as np
import pytest
from scipy.special import lambertw

from sparsehop import hopfield_core as hc
from sparsehop import theory as th
from sparsehop.errors import DomainError, InfeasibleBoundError, PreconditionError


def bisect_w(x, lo=-1.0, hi=50.0):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_sparse_error_bound_single_pattern():
    s = hc.PatternStore(np.array([[3.0], [4.0], [0.0], [0.0]]))
    x = np.array([1.0, -2.0, 0.5, 0.0])
    assert th.sparse_error_bound(s, x, 2.0, 0) == pytest.approx(5.0 * (1 + 2.0))


def test_sparse_error_bound_identity():
    s = hc.PatternStore(np.eye(2))
    b = th.sparse_error_bound(s, [1.0, 0.0], 1.0, 0)
    assert b == pytest.approx(1 + math.sqrt(2))
    assert np.linalg.norm(hc.sparse_step(s, [1.0, 0.0], 1.0).x - [1, 0]) <= b


def test_sparse_error_bound_equal_overlaps():
    s = hc.PatternStore(np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]]))
    x = np.array([2.0, 0.0])
    assert th.sparse_error_bound(s, x, 3.0, 0) == pytest.approx(s.m * (1 + math.sqrt(2)))


def test_dense_exp_error_bound_examples():
    s = hc.PatternStore(np.eye(2))
    assert th.dense_exp_error_bound(s, [1.0, 0.0], 1.0, 0) == pytest.approx(2 * math.exp(-1))
    vals = [th.dense_exp_error_bound(s, [1.0, 0.0], b, 0) for b in (1, 10, 100)]
    assert vals == sorted(vals, reverse=True) and vals[-1] < 1e-40
    # zero gap: <xi_0, x> equals the cross overlap
    assert th.dense_exp_error_bound(s, [0.0, 1.0], 5.0, 0) == pytest.approx(2.0)
    assert th.dense_exp_error_bound(hc.PatternStore(np.ones((2, 1))), [1, 1], 1.0) == 0.0


def test_dense_exp_error_bound_decreasing_in_beta():
    rng = np.random.default_rng(0)
    s = hc.PatternStore(rng.standard_normal((4, 5)))
    x = s.xi[:, 2] * 1.5
    betas = np.linspace(0.1, 20, 50)
    vals = [th.dense_exp_error_bound(s, x, b, 2) for b in betas]
    assert np.all(np.diff(vals) < 0)


def test_exp_suppressed_bound_examples():
    s = hc.PatternStore(np.eye(2))
    xi = s.xi[:, 0]
    assert th.exp_suppressed_bound(s, xi, xi, 5.0, 0) == pytest.approx(2 * math.exp(-5))
    assert th.exp_suppressed_bound(s, xi, xi, 5.0, 0) == pytest.approx(0.01348, abs=1e-5)
    dup = hc.PatternStore(np.column_stack([[1.0, 2.0], [1.0, 2.0], [0.0, 1.0]]))
    assert th.exp_suppressed_bound(dup, dup.xi[:, 0], dup.xi[:, 0], 3.0, 0) == pytest.approx(
        2 * dup.m * 2)


def test_well_separation_duplicates_unsatisfied():
    dup = hc.PatternStore(np.column_stack([[1.0, 0.0], [1.0, 0.0]]))
    res = th.well_separation_check(dup, [1.0, 0.0], 1.0, 0)
    assert not res.satisfied


def test_well_separation_scaled_orthonormal_closed_form():
    # d = M = 2, xi = s e_mu, x = xi_0, beta = 10: kappa = 1 once s^2 beta > 1 and
    # margin = s^2 - (s^2 + sqrt2 s^2 - s^2 - (s/sqrt2 - s - sqrt2 s)/(10 sqrt2 s))
    const = (1 / math.sqrt(2) - 1 - math.sqrt(2)) / (10 * math.sqrt(2))
    for s in (1.0, 3.0, 10.0, 30.0):
        store = hc.PatternStore(s * np.eye(2))
        satisfied, margin = th.well_separation_check(store, store.xi[:, 0], 10.0, 0)
        assert margin == pytest.approx((1 - math.sqrt(2)) * s**2 + const, rel=1e-12)
        assert not satisfied


def test_well_separation_precondition():
    s = hc.PatternStore(np.eye(2))
    with pytest.raises(PreconditionError) as exc:
        th.well_separation_check(s, [0.0, 1.0], 1.0, 0)
    assert exc.value.nearest == 1


def test_corollary_reduces_to_dense_at_zero_delta():
    for args in [(5, 2.0, 3.0, 0.7), (2, 1.0, 0.1, 1.3), (100, 0.5, 10.0, 0.2)]:
        assert th.corollary_separation_rhs(*args, 0.0) == th.dense_separation_rhs(*args)
        M, m, beta, R = args
        assert th.dense_separation_rhs(*args) == math.log(2 * (M - 1) * m / R) / beta + 2 * m * R


def test_well_separation_reports_corollary_rhs():
    rng = np.random.default_rng(4)
    xi = rng.standard_normal((6, 4))
    s = hc.PatternStore(xi)
    R = hc.separation_report(s).R
    x = xi[:, 1] + 0.1 * R * np.ones(6) / math.sqrt(6)
    res = th.well_separation_check(s, x, 2.0, 1)
    assert res.corollary_rhs == pytest.approx(
        th.corollary_separation_rhs(4, s.m, 2.0, R, res.delta_gap))


@pytest.mark.parametrize("x, w", [(0.0, 0.0), (math.e, 1.0), (-1 / math.e, -1.0)])
def test_lambert_exact_points(x, w):
    assert th.lambert_w0(x) == pytest.approx(w, abs=1e-14)


def test_lambert_omega_constant():
    omega = bisect_w(1.0)
    assert th.lambert_w0(1.0) == pytest.approx(omega, abs=1e-12)
    assert omega == pytest.approx(0.567143290409, abs=1e-12)


def test_lambert_grid_residual_and_monotone():
    xs = np.concatenate([-1 / math.e + np.logspace(-12, -0.5, 100), np.logspace(-10, 300, 300)])
    ws = [th.lambert_w0(x) for x in xs]
    for x, w in zip(xs, ws):
        if x < 1e300 / 1e10:
            assert abs(w * math.exp(w) - x) <= 1e-12 * max(1, abs(x))
        if x + 1 / math.e > 1e-6:  # W is ill-conditioned right at the branch point
            assert w == pytest.approx(lambertw(x).real, rel=1e-12, abs=1e-13)
    order = np.argsort(xs)
    assert np.all(np.diff(np.array(ws)[order]) >= 0)


def test_lambert_domain():
    with pytest.raises(DomainError):
        th.lambert_w0(-0.5)
    with pytest.raises(DomainError):
        th.lambert_w0(float("nan"))


def test_lambert_log_space():
    for L in (-5.0, 0.0, 10.0, 19.9, 20.0, 50.0, 700.0):
        assert th.lambert_w0_exp(L) == pytest.approx(lambertw(math.exp(L)).real, rel=1e-14)
    for L in (1e3, 1e6, 1e12):
        w = th.lambert_w0_exp(L)
        assert w + math.log(w) == pytest.approx(L, rel=1e-15)


def test_lemma_w_self_test():
    c = th.lemma_w_solution(1.0, 2.0)
    assert c == pytest.approx(2 / lambertw(math.exp(1 + math.log(2))).real, rel=1e-14)
    assert th.lemma_w_residual(1.0, 2.0, c) <= 1e-8


def test_capacity_estimate_identities():
    est = th.capacity_lower_bound(32, math.sqrt(32), 100.0, 0.01, math.sqrt(32))
    assert est.residual <= 1e-8 * max(1, est.b)
    assert est.C == pytest.approx(est.b / th.lambert_w0_exp(est.a + math.log(est.b)), rel=1e-10)
    assert est.M_bound == pytest.approx(0.1 * est.C ** (31 / 4))
    assert est.b == pytest.approx(4 * 32 * 100 / (5 * 31))
    # a must be the self-consistent value at the returned bound
    assert est.a == pytest.approx(th.capacity_a(32, est.m, est.R, 0.0, est.M_bound), rel=1e-12)
    assert est.a_dense == pytest.approx(2 / 31 * (1 + math.log(2 * 100 * 32 * 0.01)))
    assert est.residual_dense <= 1e-8 * max(1, est.b)


def test_capacity_grows_with_beta():
    lo = th.capacity_lower_bound(32, 10.0, 1.0, 0.01, 10.0)
    hi = th.capacity_lower_bound(32, 10.0, 10.0, 0.01, 10.0)
    assert hi.M_bound >= lo.M_bound


def test_capacity_infeasible_and_bad_args():
    with pytest.raises(InfeasibleBoundError):
        th.capacity_lower_bound(8, math.sqrt(8), 1.0, 0.01, math.sqrt(8))
    with pytest.raises(ValueError):
        th.capacity_lower_bound(1, 1.0, 1.0, 0.01, 1.0)
    with pytest.raises(ValueError):
        th.capacity_lower_bound(8, 1.0, 1.0, 1.5, 1.0)
    with pytest.raises(ValueError):
        th.capacity_lower_bound(8, 1.0, 1.0, 0.1, 0.0, 0.0)


def test_error_bound_report_single_pattern():
    s = hc.PatternStore(np.array([[1.0], [1.0]]))
    rep = th.error_bound_report(s, [0.3, -2.0], 1.0, 0)
    assert rep.actual_sparse == 0.0 and rep.actual_dense == 0.0 and rep.delta_gap == 0.0
    assert rep.kappa == 1


def test_error_bound_report_fields():
    rng = np.random.default_rng(12)
    for _ in range(100):
        d, M = rng.integers(2, 10, size=2)
        xi = rng.standard_normal((d, M))
        s = hc.PatternStore(xi)
        mu = int(rng.integers(M))
        x = xi[:, mu] + 0.05 * rng.standard_normal(d)
        beta = rng.uniform(0.1, 10)
        rep = th.error_bound_report(s, x, beta, mu)
        assert 1 <= rep.kappa <= M
        assert rep.delta_gap == pytest.approx(rep.actual_dense - rep.actual_sparse)
        assert rep.actual_sparse <= rep.sparse_bound
        assert rep.z_kappa == np.sort(xi.T @ x)[::-1][rep.kappa - 1]
