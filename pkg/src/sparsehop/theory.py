"""Analytic bounds: retrieval error, well-separation, and memory capacity.

Every bound is evaluated exactly as its closed form is written; nothing
here clamps or repairs a bound that turns out loose or violated. The
Lambert W solver is a plain Halley iteration with a log-space entry point
so that ``W0(exp(L))`` is available for ``L`` far beyond float range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hopfield_core as hc
from . import simplex_maps as sm
from .errors import (
    DomainError,
    InfeasibleBoundError,
    InvalidParameterError,
    NoConvergenceError,
    PreconditionError,
)

INV_E = math.exp(-1.0)


def _kappa_and_kth(store, q, beta):
    ov = store.xi.T @ q.x
    kappa = sm.sparsemax(beta * ov).kappa
    kth = float(np.sort(ov)[::-1][kappa - 1])
    return ov, kappa, kth


def _check_mu(store, mu):
    if not 0 <= mu < store.M:
        raise InvalidParameterError(f"pattern index {mu} out of range [0, {store.M})")


def sparse_error_bound(store, x, beta: float, mu: int = 0) -> float:
    """``m + sqrt(d) m beta [kappa (max_nu <xi_nu, x> - [Xi^T x]_(kappa)) + 1/beta]``.

    ``kappa`` is the support size of ``sparsemax(beta Xi^T x)``. The bound
    does not depend on ``mu``; it is accepted for a uniform signature.
    """
    store = hc.as_store(store)
    q = hc.as_query(x, store.d)
    hc._check_beta(beta)
    _check_mu(store, mu)
    ov, kappa, kth = _kappa_and_kth(store, q, beta)
    m, d = store.m, store.d
    return float(m + math.sqrt(d) * m * beta * (kappa * (ov.max() - kth) + 1.0 / beta))


def dense_exp_error_bound(store, x, beta: float, mu: int = 0) -> float:
    """``2m(M-1) exp(-beta(<xi_mu, x> - max_{nu != mu} <xi_mu, xi_nu>))``.

    Returns 0.0 for M == 1 (no competing pattern, so the update is exact).
    """
    store = hc.as_store(store)
    q = hc.as_query(x, store.d)
    hc._check_beta(beta)
    _check_mu(store, mu)
    M = store.M
    if M == 1:
        return 0.0
    xi_mu = store.xi[:, mu]
    cross = np.delete(store.xi.T @ xi_mu, mu).max()
    return float(2 * store.m * (M - 1) * math.exp(-beta * (xi_mu @ q.x - cross)))


def exp_suppressed_bound(store, x, x_star, beta: float, mu: int = 0) -> float:
    """``2m(M-1) exp(-beta(Delta_mu - 2m max(|x - xi_mu|, |x - x*|)))``.

    ``x_star`` is the fixed point the caller associates with ``mu``, e.g.
    the endpoint of a converged trace. M == 1 gives 0.0.
    """
    store = hc.as_store(store)
    q = hc.as_query(x, store.d)
    xs = hc.as_query(x_star, store.d)
    hc._check_beta(beta)
    _check_mu(store, mu)
    M = store.M
    if M == 1:
        return 0.0
    delta_mu = hc.separation_report(store).delta[mu]
    xi_mu = store.xi[:, mu]
    radius = max(np.linalg.norm(q.x - xi_mu), np.linalg.norm(q.x - xs.x))
    m = store.m
    return float(2 * m * (M - 1) * math.exp(-beta * (delta_mu - 2 * m * radius)))


def corollary_separation_rhs(M: int, m: float, beta: float, R: float, delta: float) -> float:
    """``ln(2(M-1)m / (R + delta)) / beta + 2mR``."""
    denom = R + delta
    if denom <= 0:
        return float("inf")
    return math.log(2 * (M - 1) * m / denom) / beta + 2 * m * R


def dense_separation_rhs(M: int, m: float, beta: float, R: float) -> float:
    """Dense-model well-separation threshold, i.e. the corollary form at delta = 0."""
    return corollary_separation_rhs(M, m, beta, R, 0.0)


@dataclass(frozen=True)
class WellSeparation:
    satisfied: bool
    margin: float
    rhs: float
    corollary_rhs: float
    dense_rhs: float
    delta_gap: float
    kappa: int

    def __iter__(self):
        yield self.satisfied
        yield self.margin


def well_separation_check(store, x, beta: float, mu: int) -> WellSeparation:
    """Check the sparse well-separation inequality for pattern ``mu`` at ``x``.

    Raises ``PreconditionError`` (carrying the nearest pattern index) unless
    ``x`` lies in the ball of radius R around ``xi_mu``. The sparse threshold
    is ``mn + 2mR - [Xi^T x]_(kappa) - (R - m - m sqrt(d)) / (kappa m beta sqrt(d))``.
    """
    store = hc.as_store(store)
    q = hc.as_query(x, store.d)
    hc._check_beta(beta)
    _check_mu(store, mu)
    if store.M < 2:
        raise PreconditionError("well-separation needs at least two patterns")
    rep = hc.separation_report(store, q)
    dist = np.linalg.norm(store.xi - q.x[:, None], axis=0)
    if dist[mu] > rep.R:
        raise PreconditionError(
            f"query is outside the sphere of pattern {mu}",
            nearest=int(np.argmin(dist)),
        )
    m, d, R, n = store.m, store.d, rep.R, q.n
    _, kappa, kth = _kappa_and_kth(store, q, beta)
    sd = math.sqrt(d)
    rhs = m * n + 2 * m * R - kth - (R - m - m * sd) / (kappa * m * beta * sd)
    margin = float(rep.delta[mu] - rhs)

    xi_mu = store.xi[:, mu]
    gap = float(
        np.linalg.norm(hc.dense_step(store, q, beta).x - xi_mu)
        - np.linalg.norm(hc.sparse_step(store, q, beta).x - xi_mu)
    )
    return WellSeparation(
        satisfied=margin >= 0,
        margin=margin,
        rhs=float(rhs),
        corollary_rhs=corollary_separation_rhs(store.M, m, beta, R, gap),
        dense_rhs=dense_separation_rhs(store.M, m, beta, R),
        delta_gap=gap,
        kappa=kappa,
    )


def _halley(x, w):
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def lambert_w0(x: float) -> float:
    """Principal branch of Lambert W: the ``w >= -1`` with ``w e^w = x``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Lambert W argument must be finite, got {x}")
    if x < -INV_E:
        raise DomainError(f"Lambert W0 undefined below -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x == -INV_E:
        return -1.0
    if x < -0.25:
        # branch-point series in p = sqrt(2(e x + 1))
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x <= math.e:
        w = x if x < 1 else math.log1p(x) * 0.8
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    return _halley(x, w)


def lambert_w0_exp(log_x: float) -> float:
    """``W0(exp(log_x))`` without forming ``exp(log_x)``.

    Solves ``w + ln w = log_x`` by Newton's method once the argument is large.
    """
    log_x = float(log_x)
    if log_x < 20.0:
        return lambert_w0(math.exp(log_x))
    w = log_x - math.log(log_x)
    for _ in range(100):
        dw = (w + math.log(w) - log_x) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-16 * w:
            break
    return w


def lemma_w_solution(a: float, b: float) -> float:
    """Solution ``c = b / W0(exp(a + ln b))`` of ``a c + c ln c - b = 0``."""
    if b <= 0:
        raise InvalidParameterError("b must be positive")
    return b / lambert_w0_exp(a + math.log(b))


def lemma_w_residual(a: float, b: float, c: float) -> float:
    return abs(a * c + c * math.log(c) - b)


@dataclass(frozen=True)
class CapacityEstimate:
    d: int
    m: float
    beta: float
    p_fail: float
    R: float
    delta: float
    a: float
    b: float
    C: float
    w0_arg: float
    M_bound: float
    residual: float
    iterations: int
    a_dense: float
    C_dense: float
    M_dense: float
    residual_dense: float


def capacity_a(d: int, m: float, R: float, delta: float, n_patterns: float) -> float:
    """``4/(d-1) {ln[2 (M - 1) m / (R + delta)] + 1}`` for a pattern count M."""
    arg = 2.0 * (n_patterns - 1.0) * m / (R + delta)
    if not arg > 0:
        raise InfeasibleBoundError(
            f"log argument {arg!r} is not positive (pattern count {n_patterns!r} <= 1)"
        )
    return 4.0 / (d - 1) * (math.log(arg) + 1.0)


def dense_capacity_a(d: int, m: float, beta: float, p_fail: float) -> float:
    """Dense-model counterpart ``2/(d-1) [1 + ln(2 beta m^2 p)]``."""
    return 2.0 / (d - 1) * (1.0 + math.log(2.0 * beta * m * m * p_fail))


def capacity_lower_bound(
    d: int,
    m: float,
    beta: float,
    p_fail: float,
    R: float,
    delta: float = 0.0,
    max_iter: int = 200,
    rtol: float = 1e-14,
) -> CapacityEstimate:
    """Lambert-W lower bound ``M >= sqrt(p) C^((d-1)/4)`` on storable patterns.

    ``a`` depends on the bound itself through ``ln(M - 1)``, so ``C`` is found
    by iterating ``C <- b / W0(exp(a(C) + ln b))`` starting from ``M = 2``.
    The dense comparison uses ``a_dense`` with the same ``b``.
    """
    if d < 2:
        raise InvalidParameterError("d must be at least 2")
    if not (m > 0 and beta > 0):
        raise InvalidParameterError("m and beta must be positive")
    if not 0 < p_fail < 1:
        raise InvalidParameterError("p_fail must lie in (0, 1)")
    if R < 0 or delta < 0 or not R + delta > 0:
        raise InvalidParameterError("need R, delta >= 0 and R + delta > 0")

    b = 4.0 * m * m * beta / (5.0 * (d - 1))
    expo = (d - 1) / 4.0
    sqrt_p = math.sqrt(p_fail)

    a = capacity_a(d, m, R, delta, 2.0)
    C = lemma_w_solution(a, b)
    for it in range(1, max_iter + 1):
        a = capacity_a(d, m, R, delta, sqrt_p * C**expo)
        C_new = lemma_w_solution(a, b)
        if abs(C_new - C) <= rtol * C_new:
            C = C_new
            break
        C = C_new
    else:
        raise NoConvergenceError(f"capacity fixed point not reached in {max_iter} iterations")
    M_bound = sqrt_p * C**expo
    if M_bound <= 1.0:
        raise InfeasibleBoundError(f"bound {M_bound!r} does not exceed one pattern")

    a_dense = dense_capacity_a(d, m, beta, p_fail)
    C_dense = lemma_w_solution(a_dense, b)
    return CapacityEstimate(
        d=d, m=m, beta=beta, p_fail=p_fail, R=R, delta=delta,
        a=a, b=b, C=C, w0_arg=a + math.log(b), M_bound=M_bound,
        residual=lemma_w_residual(a, b, C), iterations=it,
        a_dense=a_dense, C_dense=C_dense, M_dense=sqrt_p * C_dense**expo,
        residual_dense=lemma_w_residual(a_dense, b, C_dense),
    )


@dataclass(frozen=True)
class ErrorBoundReport:
    sparse_bound: float
    dense_exp_bound: float
    actual_sparse: float
    actual_dense: float
    delta_gap: float
    kappa: int
    z_kappa: float


def error_bound_report(store, x, beta: float, mu: int) -> ErrorBoundReport:
    """One sparse and one dense step from ``x`` against both analytic bounds."""
    store = hc.as_store(store)
    q = hc.as_query(x, store.d)
    hc._check_beta(beta)
    _check_mu(store, mu)
    xi_mu = store.xi[:, mu]
    es = float(np.linalg.norm(hc.sparse_step(store, q, beta).x - xi_mu))
    ed = float(np.linalg.norm(hc.dense_step(store, q, beta).x - xi_mu))
    _, kappa, kth = _kappa_and_kth(store, q, beta)
    return ErrorBoundReport(
        sparse_bound=sparse_error_bound(store, q, beta, mu),
        dense_exp_bound=dense_exp_error_bound(store, q, beta, mu),
        actual_sparse=es,
        actual_dense=ed,
        delta_gap=ed - es,
        kappa=kappa,
        z_kappa=kth,
    )
