"""Normalization maps onto the probability simplex.

Sparsemax is the Euclidean projection of a score vector onto the simplex and
is computed here with the sorted cumulative-sum threshold rule. The module
also carries the matching regularizer (negative Gini entropy), its convex
conjugate, softmax / log-sum-exp for the dense model, and a support
enumeration oracle that shares no code with the closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DegeneratePointError,
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
)

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class SimplexVector:
    """A point on the simplex together with its sparsity bookkeeping.

    For softmax outputs ``tau`` is ``-inf`` and every index is in the support.
    """

    p: np.ndarray
    tau: float
    kappa: int
    support: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return len(self.p)


def as_scores(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.ndim != 1:
        raise InvalidInputError(f"score vector must be 1-d, got shape {z.shape}")
    if z.size == 0:
        raise EmptyInputError("score vector is empty")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("score vector contains NaN or Inf")
    return z


def _check_beta(beta):
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidParameterError(f"beta must be positive and finite, got {beta}")


def _support_tol(z):
    return 1e-12 * max(1.0, float(np.max(np.abs(z))))


def sparsemax(z) -> SimplexVector:
    """Project ``z`` onto the simplex: ``[z - tau]_+`` with the sorted threshold.

    ``kappa`` is the largest k with ``1 + k z_(k) > sum_{nu<=k} z_(nu)``.
    Entries within ``1e-12 max(1, |z|_inf)`` of the threshold are treated as
    outside the support and the threshold is recomputed over the support,
    so ``p > 0`` exactly on ``support``.
    """
    z = as_scores(z)
    M = z.size
    if M == 1:
        return SimplexVector(np.ones(1), float(z[0] - 1.0), 1, np.array([0]))

    z_sorted = np.sort(z, kind="stable")[::-1]
    cssv = np.cumsum(z_sorted)
    k = np.arange(1, M + 1)
    kappa = int(k[1.0 + k * z_sorted > cssv][-1])
    tau = (cssv[kappa - 1] - 1.0) / kappa

    support = np.flatnonzero(z - tau > _support_tol(z))
    if support.size != kappa:
        # boundary entries dropped; threshold over the remaining face
        kappa = int(support.size)
        tau = (z[support].sum() - 1.0) / kappa
    p = np.zeros(M)
    p[support] = z[support] - tau
    return SimplexVector(p, float(tau), kappa, support)


def softmax(z, beta: float = 1.0) -> SimplexVector:
    """Max-shifted ``exp(beta z) / sum exp(beta z)``; support is every index."""
    z = as_scores(z)
    _check_beta(beta)
    s = beta * z
    e = np.exp(s - s.max())
    p = e / e.sum()
    return SimplexVector(p, float("-inf"), z.size, np.arange(z.size))


def lse(beta: float, z) -> float:
    """``beta^-1 log sum exp(beta z)``."""
    z = as_scores(z)
    _check_beta(beta)
    s = beta * z
    smax = s.max()
    return float((smax + np.log(np.exp(s - smax).sum())) / beta)


def _as_simplex_point(p) -> np.ndarray:
    p = np.asarray(p.p if isinstance(p, SimplexVector) else p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInputError("simplex point must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("simplex point contains NaN or Inf")
    if p.min() < -SIMPLEX_TOL or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise InvalidInputError("point is not on the probability simplex")
    return p


def gini_entropy_neg(p) -> float:
    """Negative Gini entropy ``-1/2 sum p(1-p)``, i.e. ``|p|^2/2 - 1/2``."""
    p = _as_simplex_point(p)
    return float(-0.5 * np.sum(p * (1.0 - p)))


def psi_star(z) -> float:
    """Convex conjugate of the negative Gini entropy over the simplex.

    Closed form ``|z|^2/2 - |p* - z|^2/2 + 1/2`` with ``p* = sparsemax(z)``.
    """
    z = as_scores(z)
    p = sparsemax(z).p
    r = p - z
    return float(0.5 * z @ z - 0.5 * r @ r + 0.5)


def simplex_projection_oracle(z, exhaustive: bool = False) -> SimplexVector:
    """Brute-force ``argmin_{p in simplex} |p - z|^2`` by support enumeration.

    For each candidate support S the minimizer on the affine slice
    ``{sum p = 1, p = 0 off S}`` is ``z_S - (sum z_S - 1)/|S|``; infeasible
    candidates (a negative entry) are discarded and the closest feasible one
    wins. By default the candidates are the top-k index sets, k = 1..M.
    ``exhaustive=True`` tries every non-empty subset (M <= 20).
    """
    z = as_scores(z)
    M = z.size
    if exhaustive:
        if M > 20:
            raise InvalidParameterError("exhaustive enumeration limited to M <= 20")
        candidates = (
            np.array(c) for k in range(1, M + 1) for c in combinations(range(M), k)
        )
    else:
        order = np.argsort(-z, kind="stable")
        candidates = (order[:k] for k in range(1, M + 1))

    best = None
    best_dist = np.inf
    for S in candidates:
        shift = (z[S].sum() - 1.0) / S.size
        q = z[S] - shift
        if q.min() < 0.0:
            continue
        p = np.zeros(M)
        p[S] = q
        dist = float(np.sum((p - z) ** 2))
        if dist < best_dist:
            best, best_dist, best_shift = p, dist, shift
    support = np.flatnonzero(best > 0)
    return SimplexVector(best, float(best_shift), int(support.size), support)


def sparsemax_jacobian(z) -> np.ndarray:
    """Analytic Jacobian ``diag(s) - s s^T / kappa`` (s = support indicator)."""
    sv = sparsemax(z)
    s = np.zeros(len(sv))
    s[sv.support] = 1.0
    return np.diag(s) - np.outer(s, s) / sv.kappa


def sparsemax_jacobian_fd(z, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of sparsemax; column j is d p / d z_j.

    Refuses points where any score lies within ``10 h`` of the threshold,
    since the support could change inside the stencil.
    """
    z = as_scores(z)
    if not (1e-8 <= h <= 1e-4):
        raise InvalidParameterError(f"step h must lie in [1e-8, 1e-4], got {h}")
    tau = sparsemax(z).tau
    if z.size > 1 and np.min(np.abs(z - tau)) <= 10 * h:
        raise DegeneratePointError("z is within 10h of a support boundary")
    M = z.size
    J = np.empty((M, M))
    for j in range(M):
        e = np.zeros(M)
        e[j] = h
        J[:, j] = (sparsemax(z + e).p - sparsemax(z - e).p) / (2 * h)
    return J
