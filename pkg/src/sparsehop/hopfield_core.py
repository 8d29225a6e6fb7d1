"""Sparse and dense modern Hopfield models: energies, updates, retrieval."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import simplex_maps as sm
from .errors import (
    ConsistencyError,
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
    ShapeError,
)

MODES = ("sparse", "dense")

DEFAULT_MAX_ITERS = 100
DEFAULT_STEP_TOL = 1e-8
DEFAULT_ENERGY_TOL = 1e-12
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class PatternStore:
    """Memory matrix ``xi`` (d x M, one pattern per column)."""

    xi: np.ndarray
    norms: np.ndarray = field(init=False, repr=False)
    m: float = field(init=False)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        if xi.ndim == 1:
            xi = xi.reshape(-1, 1)
        if xi.ndim != 2:
            raise ShapeError(f"pattern matrix must be 2-d, got shape {xi.shape}")
        if xi.size == 0:
            raise EmptyInputError("pattern matrix is empty")
        if not np.all(np.isfinite(xi)):
            raise InvalidInputError("pattern matrix contains NaN or Inf")
        xi.setflags(write=False)
        norms = np.linalg.norm(xi, axis=0)
        norms.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "m", float(norms.max()))

    @classmethod
    def from_rows(cls, rows) -> "PatternStore":
        """Build from an (M x d) array holding one pattern per row."""
        return cls(np.asarray(rows, dtype=float).T)

    @property
    def d(self) -> int:
        return self.xi.shape[0]

    @property
    def M(self) -> int:
        return self.xi.shape[1]

    def pattern(self, mu: int) -> np.ndarray:
        return self.xi[:, mu]

    def overlaps(self, x) -> np.ndarray:
        return self.xi.T @ as_query(x, self.d).x


@dataclass(frozen=True)
class QueryState:
    x: np.ndarray
    n: float = field(init=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if x.size == 0:
            raise EmptyInputError("query is empty")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("query contains NaN or Inf")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n", float(np.linalg.norm(x)))

    def __array__(self, dtype=None, copy=None):
        return self.x if dtype is None else self.x.astype(dtype)


def as_query(x, d: Optional[int] = None) -> QueryState:
    q = x if isinstance(x, QueryState) else QueryState(x)
    if d is not None and q.x.size != d:
        raise ShapeError(f"query has dimension {q.x.size}, patterns have {d}")
    return q


def as_store(store) -> PatternStore:
    return store if isinstance(store, PatternStore) else PatternStore(store)


def _check_beta(beta):
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidParameterError(f"beta must be positive and finite, got {beta}")


def _check_mode(mode):
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")


def sparse_energy(store, x, beta: float, temperature_scaled: bool = True) -> float:
    """Sparse Hopfield energy.

    With ``temperature_scaled`` (default) this is
    ``-Psi*(beta Xi^T x) / beta + <x, x>/2``, the form for which the sparse
    update is a convex-concave step at every beta. ``temperature_scaled=False``
    drops the ``1/beta`` factor; the two agree at ``beta = 1``.
    """
    store = as_store(store)
    q = as_query(x, store.d)
    _check_beta(beta)
    conj = sm.psi_star(beta * (store.xi.T @ q.x))
    if temperature_scaled:
        conj /= beta
    return float(-conj + 0.5 * q.x @ q.x)


def dense_energy(store, x, beta: float) -> float:
    """``-lse(beta, Xi^T x) + <x,x>/2 + log(M)/beta + m^2/2``."""
    store = as_store(store)
    q = as_query(x, store.d)
    _check_beta(beta)
    return float(
        -sm.lse(beta, store.xi.T @ q.x)
        + 0.5 * q.x @ q.x
        + math.log(store.M) / beta
        + 0.5 * store.m**2
    )


def sparse_step(store, x, beta: float) -> QueryState:
    store = as_store(store)
    q = as_query(x, store.d)
    _check_beta(beta)
    return QueryState(store.xi @ sm.sparsemax(beta * (store.xi.T @ q.x)).p)


def dense_step(store, x, beta: float) -> QueryState:
    store = as_store(store)
    q = as_query(x, store.d)
    _check_beta(beta)
    return QueryState(store.xi @ sm.softmax(store.xi.T @ q.x, beta).p)


def step(store, x, beta: float, mode: str = "sparse") -> QueryState:
    _check_mode(mode)
    return (sparse_step if mode == "sparse" else dense_step)(store, x, beta)


def energy(store, x, beta: float, mode: str = "sparse") -> float:
    _check_mode(mode)
    return (sparse_energy if mode == "sparse" else dense_energy)(store, x, beta)


@dataclass
class RetrievalTrace:
    iterates: list
    energies: list
    converged: bool
    stop_reason: str
    beta: float
    mode: str = "sparse"

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1].x

    @property
    def n_iters(self) -> int:
        return len(self.iterates) - 1


def retrieve(
    store,
    x0,
    beta: float,
    mode: str = "sparse",
    max_iters: int = DEFAULT_MAX_ITERS,
    step_tol: float = DEFAULT_STEP_TOL,
    energy_tol: float = DEFAULT_ENERGY_TOL,
) -> RetrievalTrace:
    """Iterate the retrieval update from ``x0`` until a stopping rule fires.

    Stops when the sup-norm step is at most ``step_tol``, when the energy
    change is at most ``energy_tol``, or after ``max_iters`` updates. Raises
    ``ConsistencyError`` if the energy rises by more than
    ``1e-9 (1 + |H|)``, which the convex-concave argument forbids.
    """
    store = as_store(store)
    _check_mode(mode)
    _check_beta(beta)
    if max_iters < 1:
        raise InvalidParameterError("max_iters must be >= 1")
    if not (step_tol > 0 and energy_tol > 0):
        raise InvalidParameterError("tolerances must be positive")
    update = sparse_step if mode == "sparse" else dense_step
    H = sparse_energy if mode == "sparse" else dense_energy

    x = as_query(x0, store.d)
    iterates = [x]
    energies = [H(store, x, beta)]
    stop_reason = "max-iters"
    for _ in range(max_iters):
        x_new = update(store, x, beta)
        h_new = H(store, x_new, beta)
        h_old = energies[-1]
        if h_new > h_old + MONOTONE_SLACK * (1.0 + abs(h_old)):
            raise ConsistencyError(
                f"{mode} energy increased from {h_old!r} to {h_new!r}"
            )
        iterates.append(x_new)
        energies.append(h_new)
        if np.max(np.abs(x_new.x - x.x)) <= step_tol:
            stop_reason = "step-tolerance"
            break
        if abs(h_old - h_new) <= energy_tol:
            stop_reason = "energy-tolerance"
            break
        x = x_new
    return RetrievalTrace(
        iterates, energies, stop_reason != "max-iters", stop_reason, beta, mode
    )


@dataclass(frozen=True)
class SeparationReport:
    """Pattern separations. ``delta`` and ``R`` are NaN when M == 1."""

    delta: np.ndarray
    delta_tilde: Optional[np.ndarray]
    R: float
    sphere_member: Optional[int]


def pairwise_distances(xi: np.ndarray) -> np.ndarray:
    sq = np.sum(xi * xi, axis=0)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (xi.T @ xi)
    # Gram-trick cancellation; exact zeros for identical columns
    D2 = np.maximum(D2, 0.0)
    same = np.all(xi[:, :, None] == xi[:, None, :], axis=0)
    D2[same] = 0.0
    return np.sqrt(D2)


def separation_report(store, x=None) -> SeparationReport:
    store = as_store(store)
    M = store.M
    q = None if x is None else as_query(x, store.d)
    if M == 1:
        dt = None if q is None else np.full(1, np.nan)
        return SeparationReport(np.full(1, np.nan), dt, float("nan"), None)

    G = store.xi.T @ store.xi
    off = G.copy()
    np.fill_diagonal(off, -np.inf)
    delta = np.diag(G) - off.max(axis=1)

    D = pairwise_distances(store.xi)
    np.fill_diagonal(D, np.inf)
    R = 0.5 * float(D.min())

    delta_tilde = None
    member = None
    if q is not None:
        ov = store.xi.T @ q.x
        delta_tilde = np.empty(M)
        for mu in range(M):
            delta_tilde[mu] = ov[mu] - np.max(np.delete(ov, mu))
        dist = np.linalg.norm(store.xi - q.x[:, None], axis=0)
        nearest = int(np.argmin(dist))
        if dist[nearest] <= R:
            member = nearest
    return SeparationReport(delta, delta_tilde, R, member)
