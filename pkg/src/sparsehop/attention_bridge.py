"""Forward passes of Hopfield layers read as attention.

Queries are rows. Normalization (sparsemax or softmax) runs along each row
over the memories. Nothing here is trained: every weight matrix is supplied
by the caller.

Two update orderings exist. ``ordering="algorithm"`` repeats
``Q <- N(beta Q W_K^T Y^T) Y W_V W_K`` (W_V must be raw x raw so the
product stays in the associative space). ``ordering="equation"`` iterates
``Q <- N(beta Q K^T) K`` with ``K = Y W_K`` and projects the result once
with ``W_V`` (assoc x value). They coincide only for special weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import simplex_maps as sm
from .errors import InvalidInputError, InvalidParameterError, ShapeError

ORDERINGS = ("algorithm", "equation")


@dataclass(frozen=True)
class ProjectionSet:
    W_Q: Optional[np.ndarray]
    W_K: np.ndarray
    W_V: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "ProjectionSet":
        eye = np.eye(dim)
        return cls(eye, eye, eye)


@dataclass(frozen=True)
class SequenceBatch:
    R_raw: np.ndarray
    Y_raw: np.ndarray


def _matrix(a, name) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"{name} must be a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return a


def _matmul(a, b, names):
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {names[0]} {a.shape} by {names[1]} {b.shape}")
    return a @ b


def normalize_rows(scores: np.ndarray, mode: str = "sparse") -> np.ndarray:
    """Row-wise sparsemax (or softmax with unit temperature) of a score matrix."""
    if mode == "sparse":
        return np.vstack([sm.sparsemax(row).p for row in scores])
    if mode == "dense":
        return np.vstack([sm.softmax(row, 1.0).p for row in scores])
    raise InvalidParameterError(f"mode must be 'sparse' or 'dense', got {mode!r}")


def _check(beta, steps, ordering):
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidParameterError(f"beta must be positive, got {beta}")
    if int(steps) != steps or steps < 1:
        raise InvalidParameterError(f"steps must be an integer >= 1, got {steps}")
    if ordering not in ORDERINGS:
        raise InvalidParameterError(f"ordering must be one of {ORDERINGS}")


def _iterate(Q, Y, W_K, W_V, beta, steps, mode, ordering):
    K = _matmul(Y, W_K, ("Y", "W_K"))
    if ordering == "algorithm":
        YV = _matmul(Y, W_V, ("Y", "W_V"))
        target = _matmul(YV, W_K, ("Y W_V", "W_K"))
        for _ in range(steps):
            A = normalize_rows(beta * _matmul(Q, K.T, ("Q", "K^T")), mode)
            Q = A @ target
        return Q
    for _ in range(steps):
        A = normalize_rows(beta * _matmul(Q, K.T, ("Q", "K^T")), mode)
        Q = A @ K
    return _matmul(Q, W_V, ("Q", "W_V"))


def sparse_hopfield_layer(
    batch: SequenceBatch,
    proj: ProjectionSet,
    beta: float,
    steps: int = 1,
    mode: str = "sparse",
    ordering: str = "algorithm",
) -> np.ndarray:
    """Multi-step Hopfield layer: queries ``R W_Q`` attend over memories ``Y``."""
    _check(beta, steps, ordering)
    R = _matrix(batch.R_raw, "R")
    Y = _matrix(batch.Y_raw, "Y")
    W_Q = _matrix(proj.W_Q, "W_Q")
    W_K = _matrix(proj.W_K, "W_K")
    W_V = _matrix(proj.W_V, "W_V")
    Q = _matmul(R, W_Q, ("R", "W_Q"))
    return _iterate(Q, Y, W_K, W_V, beta, int(steps), mode, ordering)


def sparse_hopfield_pooling(
    Y_raw,
    Q_static,
    proj: ProjectionSet,
    beta: float,
    steps: int = 1,
    mode: str = "sparse",
    ordering: str = "algorithm",
) -> np.ndarray:
    """Pooling over memories with fixed prototype queries (``W_Q`` is ignored)."""
    _check(beta, steps, ordering)
    Y = _matrix(Y_raw, "Y")
    Q = _matrix(Q_static, "Q")
    W_K = _matrix(proj.W_K, "W_K")
    W_V = _matrix(proj.W_V, "W_V")
    return _iterate(Q, Y, W_K, W_V, beta, int(steps), mode, ordering)


def sparse_hopfield_dense_layer_variant(R_raw, W_K_as_memory, W_V, beta: float,
                                        mode: str = "sparse") -> np.ndarray:
    """Fully-connected replacement: ``N(beta R W_K^T) W_V`` with W_K rows as memories."""
    _check(beta, 1, "algorithm")
    R = _matrix(R_raw, "R")
    W_K = _matrix(W_K_as_memory, "W_K")
    W_V = _matrix(W_V, "W_V")
    if W_K.shape[0] != W_V.shape[0]:
        raise ShapeError(f"W_K has {W_K.shape[0]} rows but W_V has {W_V.shape[0]}")
    A = normalize_rows(beta * _matmul(R, W_K.T, ("R", "W_K^T")), mode)
    return A @ W_V
