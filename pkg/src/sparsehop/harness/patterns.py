"""Pattern files, synthetic pattern generators and query corruption."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..errors import (
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
    ParseError,
    ShapeError,
)
from ..hopfield_core import PatternStore, QueryState

F64LE_MAGIC = "HOPF1"
FORMATS = ("csv", "f64le")


def read_matrix_csv(path) -> np.ndarray:
    """Read a comma-separated matrix, one row per line. Blank lines are skipped."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for r, line in enumerate(csv.reader(fh), start=1):
            if not line or all(not cell.strip() for cell in line):
                continue
            vals = []
            for c, cell in enumerate(line, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"cannot parse {cell!r} as a number", r, c) from None
                if not math.isfinite(v):
                    raise InvalidInputError(f"non-finite value at row {r}, col {c}")
                vals.append(v)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(f"expected {width} columns, found {len(vals)}", r)
            rows.append(vals)
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def load_patterns(path, format: str = "csv") -> PatternStore:
    """Load a pattern store.

    ``csv``: one pattern per row. ``f64le``: a text line ``HOPF1 d M`` then
    ``d*M`` little-endian doubles in column-major order.
    """
    path = Path(path)
    if format == "csv":
        return PatternStore(read_matrix_csv(path).T)
    if format != "f64le":
        raise InvalidParameterError(f"format must be one of {FORMATS}, got {format!r}")
    raw = path.read_bytes()
    if not raw:
        raise EmptyInputError(f"{path}: empty file")
    nl = raw.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line", 1)
    parts = raw[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 3 or parts[0] != F64LE_MAGIC:
        raise ParseError(f"bad header {raw[:nl]!r}, expected 'HOPF1 d M'", 1)
    try:
        d, M = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError("header dimensions are not integers", 1) from None
    if d < 1 or M < 1:
        raise EmptyInputError("header declares an empty matrix")
    body = raw[nl + 1:]
    if len(body) != 8 * d * M:
        raise ParseError(f"expected {8 * d * M} payload bytes, found {len(body)}")
    xi = np.frombuffer(body, dtype="<f8").reshape((d, M), order="F")
    if not np.all(np.isfinite(xi)):
        raise InvalidInputError("pattern file contains NaN or Inf")
    return PatternStore(xi)


def save_patterns(store: PatternStore, path, format: str = "csv") -> None:
    path = Path(path)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for col in store.xi.T:
                w.writerow([repr(float(v)) for v in col])
    elif format == "f64le":
        header = f"{F64LE_MAGIC} {store.d} {store.M}\n".encode("ascii")
        payload = np.asarray(store.xi, dtype="<f8").tobytes(order="F")
        path.write_bytes(header + payload)
    else:
        raise InvalidParameterError(f"format must be one of {FORMATS}, got {format!r}")


def synthesize_patterns(d: int, M: int, kind: str = "gaussian", seed=0,
                        m: float = 1.0, density: float = 0.1) -> PatternStore:
    """Random patterns, deterministic in ``seed``.

    kinds: ``gaussian`` (i.i.d. N(0,1)), ``sphere`` (uniform on the sphere of
    radius ``m``), ``sparse-binary`` (i.i.d. Bernoulli(``density``) in {0,1}).
    ``seed`` may be an int or a ``numpy.random.SeedSequence``.
    """
    if d < 1 or M < 1:
        raise InvalidParameterError("d and M must be positive")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        xi = rng.standard_normal((d, M))
    elif kind == "sphere":
        if not m > 0:
            raise InvalidParameterError("sphere radius must be positive")
        xi = rng.standard_normal((d, M))
        norms = np.linalg.norm(xi, axis=0)
        while np.any(norms == 0):  # pragma: no cover - measure zero
            xi[:, norms == 0] = rng.standard_normal((d, int(np.sum(norms == 0))))
            norms = np.linalg.norm(xi, axis=0)
        xi = xi / norms * m
    elif kind == "sparse-binary":
        if not 0 < density <= 1:
            raise InvalidParameterError("density must lie in (0, 1]")
        xi = (rng.random((d, M)) < density).astype(float)
    else:
        raise InvalidParameterError(f"unknown pattern kind {kind!r}")
    return PatternStore(xi)


def corrupt(x, kind: str = "half-mask", seed=0, fraction: float = 0.5,
            sigma: float = 0.0) -> QueryState:
    """Corrupt a query.

    ``half-mask`` zeroes the trailing ceil(d/2) coordinates, ``mask`` zeroes a
    random ceil(fraction*d) subset, ``gaussian`` adds N(0, sigma^2) noise.
    """
    x = np.array(x.x if isinstance(x, QueryState) else x, dtype=float).reshape(-1)
    d = x.size
    if kind == "half-mask":
        x[d - math.ceil(d / 2):] = 0.0
    elif kind == "mask":
        if not 0 <= fraction <= 1:
            raise InvalidParameterError("mask fraction must lie in [0, 1]")
        rng = np.random.default_rng(seed)
        idx = rng.permutation(d)[: math.ceil(fraction * d)]
        x[idx] = 0.0
    elif kind == "gaussian":
        if not sigma >= 0:
            raise InvalidParameterError("sigma must be non-negative")
        if sigma > 0:
            x = x + sigma * np.random.default_rng(seed).standard_normal(d)
    else:
        raise InvalidParameterError(f"unknown corruption {kind!r}")
    return QueryState(x)


def retrieval_success(retrieved, target, threshold: float) -> bool:
    """Strict ``|retrieved - target|^2 < threshold``."""
    if not threshold > 0:
        raise InvalidParameterError("threshold must be positive")
    r = np.asarray(retrieved, dtype=float).reshape(-1)
    t = np.asarray(target, dtype=float).reshape(-1)
    if r.shape != t.shape:
        raise ShapeError(f"shapes differ: {r.shape} vs {t.shape}")
    return bool(np.sum((r - t) ** 2) < threshold)
