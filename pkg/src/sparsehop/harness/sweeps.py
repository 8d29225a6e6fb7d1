"""Capacity and robustness sweeps, and the capacity-bound table.

Every trial draws its randomness from ``SeedSequence(seed, spawn_key=(tag,
bits(x), trial))``, so a trial's outcome depends only on the base seed, the
grid value and the trial index. Grid order, trial count and mode do not
change it, and both modes see exactly the same patterns and queries.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import theory
from ..errors import InfeasibleBoundError, InvalidParameterError, NoConvergenceError
from ..hopfield_core import MODES, PatternStore, retrieve
from .patterns import corrupt, load_patterns, retrieval_success, synthesize_patterns

PRNG_NAME = "numpy-PCG64/SeedSequence"
SWEEP_HEADER = "x,mode,success_rate,mean_sq_error,mean_iters,trials,seed"

_TAG_CAPACITY = 1
_TAG_ROBUSTNESS = 2


def fmt(v) -> str:
    """Reals with 17 significant digits; integers as integers."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


@dataclass
class ExperimentConfig:
    beta: float = 0.1
    threshold: float = 10.0
    trials: int = 200
    seed: int = 0
    grid: Sequence[float] = (8, 16, 32, 64, 128)
    d: int = 256
    modes: Sequence[str] = MODES
    kind: str = "sparse-binary"
    density: float = 0.1
    m: float = 1.0
    patterns_path: Optional[str] = None
    patterns_format: str = "csv"
    n_patterns: int = 64
    max_iters: int = 100
    step_tol: float = 1e-8
    energy_tol: float = 1e-12
    _pool: Optional[PatternStore] = field(default=None, init=False, repr=False)

    def validate(self):
        if not self.beta > 0:
            raise InvalidParameterError("beta must be positive")
        if not self.threshold > 0:
            raise InvalidParameterError("threshold must be positive")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        g = list(self.grid)
        if not g:
            raise InvalidParameterError("grid must be non-empty")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise InvalidParameterError("grid must be strictly increasing")
        for mode in self.modes:
            if mode not in MODES:
                raise InvalidParameterError(f"unknown mode {mode!r}")

    def pool(self) -> Optional[PatternStore]:
        if self.patterns_path is None:
            return None
        if self._pool is None:
            self._pool = load_patterns(self.patterns_path, self.patterns_format)
        return self._pool


@dataclass(frozen=True)
class SweepRow:
    x_value: float
    mode: str
    success_rate: float
    mean_sq_error: float
    mean_iters: float
    trials: int
    seed: int

    def csv_line(self) -> str:
        return ",".join([
            fmt(self.x_value), self.mode, fmt(self.success_rate), fmt(self.mean_sq_error),
            fmt(self.mean_iters), fmt(self.trials), fmt(self.seed),
        ])


def trial_seed(seed: int, tag: int, x_value: float, trial: int) -> np.random.SeedSequence:
    bits = int(np.float64(x_value).view(np.uint64))
    return np.random.SeedSequence(int(seed), spawn_key=(tag, bits, int(trial)))


def _trial_store(cfg: ExperimentConfig, n_patterns: int, ss) -> PatternStore:
    pool = cfg.pool()
    if pool is None:
        return synthesize_patterns(cfg.d, n_patterns, cfg.kind, ss, m=cfg.m,
                                   density=cfg.density)
    if n_patterns > pool.M:
        raise InvalidParameterError(
            f"requested {n_patterns} patterns but the file holds {pool.M}")
    idx = np.sort(np.random.default_rng(ss).choice(pool.M, n_patterns, replace=False))
    return PatternStore(pool.xi[:, idx])


def run_trial(cfg: ExperimentConfig, tag: int, x_value: float, trial: int):
    """One paired trial. Returns ``{mode: (success, sq_error, iterations)}``."""
    ss = trial_seed(cfg.seed, tag, x_value, trial)
    s_store, s_target, s_noise = ss.spawn(3)
    n_patterns = int(x_value) if tag == _TAG_CAPACITY else cfg.n_patterns
    store = _trial_store(cfg, n_patterns, s_store)
    mu = int(np.random.default_rng(s_target).integers(store.M))
    target = store.xi[:, mu]
    if tag == _TAG_CAPACITY:
        query = corrupt(target, "half-mask")
    else:
        query = corrupt(target, "gaussian", seed=s_noise, sigma=float(x_value))
    out = {}
    for mode in cfg.modes:
        trace = retrieve(store, query, cfg.beta, mode, cfg.max_iters,
                         cfg.step_tol, cfg.energy_tol)
        err = float(np.sum((trace.final - target) ** 2))
        out[mode] = (retrieval_success(trace.final, target, cfg.threshold), err,
                     trace.n_iters)
    return out


def _sweep(cfg: ExperimentConfig, tag: int) -> list:
    cfg.validate()
    rows = []
    for x in cfg.grid:
        if tag == _TAG_CAPACITY and (int(x) != x or x < 1):
            raise InvalidParameterError(f"pattern counts must be positive integers, got {x}")
        if tag == _TAG_ROBUSTNESS and x < 0:
            raise InvalidParameterError(f"noise levels must be non-negative, got {x}")
        acc = {mode: [] for mode in cfg.modes}
        for t in range(cfg.trials):
            for mode, res in run_trial(cfg, tag, x, t).items():
                acc[mode].append(res)
        for mode in cfg.modes:
            res = np.array(acc[mode], dtype=float)
            rows.append(SweepRow(
                x_value=int(x) if tag == _TAG_CAPACITY else float(x),
                mode=mode,
                success_rate=float(res[:, 0].mean()),
                mean_sq_error=float(res[:, 1].mean()),
                mean_iters=float(res[:, 2].mean()),
                trials=cfg.trials,
                seed=int(cfg.seed),
            ))
    return rows


def capacity_sweep(cfg: ExperimentConfig) -> list:
    """Half-masked retrieval success as a function of the number of patterns."""
    return _sweep(cfg, _TAG_CAPACITY)


def robustness_sweep(cfg: ExperimentConfig) -> list:
    """Retrieval success under Gaussian query noise at ``cfg.n_patterns`` patterns."""
    return _sweep(cfg, _TAG_ROBUSTNESS)


def sweep_csv(rows, cfg: ExperimentConfig, sweep: str) -> str:
    buf = io.StringIO()
    buf.write(f"# sweep={sweep} prng={PRNG_NAME} beta={fmt(cfg.beta)} "
              f"threshold={fmt(cfg.threshold)} d={cfg.d} kind={cfg.kind}\n")
    buf.write(SWEEP_HEADER + "\n")
    for r in rows:
        buf.write(r.csv_line() + "\n")
    return buf.getvalue()


BOUND_HEADER = ("d,beta,m,p_fail,R,delta,a,b,C,M_bound,a_dense,C_dense,M_dense,"
                "residual,residual_dense,status")


@dataclass(frozen=True)
class BoundCell:
    d: int
    beta: float
    m: float
    R: float
    estimate: Optional[theory.CapacityEstimate]
    status: str

    @property
    def ok(self) -> bool:
        return self.estimate is not None


def capacity_bound_cells(d_grid, beta_grid, p_fail: float, m: Optional[float] = None,
                         R: Optional[float] = None, delta: float = 0.0) -> list:
    """Capacity estimates per (d, beta). ``m=None`` means sqrt(d); ``R=None`` means m."""
    cells = []
    for d in d_grid:
        md = math.sqrt(d) if m is None else m
        Rd = md if R is None else R
        for beta in beta_grid:
            try:
                est = theory.capacity_lower_bound(int(d), md, beta, p_fail, Rd, delta)
                cells.append(BoundCell(int(d), beta, md, Rd, est, "ok"))
            except InfeasibleBoundError:
                cells.append(BoundCell(int(d), beta, md, Rd, None, "infeasible"))
            except NoConvergenceError:
                cells.append(BoundCell(int(d), beta, md, Rd, None, "no-convergence"))
    return cells


def capacity_bound_table(d_grid, beta_grid, p_fail: float, m: Optional[float] = None,
                         R: Optional[float] = None, delta: float = 0.0) -> str:
    """CSV table of capacity lower bounds, sparse next to dense.

    Failed cells print ``n/a`` for derived values and the reason in ``status``.
    """
    buf = io.StringIO()
    buf.write(BOUND_HEADER + "\n")
    for c in capacity_bound_cells(d_grid, beta_grid, p_fail, m, R, delta):
        head = [fmt(c.d), fmt(c.beta), fmt(c.m), fmt(p_fail), fmt(c.R), fmt(delta)]
        if c.ok:
            e = c.estimate
            tail = [fmt(v) for v in (e.a, e.b, e.C, e.M_bound, e.a_dense, e.C_dense,
                                     e.M_dense, e.residual, e.residual_dense)]
        else:
            tail = ["n/a"] * 9
        buf.write(",".join(head + tail + [c.status]) + "\n")
    return buf.getvalue()
