"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 infeasible bound.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import attention_bridge as ab
from . import hopfield_core as hc
from . import simplex_maps as sm
from .errors import InfeasibleBoundError, InvalidInputError, NoConvergenceError, SparseHopError
from .harness import patterns as hp
from .harness import sweeps

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


def parse_vector(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse vector {text!r}: {exc}") from None
    if not vals:
        raise InvalidInputError("empty vector")
    return np.array(vals)


def parse_grid(text: str) -> list:
    return [float(v) for v in parse_vector(text)]


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _row(values) -> str:
    return ",".join(sweeps.fmt(v) for v in values)


def cmd_sparsemax(args):
    z = parse_vector(args.vec)
    sv = sm.sparsemax(z) if args.mode == "sparse" else sm.softmax(z, args.beta)
    lines = ["index,p", *(f"{i},{sweeps.fmt(v)}" for i, v in enumerate(sv.p))]
    lines.append(f"# tau={sweeps.fmt(sv.tau)} kappa={sv.kappa}")
    _emit("\n".join(lines) + "\n", args.out)


def _store(args):
    if not args.patterns:
        raise InvalidInputError("--patterns is required")
    return hp.load_patterns(args.patterns, args.format)


def cmd_energy(args):
    store = _store(args)
    x = parse_vector(args.query)
    h = hc.energy(store, x, args.beta, args.mode)
    _emit(f"mode,beta,energy\n{args.mode},{sweeps.fmt(args.beta)},{sweeps.fmt(h)}\n", args.out)


def cmd_retrieve(args):
    store = _store(args)
    trace = hc.retrieve(store, parse_vector(args.query), args.beta, args.mode,
                        args.max_iters, args.step_tol, args.energy_tol)
    header = "t,energy," + ",".join(f"x{i}" for i in range(store.d))
    lines = [f"# mode={args.mode} converged={str(trace.converged).lower()} "
             f"stop={trace.stop_reason}", header]
    for t, (q, h) in enumerate(zip(trace.iterates, trace.energies)):
        lines.append(_row([t, h, *q.x]))
    _emit("\n".join(lines) + "\n", args.out)


def _config(args, grid):
    return sweeps.ExperimentConfig(
        beta=args.beta, threshold=args.threshold, trials=args.trials, seed=args.seed,
        grid=grid, d=args.d, modes=tuple(args.mode), kind=args.kind,
        density=args.density, m=args.m, patterns_path=args.patterns,
        patterns_format=args.format, n_patterns=args.n_patterns,
        max_iters=args.max_iters,
    )


def cmd_capacity_sweep(args):
    cfg = _config(args, [int(v) for v in parse_grid(args.grid)])
    if args.patterns:
        cfg.d = cfg.pool().d
    rows = sweeps.capacity_sweep(cfg)
    _emit(sweeps.sweep_csv(rows, cfg, "capacity"), args.out)


def cmd_robustness_sweep(args):
    cfg = _config(args, parse_grid(args.sigmas))
    if args.patterns:
        cfg.d = cfg.pool().d
    rows = sweeps.robustness_sweep(cfg)
    _emit(sweeps.sweep_csv(rows, cfg, "robustness"), args.out)


def cmd_capacity_bound(args):
    d_grid = [int(v) for v in parse_grid(args.d_grid)]
    beta_grid = parse_grid(args.beta_grid)
    cells = sweeps.capacity_bound_cells(d_grid, beta_grid, args.p_fail, args.m,
                                        args.r, args.delta)
    _emit(sweeps.capacity_bound_table(d_grid, beta_grid, args.p_fail, args.m,
                                      args.r, args.delta), args.out)
    if not any(c.ok for c in cells):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_attn_forward(args):
    R = hp.read_matrix_csv(args.queries)
    Y = hp.read_matrix_csv(args.memories)
    raw = Y.shape[1]
    W_Q = hp.read_matrix_csv(args.wq) if args.wq else np.eye(R.shape[1])
    W_K = hp.read_matrix_csv(args.wk) if args.wk else np.eye(raw)
    default_v = raw if args.ordering == "algorithm" else W_K.shape[1]
    W_V = hp.read_matrix_csv(args.wv) if args.wv else np.eye(default_v)
    out = ab.sparse_hopfield_layer(ab.SequenceBatch(R, Y), ab.ProjectionSet(W_Q, W_K, W_V),
                                   args.beta, args.steps, args.mode[0], args.ordering)
    _emit("".join(_row(r) + "\n" for r in out), args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsehop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, modes_multi=False):
        if modes_multi:
            sp.add_argument("--mode", choices=hc.MODES, action="append",
                            help="repeatable; default both modes")
        else:
            sp.add_argument("--mode", choices=hc.MODES, default="sparse")
        sp.add_argument("--beta", type=float, default=1.0)
        sp.add_argument("--out", help="output CSV path (default stdout)")

    sp = sub.add_parser("sparsemax", help="normalize a score vector")
    sp.add_argument("vec", help="comma-separated scores")
    common(sp)
    sp.set_defaults(func=cmd_sparsemax)

    for name, func, text in (("energy", cmd_energy, "energy of a query"),
                             ("retrieve", cmd_retrieve, "iterate retrieval to a fixed point")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--patterns", required=True)
        sp.add_argument("--format", choices=hp.FORMATS, default="csv")
        sp.add_argument("--query", required=True, help="comma-separated query")
        if name == "retrieve":
            sp.add_argument("--max-iters", type=int, default=hc.DEFAULT_MAX_ITERS)
            sp.add_argument("--step-tol", type=float, default=hc.DEFAULT_STEP_TOL)
            sp.add_argument("--energy-tol", type=float, default=hc.DEFAULT_ENERGY_TOL)
        sp.set_defaults(func=func)

    for name, func, text in (
            ("capacity-sweep", cmd_capacity_sweep, "success rate versus pattern count"),
            ("robustness-sweep", cmd_robustness_sweep, "success rate versus noise level")):
        sp = sub.add_parser(name, help=text)
        common(sp, modes_multi=True)
        sp.add_argument("--threshold", type=float, default=10.0,
                        help="squared-distance success cutoff")
        sp.add_argument("--trials", type=int, default=200)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--d", type=int, default=256)
        sp.add_argument("--kind", choices=("sparse-binary", "sphere", "gaussian"),
                        default="sparse-binary")
        sp.add_argument("--density", type=float, default=0.1)
        sp.add_argument("--m", type=float, default=1.0, help="sphere radius")
        sp.add_argument("--patterns", help="draw patterns from this file instead")
        sp.add_argument("--format", choices=hp.FORMATS, default="csv")
        sp.add_argument("--n-patterns", type=int, default=64)
        sp.add_argument("--max-iters", type=int, default=hc.DEFAULT_MAX_ITERS)
        if name == "capacity-sweep":
            sp.add_argument("--grid", default="8,16,32,64,128", help="pattern counts")
        else:
            sp.add_argument("--sigmas", default=",".join(f"{0.1 * i:.1f}" for i in range(1, 16)),
                            help="gaussian noise levels")
        sp.set_defaults(func=func)

    sp = sub.add_parser("capacity-bound", help="tabulate Lambert-W capacity bounds")
    sp.add_argument("--d-grid", default="8,32,128")
    sp.add_argument("--beta-grid", default="100,1000")
    sp.add_argument("--m", type=float, default=None, help="pattern radius (default sqrt(d))")
    sp.add_argument("--p-fail", "--p", dest="p_fail", type=float, default=0.01)
    sp.add_argument("--r", type=float, default=None, help="sphere radius R (default m)")
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_capacity_bound)

    sp = sub.add_parser("attn-forward", help="Hopfield-layer forward pass")
    common(sp, modes_multi=True)
    sp.add_argument("--queries", required=True, help="CSV, one raw query per row")
    sp.add_argument("--memories", required=True, help="CSV, one raw memory per row")
    sp.add_argument("--wq")
    sp.add_argument("--wk")
    sp.add_argument("--wv")
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--ordering", choices=ab.ORDERINGS, default="algorithm")
    sp.set_defaults(func=cmd_attn_forward)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mode", None) is None or args.mode == []:
        args.mode = list(hc.MODES)
    elif args.command == "attn-forward" and isinstance(args.mode, str):
        args.mode = [args.mode]
    try:
        code = args.func(args)
    except (InfeasibleBoundError, NoConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SparseHopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
