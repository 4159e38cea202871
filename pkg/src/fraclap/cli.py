"""Command-line interface.

Subcommands: solve (fractional diffusion u(t)), study (convergence CSV),
spectrum (extreme eigenvalue estimates), nullvec (left null vector of L),
scc (largest strongly connected component size). Exit codes: 0 success,
2 usage error, 3 numerical failure, 4 I/O error.
"""

import argparse
import sys as _sys

import numpy as np

from fraclap.errors import FraclapError, ParseError
from fraclap.harness import (
    DESING_MODES,
    MethodConfig,
    all_method_configs,
    convergence_study,
    solve_fractional_diffusion,
    write_records_csv,
)
from fraclap.krylov import POLE_KINDS
from fraclap.laplacian import build_laplacian, largest_scc
from fraclap.matfun import FracExpParams
from fraclap.solver import ensure_nullvec
from fraclap.sparse import load_matrix_market
from fraclap.spectral import estimate_extents


def _add_common(parser):
    parser.add_argument("--graph", required=True, help="Matrix Market adjacency file")
    parser.add_argument("--ordering", choices=("natural", "rcm"), default="rcm")


def _add_problem(parser):
    parser.add_argument("--t", type=float, default=1.0, help="diffusion time (>= 0)")
    parser.add_argument("--alpha", type=float, default=0.5, help="fractional exponent in (0, 1]")
    parser.add_argument("--theta", type=float, default=1.0, help="rank-one shift strength")
    parser.add_argument("--tol", type=float, default=None, help="consecutive-iterate stop tolerance")
    parser.add_argument("--max-k", type=int, default=60)
    parser.add_argument("--lambda2", type=float, default=None, help="override |lambda_2|")
    parser.add_argument("--lambdan", type=float, default=None, help="override |lambda_n|")
    parser.add_argument("--eds-seed", type=int, default=0)
    parser.add_argument("--dense-limit", type=int, default=1500)
    parser.add_argument("--u0-index", type=int, default=0, help="u0 = e_i on the component")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fraclap",
        description="Fractional diffusion on graphs via desingularized rational Krylov methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve u(t) = exp(-t (L^T)^alpha) u0")
    _add_common(p_solve)
    _add_problem(p_solve)
    p_solve.add_argument("--pole", choices=POLE_KINDS, default="eds")
    p_solve.add_argument("--desing", choices=DESING_MODES, default="implicit")
    p_solve.add_argument("--out", default=None, help="write the full solution vector here")
    p_solve.set_defaults(tol=1e-12)

    p_study = sub.add_parser("study", help="per-iteration convergence study CSV")
    _add_common(p_study)
    _add_problem(p_study)
    p_study.add_argument(
        "--methods",
        default="all",
        help="comma-separated pole:desing pairs, or 'all'",
    )
    p_study.add_argument(
        "--reference",
        choices=("auto", "dense", "eds"),
        default="auto",
        help="reference solution: dense (small n) or refined implicit EDS run",
    )
    p_study.add_argument("--out", default="study.csv", help="CSV output path")

    p_spec = sub.add_parser("spectrum", help="estimate |lambda_2| and |lambda_n|")
    _add_common(p_spec)
    p_spec.add_argument("--est-tol", type=float, default=1e-6)
    p_spec.add_argument("--est-max-iter", type=int, default=5000)

    p_null = sub.add_parser("nullvec", help="left null vector z of L (sum 1)")
    _add_common(p_null)
    p_null.add_argument("--out", default=None, help="write z here, one entry per line")

    p_scc = sub.add_parser("scc", help="largest strongly connected component size")
    _add_common(p_scc)
    return parser


def _load_lcc(args):
    adj = load_matrix_market(args.graph)
    nodes, sub = largest_scc(adj)
    return nodes, sub


def _system(args):
    nodes, sub = _load_lcc(args)
    sys_ = build_laplacian(sub)
    if getattr(args, "lambda2", None) is not None:
        sys_.lambda2 = args.lambda2
    if getattr(args, "lambdan", None) is not None:
        sys_.lambdaN = args.lambdan
    return nodes, sys_


def _u0(sys_, index):
    if not (0 <= index < sys_.n):
        raise ValueError(f"u0 index {index} outside component of size {sys_.n}")
    u0 = np.zeros(sys_.n)
    u0[index] = 1.0
    return u0


def _parse_methods(spec, t, theta, tol, max_k, eds_seed, ordering):
    if spec == "all":
        return [
            MethodConfig(c.pole_kind, c.desing, theta, tol, max_k, eds_seed, ordering)
            for c in all_method_configs(t)
        ]
    cfgs = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            pole, desing = token.split(":")
        except ValueError:
            raise ValueError(f"bad method token {token!r}; expected pole:desing") from None
        if pole not in POLE_KINDS:
            raise ValueError(f"unknown pole kind {pole!r}")
        if desing not in DESING_MODES:
            raise ValueError(f"unknown desingularization {desing!r}")
        cfgs.append(MethodConfig(pole, desing, theta, tol, max_k, eds_seed, ordering))
    if not cfgs:
        raise ValueError("no methods given")
    return cfgs


def _cmd_scc(args):
    _, sub = _load_lcc(args)
    print(f"n={sub.n_rows} nnz={sub.nnz}")
    return 0


def _cmd_spectrum(args):
    _, sys_ = _system(args)
    ext = estimate_extents(sys_, tol=args.est_tol, max_iter=args.est_max_iter)
    print(f"lambda2={ext.lambda2_abs:.6e}")
    print(f"lambdaN={ext.lambdaN_abs:.6e}")
    print(f"iterations={ext.iterations_used} converged={ext.converged}")
    return 0


def _cmd_nullvec(args):
    _, sys_ = _system(args)
    z = ensure_nullvec(sys_, ordering=args.ordering)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for v in z:
                fh.write(f"{v:.17e}\n")
    print(f"n={sys_.n} min={z.min():.6e} max={z.max():.6e} sum={z.sum():.12f}")
    return 0


def _cmd_solve(args):
    _, sys_ = _system(args)
    p = FracExpParams(args.t, args.alpha)
    cfg = MethodConfig(
        args.pole, args.desing, args.theta, args.tol, args.max_k, args.eds_seed, args.ordering
    )
    u0 = _u0(sys_, args.u0_index)
    y, history = solve_fractional_diffusion(sys_, u0, p, cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for v in y:
                fh.write(f"{v:.17e}\n")
    print(f"method={cfg.label()} iterations={len(history)}")
    print(f"sum={y.sum():.12f} min={y.min():.6e} max={y.max():.6e}")
    top = np.argsort(-y, kind="stable")[:5]
    for i in top:
        print(f"  [{i}] {y[i]:.12e}")
    return 0


def _cmd_study(args):
    _, sys_ = _system(args)
    p = FracExpParams(args.t, args.alpha)
    cfgs = _parse_methods(
        args.methods, args.t, args.theta, args.tol, args.max_k, args.eds_seed, args.ordering
    )
    if args.reference == "auto":
        reference = "dense" if sys_.n <= args.dense_limit else "eds_implicit_refined"
    else:
        reference = {"dense": "dense", "eds": "eds_implicit_refined"}[args.reference]
    records, _ = convergence_study(
        sys_, _u0(sys_, args.u0_index), p, cfgs, reference=reference, dense_limit=args.dense_limit
    )
    write_records_csv(records, args.out)
    final = {}
    for r in records:
        final[r.method] = r
    for label in sorted(final):
        r = final[label]
        print(f"{label}: k={r.k} rel_error={r.rel_error:.6e} sum_dev={r.sum_dev:.6e}")
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "scc": _cmd_scc,
    "spectrum": _cmd_spectrum,
    "nullvec": _cmd_nullvec,
    "solve": _cmd_solve,
    "study": _cmd_study,
}


def run_command(args):
    return _COMMANDS[args.command](args)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run_command(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 4
    except FraclapError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    _sys.exit(main())
