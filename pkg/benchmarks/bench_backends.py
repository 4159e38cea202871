#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the numpy fallback.

Covers the hot paths: CSR matvec, pivot-free LU factorization, triangular
solves, and an end-to-end implicit-projection diffusion solve.

    python benchmarks/bench_backends.py [--n 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from fraclap import _kernels_py
from fraclap.graphs import path_graph, random_strong_digraph
from fraclap.laplacian import build_laplacian
from fraclap.solver import _permuted_shifted_csr, rcm_ordering

try:
    from fraclap import _kernels_c
except ImportError:
    _kernels_c = None


def best_of(repeat, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kernels(n, repeat):
    rng = np.random.default_rng(1)
    sys = build_laplacian(random_strong_digraph(n, 5 * n, rng))
    x = rng.standard_normal(n)
    chain = build_laplacian(path_graph(n))
    B = _permuted_shifted_csr(chain.Lt, rcm_ordering(chain.Lt), -1.0)

    rows = []
    backends = [("python", _kernels_py)] + ([("c", _kernels_c)] if _kernels_c else [])
    for name, mod in backends:
        t_mv, _ = best_of(repeat, mod.csr_matvec, sys.L.row_ptr, sys.L.col_idx, sys.L.values, x)
        t_mvt, _ = best_of(
            repeat, mod.csr_matvec_t, sys.L.row_ptr, sys.L.col_idx, sys.L.values, x, n
        )
        t_lu, fac = best_of(repeat, mod.lu_row_merge, n, B.row_ptr, B.col_idx, B.values, False)
        lp, li, lv, up, ui, uv, _ = fac

        def tri_solve():
            y = mod.solve_lower_unit(lp, li, lv, x.copy())
            return mod.solve_upper(up, ui, uv, y)

        t_tri, _ = best_of(repeat, tri_solve)
        rows.append((name, t_mv, t_mvt, t_lu, t_tri))
    return rows


def bench_end_to_end(n, repeat):
    import os
    import subprocess
    import sys as _s

    script = (
        "import numpy as np, time\n"
        "import fraclap as fl\n"
        "from fraclap.graphs import path_graph\n"
        f"sys_ = fl.build_laplacian(path_graph({n}))\n"
        f"u0 = np.zeros({n}); u0[0] = 1.0\n"
        "p = fl.FracExpParams(1.0, 0.5)\n"
        "cfg = fl.MethodConfig('si-geomean', 'implicit', max_k=40, tol=1e-10)\n"
        "best = float('inf')\n"
        f"for _ in range({repeat}):\n"
        "    t0 = time.perf_counter()\n"
        "    fl.solve_fractional_diffusion(sys_, u0, p, cfg)\n"
        "    best = min(best, time.perf_counter() - t0)\n"
        "print(f'{fl.backend_name()} {best:.4f}')\n"
    )
    out = []
    for env_flag in ("", "1"):
        env = dict(os.environ)
        if env_flag:
            env["FRACLAP_PURE_PYTHON"] = env_flag
        else:
            env.pop("FRACLAP_PURE_PYTHON", None)
        res = subprocess.run(
            [_s.executable, "-c", script], capture_output=True, text=True, env=env
        )
        out.append(res.stdout.strip())
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"kernel benchmarks, n = {args.n} (best of {args.repeat})")
    rows = bench_kernels(args.n, args.repeat)
    print(f"{'backend':8s} {'matvec':>10s} {'matvec_T':>10s} {'LU(path)':>10s} {'tri-solve':>10s}")
    for name, t_mv, t_mvt, t_lu, t_tri in rows:
        print(f"{name:8s} {t_mv*1e3:9.2f}ms {t_mvt*1e3:9.2f}ms {t_lu*1e3:9.2f}ms {t_tri*1e3:9.2f}ms")
    if len(rows) == 2:
        py, c = rows[0], rows[1]
        print(
            "speedup  "
            + " ".join(f"{py[i] / c[i]:9.1f}x" for i in range(1, 5))
        )

    print(f"\nend-to-end diffusion solve on the {args.n}-node path (subprocess per backend):")
    for line in bench_end_to_end(args.n, max(2, args.repeat // 2)):
        print(" ", line)


if __name__ == "__main__":
    main()
