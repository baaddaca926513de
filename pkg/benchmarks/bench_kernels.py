"""Timing comparison of the compiled kernels against the numpy fallback.

Runs the three per-triangle kernels (energy, gradient, Hessian blocks) on
identical inputs at a few lattice sizes and reports per-call times and the
speedup.  Also times one full Newton solve per backend as an end-to-end
number.  Usage: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from disclat import _kernels_py
from disclat.energy import MaterialLaw
from disclat.experiments import linear_init
from disclat.lattice import DofLayout, LatticeGraph, build_constraints
from disclat.solver import newton_minimize

try:
    from disclat import _kernels
except ImportError:
    _kernels = None

PHI5 = 2.0 * np.pi / 5.0
LAW_ARGS = (2.0, 1, 1.0, 1e-2)      # p, psi_kind, kappa, delta
BOND_FLOOR = 1e-9


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(n):
    g = LatticeGraph(n)
    rng = np.random.default_rng(n)
    u = g.pos + 0.05 * g.eps * rng.normal(size=g.pos.shape)
    rows = []
    for label, mod in (("cython", _kernels), ("numpy", _kernels_py)):
        if mod is None:
            continue
        t_e = best_of(lambda: mod.tri_energies(u, g.tris, g.eps, *LAW_ARGS))
        t_g = best_of(
            lambda: mod.tri_gradients(u, g.tris, g.eps, *LAW_ARGS, BOND_FLOOR)
        )
        t_h = best_of(
            lambda: mod.tri_hessians(u, g.tris, g.eps, *LAW_ARGS, BOND_FLOOR)
        )
        rows.append((label, t_e, t_g, t_h))
    print("N=%-4d (%d triangles)" % (n, g.n_triangles))
    print("  %-8s %12s %12s %12s" % ("backend", "energy", "gradient", "hessian"))
    for label, t_e, t_g, t_h in rows:
        print("  %-8s %10.3f ms %10.3f ms %10.3f ms"
              % (label, 1e3 * t_e, 1e3 * t_g, 1e3 * t_h))
    if len(rows) == 2:
        print("  %-8s %11.2fx %11.2fx %11.2fx"
              % ("speedup", rows[1][1] / rows[0][1], rows[1][2] / rows[0][2],
                 rows[1][3] / rows[0][3]))
    print()


def bench_solve(n):
    import disclat._backend as backend

    g = LatticeGraph(n)
    cmap = build_constraints(g, PHI5)
    layout = DofLayout(g, cmap)
    init = linear_init(g, PHI5)
    law = MaterialLaw(p=2.0)
    results = []
    for label, mod in (("cython", _kernels), ("numpy", _kernels_py)):
        if mod is None:
            continue
        backend.tri_energies = mod.tri_energies
        backend.tri_gradients = mod.tri_gradients
        backend.tri_hessians = mod.tri_hessians
        t0 = time.perf_counter()
        _, report = newton_minimize(g, law, cmap, layout, init)
        dt = time.perf_counter() - t0
        results.append((label, dt, report.iterations))
    backend.tri_energies = backend._impl.tri_energies
    backend.tri_gradients = backend._impl.tri_gradients
    backend.tri_hessians = backend._impl.tri_hessians
    print("full Newton solve, N=%d:" % n)
    for label, dt, iters in results:
        print("  %-8s %8.1f ms  (%d iterations)" % (label, 1e3 * dt, iters))
    print()


def main():
    if _kernels is None:
        print("compiled extension not built; timing the numpy fallback only\n")
    for n in (16, 64, 128):
        bench_kernels(n)
    bench_solve(64)


if __name__ == "__main__":
    main()
