"""Time the numba and pure-numpy kernels on the workloads the CLI runs.

    python3 benchmarks/bench_backends.py [--dim 64] [--order 160] [--repeat 3]

Reports the best wall time of each backend and the largest elementwise
difference between them.
"""

import argparse
import time

import numpy as np

from cvteleport import _accel, kernels
from cvteleport.states import normalize, odd_cat_state, two_mode_squeezed_vacuum
from cvteleport.teleport import averaged_density_matrix, default_outcome_grid


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--order", type=int, default=160)
    parser.add_argument("--wigner-points", type=int, default=81)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    import numba

    _accel.set_threads(args.threads)

    cat = odd_cat_state(1.5j, args.dim)
    ent = normalize(two_mode_squeezed_vacuum(0.8178, args.dim))
    grid = default_outcome_grid(args.order)
    XX, PP = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    X, P = XX.ravel(), PP.ravel()
    A = np.ascontiguousarray(ent.coeffs)
    a = np.ascontiguousarray(cat.coeffs)
    rho = averaged_density_matrix(cat, ent, grid).elements
    w = np.linspace(-4.0, 4.0, args.wigner_points)

    # compile outside the timed region
    kernels.teleport_amplitudes_numba(X[:2], P[:2], A, a)
    kernels.wigner_grid_numba(rho, w[:2], w[:2])

    cases = [
        (
            f"teleport_amplitudes  {X.size} outcomes, dim {args.dim}",
            lambda: kernels.teleport_amplitudes_numba(X, P, A, a),
            lambda: kernels.teleport_amplitudes_numpy(X, P, A, a),
        ),
        (
            f"wigner_grid          {w.size}x{w.size} points, dim {args.dim}",
            lambda: kernels.wigner_grid_numba(rho, w, w),
            lambda: kernels.wigner_grid_numpy(rho, w, w),
        ),
    ]
    print(f"numba {numba.__version__}, {numba.get_num_threads()} thread(s), numpy {np.__version__}")
    print(f"{'kernel':<52} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max diff':>9}")
    for label, fast, slow in cases:
        t_nb, r_nb = best_of(fast, args.repeat)
        t_np, r_np = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(r_nb - r_np)))
        print(f"{label:<52} {t_nb:9.3f} {t_np:9.3f} {t_np / t_nb:7.1f}x {diff:9.1e}")


if __name__ == "__main__":
    main()
