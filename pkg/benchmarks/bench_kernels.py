"""Compare the compiled element kernels against the numpy fallback.

Times element_stiffness and tet_strains on a structured box mesh and
checks that both backends agree.  Run from the repository root:

    python3 benchmarks/bench_kernels.py --cells 40 --repeats 5
"""

import argparse
import time

import numpy as np

from fiberfem import fem, meshing, tensors
from fiberfem import _kernels_py


def time_call(fn, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cells", type=int, default=30,
                        help="cells per box edge (tet count is 6*cells^3)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs")
    args = parser.parse_args()

    if not fem.COMPILED_KERNELS:
        raise SystemExit("compiled kernels are not built; nothing to compare")
    from fiberfem import _kernels

    n = args.cells
    mesh = meshing.build_box_mesh(n, n, n, 1.0, 1.0, 1.0)
    tets = np.ascontiguousarray(mesh.tets, dtype=np.int64)
    C = tensors.isotropic_stiffness(1.665, 0.36)
    cvoigt = np.broadcast_to(
        tensors.stiffness_to_voigt(C), (mesh.num_tets, 6, 6)).copy()
    rng = np.random.default_rng(0)
    u = rng.normal(size=(mesh.num_vertices, 3))

    print(f"mesh: {mesh.num_tets} tets, {mesh.num_vertices} vertices")
    print(f"{'kernel':<20} {'compiled':>12} {'numpy':>12} {'speedup':>9}")

    t_c, (ke_c, _) = time_call(lambda: _kernels.element_stiffness(
        mesh.vertices, tets, cvoigt), args.repeats)
    t_p, (ke_p, _) = time_call(lambda: _kernels_py.element_stiffness(
        mesh.vertices, tets, cvoigt), args.repeats)
    assert np.abs(ke_c - ke_p).max() <= 1e-12 * np.abs(ke_p).max()
    print(f"{'element_stiffness':<20} {t_c * 1e3:>10.1f}ms {t_p * 1e3:>10.1f}ms "
          f"{t_p / t_c:>8.1f}x")

    t_c, eps_c = time_call(lambda: _kernels.tet_strains(
        mesh.vertices, tets, u), args.repeats)
    t_p, eps_p = time_call(lambda: _kernels_py.tet_strains(
        mesh.vertices, tets, u), args.repeats)
    assert np.abs(eps_c - eps_p).max() <= 1e-12 * max(np.abs(eps_p).max(), 1.0)
    print(f"{'tet_strains':<20} {t_c * 1e3:>10.1f}ms {t_p * 1e3:>10.1f}ms "
          f"{t_p / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
