"""Solve the point-source Dirichlet problem on one region and report convergence in N.

    python3 scripts/dirichlet_demo.py --region third --d 2.5 --N 8
"""

import argparse
import time

import numpy as np

from cyclidic.dirichlet import BoundaryFunction, interior_points, solve_dirichlet, weighted_norm
from cyclidic.geometry import RegionSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--region", default="first", choices=("first", "second", "third"))
    ap.add_argument("--d", type=float, default=0.5)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--source", default="5,5,5")
    args = ap.parse_args()
    region = RegionSpec(args.region, args.d)
    e = BoundaryFunction.point_source([float(v) for v in args.source.split(",")])
    t0 = time.perf_counter()
    sol = solve_dirichlet(region, e, args.N)
    print(f"solved N={args.N} in {time.perf_counter() - t0:.1f} s, {len(sol.coefficients)} terms")
    p = interior_points(region, 200, margin=0.1)
    exact = e.e(p)
    norm2 = weighted_norm(e, region) ** 2
    for N in range(1, args.N + 1):
        part = sol.truncated(N)
        err = np.max(np.abs(part(p) - exact))
        print(f"N={N}: interior max error {err:.3e}, captured norm fraction {part.sum_of_squares() / norm2:.12f}")


if __name__ == "__main__":
    main()
