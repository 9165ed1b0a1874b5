"""How the step count grows with the number of subdomains.

Cores stay at 100 x 100 cells while the partition grows, and the frequency
rises with the box so every run keeps about 11 nodes per wavelength.  The
number of steps divided by the sweep length N1 + N2 should level off.

    python3 demos/scaling.py [--layered] [n ...]
"""
import argparse
import math
import time

from helmddm.ddm import DDMSolver
from helmddm.medium import Box, SourceKind, SourceSpec, constant_medium, layered_medium
from helmddm.partition import GridSpec
from helmddm.problem import ProblemSpec


def problem(n, layered):
    cells = 100 * n
    h = 1.0 / cells
    box = Box(0.0, 1.0, -1.0, 0.0)
    omega = 2 * math.pi * (cells + 1) / 11
    make = layered_medium if layered else constant_medium
    medium = make(omega, box, extent=box.dilate(20 * h))
    src = (h * 25, -1.0 + h * 33)
    return ProblemSpec(GridSpec(box, h, 20, 10, n, n), medium, SourceSpec(SourceKind.POINT, src))


ap = argparse.ArgumentParser()
ap.add_argument("n", nargs="*", type=int, default=[2, 4])
ap.add_argument("--layered", action="store_true")
args = ap.parse_args()

print(f"{'partition':>9} {'steps':>6} {'n_DDM_Solv':>10} {'factors':>8} {'seconds':>8}")
for n in args.n:
    t0 = time.perf_counter()
    solver = DDMSolver(problem(n, args.layered))
    _, st = solver.solve_iterative(tol=1e-8, max_steps=40 * n)
    print(f"{n}x{n:<7} {st.n_ddm_iter:>6} {float(st.n_ddm_solv):>10.3f} {st.n_factorizations:>8} "
          f"{time.perf_counter() - t0:>8.1f}")
