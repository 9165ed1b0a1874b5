"""The decomposition as a preconditioner for FGMRES.

K steps of the additive method form one preconditioner application.  Larger
K means fewer Krylov iterations, and the product (the number of back
substitutions per subdomain) is what actually costs time.
"""
import math

from helmddm.ddm import DDMSolver
from helmddm.experiments import fgmres_solve
from helmddm.krylov import KrylovConfig
from helmddm.medium import Box, SourceKind, SourceSpec, constant_medium
from helmddm.partition import GridSpec
from helmddm.problem import ProblemSpec

n = 4
cells = 100 * n
h = 1.0 / cells
box = Box(0.0, 1.0, -1.0, 0.0)
medium = constant_medium(2 * math.pi * (cells + 1) / 11, box, extent=box.dilate(20 * h))
problem = ProblemSpec(GridSpec(box, h, 20, 10, n, n), medium,
                      SourceSpec(SourceKind.POINT, (h * 25, -1.0 + h * 33)))

solver = DDMSolver(problem)
for k in (1, 2, 4, solver.sweep_length):
    _, st = fgmres_solve(solver, k, KrylovConfig(tol=1e-8, max_iter=200))
    print(f"K={k}: {st.n_gmres_iter} FGMRES iterations, {st.n_local_solv} local solves, "
          f"true residual {st.timings['true_relres']:.1e}")
