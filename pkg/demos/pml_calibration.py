"""Choosing the absorbing-layer strength.

A centred point source is solved directly on a single domain for several
values of C_sigma.  The printed ratio compares the field one node inside the
outer Dirichlet ring with the field half a wavelength to a wavelength from
the source; anything that comes back from the truncation shows up here.
"""
import math

import numpy as np

from helmddm.medium import Box, SourceKind, SourceSpec, constant_medium
from helmddm.oracle import direct_solve_global
from helmddm.partition import GridSpec
from helmddm.problem import ProblemSpec

cells = 100
h = 1.0 / cells
box = Box(0.0, 1.0, -1.0, 0.0)
k = 2 * math.pi * (cells + 1) / 11
lam = 2 * math.pi / k

for c_sigma in (5.0, 10.0, 15.0, 25.0, 35.0):
    p = ProblemSpec(GridSpec(box, h, 20, 10), constant_medium(k, box, extent=box.dilate(20 * h)),
                    SourceSpec(SourceKind.POINT, (0.5, -0.5)), c_sigma)
    a = np.abs(direct_solve_global(p).values)
    ring = max(a[1, 1:-1].max(), a[-2, 1:-1].max(), a[1:-1, 1].max(), a[1:-1, -2].max())
    gw = p.grid.global_window
    x = p.anchor[0] + h * gw.xs_index()
    y = p.anchor[1] + h * gw.ys_index()
    r = np.hypot(x[None, :] - 0.5, y[:, None] + 0.5)
    near = a[(r >= lam / 2) & (r <= lam)].max()
    print(f"C_sigma {c_sigma:5.1f}: sigma0 {p.profile.sigma0:8.1f}, ring / near field {ring / near:.1e}")
