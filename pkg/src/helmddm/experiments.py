"""Reusable drivers: mesh-refinement studies and preconditioned solves."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .ddm import DDMSolver
from .discretize import apply_array
from .errors import ContractError
from .grid import FieldGrid
from .krylov import KrylovConfig, fgmres
from .medium import MediumKind, SourceKind
from .oracle import (ErrorReport, convergence_rates, direct_solve_global, error_norms,
                     gaussian_radial_solution, greens_solution, near_source_mask)
from .problem import ProblemSpec


def refine(problem: ProblemSpec, factor: int) -> ProblemSpec:
    """Same problem on a mesh ``factor`` times finer, absorbing layers kept at the same node counts."""
    grid = replace(problem.grid, h=problem.h / factor)
    box = grid.box
    medium = replace(problem.medium, extent=box.dilate(grid.n_ramp * grid.h))
    return replace(problem, grid=grid, medium=medium)


def fgmres_solve(solver: DDMSolver, k_steps: int, cfg: KrylovConfig, f=None):
    """FGMRES on the global system, preconditioned by ``k_steps`` decomposition steps."""
    f = solver.global_source if f is None else f
    shape = f.shape
    a = lambda v: apply_array(solver.global_op, v.reshape(shape))
    m = lambda v: solver.precondition(v.reshape(shape), k_steps)
    x, stats = fgmres(a, m, f, cfg, k_steps=k_steps)
    stats.sweep_length = solver.sweep_length
    stats.n_factorizations = solver.cache.n_factor
    stats.n_subdomain_solves = solver.n_solves
    g = solver.grid
    return FieldGrid(g.global_window, x.reshape(shape), g.h, g.anchor), stats


def reference_solution(problem: ProblemSpec, region, reference="analytic"):
    """Reference values on ``region``: free-space field or the direct solve one level finer."""
    h, anchor = problem.h, problem.anchor
    if reference == "analytic":
        if problem.medium.kind is not MediumKind.CONSTANT:
            raise ContractError("the analytic reference needs a constant medium")
        k = problem.medium.k_min
        x = anchor[0] + h * region.xs_index()
        y = anchor[1] + h * region.ys_index()
        if problem.source.kind is SourceKind.GAUSSIAN:
            return gaussian_radial_solution(k, problem.source, x[None, :], y[:, None])
        return greens_solution(k, problem.source, x[None, :], y[:, None], h)
    fine = refine(problem, 2)
    u = direct_solve_global(fine)
    # coarse node (p, q) is fine node (2p, 2q)
    gw = fine.grid.global_window
    rows = 2 * region.ys_index() - gw.q0
    cols = 2 * region.xs_index() - gw.p0
    return u.values[np.ix_(rows, cols)]


@dataclass
class LevelResult:
    cells: int
    report: ErrorReport
    relres: float
    seconds: float
    field: FieldGrid | None = None


def convergence_study(problem: ProblemSpec, levels=3, steps=None, reference="analytic",
                      factor_budget=None, threads=None, log=None) -> list[LevelResult]:
    """Run a fixed number of steps on dyadically refined meshes and measure errors.

    Errors are taken over the interior box; for a point source, nodes within
    two mesh widths of the source are excluded.
    """
    out = []
    for lev in range(levels):
        p = refine(problem, 2**lev)
        t0 = time.perf_counter()
        solver = DDMSolver(p, threads=threads, factor_budget=factor_budget)
        n = steps if steps is not None else solver.sweep_length
        f = solver.global_source
        u = solver.run_steps(f, n)
        res = solver.residual(u, f)
        del solver
        region = p.grid.interior_window
        ref = reference_solution(p, region, reference)
        exclude, note = None, ""
        if p.source.kind is SourceKind.POINT:
            exclude = near_source_mask(region, p.h, p.anchor, p.source.center, 2 * p.h + 1e-12)
            note = "nodes within 2h of the source"
        k = p.medium.wavenumber_grid(p.anchor[0] + p.h * region.xs_index(),
                                     p.anchor[1] + p.h * region.ys_index())
        field = FieldGrid(p.grid.global_window, u, p.h, p.anchor)
        rep = error_norms(field, ref, region, k, exclude=exclude, excluded=note)
        if out:
            out[-1].field = None
        out.append(LevelResult(p.grid.cells[0], rep, res, time.perf_counter() - t0, field.restrict(region)))
        if log is not None:
            log(f"level {lev}: {p.grid.cells[0]} cells, L2 {rep.l2_error:.4e}, H1 {rep.h1_error:.4e}, "
                f"residual {res:.2e}, {out[-1].seconds:.1f}s")
    convergence_rates([r.report for r in out])
    return out


def format_rate(x):
    return "" if x is None or not math.isfinite(x) else f"{x:.3f}"

