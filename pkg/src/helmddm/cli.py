"""Command line front end.

    helmddm solve <cfg>          run solver.mode (ddm, fgmres or direct)
    helmddm direct <cfg>         global sparse direct solve
    helmddm convergence <cfg>    errors and rates on dyadically refined meshes
    helmddm render <dump> <ppm>  image of a field dump

Exit status: 0 success, 2 configuration error, 3 no convergence, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from fractions import Fraction

import numpy as np

from .config import RunConfig
from .ddm import DDMSolver, SolverStats
from .discretize import apply_array
from .errors import ConfigError, ContractError
from .experiments import convergence_study, fgmres_solve, format_rate
from .grid import FieldGrid
from .io import DumpFormatError, read_field, render_ppm, write_field, write_history
from .krylov import KrylovConfig
from .oracle import direct_solve_global

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("helmddm")


def _interior(field: FieldGrid, problem) -> FieldGrid:
    return field.restrict(problem.grid.interior_window)


def _budget(cfg):
    mb = cfg["solver.factor_budget_mb"]
    return None if mb is None else int(mb * 2**20)


def format_solv(fr: Fraction) -> str:
    return f"{float(fr):.2f}"


def write_stats(path, rows):
    with open(path, "w") as fh:
        for key, value in rows:
            fh.write(f"{key} = {value}\n")


def stats_rows(mode, problem, stats: SolverStats, k_steps=None):
    g = problem.grid
    rows = [
        ("mode", mode),
        ("n1", g.n1), ("n2", g.n2),
        ("cells", f"{g.cells[0]}x{g.cells[1]}"),
        ("h", f"{g.h:.10g}"),
        ("n_DDM_Iter", stats.n_ddm_iter),
        ("n_DDM_Solv", format_solv(stats.n_ddm_solv)),
        ("n_GMRES_Iter", stats.n_gmres_iter),
        ("n_Local_Solv", stats.n_local_solv),
        ("precond_k", k_steps if k_steps is not None else ""),
        ("converged", str(stats.converged).lower()),
        ("final_relres", f"{stats.final_relres:.6e}"),
        ("n_factorizations", stats.n_factorizations),
        ("n_subdomain_solves", stats.n_subdomain_solves),
    ]
    rows += [(f"time_{k}", f"{v:.3f}") for k, v in sorted(stats.timings.items()) if k.endswith("_s")]
    return rows


def write_outputs(prefix, field: FieldGrid, history, stats_list):
    write_field(f"{prefix}_field.hdmf", field)
    write_history(f"{prefix}_resid.csv", history)
    write_stats(f"{prefix}_stats.txt", stats_list)
    render_ppm(field, f"{prefix}_real.ppm")


def run_solve(cfg: RunConfig, mode=None) -> int:
    mode = mode or cfg["solver.mode"]
    t0 = time.perf_counter()
    problem = cfg.problem()
    prefix = cfg["output.prefix"]
    log.info("%s: %dx%d cells, %dx%d subdomains, h=%.4g", mode, *problem.grid.cells,
             problem.grid.n1, problem.grid.n2, problem.h)
    if mode == "direct":
        u = direct_solve_global(problem)
        op = problem.global_operator()
        f = problem.global_source().values
        res = float(np.linalg.norm(f - apply_array(op, u.values)) / np.linalg.norm(f))
        stats = SolverStats(sweep_length=problem.grid.n1 + problem.grid.n2, converged=True)
        stats.history.append((0, res, 1e3 * (time.perf_counter() - t0)))
        stats.timings["total_s"] = time.perf_counter() - t0
        write_outputs(prefix, _interior(u, problem), stats.history, stats_rows(mode, problem, stats))
        return EXIT_OK
    solver = DDMSolver(problem, threads=cfg["threads"], factor_budget=_budget(cfg),
                       refine=cfg["solver.refine"])
    t_setup = time.perf_counter() - t0
    if mode == "ddm":
        u, stats = solver.solve_iterative(cfg["solver.tol"], cfg["solver.max_steps"], cfg["solver.check_every"])
        k = None
    else:
        k = cfg["precond.k"] or solver.sweep_length
        kc = KrylovConfig(cfg["krylov.tol"], cfg["krylov.max_iter"], cfg["krylov.restart"])
        u, stats = fgmres_solve(solver, k, kc)
    stats.timings["setup_s"] = t_setup
    stats.timings["total_s"] = time.perf_counter() - t0
    write_outputs(prefix, _interior(u, problem), stats.history, stats_rows(mode, problem, stats, k))
    log.info("n_DDM_Iter=%d n_DDM_Solv=%s n_GMRES_Iter=%d n_Local_Solv=%d relres=%.3e",
             stats.n_ddm_iter, format_solv(stats.n_ddm_solv), stats.n_gmres_iter,
             stats.n_local_solv, stats.final_relres)
    if not stats.converged:
        log.warning("no convergence")
        return EXIT_NOCONV
    return EXIT_OK


def run_convergence(cfg: RunConfig) -> int:
    problem = cfg.problem()
    prefix = cfg["output.prefix"]
    levels = convergence_study(problem, cfg["convergence.levels"], cfg["convergence.steps"],
                               cfg["convergence.reference"], _budget(cfg), cfg["threads"], log.info)
    with open(f"{prefix}_convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cells", "h", "l2_error", "l2_rate", "h1_error", "h1_rate", "relres"])
        for lev in levels:
            r = lev.report
            w.writerow([lev.cells, f"{r.h:.10g}", f"{r.l2_error:.6e}", format_rate(r.l2_rate),
                        f"{r.h1_error:.6e}", format_rate(r.h1_rate), f"{lev.relres:.3e}"])
    last = levels[-1]
    rows = [("mode", "convergence"), ("levels", len(levels)),
            ("reference", cfg["convergence.reference"]), ("finest_cells", last.cells)]
    for lev in levels:
        rows.append((f"l2_rate_{lev.cells}", format_rate(lev.report.l2_rate)))
        rows.append((f"h1_rate_{lev.cells}", format_rate(lev.report.h1_rate)))
    history = [(i, lev.relres, 1e3 * lev.seconds) for i, lev in enumerate(levels)]
    write_outputs(prefix, last.field, history, rows)
    return EXIT_OK


def run_render(dump, out, vmax=None) -> int:
    render_ppm(read_field(dump), out, vmax)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="helmddm", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "run the configured solver"), ("direct", "global direct solve"),
                       ("convergence", "mesh refinement study")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("render", help="render a field dump as PPM")
    p.add_argument("dump")
    p.add_argument("out")
    p.add_argument("--vmax", type=float, default=None)
    p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        if args.command == "render":
            return run_render(args.dump, args.out, args.vmax)
        cfg = RunConfig.from_sources(args.config, args.override)
        if args.command == "convergence":
            return run_convergence(cfg)
        return run_solve(cfg, "direct" if args.command == "direct" else None)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (OSError, DumpFormatError) as exc:
        log.error("i/o error: %s", exc)
        return EXIT_IO
    except ContractError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
