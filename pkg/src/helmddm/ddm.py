"""Additive overlapping decomposition with source transfer.

Step 1 solves every subdomain problem with the subdomain's own share of the
source.  Every later step solves every subdomain again, now driven by what
the neighbours produced: edge neighbours contribute their previous-step
fields, corner neighbours the fields from two steps back.  The subdomain
solutions of all steps are summed per subdomain and blended into one global
field.  All subdomain solves of a step are independent and run on a thread
pool; results are combined in a fixed order, so output does not depend on
scheduling.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .discretize import DiscreteOperator, apply_array
from .errors import SolverError
from .grid import FieldGrid, Window
from .partition import BlendWeights, SubdomainWindow
from .problem import ProblemSpec, clear_ring
from .sparse import FactorCache
from .transfer import gather_step_sources


def default_threads():
    env = os.environ.get("HELMDDM_THREADS")
    if env:
        return max(1, int(env))
    return 1


@dataclass
class SolverStats:
    """Iteration counters, residual history ``(step, relres, wall_ms)`` and timings."""

    sweep_length: int = 1
    n_ddm_iter: int = 0
    n_gmres_iter: int = 0
    k_steps: int | None = None
    converged: bool = False
    history: list[tuple[int, float, float]] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    n_factorizations: int = 0
    n_subdomain_solves: int = 0

    @property
    def n_ddm_solv(self) -> Fraction:
        return Fraction(self.n_ddm_iter, self.sweep_length)

    @property
    def n_local_solv(self) -> int:
        return self.n_gmres_iter * (self.k_steps or 0)

    @property
    def final_relres(self) -> float:
        return self.history[-1][1] if self.history else float("nan")


@dataclass(eq=False)
class SubdomainContext:
    sub: SubdomainWindow
    op: DiscreteOperator
    key: str
    weights: BlendWeights
    scaling: np.ndarray

    @property
    def window(self) -> Window:
        return self.sub.window


@dataclass(eq=False)
class StepState:
    """Rolling step buffers and per-subdomain accumulators.

    ``None`` stands for an exactly zero field; such subdomains are not solved.
    """

    s: int = 0
    source: dict = field(default_factory=dict)
    prev1: dict = field(default_factory=dict)
    prev2: dict = field(default_factory=dict)
    acc: dict = field(default_factory=dict)


class DDMSolver:
    """Subdomain operators, factorizations and the step engine for one problem.

    ``factor_budget`` (bytes) bounds the memory held by factorizations; when
    it is exceeded factors are dropped and rebuilt on demand, and the solve
    order within a step is grouped by operator so rebuilds stay rare.
    """

    def __init__(self, problem: ProblemSpec, threads: int | None = None,
                 factor_budget: int | None = None, verify_tol: float | None = 1e-10,
                 refine: bool = False):
        self.problem = problem
        self.threads = threads if threads is not None else default_threads()
        self.cache = FactorCache(factor_budget, verify_tol, refine)
        self.contexts: dict[tuple[int, int], SubdomainContext] = {}
        for sub in problem.subdomains:
            op = problem.subdomain_operator(sub)
            key = op.key()
            self.cache.register(key, lambda op=op: op.matrix(cache=False))
            self.contexts[sub.index] = SubdomainContext(sub, op, key, sub.blend_weights(), op.rhs_scaling())
        self.order = [sub.index for sub in problem.subdomains]
        self._global_op = None
        self._source = None
        self.n_solves = 0

    # -- setup -------------------------------------------------------------

    @property
    def grid(self):
        return self.problem.grid

    @property
    def sweep_length(self):
        return self.grid.n1 + self.grid.n2

    @property
    def global_op(self) -> DiscreteOperator:
        if self._global_op is None:
            self._global_op = self.problem.global_operator()
        return self._global_op

    @property
    def global_source(self) -> np.ndarray:
        if self._source is None:
            self._source = self.problem.global_source().values
        return self._source

    def factorize_all(self):
        """Build every distinct factorization now (no-op under a memory budget)."""
        if self.cache.budget is None:
            for key in dict.fromkeys(c.key for c in self.contexts.values()):
                self.cache.get(key)

    # -- step engine -------------------------------------------------------

    def initial_state(self, f: np.ndarray) -> StepState:
        """Split a global array into owned pieces on each subdomain window."""
        gw = self.grid.global_window
        state = StepState()
        for idx in self.order:
            ctx = self.contexts[idx]
            local = np.zeros(ctx.window.shape, dtype=complex)
            own = ctx.sub.owned.intersect(ctx.window)
            local[ctx.window.slices(own)] = f[gw.slices(own)]
            clear_ring(local)
            state.source[idx] = local if local.any() else None
        return state

    def _solve_local(self, idx, rhs):
        ctx = self.contexts[idx]
        clear_ring(rhs)
        if not rhs.any():
            return None
        fac = self.cache.get(ctx.key)
        try:
            x = fac.solve((rhs * ctx.scaling).reshape(-1))
        except Exception as exc:  # pragma: no cover - propagated with context
            raise SolverError(f"subdomain {idx} failed in step solve: {exc}") from exc
        return x.reshape(ctx.window.shape)

    def _task(self, state: StepState, s: int, idx):
        ctx = self.contexts[idx]
        if s == 1:
            rhs = state.source.get(idx)
            rhs = None if rhs is None else rhs.copy()
        else:
            subs = {k: c.sub for k, c in self.contexts.items()}
            weights = {k: c.weights for k, c in self.contexts.items()}
            rhs = gather_step_sources(state.prev1, state.prev2, ctx.sub, subs, weights, ctx.op,
                                      self.grid.h, self.grid.anchor)
        if rhs is None:
            return None
        try:
            return self._solve_local(idx, rhs)
        except SolverError as exc:
            raise SolverError(f"step {s}: {exc}") from exc

    def _step_order(self, s):
        if self.cache.budget is None:
            return self.order
        # group identical operators, alternating direction so the newest factors are reused
        keys = list(dict.fromkeys(self.contexts[i].key for i in self.order))
        if s % 2 == 0:
            keys.reverse()
        rank = {k: n for n, k in enumerate(keys)}
        return sorted(self.order, key=lambda i: rank[self.contexts[i].key])

    def step(self, state: StepState) -> StepState:
        """Advance ``state`` by one step (in place) and return it."""
        s = state.s + 1
        order = self._step_order(s)
        if self.threads > 1 and self.cache.budget is None:
            self.factorize_all()
            with ThreadPoolExecutor(self.threads) as pool:
                results = list(pool.map(lambda i: self._task(state, s, i), order))
        else:
            results = [self._task(state, s, i) for i in order]
        new = dict(zip(order, results))
        self.n_solves += sum(r is not None for r in results)
        for idx in self.order:
            u = new[idx]
            if u is not None:
                state.acc[idx] = u.copy() if state.acc.get(idx) is None else state.acc[idx] + u
        state.prev2, state.prev1 = state.prev1, new
        state.s = s
        return state

    def assemble(self, state: StepState) -> np.ndarray:
        """Blend the per-subdomain sums into one array on the global window."""
        gw = self.grid.global_window
        out = np.zeros(gw.shape, dtype=complex)
        for idx in self.order:
            acc = state.acc.get(idx)
            if acc is None:
                continue
            ctx = self.contexts[idx]
            common = ctx.window.intersect(gw)
            out[gw.slices(common)] += (ctx.weights.beta0 * acc)[ctx.window.slices(common)]
        return out

    def residual(self, u: np.ndarray, f: np.ndarray) -> float:
        nf = np.linalg.norm(f)
        r = np.linalg.norm(f - apply_array(self.global_op, u))
        return float(r / nf) if nf else float(r)

    def run_steps(self, f: np.ndarray, n_steps: int) -> np.ndarray:
        state = self.initial_state(f)
        for _ in range(n_steps):
            self.step(state)
        return self.assemble(state)

    # -- drivers -----------------------------------------------------------

    def precondition(self, r: np.ndarray, k_steps: int) -> np.ndarray:
        """Approximate inverse: ``k_steps`` steps from a zero state with source ``r``.

        The Dirichlet ring of the global system decouples from the rest, so
        it is inverted exactly.
        """
        if k_steps < 1:
            raise ValueError("k_steps must be >= 1")
        r = np.asarray(r).reshape(self.grid.global_window.shape)
        z = self.run_steps(r, k_steps)
        z[0, :], z[-1, :] = r[0, :], r[-1, :]
        z[:, 0], z[:, -1] = r[:, 0], r[:, -1]
        return z

    def solve_iterative(self, tol=1e-8, max_steps=200, check_every=1, f=None):
        """Run steps until the global relative residual drops to ``tol``.

        The residual is evaluated every ``check_every`` steps and after the
        last one.  Returns ``(u, stats)``; when ``tol`` is not reached, ``u``
        is the iterate with the smallest checked residual.
        """
        if not tol > 0 or max_steps < 1 or check_every < 1:
            raise ValueError("need tol > 0, max_steps >= 1, check_every >= 1")
        f = self.global_source if f is None else f
        stats = SolverStats(sweep_length=self.sweep_length)
        t0 = time.perf_counter()
        state = self.initial_state(f)
        best, best_res = None, np.inf
        for s in range(1, max_steps + 1):
            self.step(state)
            if s % check_every and s != max_steps:
                continue
            u = self.assemble(state)
            res = self.residual(u, f)
            stats.history.append((s, res, 1e3 * (time.perf_counter() - t0)))
            if res < best_res:
                best, best_res = u, res
            stats.n_ddm_iter = s
            if res <= tol:
                stats.converged = True
                break
        stats.timings["solve_s"] = time.perf_counter() - t0
        stats.n_factorizations = self.cache.n_factor
        stats.n_subdomain_solves = self.n_solves
        if not stats.converged:
            stats.n_ddm_iter = s
        grid = self.grid
        return FieldGrid(grid.global_window, best, grid.h, grid.anchor), stats


def solve_iterative(problem: ProblemSpec, tol=1e-8, max_steps=200, check_every=1, threads=None):
    return DDMSolver(problem, threads).solve_iterative(tol, max_steps, check_every)
