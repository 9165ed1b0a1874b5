"""Flexible GMRES with right preconditioning.

Modified Gram-Schmidt Arnoldi, Givens rotations for the small least-squares
problem, and the preconditioned vectors ``z_j = M(v_j)`` kept explicitly so
that ``M`` may change from one iteration to the next.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .ddm import SolverStats
from .errors import ConfigError


@dataclass(frozen=True)
class KrylovConfig:
    tol: float = 1e-8
    max_iter: int = 200
    restart: int | None = None

    def __post_init__(self):
        if not self.tol > 0 or self.max_iter < 1 or (self.restart is not None and self.restart < 1):
            raise ConfigError(f"invalid Krylov settings {self}")


def _givens(a, b):
    """Complex rotation ``(c, s)`` with ``[c s; -conj(s) c] [a; b] = [r; 0]``, ``c`` real."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    t = np.hypot(abs(a), abs(b))
    c = abs(a) / t
    s = (a / abs(a)) * np.conj(b) / t
    return c, s


def fgmres(apply_a, apply_m, b, cfg: KrylovConfig = KrylovConfig(), x0=None, k_steps=None, callback=None):
    """Solve ``A x = b``; returns ``(x, stats)``.

    ``apply_m`` is a right preconditioner (``None`` for the identity).
    ``k_steps`` is recorded in the stats so the number of local solves can be
    reported.  ``stats.history`` holds ``(iteration, relres, wall_ms)`` with
    the recursively updated residual; ``stats.timings['true_relres']`` the
    explicitly recomputed one at exit.
    """
    b = np.asarray(b, dtype=complex).reshape(-1)
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ConfigError("right-hand side must be nonzero")
    m_op = apply_m if apply_m is not None else (lambda v: v)
    a_op = lambda v: np.asarray(apply_a(v), dtype=complex).reshape(-1)
    precond = lambda v: np.asarray(m_op(v), dtype=complex).reshape(-1)
    stats = SolverStats(k_steps=k_steps)
    t0 = time.perf_counter()
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=complex).reshape(-1).copy()
    m = cfg.restart or cfg.max_iter
    total = 0
    breakdown = False
    while total < cfg.max_iter:
        r = b - a_op(x) if (total or x0 is not None) else b.copy()
        beta = np.linalg.norm(r)
        if beta / nb <= cfg.tol:
            stats.converged = True
            break
        n = min(m, cfg.max_iter - total)
        V = np.zeros((n + 1, b.size), dtype=complex)
        Z = np.zeros((n, b.size), dtype=complex)
        H = np.zeros((n + 1, n), dtype=complex)
        cs = np.zeros(n)
        sn = np.zeros(n, dtype=complex)
        g = np.zeros(n + 1, dtype=complex)
        g[0] = beta
        V[0] = r / beta
        j_done = 0
        for j in range(n):
            Z[j] = precond(V[j])
            w = a_op(Z[j])
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w = w - H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            for i in range(j):
                hi, hi1 = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hi1
                H[i + 1, j] = -np.conj(sn[i]) * hi + cs[i] * hi1
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            h_next = H[j + 1, j]
            H[j, j] = cs[j] * H[j, j] + sn[j] * h_next
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            j_done = j + 1
            rel = abs(g[j + 1]) / nb
            stats.history.append((total, float(rel), 1e3 * (time.perf_counter() - t0)))
            if callback is not None:
                callback(total, rel)
            if rel <= cfg.tol:
                stats.converged = True
                break
            if abs(h_next) <= 1e-14 * nb:
                breakdown = True
                break
            V[j + 1] = w / h_next
        y = np.linalg.solve(np.triu(H[:j_done, :j_done]), g[:j_done]) if j_done else np.zeros(0)
        x = x + y @ Z[:j_done]
        if stats.converged or breakdown:
            break
    true_rel = float(np.linalg.norm(b - a_op(x)) / nb)
    stats.n_gmres_iter = total
    stats.timings["solve_s"] = time.perf_counter() - t0
    stats.timings["true_relres"] = true_rel
    stats.timings["breakdown"] = float(breakdown)
    if stats.converged and true_rel > 10 * cfg.tol:
        stats.converged = False
    return x, stats
