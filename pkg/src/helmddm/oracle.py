"""Reference solutions and error norms.

* a global sparse direct solve of the truncated problem,
* the outgoing free-space solution for a constant medium, either as a
  quadrature of the source against the Green's function
  ``G(x, y) = (i/4) H0(k |x - y|)`` or, for the radially symmetric Gaussian
  source, as a one-dimensional integral from the addition theorem,
* discrete L2 and energy (H1-type) norms of the error and observed rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ContractError, DomainError
from .grid import FieldGrid, Window
from .medium import MediumKind, SourceKind, SourceSpec, gaussian_source_value
from .sparse import factor, relative_residual

# Gaussian samples below this fraction of the peak are dropped from quadratures
QUAD_CUTOFF = 1e-16


def hankel_h0(z):
    """``H0^(1)(z) = J0(z) + i Y0(z)`` for ``z > 0``."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("hankel_h0 needs z > 0")
    out = special.j0(z) + 1j * special.y0(z)
    return out if out.ndim else complex(out)


def bessel_j0(z):
    return special.j0(z)


def bessel_y0(z):
    return special.y0(z)


def bessel_j1(z):
    return special.j1(z)


def bessel_y1(z):
    return special.y1(z)


def direct_solve_global(problem, f: np.ndarray | None = None, tol=1e-10) -> FieldGrid:
    """Solve the global truncated problem with one sparse LU factorization."""
    op = problem.global_operator()
    if f is None:
        f = problem.global_source().values
    if f.shape != op.window.shape:
        raise ContractError("source does not live on the global window")
    if not f.any():
        return FieldGrid.zeros(op.window, op.h, op.anchor)
    a = op.matrix(cache=False)
    b = (f * op.rhs_scaling()).reshape(-1)
    x = factor(a).solve(b)
    res = relative_residual(a, x, b)
    if not res <= tol:
        raise ArithmeticError(f"direct solve residual {res:.2e} above {tol:.0e}")
    return FieldGrid(op.window, x.reshape(op.window.shape), op.h, op.anchor)


def point_source_solution(k, center, x, y):
    """Field ``-G(x, center)`` of a unit point source; NaN at the source itself."""
    r = np.hypot(np.asarray(x) - center[0], np.asarray(y) - center[1])
    out = np.full(np.broadcast(r).shape, np.nan + 0j)
    ok = r > 0
    out[ok] = -0.25j * hankel_h0(k * r[ok])
    return out


def _gaussian_radius(k, cutoff=QUAD_CUTOFF):
    return math.sqrt(-math.log(cutoff)) * math.pi / (4.0 * k)


def greens_solution(k, source: SourceSpec, x, y, h_quad, medium=None):
    """``-sum h^2 f(y) G(x, y)`` by midpoint quadrature on a lattice of spacing ``h_quad``.

    Quadrature points sit at cell centres of the lattice through the source
    centre, so they never coincide with an evaluation node on that lattice.
    For a point source the closed-form field is returned instead.
    """
    if medium is not None and medium.kind is not MediumKind.CONSTANT:
        raise ContractError("free-space reference needs a constant medium")
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    if source.kind is SourceKind.POINT:
        return source.amplitude * point_source_solution(k, source.center, x, y)
    radius = _gaussian_radius(k)
    m = int(math.ceil(radius / h_quad))
    offs = (np.arange(-m, m) + 0.5) * h_quad
    qx, qy = np.meshgrid(source.center[0] + offs, source.center[1] + offs)
    r2 = (qx - source.center[0]) ** 2 + (qy - source.center[1]) ** 2
    keep = r2 <= radius**2
    qx, qy = qx[keep], qy[keep]
    w = h_quad**2 * gaussian_source_value(r2[keep], k, source.amplitude)
    out = np.empty(x.shape, dtype=complex)
    flat_x, flat_y, flat_o = x.reshape(-1), y.reshape(-1), out.reshape(-1)
    chunk = max(1, 2_000_000 // qx.size)
    for s in range(0, flat_x.size, chunk):
        dx = flat_x[s:s + chunk, None] - qx[None, :]
        dy = flat_y[s:s + chunk, None] - qy[None, :]
        g = 0.25j * hankel_h0(k * np.hypot(dx, dy))
        flat_o[s:s + chunk] = -(g @ w)
    return out


def gaussian_radial_solution(k, source: SourceSpec, x, y, n_gauss=200):
    """Free-space field of the Gaussian source, exact up to 1D quadrature error.

    For the radial source ``f(rho)`` the addition theorem gives::

        u(r) = -(i pi / 2) [ H0(kr) int_0^r f J0(k rho) rho drho
                           + J0(kr) int_r^inf f H0(k rho) rho drho ]

    The integrals are evaluated with Gauss-Legendre rules on ``[0, r]`` and
    (after a quadratic change of variable) ``[r, R]``, ``R`` being the radius where ``f`` drops below the cutoff.
    Beyond ``R`` the inner integral is complete and has the closed form
    ``exp(-pi^2/64) / (2 pi)``.
    """
    if source.kind is not SourceKind.GAUSSIAN:
        raise ContractError("gaussian_radial_solution needs a Gaussian source")
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r = np.hypot(x - source.center[0], y - source.center[1])
    big_r = _gaussian_radius(k)
    amp = source.amplitude
    out = np.empty(r.shape, dtype=complex)
    far = r >= big_r
    out[far] = -0.25j * amp * np.exp(-math.pi**2 / 64.0) * hankel_h0(k * r[far])
    near = ~far
    if near.any():
        rn = r[near]
        t, wt = np.polynomial.legendre.leggauss(n_gauss)
        t, wt = 0.5 * (t + 1.0), 0.5 * wt
        # inner: rho in [0, r]
        rho = rn[:, None] * t[None, :]
        f_in = gaussian_source_value(rho**2, k, amp) * special.j0(k * rho) * rho
        inner = (f_in * wt).sum(axis=1) * rn
        # outer: rho = r + (R - r) s^2 on [r, R] tames rho log(rho) when r is tiny
        span = (big_r - rn)[:, None]
        rho = rn[:, None] + span * t[None, :] ** 2
        f_out = gaussian_source_value(rho**2, k, amp) * (special.j0(k * rho) + 1j * special.y0(k * rho)) * rho
        outer = (f_out * 2 * t[None, :] * wt).sum(axis=1) * span[:, 0]
        h0 = np.where(rn > 0, special.j0(k * rn) + 1j * special.y0(k * np.maximum(rn, 1e-300)), 0.0)
        out[near] = -0.5j * math.pi * (h0 * inner + special.j0(k * rn) * outer)
    return out


@dataclass
class ErrorReport:
    l2_error: float
    h1_error: float
    l2_norm_ref: float
    h1_norm_ref: float
    h: float
    region: Window
    excluded: str = ""
    l2_rate: float | None = None
    h1_rate: float | None = None

    @property
    def l2_relative(self):
        return self.l2_error / self.l2_norm_ref if self.l2_norm_ref else math.inf

    @property
    def h1_relative(self):
        return self.h1_error / self.h1_norm_ref if self.h1_norm_ref else math.inf


def _trapezoid(n, h):
    w = np.full(n, h)
    if n > 1:
        w[0] = w[-1] = h / 2
    return w


def _norms(e, h, k, valid):
    """Discrete L2 and energy norms of ``e`` over the nodes flagged ``valid``.

    Trapezoidal weights for nodal values; a difference between two nodes is
    weighted by ``h`` along its own axis and trapezoidally across it.
    """
    e = np.where(valid, e, 0.0)
    ny, nx = e.shape
    wx, wy = _trapezoid(nx, h), _trapezoid(ny, h)
    w = np.outer(wy, wx)
    l2sq = np.sum(w * np.abs(e) ** 2)
    kesq = np.sum(w * np.abs(k * e) ** 2)
    # forward differences, counted where both ends are valid
    vx = valid[:, 1:] & valid[:, :-1]
    vy = valid[1:, :] & valid[:-1, :]
    gx = np.where(vx, (e[:, 1:] - e[:, :-1]) / h, 0.0)
    gy = np.where(vy, (e[1:, :] - e[:-1, :]) / h, 0.0)
    gradsq = np.sum(wy[:, None] * h * np.abs(gx) ** 2) + np.sum(h * wx[None, :] * np.abs(gy) ** 2)
    return math.sqrt(l2sq), math.sqrt(gradsq + kesq)


def error_norms(u_num: FieldGrid, u_ref, region: Window, k_field, exclude: np.ndarray | None = None,
                excluded: str = "") -> ErrorReport:
    """Errors of ``u_num`` against ``u_ref`` (same region) on ``region``.

    ``u_ref`` and ``k_field`` are arrays on ``region`` (``k_field`` may be a
    scalar); ``exclude`` flags nodes of ``region`` left out of every sum.
    """
    if not u_num.window.contains(region):
        raise ContractError("region not covered by the numerical solution")
    un = u_num.values[u_num.window.slices(region)]
    ur = np.asarray(u_ref)
    if ur.shape != region.shape:
        raise ContractError("reference values do not match the region")
    valid = np.ones(region.shape, dtype=bool) if exclude is None else ~exclude
    valid &= np.isfinite(ur)
    if not valid.any():
        raise ContractError("error region is empty")
    k = np.broadcast_to(np.asarray(k_field, dtype=float), region.shape)
    ur0 = np.where(valid, ur, 0.0)
    l2, h1 = _norms(un - ur0, u_num.h, k, valid)
    l2r, h1r = _norms(ur0, u_num.h, k, valid)
    return ErrorReport(l2, h1, l2r, h1r, u_num.h, region, excluded)


def near_source_mask(region: Window, h, anchor, center, radius):
    x = anchor[0] + h * region.xs_index()
    y = anchor[1] + h * region.ys_index()
    return np.hypot(x[None, :] - center[0], y[:, None] - center[1]) < radius


def convergence_rates(reports: list[ErrorReport]) -> list[ErrorReport]:
    """Fill ``l2_rate``/``h1_rate`` from consecutive reports (``log2`` of error ratios times mesh ratio)."""
    for prev, cur in zip(reports, reports[1:]):
        ratio = math.log(prev.h / cur.h)
        cur.l2_rate = math.log(prev.l2_error / cur.l2_error) / ratio
        cur.h1_rate = math.log(prev.h1_error / cur.h1_error) / ratio
    return reports
