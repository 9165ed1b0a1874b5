"""Five-point conservative discretisation of the stretched Helmholtz operator.

At an interior node the operator reads::

    (L u)_pq = J_pq^{-1} [ a1_{p+1/2}(u_{p+1}-u_p) - a1_{p-1/2}(u_p-u_{p-1})
                         + a2_{q+1/2}(u_{q+1}-u_q) - a2_{q-1/2}(u_q-u_{q-1}) ] / h^2
               + k_pq^2 u_pq

with ``a1 = alpha2/alpha1``, ``a2 = alpha1/alpha2`` evaluated at half nodes.
Multiplying a row by ``J_pq`` gives the matrix ``S`` that is actually
factored; it is complex symmetric because the coupling between two nodes is
the same half-node coefficient seen from either side.  Window-boundary rows
are identity rows and interior rows carry no coupling into them, which keeps
``S`` exactly symmetric under homogeneous Dirichlet data.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ContractError
from .grid import FieldGrid, Window
from .medium import Box, MediumModel
from .pml import BoxStretch, PmlProfile


@dataclass(eq=False)
class DiscreteOperator:
    """Stretched Helmholtz operator on one window.

    Coefficients are stored separably: ``ax_*`` live on x half nodes of each
    row, ``ay_*`` on y half nodes; ``jac`` and ``k2`` are nodal.
    """

    window: Window
    h: float
    anchor: tuple[float, float]
    alpha_x: np.ndarray       # (nx,) nodal alpha1
    alpha_y: np.ndarray       # (ny,) nodal alpha2
    alpha_x_half: np.ndarray  # (nx-1,) alpha1 at p+1/2
    alpha_y_half: np.ndarray  # (ny-1,) alpha2 at q+1/2
    k2: np.ndarray            # (ny, nx)
    _matrix: sp.csr_matrix | None = None

    @property
    def jac(self):
        return np.outer(self.alpha_y, self.alpha_x)

    @property
    def shape(self):
        return self.window.shape

    def stencil(self, p, q):
        """Strong-form row at global node ``(p, q)``: centre, west, east, south, north."""
        w = self.window
        if not w.contains_index(p, q):
            raise ContractError(f"node {(p, q)} outside {w}")
        a, b = p - w.p0, q - w.q0
        if a in (0, w.nx - 1) or b in (0, w.ny - 1):
            return (1.0 + 0j, 0j, 0j, 0j, 0j)
        ax, ay = self.alpha_x, self.alpha_y
        ih2 = 1.0 / self.h**2
        jac = ax[a] * ay[b]
        west = ay[b] / self.alpha_x_half[a - 1] * ih2 / jac
        east = ay[b] / self.alpha_x_half[a] * ih2 / jac
        south = ax[a] / self.alpha_y_half[b - 1] * ih2 / jac
        north = ax[a] / self.alpha_y_half[b] * ih2 / jac
        centre = -(west + east + south + north) + self.k2[b, a]
        return (centre, west, east, south, north)

    def matrix(self, cache=True) -> sp.csr_matrix:
        """Complex symmetric ``S = J L`` with identity boundary rows."""
        if self._matrix is not None:
            return self._matrix
        m = _assemble_scaled(self)
        if cache:
            self._matrix = m
        return m

    def key(self) -> str:
        """Content hash: operators with equal keys assemble to identical matrices."""
        h = hashlib.sha1()
        h.update(np.array([self.window.nx, self.window.ny], dtype=np.int64).tobytes())
        h.update(np.float64(self.h).tobytes())
        for arr in (self.alpha_x, self.alpha_y, self.alpha_x_half, self.alpha_y_half, self.k2):
            h.update(np.ascontiguousarray(arr, dtype=complex).tobytes())
        return h.hexdigest()

    def rhs_scaling(self):
        """Nodal factor turning a strong-form right-hand side into one for ``S``."""
        j = self.jac.copy()
        j[0, :] = j[-1, :] = 1.0
        j[:, 0] = j[:, -1] = 1.0
        return j


def _node_coords(window, h, anchor):
    x = anchor[0] + h * window.xs_index()
    y = anchor[1] + h * window.ys_index()
    return x, y


def assemble(window: Window, stretch: BoxStretch, medium: MediumModel, h, anchor,
             stretch_origin=None) -> DiscreteOperator:
    """Discretise the stretched operator on ``window``.

    ``stretch`` gives the per-side absorbing profiles around the box they
    are anchored to, ``anchor`` the physical position of lattice node (0, 0).
    With ``stretch_origin = (p, q)`` the stretch is instead evaluated at
    ``h * (index - origin)``, so windows that sit identically relative to
    their own origin get bitwise identical coefficients.
    """
    if window.nx < 3 or window.ny < 3:
        raise ContractError("window must have at least one interior node per axis")
    x, y = _node_coords(window, h, anchor)
    if stretch_origin is None:
        sx, sy = x, y
    else:
        sx = h * (window.xs_index() - stretch_origin[0])
        sy = h * (window.ys_index() - stretch_origin[1])
    return DiscreteOperator(
        window, h, tuple(anchor),
        stretch.x.alpha(sx), stretch.y.alpha(sy),
        stretch.x.alpha(sx[:-1] + h / 2), stretch.y.alpha(sy[:-1] + h / 2),
        medium.wavenumber_grid(x, y) ** 2,
    )


def assemble_global(spec, profile, medium: MediumModel) -> DiscreteOperator:
    """Operator on the full absorbing-layer window, profile anchored at the interior box."""
    prof = PmlProfile(profile.sigma0, profile.ramp_width, 0.0)
    cx, cy = spec.cells
    local = Box(0.0, cx * spec.h, 0.0, cy * spec.h)
    return assemble(spec.global_window, BoxStretch.uniform(prof, local), medium, spec.h, spec.anchor,
                    stretch_origin=(0, 0))


def _assemble_scaled(op: DiscreteOperator) -> sp.csr_matrix:
    ny, nx = op.window.shape
    n = nx * ny
    ih2 = 1.0 / op.h**2
    idx = np.arange(n).reshape(ny, nx)
    inner = np.zeros((ny, nx), dtype=bool)
    inner[1:-1, 1:-1] = True

    # half-node couplings of the scaled operator, shape (ny, nx-1) and (ny-1, nx)
    cx = np.outer(op.alpha_y, 1.0 / op.alpha_x_half) * ih2
    cy = np.outer(1.0 / op.alpha_y_half, op.alpha_x) * ih2
    diag = op.jac * op.k2
    diag = diag.astype(complex)
    diag[:, 1:] -= cx
    diag[:, :-1] -= cx
    diag[1:, :] -= cy
    diag[:-1, :] -= cy

    rows, cols, vals = [], [], []
    # x-couplings between two inner nodes
    link = inner[:, :-1] & inner[:, 1:]
    a, b = idx[:, :-1][link], idx[:, 1:][link]
    rows += [a, b]
    cols += [b, a]
    vals += [cx[link], cx[link]]
    link = inner[:-1, :] & inner[1:, :]
    a, b = idx[:-1, :][link], idx[1:, :][link]
    rows += [a, b]
    cols += [b, a]
    vals += [cy[link], cy[link]]
    d = np.where(inner, diag, 1.0).reshape(-1)
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(d)
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    m = m.tocsr()
    m.sort_indices()
    return m


def _apply_values(op: DiscreteOperator, u: np.ndarray) -> np.ndarray:
    return apply_region(op, u, op.window)


def apply(op: DiscreteOperator, u: FieldGrid) -> FieldGrid:
    """Matrix-free ``L u`` on the operator's window."""
    if u.window != op.window:
        raise ContractError(f"field window {u.window} does not match operator window {op.window}")
    return FieldGrid(op.window, _apply_values(op, u.values), op.h, op.anchor)


def apply_array(op: DiscreteOperator, values: np.ndarray) -> np.ndarray:
    if values.shape != op.window.shape:
        raise ContractError(f"array shape {values.shape} does not match window {op.window.shape}")
    return _apply_values(op, values)


def apply_region(op: DiscreteOperator, values: np.ndarray, region: Window) -> np.ndarray:
    """``L u`` evaluated only on ``region``, a sub-window of the operator's window.

    Reads ``values`` (laid out on the full window) on ``region`` dilated by one
    node; results agree bit for bit with :func:`apply` restricted to ``region``.
    """
    w = op.window
    if not w.contains(region):
        raise ContractError(f"region {region} is not inside {w}")
    grown = Window.from_bounds(max(region.p0 - 1, w.p0), min(region.p1 + 1, w.p1),
                               max(region.q0 - 1, w.q0), min(region.q1 + 1, w.q1))
    # one extra zero ring so edge nodes can be evaluated uniformly
    v = np.zeros((grown.ny + 2, grown.nx + 2), dtype=complex)
    v[1:-1, 1:-1] = values[w.slices(grown)]
    # zero the window's own Dirichlet ring: interior rows ignore it
    if grown.p0 == w.p0:
        v[:, 1] = 0.0
    if grown.p1 == w.p1:
        v[:, -2] = 0.0
    if grown.q0 == w.q0:
        v[1, :] = 0.0
    if grown.q1 == w.q1:
        v[-2, :] = 0.0
    # padded half-node arrays; the padding only feeds ring rows, which are overwritten
    sl_p = slice(region.p0 - w.p0, region.p1 - w.p0 + 1)
    sl_q = slice(region.q0 - w.q0, region.q1 - w.q0 + 1)
    ax = op.alpha_x[sl_p][None, :]
    ay = op.alpha_y[sl_q][:, None]
    ahx = np.concatenate(([1.0], op.alpha_x_half, [1.0]))
    ahy = np.concatenate(([1.0], op.alpha_y_half, [1.0]))
    # half node p-1/2 of window column a is alpha_x_half[a-1] = ahx[a]
    aw = ahx[region.p0 - w.p0: region.p1 - w.p0 + 1][None, :]
    ae = ahx[region.p0 - w.p0 + 1: region.p1 - w.p0 + 2][None, :]
    as_ = ahy[region.q0 - w.q0: region.q1 - w.q0 + 1][:, None]
    an = ahy[region.q0 - w.q0 + 1: region.q1 - w.q0 + 2][:, None]
    # position of region inside the padded array
    r0 = region.q0 - grown.q0 + 1
    c0 = region.p0 - grown.p0 + 1
    c = v[r0:r0 + region.ny, c0:c0 + region.nx]
    west = v[r0:r0 + region.ny, c0 - 1:c0 - 1 + region.nx]
    east = v[r0:r0 + region.ny, c0 + 1:c0 + 1 + region.nx]
    south = v[r0 - 1:r0 - 1 + region.ny, c0:c0 + region.nx]
    north = v[r0 + 1:r0 + 1 + region.ny, c0:c0 + region.nx]
    flux_e, flux_w = (east - c) / ae, (c - west) / aw
    flux_n, flux_s = (north - c) / an, (c - south) / as_
    ih2 = 1.0 / op.h**2
    lap = (ay * (flux_e - flux_w) + ax * (flux_n - flux_s)) * ih2
    out = lap / (ax * ay) + op.k2[sl_q, sl_p] * c
    # identity rows on the window ring
    raw = values[w.slices(region)]
    if region.p0 == w.p0:
        out[:, 0] = raw[:, 0]
    if region.p1 == w.p1:
        out[:, -1] = raw[:, -1]
    if region.q0 == w.q0:
        out[0, :] = raw[0, :]
    if region.q1 == w.q1:
        out[-1, :] = raw[-1, :]
    return out
