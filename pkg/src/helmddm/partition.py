"""Structured N1 x N2 decomposition, blend weights and direction masks.

Lattice conventions
-------------------
Node ``(p, q)`` of the global lattice sits at ``(x0 + p h, y0 + q h)``, so the
interior box spans ``0 <= p <= nx_cells`` and the global absorbing layer adds
``n_ramp`` nodes on every side.  Subdomains are 0-based, ``i`` along x and
``j`` along y.

A node lying on a cut line between two cores belongs to the lower-index
subdomain.  Everything that points up or right therefore starts one node past
the cut: the upper blend weight of a subdomain is flat up to ``cut + 1`` and
transfers to the upper neighbour are masked to ``index >= cut + 1``.  With
this choice a transferred field reproduces the neighbour's share of the
discrete solution exactly, including on the cut line itself.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, ContractError
from .grid import Window
from .medium import Box


def beta0(t):
    """C^2 cutoff: 1 for ``t <= 0``, 0 for ``t >= 1``, quintic in between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    # evaluate the small branch directly so beta0(t) + beta0(1 - t) = 1 to rounding
    s = np.minimum(t, 1.0 - t)
    small = s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
    out = np.where(t <= 0.5, 1.0 - small, small)
    return out if out.ndim else float(out)


def beta_left(idx, cut, width):
    """Weight equal to 1 for ``idx >= cut`` and fading out over ``width`` nodes below."""
    return beta0((cut - np.asarray(idx, dtype=float)) / width)


def beta_right(idx, cut, width):
    """Weight equal to 1 for ``idx <= cut`` and fading out over ``width`` nodes above."""
    return beta0((np.asarray(idx, dtype=float) - cut) / width)


class Direction(enum.Enum):
    """Propagation direction of a transfer, as an offset from source to target."""

    LEFT = (-1, 0)
    RIGHT = (1, 0)
    DOWN = (0, -1)
    UP = (0, 1)
    DOWN_LEFT = (-1, -1)
    DOWN_RIGHT = (1, -1)
    UP_LEFT = (-1, 1)
    UP_RIGHT = (1, 1)

    @property
    def dx(self):
        return self.value[0]

    @property
    def dy(self):
        return self.value[1]

    @property
    def is_corner(self):
        return self.dx != 0 and self.dy != 0

    @property
    def arrow(self):
        return _ARROWS[self]


_ARROWS = {
    Direction.LEFT: "<-", Direction.RIGHT: "->", Direction.DOWN: "v", Direction.UP: "^",
    Direction.DOWN_LEFT: "v<", Direction.DOWN_RIGHT: "v>", Direction.UP_LEFT: "^<",
    Direction.UP_RIGHT: "^>",
}

# summation order used everywhere a step's incoming transfers are added
GATHER_ORDER = (
    Direction.LEFT, Direction.RIGHT, Direction.DOWN, Direction.UP,
    Direction.DOWN_LEFT, Direction.DOWN_RIGHT, Direction.UP_LEFT, Direction.UP_RIGHT,
)


def axis_mask(idx, sign, cut):
    """Closed half-line mask: ``idx >= cut`` for ``sign=+1``, ``idx <= cut`` for ``-1``, ones for 0."""
    idx = np.asarray(idx)
    if sign > 0:
        return (idx >= cut).astype(float)
    if sign < 0:
        return (idx <= cut).astype(float)
    return np.ones(idx.shape)


@dataclass(frozen=True)
class DirectionMask:
    direction: Direction
    cuts: tuple[int | None, int | None]
    window: Window
    values: np.ndarray


def direction_mask(direction: Direction, cuts, window: Window) -> DirectionMask:
    """0/1 mask of the closed half (or quarter) plane ``direction`` points into.

    ``cuts = (cut_p, cut_q)`` are lattice indices of the cut lines; the entry
    for an axis the direction does not move along is ignored.
    """
    cp, cq = cuts
    if (direction.dx and cp is None) or (direction.dy and cq is None):
        raise ContractError(f"direction {direction.name} needs a cut on every axis it moves along")
    mx = axis_mask(window.xs_index(), direction.dx, cp)
    my = axis_mask(window.ys_index(), direction.dy, cq)
    return DirectionMask(direction, (cp, cq), window, np.outer(my, mx))


@dataclass(frozen=True)
class GridSpec:
    """Interior box, spacing and decomposition parameters."""

    box: Box
    h: float
    n_ramp: int
    n_overlap: int
    n1: int = 1
    n2: int = 1

    def __post_init__(self):
        if self.h <= 0 or self.n_ramp < 1 or self.n_overlap < 0 or self.n1 < 1 or self.n2 < 1:
            raise ConfigError(f"invalid grid parameters {self}")
        for name, length, n in (("x", self.box.x1 - self.box.x0, self.n1),
                                ("y", self.box.y1 - self.box.y0, self.n2)):
            cells = length / self.h
            if abs(cells - round(cells)) > 1e-6 * max(1.0, cells):
                raise ConfigError(f"{name}-extent is not an integer number of cells")
            if round(cells) % n:
                raise ConfigError(f"{round(cells)} {name}-cells cannot be split into {n} subdomains")
        if (self.n1 > 1 or self.n2 > 1) and self.n_overlap < 1:
            raise ConfigError("an interior cut needs n_overlap >= 1")

    @property
    def cells(self):
        return (round((self.box.x1 - self.box.x0) / self.h), round((self.box.y1 - self.box.y0) / self.h))

    @property
    def core_cells(self):
        cx, cy = self.cells
        return (cx // self.n1, cy // self.n2)

    @property
    def anchor(self):
        return (self.box.x0, self.box.y0)

    @property
    def ramp_width(self):
        return self.n_ramp * self.h

    @property
    def overlap_width(self):
        return self.n_overlap * self.h

    @property
    def global_window(self) -> Window:
        cx, cy = self.cells
        r = self.n_ramp
        return Window.from_bounds(-r, cx + r, -r, cy + r)

    @property
    def interior_window(self) -> Window:
        cx, cy = self.cells
        return Window.from_bounds(0, cx, 0, cy)

    def cut_p(self, i):
        return i * self.core_cells[0]

    def cut_q(self, j):
        return j * self.core_cells[1]

    def owner(self, p, q):
        """Subdomain owning global node ``(p, q)`` (vectorised)."""
        mx, my = self.core_cells
        i = np.clip(np.ceil(np.asarray(p) / mx).astype(int) - 1, 0, self.n1 - 1)
        j = np.clip(np.ceil(np.asarray(q) / my).astype(int) - 1, 0, self.n2 - 1)
        return i, j


def _axis_extent(k, n, core, n_ramp, n_overlap):
    """Window bounds, ownership bounds and boundary flags along one axis."""
    lo, hi = k * core, (k + 1) * core
    lo_bnd, hi_bnd = k == 0, k == n - 1
    ext_lo = n_ramp if lo_bnd else n_ramp + n_overlap
    ext_hi = n_ramp if hi_bnd else n_ramp + n_overlap
    own_lo = lo - n_ramp if lo_bnd else lo + 1
    own_hi = hi + n_ramp if hi_bnd else hi
    return (lo - ext_lo, hi + ext_hi), (own_lo, own_hi), (lo_bnd, hi_bnd)


@dataclass(frozen=True)
class SubdomainWindow:
    """Subdomain ``(i, j)``: core cut indices, local window and owned nodes."""

    i: int
    j: int
    spec: GridSpec
    window: Window
    owned: Window
    cut_lo: tuple[int, int]
    cut_hi: tuple[int, int]
    boundary: tuple[bool, bool, bool, bool]  # left, right, bottom, top

    @property
    def index(self):
        return (self.i, self.j)

    @property
    def core_box(self) -> Box:
        h, (ax, ay) = self.spec.h, self.spec.anchor
        return Box(ax + h * self.cut_lo[0], ax + h * self.cut_hi[0],
                   ay + h * self.cut_lo[1], ay + h * self.cut_hi[1])

    def neighbor(self, direction: Direction):
        i, j = self.i + direction.dx, self.j + direction.dy
        if 0 <= i < self.spec.n1 and 0 <= j < self.spec.n2:
            return (i, j)
        return None

    def blend_weights(self) -> "BlendWeights":
        return blend_weights(self, self.spec)

    def send_cuts(self, direction: Direction):
        """Mask cut indices (closed convention) for a transfer leaving this subdomain."""
        cp = self.cut_hi[0] + 1 if direction.dx > 0 else self.cut_lo[0] if direction.dx < 0 else None
        cq = self.cut_hi[1] + 1 if direction.dy > 0 else self.cut_lo[1] if direction.dy < 0 else None
        return (cp, cq)


def build_partition(spec: GridSpec) -> list[SubdomainWindow]:
    """All ``n1 * n2`` subdomain windows, ordered with ``i`` fastest."""
    mx, my = spec.core_cells
    out = []
    for j in range(spec.n2):
        (wq0, wq1), (oq0, oq1), (bb, bt) = _axis_extent(j, spec.n2, my, spec.n_ramp, spec.n_overlap)
        for i in range(spec.n1):
            (wp0, wp1), (op0, op1), (bl, br) = _axis_extent(i, spec.n1, mx, spec.n_ramp, spec.n_overlap)
            out.append(SubdomainWindow(
                i, j, spec,
                Window.from_bounds(wp0, wp1, wq0, wq1),
                Window.from_bounds(op0, op1, oq0, oq1),
                (i * mx, j * my), ((i + 1) * mx, (j + 1) * my),
                (bl, br, bb, bt),
            ))
    return out


@dataclass(frozen=True)
class BlendWeights:
    """Separable blend weights of one subdomain sampled on a window.

    Each entry is a 1D array along its axis; a side on the global boundary
    carries the constant 1.
    """

    window: Window
    left: np.ndarray
    right: np.ndarray
    bottom: np.ndarray
    top: np.ndarray

    @cached_property
    def beta0(self) -> np.ndarray:
        """Assembly weight, the product of all four sides."""
        return np.outer(self.bottom * self.top, self.left * self.right)

    def along(self, direction: Direction) -> np.ndarray:
        """Weight applied to a field sent in ``direction`` (corner = product)."""
        wx = self.right if direction.dx > 0 else self.left if direction.dx < 0 else np.ones(self.window.nx)
        wy = self.top if direction.dy > 0 else self.bottom if direction.dy < 0 else np.ones(self.window.ny)
        return np.outer(wy, wx)


def blend_weights(sub: SubdomainWindow, spec: GridSpec, window: Window | None = None) -> BlendWeights:
    """Blend weights of ``sub`` sampled on ``window`` (its own window by default)."""
    w = window if window is not None else sub.window
    p, q = w.xs_index(), w.ys_index()
    n = spec.n_overlap
    bl, br, bb, bt = sub.boundary
    one_x, one_y = np.ones(w.nx), np.ones(w.ny)
    return BlendWeights(
        w,
        one_x if bl else beta_left(p, sub.cut_lo[0], n),
        one_x if br else beta_right(p, sub.cut_hi[0] + 1, n),
        one_y if bb else beta_left(q, sub.cut_lo[1], n),
        one_y if bt else beta_right(q, sub.cut_hi[1] + 1, n),
    )


def ownership_map(spec: GridSpec) -> np.ndarray:
    """Flat subdomain number ``i + n1 j`` of every node of the global window."""
    gw = spec.global_window
    i, j = spec.owner(gw.xs_index()[None, :], gw.ys_index()[:, None])
    return i + spec.n1 * j


