"""Node-aligned windows on a single global lattice and the fields living on them.

All grids in a run are subsets of one lattice: node ``(p, q)`` sits at
``anchor + h * (p, q)``.  Windows are inclusive index ranges, so moving data
between windows is slicing, never interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class Window:
    """Inclusive node range ``[p0, p0+nx-1] x [q0, q0+ny-1]``."""

    p0: int
    q0: int
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ContractError(f"empty window {self}")

    @classmethod
    def from_bounds(cls, p_lo, p_hi, q_lo, q_hi):
        return cls(int(p_lo), int(q_lo), int(p_hi - p_lo + 1), int(q_hi - q_lo + 1))

    @property
    def p1(self):
        return self.p0 + self.nx - 1

    @property
    def q1(self):
        return self.q0 + self.ny - 1

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def size(self):
        return self.nx * self.ny

    def xs_index(self):
        return np.arange(self.p0, self.p0 + self.nx)

    def ys_index(self):
        return np.arange(self.q0, self.q0 + self.ny)

    def contains_index(self, p, q):
        return self.p0 <= p <= self.p1 and self.q0 <= q <= self.q1

    def contains(self, other: "Window"):
        return (self.p0 <= other.p0 and other.p1 <= self.p1
                and self.q0 <= other.q0 and other.q1 <= self.q1)

    def intersect(self, other: "Window"):
        p_lo, p_hi = max(self.p0, other.p0), min(self.p1, other.p1)
        q_lo, q_hi = max(self.q0, other.q0), min(self.q1, other.q1)
        if p_lo > p_hi or q_lo > q_hi:
            return None
        return Window.from_bounds(p_lo, p_hi, q_lo, q_hi)

    def slices(self, sub: "Window"):
        """Array slices selecting ``sub`` inside an array laid out on ``self``."""
        return (slice(sub.q0 - self.q0, sub.q1 - self.q0 + 1),
                slice(sub.p0 - self.p0, sub.p1 - self.p0 + 1))

    def interior(self):
        """The window without its one-node boundary ring, or ``None``."""
        if self.nx < 3 or self.ny < 3:
            return None
        return Window(self.p0 + 1, self.q0 + 1, self.nx - 2, self.ny - 2)


@dataclass(eq=False)
class FieldGrid:
    """Complex nodal values on a window, ``values[q - q0, p - p0]``."""

    window: Window
    values: np.ndarray
    h: float
    anchor: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.window.shape:
            raise ContractError(f"values shape {self.values.shape} does not match window {self.window.shape}")

    @classmethod
    def zeros(cls, window, h, anchor=(0.0, 0.0)):
        return cls(window, np.zeros(window.shape, dtype=complex), h, anchor)

    @property
    def x(self):
        return self.anchor[0] + self.h * self.window.xs_index()

    @property
    def y(self):
        return self.anchor[1] + self.h * self.window.ys_index()

    @property
    def origin(self):
        return (float(self.x[0]), float(self.y[0]))

    def flat(self):
        return self.values.reshape(-1)

    def restrict(self, window: Window) -> "FieldGrid":
        """Values on ``window``, zero where ``window`` leaves this grid."""
        out = FieldGrid.zeros(window, self.h, self.anchor)
        common = self.window.intersect(window)
        if common is not None:
            out.values[window.slices(common)] = self.values[self.window.slices(common)]
        return out

    def add_into(self, target: "FieldGrid", weight=None):
        """``target += weight * self`` on the common nodes."""
        common = self.window.intersect(target.window)
        if common is None:
            return target
        src = self.values[self.window.slices(common)]
        if weight is not None:
            src = src * weight[self.window.slices(common)]
        target.values[target.window.slices(common)] += src
        return target

    def copy(self):
        return FieldGrid(self.window, self.values.copy(), self.h, self.anchor)
