"""Wave-speed models and source terms.

The medium is described by the velocity ``c(x)``; the solver works with the
wavenumber ``k(x) = omega / c(x)``.  Outside the interior box the velocity is
continued by the value of the nearest interior point, so the absorbing layers
always see a medium that is constant along their stretching direction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

DEFAULT_LAYER_VELOCITIES = (1.00, 1.25, 1.60, 2.00, 2.50)


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ConfigError(f"degenerate box {self}")

    def contains(self, x, y, tol=1e-12):
        return (self.x0 - tol <= x <= self.x1 + tol) and (self.y0 - tol <= y <= self.y1 + tol)

    def dilate(self, d):
        return Box(self.x0 - d, self.x1 + d, self.y0 - d, self.y1 + d)


class MediumKind(enum.Enum):
    CONSTANT = "constant"
    LAYERED = "layered"
    GRIDDED = "gridded"


@dataclass(frozen=True)
class Layer:
    y_low: float
    y_high: float
    velocity: float


@dataclass(frozen=True, eq=False)
class MediumModel:
    """Velocity model on the interior box.

    ``layers`` is used for ``LAYERED`` and ``velocity_grid`` (shape
    ``(ny, nx)``, nodal values on the interior box with spacing ``grid_h``)
    for ``GRIDDED``.  ``extent`` is the box on which evaluation is legal,
    normally the interior box dilated by the absorbing layer.
    """

    kind: MediumKind
    omega: float
    interior: Box
    velocity: float = 1.0
    layers: tuple[Layer, ...] = ()
    velocity_grid: np.ndarray | None = None
    grid_h: float | None = None
    extent: Box | None = None
    _layer_tops: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError("omega must be positive")
        if self.kind is MediumKind.CONSTANT:
            if not self.velocity > 0:
                raise ConfigError("velocity must be positive")
        elif self.kind is MediumKind.LAYERED:
            layers = tuple(sorted(self.layers, key=lambda l: l.y_low))
            if not layers:
                raise ConfigError("layered medium needs at least one layer")
            for a, b in zip(layers, layers[1:]):
                if not np.isclose(a.y_high, b.y_low, rtol=0, atol=1e-12):
                    raise ConfigError("layers must be contiguous and disjoint")
            if any(l.velocity <= 0 or l.y_high <= l.y_low for l in layers):
                raise ConfigError("layer velocities and thicknesses must be positive")
            if not (np.isclose(layers[0].y_low, self.interior.y0, atol=1e-12)
                    and np.isclose(layers[-1].y_high, self.interior.y1, atol=1e-12)):
                raise ConfigError("layers must cover the interior vertical extent exactly")
            object.__setattr__(self, "layers", layers)
        elif self.kind is MediumKind.GRIDDED:
            g = self.velocity_grid
            if g is None or self.grid_h is None:
                raise ConfigError("gridded medium needs velocity_grid and grid_h")
            g = np.asarray(g, dtype=float)
            if g.ndim != 2 or np.any(~np.isfinite(g)) or np.any(g <= 0):
                raise ConfigError("velocity grid must be a 2D array of positive values")
            object.__setattr__(self, "velocity_grid", g)
        tops = np.array([l.y_high for l in self.layers]) if self.layers else np.zeros(0)
        object.__setattr__(self, "_layer_tops", tops)

    @property
    def c_min(self) -> float:
        return float(self._all_velocities().min())

    @property
    def c_max(self) -> float:
        return float(self._all_velocities().max())

    @property
    def k_min(self) -> float:
        return self.omega / self.c_max

    @property
    def k_max(self) -> float:
        return self.omega / self.c_min

    def _all_velocities(self):
        if self.kind is MediumKind.CONSTANT:
            return np.array([self.velocity])
        if self.kind is MediumKind.LAYERED:
            return np.array([l.velocity for l in self.layers])
        return self.velocity_grid

    def velocity_at(self, x, y):
        """Vectorised velocity; ``x`` and ``y`` broadcast against each other."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        box = self.interior
        if self.kind is MediumKind.CONSTANT:
            return np.full(x.shape, self.velocity)
        if self.kind is MediumKind.LAYERED:
            yc = np.clip(y, box.y0, box.y1)
            # side="left": an interface point goes to the deeper layer
            idx = np.searchsorted(self._layer_tops, yc, side="left")
            idx = np.minimum(idx, len(self.layers) - 1)
            vel = np.array([l.velocity for l in self.layers])
            return vel[idx]
        g = self.velocity_grid
        ny, nx = g.shape
        pi = np.rint((np.clip(x, box.x0, box.x1) - box.x0) / self.grid_h).astype(int)
        qi = np.rint((np.clip(y, box.y0, box.y1) - box.y0) / self.grid_h).astype(int)
        return g[np.clip(qi, 0, ny - 1), np.clip(pi, 0, nx - 1)]

    def wavenumber_grid(self, xs, ys):
        """``k`` on the tensor grid ``xs x ys``; returns shape ``(len(ys), len(xs))``."""
        return self.omega / self.velocity_at(np.asarray(xs)[None, :], np.asarray(ys)[:, None])


def constant_medium(omega, interior, velocity=1.0, extent=None):
    return MediumModel(MediumKind.CONSTANT, omega, interior, velocity=velocity, extent=extent)


def layered_medium(omega, interior, velocities=DEFAULT_LAYER_VELOCITIES, extent=None):
    """Equal-thickness horizontal layers; ``velocities`` listed from top to bottom."""
    n = len(velocities)
    edges = np.linspace(interior.y1, interior.y0, n + 1)
    layers = [Layer(float(edges[i + 1]), float(edges[i]), float(v)) for i, v in enumerate(velocities)]
    layers[-1] = Layer(interior.y0, layers[-1].y_high, layers[-1].velocity)
    layers[0] = Layer(layers[0].y_low, interior.y1, layers[0].velocity)
    return MediumModel(MediumKind.LAYERED, omega, interior, layers=tuple(layers), extent=extent)


def eval_wavenumber(model: MediumModel, point) -> float:
    """Wavenumber ``omega / c`` at a single point."""
    x, y = point
    box = model.extent if model.extent is not None else model.interior
    if not box.contains(x, y):
        raise DomainError(f"point {point} outside the computational box {box}")
    return float(model.omega / model.velocity_at(x, y))


class SourceKind(enum.Enum):
    GAUSSIAN = "gaussian"
    POINT = "point"


@dataclass(frozen=True)
class SourceSpec:
    kind: SourceKind
    center: tuple[float, float]
    amplitude: float = 1.0

    def check_inside(self, interior: Box):
        x, y = self.center
        if not (interior.x0 < x < interior.x1 and interior.y0 < y < interior.y1):
            raise ConfigError(f"source centre {self.center} must lie strictly inside {interior}")


def gaussian_source_value(r2, k_ref, amplitude=1.0):
    """Gaussian pulse of unit mass, ``16 k^2/pi^3 exp(-(4k/pi)^2 r^2)``."""
    return amplitude * 16.0 * k_ref**2 / np.pi**3 * np.exp(-((4.0 * k_ref / np.pi) ** 2) * r2)


def nearest_node(coord, anchor, h):
    """Lattice index nearest to ``coord``; exact ties go to the smaller index."""
    t = (coord - anchor) / h
    return int(np.ceil(t - 0.5))


def sample_source(spec: SourceSpec, window, h, k_ref, anchor):
    """Sample ``spec`` on ``window`` (a :class:`~helmddm.grid.Window`).

    ``anchor`` is the physical position of lattice index ``(0, 0)``.
    """
    from .grid import FieldGrid

    xs = anchor[0] + window.xs_index() * h
    ys = anchor[1] + window.ys_index() * h
    vals = np.zeros((window.ny, window.nx), dtype=complex)
    if spec.kind is SourceKind.GAUSSIAN:
        r2 = (xs[None, :] - spec.center[0]) ** 2 + (ys[:, None] - spec.center[1]) ** 2
        vals[:] = gaussian_source_value(r2, k_ref, spec.amplitude)
    else:
        p = nearest_node(spec.center[0], anchor[0], h)
        q = nearest_node(spec.center[1], anchor[1], h)
        if window.contains_index(p, q):
            vals[q - window.q0, p - window.p0] = spec.amplitude / (h * h)
    return FieldGrid(window, vals, h, anchor)
