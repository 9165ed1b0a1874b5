"""Plain ``key = value`` run configuration.

One setting per line, ``#`` starts a comment.  Unknown keys are rejected.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .io import read_field
from .medium import (DEFAULT_LAYER_VELOCITIES, Box, Layer, MediumKind, MediumModel, SourceKind,
                     SourceSpec, nearest_node)
from .partition import GridSpec
from .problem import DEFAULT_C_SIGMA, ProblemSpec

# key -> (parser, default); a default of None means "unset"
_FLOAT, _INT, _STR = float, int, str


def _BOOL(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)
SCHEMA = {
    "domain.x0": (_FLOAT, 0.0),
    "domain.x1": (_FLOAT, 1.0),
    "domain.y0": (_FLOAT, -1.0),
    "domain.y1": (_FLOAT, 0.0),
    "freq": (_FLOAT, None),
    "medium.type": (_STR, "constant"),
    "medium.velocity": (_FLOAT, 1.0),
    "medium.layers": (_STR, None),
    "medium.file": (_STR, None),
    "grid.h": (_FLOAT, None),
    "grid.ppw": (_FLOAT, None),
    "part.n1": (_INT, 1),
    "part.n2": (_INT, 1),
    "pml.n_ramp": (_INT, 20),
    "pml.n_overlap": (_INT, 10),
    "pml.c_sigma": (_FLOAT, DEFAULT_C_SIGMA),
    "pml.sigma0": (_FLOAT, None),
    "source.type": (_STR, "point"),
    "source.x": (_FLOAT, None),
    "source.y": (_FLOAT, None),
    "solver.mode": (_STR, "ddm"),
    "solver.tol": (_FLOAT, 1e-8),
    "solver.max_steps": (_INT, 200),
    "solver.check_every": (_INT, 1),
    "solver.factor_budget_mb": (_FLOAT, None),
    "solver.refine": (_BOOL, False),
    "precond.k": (_INT, None),
    "krylov.tol": (_FLOAT, 1e-8),
    "krylov.max_iter": (_INT, 200),
    "krylov.restart": (_INT, None),
    "convergence.levels": (_INT, 3),
    "convergence.steps": (_INT, None),
    "convergence.reference": (_STR, "analytic"),
    "output.prefix": (_STR, "helmddm"),
    "threads": (_INT, 1),
}

MODES = ("ddm", "fgmres", "direct")
MEDIUM_TYPES = ("constant", "layered", "gridded")
SOURCE_TYPES = {"gaussian": SourceKind.GAUSSIAN, "point": SourceKind.POINT}
REFERENCES = ("analytic", "direct")


def parse_lines(lines, origin="<config>"):
    out = {}
    for n, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{origin}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in text.split("=", 1))
        out[key] = value
    return out


def parse_override(item):
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, value = (s.strip() for s in item.split("=", 1))
    return key, value


@dataclass
class RunConfig:
    values: dict

    @classmethod
    def from_sources(cls, path=None, overrides=(), env=None):
        raw = {}
        if path is not None:
            with open(path) as fh:
                raw.update(parse_lines(fh, str(path)))
        for item in overrides:
            k, v = parse_override(item)
            raw[k] = v
        env = os.environ if env is None else env
        if env.get("HELMDDM_THREADS"):
            raw["threads"] = env["HELMDDM_THREADS"]
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict):
        unknown = sorted(set(raw) - set(SCHEMA))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = {}
        for key, (parse, default) in SCHEMA.items():
            if key in raw and raw[key] is not None and str(raw[key]).strip().lower() not in ("", "none"):
                try:
                    values[key] = parse(raw[key]) if parse is not _INT else int(str(raw[key]), 10)
                except ValueError as exc:
                    raise ConfigError(f"{key}: cannot parse {raw[key]!r}") from exc
            else:
                values[key] = default
        cfg = cls(values)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def validate(self):
        v = self.values
        if v["solver.mode"] not in MODES:
            raise ConfigError(f"solver.mode must be one of {MODES}")
        if v["medium.type"] not in MEDIUM_TYPES:
            raise ConfigError(f"medium.type must be one of {MEDIUM_TYPES}")
        if v["source.type"] not in SOURCE_TYPES:
            raise ConfigError(f"source.type must be one of {tuple(SOURCE_TYPES)}")
        if v["convergence.reference"] not in REFERENCES:
            raise ConfigError(f"convergence.reference must be one of {REFERENCES}")
        if v["freq"] is None:
            raise ConfigError("freq is required")
        if (v["grid.h"] is None) == (v["grid.ppw"] is None):
            raise ConfigError("give exactly one of grid.h and grid.ppw")
        positive = ["freq", "medium.velocity", "solver.tol", "krylov.tol", "pml.c_sigma",
                    "grid.h", "grid.ppw", "solver.factor_budget_mb"]
        for key in positive:
            if v[key] is not None and not (v[key] > 0 and math.isfinite(v[key]) or
                                           (key == "solver.tol" and v[key] == math.inf)):
                raise ConfigError(f"{key} must be positive")
        for key in ("part.n1", "part.n2", "pml.n_ramp", "solver.max_steps", "solver.check_every",
                    "krylov.max_iter", "convergence.levels", "threads"):
            if v[key] < 1:
                raise ConfigError(f"{key} must be >= 1")
        if v["pml.n_overlap"] < 0:
            raise ConfigError("pml.n_overlap must be >= 0")
        if v["pml.sigma0"] is not None and v["pml.sigma0"] < 0:
            raise ConfigError("pml.sigma0 must be >= 0")
        for key in ("precond.k", "krylov.restart", "convergence.steps"):
            if v[key] is not None and v[key] < 1:
                raise ConfigError(f"{key} must be >= 1")
        if v["medium.type"] == "gridded" and not v["medium.file"]:
            raise ConfigError("medium.type = gridded needs medium.file")

    # -- derived objects -----------------------------------------------------

    @property
    def box(self) -> Box:
        v = self.values
        return Box(v["domain.x0"], v["domain.x1"], v["domain.y0"], v["domain.y1"])

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.values["freq"]

    def layers(self):
        """Layer list from ``medium.layers``.

        Either plain velocities listed top to bottom (equal thickness), or
        ``y_low:y_high:velocity`` triples separated by commas.
        """
        text = self.values["medium.layers"]
        box = self.box
        if text is None:
            vels = DEFAULT_LAYER_VELOCITIES
        else:
            items = [s.strip() for s in text.split(",") if s.strip()]
            if items and all(":" in s for s in items):
                try:
                    return tuple(Layer(*map(float, s.split(":"))) for s in items)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"medium.layers: bad interval entry in {text!r}") from exc
            try:
                vels = tuple(float(s) for s in items)
            except ValueError as exc:
                raise ConfigError(f"medium.layers: cannot parse {text!r}") from exc
        edges = np.linspace(box.y1, box.y0, len(vels) + 1)
        edges[0], edges[-1] = box.y1, box.y0
        return tuple(Layer(float(edges[i + 1]), float(edges[i]), c) for i, c in enumerate(vels))

    def velocity_range(self):
        t = self.values["medium.type"]
        if t == "constant":
            c = self.values["medium.velocity"]
            return c, c
        if t == "layered":
            vel = [l.velocity for l in self.layers()]
            return min(vel), max(vel)
        g = self._velocity_grid().values.real
        return float(g.min()), float(g.max())

    def _velocity_grid(self):
        return read_field(self.values["medium.file"])

    def spacing(self, n1=None, n2=None) -> float:
        v = self.values
        n1 = v["part.n1"] if n1 is None else n1
        n2 = v["part.n2"] if n2 is None else n2
        if v["grid.h"] is not None:
            return v["grid.h"]
        c_min, _ = self.velocity_range()
        box = self.box
        wavelength = c_min / v["freq"]
        lx, ly = box.x1 - box.x0, box.y1 - box.y0
        cells = math.ceil(max(lx, ly) * v["grid.ppw"] / wavelength)
        # smallest cell count with both extents divisible by their partitions
        for m in range(cells, 100 * cells + 1):
            h = max(lx, ly) / m
            gx, gy = lx / h, ly / h
            if (abs(gx - round(gx)) < 1e-9 * gx and abs(gy - round(gy)) < 1e-9 * gy
                    and round(gx) % n1 == 0 and round(gy) % n2 == 0):
                return h
        raise ConfigError("grid.ppw: no spacing fits the domain and partition")

    def medium(self, h) -> MediumModel:
        v = self.values
        box = self.box
        ext = box.dilate(v["pml.n_ramp"] * h)
        t = v["medium.type"]
        try:
            if t == "constant":
                return MediumModel(MediumKind.CONSTANT, self.omega, box, velocity=v["medium.velocity"], extent=ext)
            if t == "layered":
                return MediumModel(MediumKind.LAYERED, self.omega, box, layers=self.layers(), extent=ext)
            g = self._velocity_grid()
            return MediumModel(MediumKind.GRIDDED, self.omega, box, velocity_grid=g.values.real,
                               grid_h=g.h, extent=ext)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def source(self, h) -> SourceSpec:
        """Configured source; without coordinates, a quarter and a third of the first core from its corner."""
        v = self.values
        box = self.box
        kind = SOURCE_TYPES[v["source.type"]]
        x, y = v["source.x"], v["source.y"]
        if x is None or y is None:
            dx = (box.x1 - box.x0) / v["part.n1"]
            dy = (box.y1 - box.y0) / v["part.n2"]
            x = box.x0 + dx / 4 if x is None else x
            y = box.y0 + dy / 3 if y is None else y
            if kind is SourceKind.POINT:
                x = box.x0 + h * nearest_node(x, box.x0, h)
                y = box.y0 + h * nearest_node(y, box.y0, h)
        return SourceSpec(kind, (x, y))

    def problem(self, h=None, n1=None, n2=None) -> ProblemSpec:
        v = self.values
        n1 = v["part.n1"] if n1 is None else n1
        n2 = v["part.n2"] if n2 is None else n2
        h = self.spacing(n1, n2) if h is None else h
        grid = GridSpec(self.box, h, v["pml.n_ramp"], v["pml.n_overlap"], n1, n2)
        return ProblemSpec(grid, self.medium(h), self.source(h), v["pml.c_sigma"], v["pml.sigma0"])
