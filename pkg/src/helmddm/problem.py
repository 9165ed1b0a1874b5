"""Everything that defines one run: geometry, medium, source, absorbing layers."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .discretize import DiscreteOperator, assemble, assemble_global
from .grid import FieldGrid
from .medium import MediumModel, SourceSpec, eval_wavenumber, sample_source
from .partition import GridSpec, SubdomainWindow, build_partition
from .pml import AxisStretch, BoxStretch, PmlProfile, sigma0_from_c_sigma

DEFAULT_C_SIGMA = 25.0


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A discretised problem together with its decomposition.

    ``sigma0`` overrides the plateau value otherwise derived from ``c_sigma``.
    """

    grid: GridSpec
    medium: MediumModel
    source: SourceSpec
    c_sigma: float = DEFAULT_C_SIGMA
    sigma0: float | None = None

    def __post_init__(self):
        self.source.check_inside(self.grid.box)

    def with_partition(self, n1, n2):
        return replace(self, grid=replace(self.grid, n1=n1, n2=n2))

    @property
    def h(self):
        return self.grid.h

    @property
    def anchor(self):
        return self.grid.anchor

    @cached_property
    def profile(self) -> PmlProfile:
        """Unshifted profile shared by the global problem and boundary sides."""
        d = self.grid.ramp_width
        s0 = self.sigma0 if self.sigma0 is not None else sigma0_from_c_sigma(self.c_sigma, self.medium.k_min, d)
        return PmlProfile(s0, d, 0.0)

    @cached_property
    def k_ref(self) -> float:
        return eval_wavenumber(self.medium, self.source.center)

    @cached_property
    def subdomains(self) -> list[SubdomainWindow]:
        return build_partition(self.grid)

    def subdomain_stretch(self, sub: SubdomainWindow) -> BoxStretch:
        """Global profile on boundary sides, overlap-shifted profile on interior sides.

        The box is expressed relative to the core's lower-left node, see
        :func:`~helmddm.discretize.assemble`.
        """
        base = self.profile
        shifted = PmlProfile(base.sigma0, base.ramp_width, self.grid.overlap_width)
        bl, br, bb, bt = sub.boundary
        # coordinates relative to the core's lower-left node
        wx = self.h * (sub.cut_hi[0] - sub.cut_lo[0])
        wy = self.h * (sub.cut_hi[1] - sub.cut_lo[1])
        return BoxStretch(
            AxisStretch(0.0, wx, base if bl else shifted, base if br else shifted),
            AxisStretch(0.0, wy, base if bb else shifted, base if bt else shifted),
        )

    def subdomain_operator(self, sub: SubdomainWindow) -> DiscreteOperator:
        return assemble(sub.window, self.subdomain_stretch(sub), self.medium, self.h, self.anchor,
                        stretch_origin=sub.cut_lo)

    def global_operator(self) -> DiscreteOperator:
        return assemble_global(self.grid, self.profile, self.medium)

    def global_source(self) -> FieldGrid:
        """Sampled source on the global window with the Dirichlet ring cleared."""
        f = sample_source(self.source, self.grid.global_window, self.h, self.k_ref, self.anchor)
        clear_ring(f.values)
        return f


def clear_ring(a: np.ndarray) -> np.ndarray:
    a[0, :] = a[-1, :] = 0.0
    a[:, 0] = a[:, -1] = 0.0
    return a
