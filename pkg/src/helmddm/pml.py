"""Absorbing-layer profiles and complex coordinate stretching coefficients.

With ``alpha_j = 1 + i sigma_j(x_j)`` the stretched operator is
``J^{-1} div(A grad u) + k^2 u`` where ``A = diag(alpha_2/alpha_1,
alpha_1/alpha_2)`` and ``J = alpha_1 alpha_2``.  ``sigma_j`` is zero inside
the box and grows with the distance to it.  The profile can be shifted by an
overlap width so that it stays zero over a strip reserved for blending.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PmlProfile:
    """Quadratic ramp ``sigma0 ((t - shift)/ramp_width)^2`` followed by a plateau."""

    sigma0: float
    ramp_width: float
    overlap_shift: float = 0.0

    def __post_init__(self):
        if self.sigma0 < 0 or self.ramp_width <= 0 or self.overlap_shift < 0:
            raise ConfigError(f"invalid PML profile {self}")

    def unshifted(self):
        return PmlProfile(self.sigma0, self.ramp_width, 0.0)


def shifted_sigma(profile: PmlProfile, t):
    """Profile value at signed distance ``t`` from the box (negative inside)."""
    s = (np.asarray(t, dtype=float) - profile.overlap_shift) / profile.ramp_width
    out = profile.sigma0 * np.clip(s, 0.0, 1.0) ** 2
    return out if out.ndim else float(out)


def sigma0_from_c_sigma(c_sigma, k_min, ramp_width):
    """Plateau value giving total one-way attenuation ``exp(-c_sigma)`` at ``k_min``.

    For the quadratic ramp ``int_0^d sigma = sigma0 d / 3``.
    """
    return 3.0 * c_sigma / (k_min * ramp_width)


@dataclass(frozen=True)
class AxisStretch:
    """Stretching along one axis around ``[lo, hi]``, with a profile per side."""

    lo: float
    hi: float
    lo_profile: PmlProfile
    hi_profile: PmlProfile

    def sigma(self, x):
        x = np.asarray(x, dtype=float)
        return shifted_sigma(self.lo_profile, self.lo - x) + shifted_sigma(self.hi_profile, x - self.hi)

    def alpha(self, x):
        return 1.0 + 1j * np.asarray(self.sigma(x))


@dataclass(frozen=True)
class BoxStretch:
    x: AxisStretch
    y: AxisStretch

    @classmethod
    def uniform(cls, profile, box):
        return cls(AxisStretch(box.x0, box.x1, profile, profile),
                   AxisStretch(box.y0, box.y1, profile, profile))


@dataclass(frozen=True)
class StretchCoeffs:
    alpha1: complex
    alpha2: complex
    a11: complex
    a22: complex
    jac: complex


def stretch_coeffs(profile, box, point, stretch: BoxStretch | None = None) -> StretchCoeffs:
    """Coefficients of the stretched operator at ``point``.

    ``stretch`` overrides the uniform per-side ``profile`` around ``box``.
    """
    st = stretch if stretch is not None else BoxStretch.uniform(profile, box)
    a1 = complex(st.x.alpha(point[0]))
    a2 = complex(st.y.alpha(point[1]))
    return StretchCoeffs(a1, a2, a2 / a1, a1 / a2, a1 * a2)
