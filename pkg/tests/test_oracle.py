import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helmddm.grid import FieldGrid, Window
from helmddm.medium import SourceKind, SourceSpec
from helmddm.oracle import (ErrorReport, bessel_j0, bessel_j1, bessel_y0, bessel_y1,
                            convergence_rates, direct_solve_global, error_norms,
                            gaussian_radial_solution, greens_solution, hankel_h0,
                            near_source_mask, point_source_solution)

from conftest import make_problem


# power series evaluated in extended precision, independent of the library under test
def _series(z, dps=60):
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        half = z / 2
        j0 = j1 = y0s = y1s = mpmath.mpf(0)
        harm = mpmath.mpf(0)
        m = 0
        while True:
            fac = mpmath.factorial(m)
            t0 = (-1) ** m * half ** (2 * m) / fac**2
            t1 = (-1) ** m * half ** (2 * m + 1) / (fac * mpmath.factorial(m + 1))
            j0 += t0
            j1 += t1
            if m >= 1:
                y0s += -t0 * harm
            # psi(m+1) + psi(m+2) = 2 H_m + 1/(m+1) - 2 gamma
            y1s += t1 * (2 * harm + mpmath.mpf(1) / (m + 1) - 2 * mpmath.euler)
            m += 1
            harm += mpmath.mpf(1) / m
            if abs(t0) < mpmath.mpf(10) ** (-dps + 5) and m > 5:
                break
        y0 = 2 / mpmath.pi * ((mpmath.log(half) + mpmath.euler) * j0 + y0s)
        y1 = -2 / (mpmath.pi * z) + 2 / mpmath.pi * mpmath.log(half) * j1 - y1s / mpmath.pi
        return float(j0), float(y0), float(j1), float(y1)


def test_series_oracle_sane():
    # the oracle itself against known digits
    j0, y0, j1, y1 = _series(1.0)
    assert j0 == pytest.approx(0.7651976865579666, abs=1e-15)
    assert y0 == pytest.approx(0.08825696421567696, abs=1e-15)
    assert j1 == pytest.approx(0.44005058574493355, abs=1e-15)
    assert y1 == pytest.approx(-0.7812128213002887, abs=1e-15)


def test_j0_small_argument():
    assert abs(bessel_j0(1e-8) - 1) <= 1e-9


def test_j0_one():
    assert bessel_j0(1.0) == pytest.approx(0.7651976866, abs=1e-10)
    assert bessel_j0(1.0) == pytest.approx(_series(1.0)[0], abs=1e-14)


def test_j0_first_zero():
    assert abs(bessel_j0(2.4048255577)) <= 1e-8
    # bisection on the series oracle locates the same zero
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _series(lo, 30)[0] * _series(mid, 30)[0] <= 0:
            hi = mid
        else:
            lo = mid
    assert lo == pytest.approx(2.4048255577, abs=1e-10)


@pytest.mark.parametrize("z", [0.05, 0.7, 2.0, 5.5, 11.0, 19.0])
def test_bessel_against_series(z):
    j0, y0, j1, y1 = _series(z)
    assert bessel_j0(z) == pytest.approx(j0, abs=1e-13)
    assert bessel_y0(z) == pytest.approx(y0, abs=1e-13)
    assert bessel_j1(z) == pytest.approx(j1, abs=1e-13)
    assert bessel_y1(z) == pytest.approx(y1, abs=1e-13)


@given(st.floats(0.01, 500.0))
def test_wronskian(z):
    w = bessel_j1(z) * bessel_y0(z) - bessel_j0(z) * bessel_y1(z)
    assert w == pytest.approx(2 / (math.pi * z), rel=1e-10)


@pytest.mark.parametrize("z", [0.3, 3.0, 17.0])
def test_wronskian_series(z):
    j0, y0, j1, y1 = _series(z)
    assert j1 * y0 - j0 * y1 == pytest.approx(2 / (math.pi * z), rel=1e-12)


def test_hankel():
    z = np.array([0.5, 4.0])
    assert np.allclose(hankel_h0(z), bessel_j0(z) + 1j * bessel_y0(z), rtol=1e-15)


def test_point_source_field():
    k = 30.0
    u = point_source_solution(k, (0.0, 0.0), np.array([0.3, 0.0]), np.array([0.4, 0.0]))
    assert u[0] == pytest.approx(-0.25j * hankel_h0(k * 0.5), rel=1e-15)
    assert np.isnan(u[1])


K = 2 * math.pi * 10
SRC = SourceSpec(SourceKind.GAUSSIAN, (0.0, 0.0))


def test_gaussian_far_field():
    x = np.array([1.0, 0.0, 0.7])
    y = np.array([0.0, 1.3, -0.9])
    r = np.hypot(x, y)
    hq = 0.002
    u1 = greens_solution(K, SRC, x, y, hq)
    u2 = greens_solution(K, SRC, x, y, hq / 2)
    far = -0.25j * hankel_h0(K * r) * math.exp(-math.pi**2 / 64)
    for u in (u1, u2):
        assert np.all(np.abs(u - far) <= 0.01 * np.abs(far))


# evaluation points on every quadrature lattice used below (multiples of 0.004)
XS = np.array([0.0, 0.004, 0.02, 0.1, 0.6])
YS = np.array([0.0, 0.0, -0.012, 0.2, 0.32])


def test_quadrature_self_consistency():
    u1 = greens_solution(K, SRC, XS[2:], YS[2:], 0.001)
    u2 = greens_solution(K, SRC, XS[2:], YS[2:], 0.0005)
    assert np.all(np.abs(u1 - u2) <= 1e-4 * np.abs(u2))


def test_radial_matches_quadrature():
    """Two independent routes to the free-space field of the Gaussian source."""
    rad = gaussian_radial_solution(K, SRC, XS, YS)
    errs = [np.abs(greens_solution(K, SRC, XS, YS, hq) - rad) / np.abs(rad) for hq in (0.002, 0.001, 0.0005)]
    # outside the support both agree to rounding
    assert np.all(errs[-1][3:] <= 1e-12)
    # inside, the midpoint rule converges at second order towards the radial form
    near = np.array([e[:3] for e in errs])
    rates = np.log2(near[:-1] / near[1:])
    assert np.all(np.abs(rates - 2) <= 0.1)
    assert np.all(near[-1] <= 2e-4)


def test_radial_quadrature_order():
    rad = gaussian_radial_solution(K, SRC, XS, YS, n_gauss=200)
    assert np.allclose(gaussian_radial_solution(K, SRC, XS, YS, n_gauss=400), rad, rtol=1e-13, atol=0)


def test_radial_continuous_at_cutoff():
    from helmddm.oracle import _gaussian_radius
    r0 = _gaussian_radius(K)
    u = gaussian_radial_solution(K, SRC, np.array([r0 * (1 - 1e-9), r0 * (1 + 1e-9)]), np.zeros(2))
    assert abs(u[0] - u[1]) <= 1e-7 * abs(u[1])


def test_direct_zero_source():
    p = make_problem(1, 1, core=20)
    u = direct_solve_global(p, np.zeros(p.grid.global_window.shape, complex))
    assert not u.values.any()


def test_direct_dihedral_symmetry():
    p = make_problem(1, 1, core=40, source=(0.2, -0.2), kind=SourceKind.GAUSSIAN)
    u = direct_solve_global(p).values
    n = np.linalg.norm(u)
    for v in (u[::-1, :], u[:, ::-1], u.T, u[::-1, ::-1].T):
        assert np.linalg.norm(u - v) <= 1e-10 * n


def test_direct_close_to_free_space():
    """The absorbing layer makes the truncated field a good approximation of the free-space one."""
    p = make_problem(1, 1, core=100, source=(0.5, -0.5), ppw=20.0)
    u = direct_solve_global(p)
    iw = p.grid.interior_window
    x = p.anchor[0] + p.h * iw.xs_index()
    y = p.anchor[1] + p.h * iw.ys_index()
    ref = point_source_solution(p.medium.k_min, p.source.center, x[None, :], y[:, None])
    rep = error_norms(u, ref, iw, p.medium.k_min,
                      exclude=near_source_mask(iw, p.h, p.anchor, p.source.center, 0.2))
    assert rep.l2_relative < 0.05


def test_error_norms_zero_and_constant():
    w = Window(0, 0, 11, 11)
    h = 0.1
    ref = np.full(w.shape, 3.0 + 1j)
    rep = error_norms(FieldGrid(w, ref.copy(), h), ref, w, 2.0)
    assert rep.l2_error == 0 and rep.h1_error == 0
    num = FieldGrid(w, ref + 1.0, h)
    rep = error_norms(num, ref, w, 2.0)
    assert rep.l2_error == pytest.approx(1.0, rel=1e-14)
    assert rep.h1_error == pytest.approx(2.0, rel=1e-14)


def test_error_norms_exclusion():
    w = Window(0, 0, 11, 11)
    ref = np.zeros(w.shape, complex)
    num = np.zeros(w.shape, complex)
    num[5, 5] = 1e6
    mask = near_source_mask(w, 0.1, (0.0, 0.0), (0.5, 0.5), 0.15)
    rep = error_norms(FieldGrid(w, num, 0.1), ref, w, 1.0, exclude=mask)
    assert rep.l2_error == 0 and rep.h1_error == 0


def test_rates():
    reps = [ErrorReport(4.0 * 4**-i, 8.0 * 2**-i, 1, 1, 0.1 * 2**-i, Window(0, 0, 3, 3)) for i in range(3)]
    convergence_rates(reps)
    assert reps[0].l2_rate is None
    assert reps[2].l2_rate == pytest.approx(2.0) and reps[2].h1_rate == pytest.approx(1.0)
