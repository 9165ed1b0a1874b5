import math

import mpmath
import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from helmddm.discretize import apply, apply_array, apply_region, assemble
from helmddm.errors import ContractError
from helmddm.grid import FieldGrid, Window
from helmddm.medium import Box, SourceKind, constant_medium
from helmddm.oracle import direct_solve_global
from helmddm.pml import BoxStretch, PmlProfile

from conftest import make_problem

EPS = np.finfo(float).eps
H = 0.02
K = 9.0
WIN = Window(0, 0, 30, 24)


def flat_operator(window=WIN, h=H, k=K):
    """No stretching anywhere on the window."""
    far = Box(-10.0, 10.0, -10.0, 10.0)
    return assemble(window, BoxStretch.uniform(PmlProfile(5.0, 0.1), far), constant_medium(k, far), h, (0.0, 0.0))


def stretched_operator(window=WIN, h=H, k=K):
    box = Box(0.1, 0.4, 0.1, 0.3)
    return assemble(window, BoxStretch.uniform(PmlProfile(20.0, 0.1), box), constant_medium(k, box), h, (0.0, 0.0))


def test_unstretched_row():
    op = flat_operator()
    c, w, e, s, n = op.stencil(5, 7)
    ih2 = 1 / H**2
    assert c == pytest.approx(-4 * ih2 + K**2, rel=1e-14)
    for v in (w, e, s, n):
        assert v == pytest.approx(ih2, rel=1e-14)
    assert op.stencil(0, 3) == (1, 0, 0, 0, 0)


def test_constant_field():
    op = flat_operator()
    r = apply_array(op, np.ones(WIN.shape, complex))
    assert np.allclose(r[2:-2, 2:-2], K**2, rtol=1e-12)


def test_plane_wave_symbol():
    kappa = 7.3
    op = flat_operator()
    x = H * WIN.xs_index()
    u = np.broadcast_to(np.exp(1j * kappa * x)[None, :], WIN.shape).astype(complex)
    r = apply_array(op, u)
    mpmath.mp.dps = 30
    sym = float((2 * mpmath.cos(mpmath.mpf(kappa) * mpmath.mpf(H)) - 2) / mpmath.mpf(H) ** 2 + K**2)
    inner = (slice(2, -2), slice(2, -2))
    assert np.allclose(r[inner], sym * u[inner], rtol=1e-9, atol=1e-9)


def test_zero_field():
    op = stretched_operator()
    assert not apply_array(op, np.zeros(WIN.shape, complex)).any()


def test_solve_consistency(rng):
    op = stretched_operator()
    f = rng.standard_normal(WIN.shape) + 1j * rng.standard_normal(WIN.shape)
    f[0, :] = f[-1, :] = f[:, 0] = f[:, -1] = 0
    u = spla.spsolve(op.matrix().tocsc(), (op.rhs_scaling() * f).reshape(-1)).reshape(WIN.shape)
    r = apply_array(op, u)
    assert np.linalg.norm(r[1:-1, 1:-1] - f[1:-1, 1:-1]) <= 1e-10 * np.linalg.norm(f)


def test_matrix_is_scaled_operator(rng):
    op = stretched_operator()
    u = rng.standard_normal(WIN.shape) + 1j * rng.standard_normal(WIN.shape)
    su = (op.matrix() @ u.reshape(-1)).reshape(WIN.shape)
    ju = op.rhs_scaling() * apply_array(op, u)
    assert np.allclose(su, ju, rtol=1e-12, atol=1e-12 * np.abs(su).max())


def test_matrix_symmetric():
    s = stretched_operator().matrix()
    assert (s - s.T).count_nonzero() == 0


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=30, deadline=None)
def test_linearity(a, b):
    op = stretched_operator(Window(0, 0, 9, 8))
    g = np.random.default_rng(1)
    u = g.standard_normal(op.shape) + 1j * g.standard_normal(op.shape)
    v = g.standard_normal(op.shape) + 1j * g.standard_normal(op.shape)
    lu, lv = apply_array(op, u), apply_array(op, v)
    lhs = apply_array(op, a * u + b * v)
    rhs = a * lu + b * lv
    scale = abs(a) * (np.abs(lu) + np.abs(u)) + abs(b) * (np.abs(lv) + np.abs(v))
    # every term is O(1/h^2), so the bound carries the stencil scale
    assert np.all(np.abs(lhs - rhs) <= 8 * EPS * 10 * scale / H**2 + 1e-300)


@given(st.integers(0, 29), st.integers(0, 29), st.integers(0, 23), st.integers(0, 23))
@settings(max_examples=60, deadline=None)
def test_region_apply_bitwise(p0, p1, q0, q1):
    op = stretched_operator()
    g = np.random.default_rng(7)
    u = g.standard_normal(WIN.shape) + 1j * g.standard_normal(WIN.shape)
    region = Window.from_bounds(min(p0, p1), max(p0, p1), min(q0, q1), max(q0, q1))
    full = apply_array(op, u)
    part = apply_region(op, u, region)
    assert np.array_equal(part, full[WIN.slices(region)])


def test_region_outside_rejected():
    with pytest.raises(ContractError):
        apply_region(flat_operator(), np.zeros(WIN.shape, complex), Window(25, 0, 10, 3))


def test_apply_window_mismatch():
    op = flat_operator()
    with pytest.raises(ContractError):
        apply(op, FieldGrid.zeros(Window(0, 0, 5, 5), H))


def test_global_matches_subdomain_where_unstretched():
    p = make_problem(2, 2, core=20)
    g = p.global_operator()
    sub = p.subdomains[3]
    op = p.subdomain_operator(sub)
    # nodes of the core of (1, 1) away from every absorbing layer
    for pp in range(sub.cut_lo[0] + 1, sub.cut_hi[0]):
        for qq in range(sub.cut_lo[1] + 1, sub.cut_hi[1]):
            assert g.stencil(pp, qq) == op.stencil(pp, qq)


def test_single_subdomain_operator_is_global():
    p = make_problem(1, 1, core=30, n_overlap=0)
    g = p.global_operator()
    op = p.subdomain_operator(p.subdomains[0])
    assert g.window == op.window
    assert (g.matrix() != op.matrix()).nnz == 0


def test_reflection_symmetry():
    p = make_problem(1, 1, core=40, source=(0.2, -0.2))
    u = direct_solve_global(p).values
    assert np.linalg.norm(u - u[:, ::-1]) <= 1e-12 * np.linalg.norm(u)
    assert np.linalg.norm(u - u[::-1, :]) <= 1e-12 * np.linalg.norm(u)
    assert np.linalg.norm(u - u.T) <= 1e-12 * np.linalg.norm(u)


def test_small_window_rejected():
    with pytest.raises(ContractError):
        flat_operator(Window(0, 0, 2, 5))


def test_operator_key_dedups_equal_windows():
    p = make_problem(4, 4, core=10)
    keys = {p.subdomain_operator(s).key() for s in p.subdomains}
    assert len(keys) == 9
