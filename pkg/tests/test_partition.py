import numpy as np
import pytest
from hypothesis import given, strategies as st

from helmddm.errors import ConfigError, ContractError
from helmddm.grid import Window
from helmddm.medium import Box
from helmddm.partition import (GATHER_ORDER, Direction, GridSpec, beta0, beta_left, beta_right,
                               build_partition, direction_mask, ownership_map)

EPS = np.finfo(float).eps


def unit_spec(n1=2, n2=2, h=0.01):
    return GridSpec(Box(0.0, 1.0, 0.0, 1.0), h, 20, 10, n1, n2)


def test_two_by_two_windows():
    subs = build_partition(unit_spec())
    assert len(subs) == 4
    w = subs[0].window
    assert (w.p0, w.p1, w.q0, w.q1) == (-20, 80, -20, 80)
    h = 0.01
    assert w.p0 * h == pytest.approx(-20 * h) and w.p1 * h == pytest.approx(0.5 + 30 * h)
    assert [s.index for s in subs] == [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_single_subdomain_is_global_window():
    spec = GridSpec(Box(0.0, 1.0, 0.0, 1.0), 0.01, 20, 0, 1, 1)
    (sub,) = build_partition(spec)
    assert sub.window == spec.global_window
    assert sub.boundary == (True, True, True, True)


def test_five_by_five_interior_window():
    a = 25 / 56
    spec = GridSpec(Box(-a, a, -a, a), 1 / 560, 20, 10, 5, 5)
    # the outer absorbing layer is n_ramp = 20 nodes wide
    assert spec.global_window.nx - 1 == 540
    assert spec.core_cells == (100, 100)
    sub = build_partition(spec)[12]
    assert sub.index == (2, 2)
    # 100 core cells plus 30 on each side: 160 cells, 161 nodes
    assert sub.window.p1 - sub.window.p0 == 160


def test_grid_validation():
    with pytest.raises(ConfigError):
        GridSpec(Box(0.0, 1.0, 0.0, 1.0), 0.03, 20, 10, 1, 1)
    with pytest.raises(ConfigError):
        GridSpec(Box(0.0, 1.0, 0.0, 1.0), 0.01, 20, 10, 3, 1)
    with pytest.raises(ConfigError):
        GridSpec(Box(0.0, 1.0, 0.0, 1.0), 0.01, 20, 0, 2, 1)


def test_beta0_endpoints():
    assert beta0(0.0) == 1.0 and beta0(1.0) == 0.0
    assert beta0(0.5) == 0.5
    assert beta0(-3.0) == 1.0 and beta0(7.0) == 0.0


@pytest.mark.parametrize("t", [0.1, 0.25, 0.7])
def test_beta0_symmetry_examples(t):
    assert abs(beta0(t) + beta0(1 - t) - 1) <= 4 * EPS


@given(st.floats(0.0, 1.0))
def test_beta0_symmetry(t):
    assert abs(beta0(t) + beta0(1 - t) - 1) <= 4 * EPS


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_beta0_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert beta0(lo) >= beta0(hi)


def test_beta0_c2_at_ends():
    # first and second one-sided differences vanish to the order of the stencil
    for t0, sgn in ((0.0, 1), (1.0, -1)):
        for e in (1e-2, 1e-3):
            d1 = (beta0(t0 + sgn * e) - beta0(t0)) / e
            d2 = (beta0(t0 + 2 * sgn * e) - 2 * beta0(t0 + sgn * e) + beta0(t0)) / e**2
            assert abs(d1) < 20 * e**2 and abs(d2) < 200 * e


def test_side_weights():
    cut, n = 50, 10
    assert beta_left(cut, cut, n) == 1.0
    assert beta_left(cut - n, cut, n) == 0.0
    assert beta_right(cut, cut, n) == 1.0
    assert beta_right(cut + n, cut, n) == 0.0


def test_boundary_side_weight_is_one():
    spec = unit_spec()
    sub = build_partition(spec)[0]
    bw = sub.blend_weights()
    assert np.all(bw.left == 1) and np.all(bw.bottom == 1)
    assert bw.right[0] == 1 and bw.right[-1] == 0


def test_interior_side_weight_examples():
    spec = unit_spec()
    sub = build_partition(spec)[1]          # (1, 0): interior cut on its left
    bw = sub.blend_weights()
    p = sub.window.xs_index()
    c = sub.cut_lo[0]
    assert bw.left[p == c] == 1.0
    assert bw.left[p == c - spec.n_overlap] == 0.0


def test_mask_examples():
    w = Window.from_bounds(0, 20, 0, 20)
    m = direction_mask(Direction.RIGHT, (10, None), w).values
    assert m[5, 10] == 1 and m[5, 9] == 0
    m = direction_mask(Direction.UP_RIGHT, (10, 12), w).values
    assert m[12, 10] == 1 and m[12, 9] == 0 and m[11, 10] == 0


def test_mask_needs_cut():
    with pytest.raises(ContractError):
        direction_mask(Direction.UP, (3, None), Window(0, 0, 4, 4))


@given(st.integers(-5, 25), st.sampled_from(["x", "y"]))
def test_mask_complement(cut, axis):
    w = Window.from_bounds(0, 20, 0, 20)
    if axis == "x":
        a = direction_mask(Direction.RIGHT, (cut, None), w).values
        b = direction_mask(Direction.LEFT, (cut, None), w).values
        line = np.broadcast_to(w.xs_index()[None, :] == cut, a.shape)
    else:
        a = direction_mask(Direction.UP, (None, cut), w).values
        b = direction_mask(Direction.DOWN, (None, cut), w).values
        line = np.broadcast_to(w.ys_index()[:, None] == cut, a.shape)
    total = a + b
    assert np.all(total[line] == 2) and np.all(total[~line] == 1)


def test_corner_mask_is_product():
    w = Window.from_bounds(-3, 9, -2, 11)
    for d in GATHER_ORDER:
        if not d.is_corner:
            continue
        cuts = (4, 5)
        m = direction_mask(d, cuts, w).values
        mx = direction_mask(Direction((d.dx, 0)), cuts, w).values
        my = direction_mask(Direction((0, d.dy)), cuts, w).values
        assert np.array_equal(m, mx * my)


def test_ownership_partition():
    spec = unit_spec(2, 2, h=0.05)
    own = ownership_map(spec)
    subs = build_partition(spec)
    counts = np.zeros(spec.global_window.shape, int)
    gw = spec.global_window
    for s in subs:
        counts[gw.slices(s.owned)] += 1
        assert np.all(own[gw.slices(s.owned)] == s.i + spec.n1 * s.j)
    assert np.all(counts == 1)
    # a cut-line node belongs to the lower index
    c = spec.cut_p(1)
    assert spec.owner(c, 3)[0] == 0 and spec.owner(c + 1, 3)[0] == 1


def test_neighbours():
    subs = build_partition(unit_spec(3, 2, h=1 / 60))
    corner = subs[0]
    assert corner.neighbor(Direction.LEFT) is None
    assert corner.neighbor(Direction.UP_RIGHT) == (1, 1)
    assert corner.send_cuts(Direction.RIGHT) == (corner.cut_hi[0] + 1, None)
    assert corner.send_cuts(Direction.DOWN_LEFT) == corner.cut_lo
