import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from helmddm.errors import ConfigError, DomainError
from helmddm.grid import Window
from helmddm.medium import (Box, Layer, MediumKind, MediumModel, SourceKind, SourceSpec,
                            constant_medium, eval_wavenumber, gaussian_source_value,
                            layered_medium, nearest_node, sample_source)

UNIT = Box(0.0, 1.0, -1.0, 0.0)


def test_constant_wavenumber():
    m = constant_medium(2 * math.pi * 25, Box(-0.5, 0.5, -0.5, 0.5))
    assert eval_wavenumber(m, (0.1, -0.3)) == pytest.approx(50 * math.pi, rel=1e-15)


def test_single_layer_is_constant():
    m = MediumModel(MediumKind.LAYERED, 4.0, UNIT, layers=(Layer(-1.0, 0.0, 2.0),))
    for y in (-1.0, -0.3, 0.0):
        assert eval_wavenumber(m, (0.5, y)) == 2.0


def test_two_layers():
    m = MediumModel(MediumKind.LAYERED, 2.0, UNIT,
                    layers=(Layer(-1.0, -0.5, 1.0), Layer(-0.5, 0.0, 2.0)))
    assert eval_wavenumber(m, (0.3, -0.75)) == 2.0
    assert eval_wavenumber(m, (0.3, -0.25)) == 1.0
    # an interface point belongs to the deeper layer
    assert eval_wavenumber(m, (0.3, -0.5)) == 2.0


def test_outside_extent_raises():
    m = constant_medium(1.0, UNIT, extent=UNIT.dilate(0.1))
    with pytest.raises(DomainError):
        eval_wavenumber(m, (1.2, -0.5))
    # constant continuation inside the extent
    lay = layered_medium(1.0, UNIT, extent=UNIT.dilate(0.1))
    assert eval_wavenumber(lay, (0.5, 0.05)) == eval_wavenumber(lay, (0.5, 0.0))
    assert eval_wavenumber(lay, (0.5, -1.05)) == eval_wavenumber(lay, (0.5, -1.0))


def test_default_layers_top_to_bottom():
    m = layered_medium(1.0, UNIT)
    assert m.velocity_at(0.5, -0.01) == 1.0
    assert m.velocity_at(0.5, -0.99) == 2.5
    assert m.c_min == 1.0 and m.c_max == 2.5


@pytest.mark.parametrize("layers", [
    (Layer(-1.0, -0.6, 1.0), Layer(-0.5, 0.0, 2.0)),   # gap
    (Layer(-1.0, -0.5, 1.0), Layer(-0.5, -0.1, 2.0)),  # short of the top
    (Layer(-1.0, 0.0, -1.0),),
])
def test_bad_layers(layers):
    with pytest.raises(ConfigError):
        MediumModel(MediumKind.LAYERED, 1.0, UNIT, layers=layers)


def test_point_delta():
    h = 0.01
    w = Window(0, 0, 21, 21)
    f = sample_source(SourceSpec(SourceKind.POINT, (0.1, 0.1)), w, h, 1.0, (0.0, 0.0))
    assert np.count_nonzero(f.values) == 1
    assert f.values[10, 10] == pytest.approx(1e4, rel=1e-12)


def test_gaussian_centre_value():
    k = 7.0
    w = Window(0, 0, 11, 11)
    f = sample_source(SourceSpec(SourceKind.GAUSSIAN, (0.05, 0.05)), w, 0.01, k, (0.0, 0.0))
    assert f.values[5, 5].real == pytest.approx(16 * k**2 / math.pi**3, rel=1e-14)


def test_gaussian_off_centre_extended_precision():
    k = 50 * math.pi
    mpmath.mp.dps = 40
    kk = 50 * mpmath.pi
    ref = 16 * kk**2 / mpmath.pi**3 * mpmath.exp(-(4 * kk / mpmath.pi) ** 2 * mpmath.mpf("0.0025"))
    val = gaussian_source_value(0.05**2, k)
    assert val == pytest.approx(float(ref), rel=1e-12)


def test_nearest_node_ties_go_down():
    assert nearest_node(0.5, 0.0, 1.0) == 0
    assert nearest_node(1.5, 0.0, 1.0) == 1
    assert nearest_node(1.51, 0.0, 1.0) == 2


@given(st.floats(0.01, 0.99), st.floats(-0.99, -0.01))
def test_wavenumber_grid_matches_pointwise(x, y):
    m = layered_medium(3.0, UNIT)
    g = m.wavenumber_grid(np.array([x]), np.array([y]))
    assert g.shape == (1, 1)
    assert g[0, 0] == eval_wavenumber(m, (x, y))


def test_source_must_be_inside():
    with pytest.raises(ConfigError):
        SourceSpec(SourceKind.POINT, (1.0, -0.5)).check_inside(UNIT)
