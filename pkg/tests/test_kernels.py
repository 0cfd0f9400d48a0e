import numpy as np
import pytest
from hypothesis import given, strategies as st

from manyscat.geometry import DomainBox, GridField
from manyscat.kernels import (
    REFERENCE_QUADRATURE_ORDER,
    DomainError,
    UnsupportedBackgroundError,
    WaveContext,
    green_free,
    green_gradient,
    incident_field,
    surface_self_integral,
)

coords = st.floats(-5, 5, allow_nan=False)
vec = st.tuples(coords, coords, coords)


def test_green_static_value():
    assert green_free((1, 0, 0), (0, 0, 0), 0.0) == pytest.approx(1 / (4 * np.pi))
    assert abs(green_free((1, 0, 0), (0, 0, 0), 0.0) - 0.0795775) < 1e-7


def test_green_unit_distance_k1():
    g = green_free((1, 0, 0), (0, 0, 0), 1.0)
    assert abs(g - (np.cos(1) + 1j * np.sin(1)) / (4 * np.pi)) < 1e-16
    # quoted to six significant figures
    assert abs(g - (0.0429960 + 0.0669619j)) < 1e-6


def test_green_small_distance_ratio():
    errs = []
    for r in (1e-1, 1e-2, 1e-3):
        g = green_free((r, 0, 0), (0, 0, 0), 2.0)
        errs.append(abs(g * 4 * np.pi * r - 1))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 3e-3


def test_green_coincident_points_rejected():
    with pytest.raises(DomainError):
        green_free((0.5, 0.5, 0.5), (0.5, 0.5, 0.5), 1.0)


@given(vec, vec, st.floats(0, 20))
def test_green_symmetric_and_unit_phase(x, y, k):
    x, y = np.array(x), np.array(y)
    r = np.linalg.norm(x - y)
    if r < 1e-6:
        return
    assert green_free(x, y, k) == green_free(y, x, k)
    assert abs(abs(green_free(x, y, k)) * 4 * np.pi * r - 1) < 1e-12


def test_gradient_bound_and_finite_difference(rng):
    k = 3.0
    for _ in range(50):
        x, y = rng.normal(size=3), rng.normal(size=3)
        r = np.linalg.norm(x - y)
        grad = green_gradient(x, y, k)
        eps = 1e-6
        fd = np.array([
            (green_free(x + eps * e, y, k) - green_free(x - eps * e, y, k)) / (2 * eps)
            for e in np.eye(3)
        ])
        assert np.allclose(grad, fd, rtol=1e-6, atol=1e-9)
        # |grad G| <= (k/r + 1/r^2)/(4 pi) <= 2 max(...)/(4 pi), well inside c = 1 + eps
        bound = max(k / r, 1 / r**2)
        assert np.linalg.norm(grad) <= (1 + 1e-12) * bound


def test_incident_field_values():
    ctx0 = WaveContext(0.0)
    assert incident_field(ctx0, (1.0, 2.0, 3.0)) == 1
    ctx = WaveContext(1.0, (0, 0, 1))
    assert abs(incident_field(ctx, (0, 0, np.pi)) + 1) < 1e-15


def test_incident_field_unit_modulus(rng):
    ctx = WaveContext(2.5, (0.6, 0.0, 0.8))
    u = incident_field(ctx, rng.uniform(-10, 10, size=(100, 3)))
    assert np.allclose(np.abs(u), 1.0, atol=1e-14)


def test_incident_field_variable_background_unsupported():
    g = GridField.constant(DomainBox.unit(), 4, 1.2)
    ctx = WaveContext(1.0, n0sq=g)
    with pytest.raises(UnsupportedBackgroundError):
        incident_field(ctx, (0, 0, 0))


def test_wave_context_validation():
    with pytest.raises(DomainError):
        WaveContext(-1.0)
    with pytest.raises(DomainError):
        WaveContext(1.0, (1.0, 1.0, 0.0))
    g = GridField.constant(DomainBox.unit(), 4, 1 - 0.1j)
    with pytest.raises(DomainError):
        WaveContext(1.0, n0sq=g)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_surface_integral_equals_radius(a):
    t = a * np.array([0.0, 0.6, 0.8])
    val = surface_self_integral(a, t, REFERENCE_QUADRATURE_ORDER)
    assert abs(val - a) <= 1e-6 * a


def test_surface_integral_off_center_sphere():
    c = np.array([1.0, -2.0, 0.5])
    t = c + np.array([0.0, 0.0, -1.5])
    assert abs(surface_self_integral(1.5, t, center=c) - 1.5) < 1e-9


def test_surface_integral_order_convergence():
    t = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    vals = [surface_self_integral(1.0, t, n) for n in (2, 4, 8)]
    diffs = [abs(vals[1] - vals[0]), abs(vals[2] - vals[1])]
    assert diffs[1] <= diffs[0]


def test_surface_integral_rejects_point_off_sphere():
    with pytest.raises(DomainError):
        surface_self_integral(1.0, (0.0, 0.0, 1.1))
