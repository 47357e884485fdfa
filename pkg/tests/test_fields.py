import math
import warnings

import pytest
from hypothesis import given, strategies as st

from nanospin.constants import ACCurrent, DCCurrent, PermanentDipole
from nanospin.errors import DomainError, ModelValidityError, ModelValidityWarning, UnsupportedSourceError
from nanospin.fields import (
    ac_wire_sidebands,
    bias_saturation,
    chi_for_source,
    dc_wire_field,
    dipole_field,
    resonant_drive_frequency,
    source_field,
)

# 50-digit evaluations of mu0 mu/(4 pi r^3), 3 mu0 mu/(4 pi r^4), mu0 I/(2 pi r), mu0 I/(2 pi r^2)
DIPOLE_STATIC = 6.7000000036473173
DIPOLE_GRADIENT = 20100000.010941952
WIRE_STATIC = 0.20000000010887514
WIRE_GRADIENT = 200000.00010887514


def test_dipole_anchor():
    d = dipole_field(6.7e-11, 1e-6, 10e-9)
    assert d.static_amplitude == pytest.approx(DIPOLE_STATIC, rel=1e-14)
    assert d.gradient == pytest.approx(DIPOLE_GRADIENT, rel=1e-14)
    assert d.gradient == pytest.approx(2.0e7, rel=0.01)
    assert d.drive_amplitude == pytest.approx(DIPOLE_GRADIENT * 10e-9, rel=1e-14)


def test_dc_wire_anchor():
    w = dc_wire_field(1.0, 1e-6, 10e-9)
    assert w.static_amplitude == pytest.approx(WIRE_STATIC, rel=1e-14)
    assert w.gradient == pytest.approx(WIRE_GRADIENT, rel=1e-14)
    assert w.static_amplitude == pytest.approx(0.2, rel=1e-3)
    assert dc_wire_field(-1.0, 1e-6, 10e-9) == w


@given(st.floats(1e-7, 1e-4), st.floats(1.1, 10.0))
def test_power_laws(r0, k):
    d1, d2 = dipole_field(1e-12, r0, 0.0), dipole_field(1e-12, k * r0, 0.0)
    assert d2.static_amplitude == pytest.approx(d1.static_amplitude / k**3, rel=1e-12)
    assert d2.gradient == pytest.approx(d1.gradient / k**4, rel=1e-12)
    w1, w2 = dc_wire_field(1.0, r0, 0.0), dc_wire_field(1.0, k * r0, 0.0)
    assert w2.static_amplitude == pytest.approx(w1.static_amplitude / k, rel=1e-12)
    assert w2.gradient == pytest.approx(w1.gradient / k**2, rel=1e-12)


@given(st.floats(1e-7, 1e-4), st.floats(0.0, 0.09))
def test_gradient_is_derivative_of_static(r0, frac):
    # b = -d(static)/dr0 for both dc models
    h = 1e-6 * r0
    for f in (lambda r: dipole_field(1e-12, r, 0.0), lambda r: dc_wire_field(1.0, r, 0.0)):
        fd = (f(r0 - h).static_amplitude - f(r0 + h).static_amplitude) / (2 * h)
        assert f(r0).gradient == pytest.approx(fd, rel=1e-6)
    alpha = frac * r0
    w = dc_wire_field(1.0, r0, alpha)
    assert w.drive_amplitude == pytest.approx(w.gradient * alpha, rel=1e-14, abs=0)


def test_ac_sidebands():
    omega_ac, omega_m = 2 * math.pi * 10e6, 2 * math.pi * 850e3
    ac = ac_wire_sidebands(1.0, omega_ac, omega_m, 1e-6, 10e-9)
    assert ac.static_amplitude == 0.0
    freqs = [f for f, _ in ac.drive_terms]
    assert freqs == [omega_ac, omega_ac + omega_m, omega_ac - omega_m]
    dc = dc_wire_field(1.0, 1e-6, 10e-9)
    assert ac.drive_terms[0][1] == pytest.approx(dc.static_amplitude)
    assert ac.drive_terms[1][1] == pytest.approx(0.5 * dc.drive_amplitude)
    assert ac.drive_amplitude == ac.drive_terms[1][1]
    assert resonant_drive_frequency(omega_ac + omega_m, omega_m) == omega_ac


def test_source_dispatch():
    assert source_field(DCCurrent(1.0), 1e-6, 0.0) == dc_wire_field(1.0, 1e-6, 0.0)
    assert source_field(PermanentDipole(1e-12), 1e-6, 0.0) == dipole_field(1e-12, 1e-6, 0.0)
    ac = source_field(ACCurrent(1.0, 1e7), 1e-6, 0.0)
    assert ac.static_amplitude == 0.0
    with pytest.raises(DomainError):
        source_field("wire", 1e-6, 0.0)


def test_geometry_validity():
    with pytest.raises(ModelValidityError):
        dc_wire_field(1.0, 1e-6, 1e-6)
    with pytest.raises(DomainError):
        dipole_field(1e-12, -1e-6, 0.0)
    with pytest.warns(ModelValidityWarning):
        dc_wire_field(1.0, 1e-6, 0.2e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dc_wire_field(1.0, 1e-6, 0.05e-6)


@given(st.floats(1e-6, 1.0), st.floats(0.0, 1.0), st.floats(1.0, 1e4))
def test_bias_saturation_bounds(B0z, B_m0, chi):
    s = bias_saturation(B0z, B_m0, chi)
    assert 0 < s.reduction_factor <= 1
    assert s.B_perp <= B_m0 * (1 + 1e-15)
    assert s.B_perp <= B0z / chi * (1 + 1e-12)


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0), st.floats(1.0, 1e4))
def test_bias_saturation_monotone(B0z, B_m0, chi):
    lo = bias_saturation(B0z, B_m0, chi)
    hi = bias_saturation(B0z, 2 * B_m0, chi)
    assert hi.B_perp >= lo.B_perp
    assert hi.reduction_factor <= lo.reduction_factor


def test_bias_saturation_limits():
    assert bias_saturation(1e-3, 0.0, 100).reduction_factor == 1.0
    # B0z >> chi B_m0: no reduction
    assert bias_saturation(1.0, 1e-9, 10).reduction_factor == pytest.approx(1.0, abs=1e-15)
    # large drive saturates at B0z / chi
    assert bias_saturation(1e-3, 1e3, 10).B_perp == pytest.approx(1e-4, rel=1e-9)
    with pytest.raises(DomainError):
        bias_saturation(0.0, 1.0, 1.0)


def test_chi_for_source():
    assert chi_for_source(PermanentDipole(1e-12), 1e-6, 1e-8) == pytest.approx(100 / 3)
    assert chi_for_source(DCCurrent(1.0), 1e-6, 1e-8) == pytest.approx(100)
    # chi equals static/drive of the source models
    d = dipole_field(1e-12, 1e-6, 1e-8)
    assert chi_for_source(PermanentDipole(1e-12), 1e-6, 1e-8) == pytest.approx(d.static_amplitude / d.drive_amplitude)
    with pytest.raises(UnsupportedSourceError):
        chi_for_source(ACCurrent(1.0, 1e7), 1e-6, 1e-8)
