import math

import pytest
from hypothesis import given, strategies as st

from nanospin.constants import (
    CODATA2018,
    REFERENCE_RESONATOR,
    RB87_DEFAULT_PAIR,
    RB87_F1,
    RB87_F2,
    RESONATOR_PRESETS,
    AtomSpecies,
    DCCurrent,
    PermanentDipole,
    ResonatorSpec,
    SpinPair,
    mechanical_decoherence_rate,
    parse_config_text,
    resonator_from_config,
    species_from_config,
    zero_point_motion,
)
from nanospin.errors import DomainError, ForbiddenTransitionError, OutOfScopeTransitionError

# frozen from a 50-digit evaluation of the closed forms with the same constants
ALPHA0 = 3.4283412367967376e-15
GAMMA_HZ = {295.0: 38417516.532174362, 4.0: 520915.47840236424, 0.01: 1302.2886960059106}


def test_codata_values():
    assert CODATA2018.mu_B == 9.2740100783e-24
    assert CODATA2018.hbar == 1.054571817e-34
    assert CODATA2018.k_B == 1.380649e-23
    assert CODATA2018.mu_0 == 1.25663706212e-6


def test_rb87_presets():
    assert RB87_F1.F == 1 and RB87_F1.g_F == -0.5
    assert RB87_F1.abs_g_F == 0.5
    assert RB87_F2.abs_g_F == 0.5
    # |1,-1> is the magnetically trapped state
    assert RB87_F1.is_trappable(-1)
    assert not RB87_F1.is_trappable(1)
    assert not RB87_F1.is_trappable(0)


def test_species_validation():
    with pytest.raises(DomainError):
        AtomSpecies(F=0.3, g_F=0.5)
    with pytest.raises(DomainError):
        AtomSpecies(F=1, g_F=0.0)
    AtomSpecies(F=1.5, g_F=2 / 3)


def test_spin_pair_checks():
    RB87_DEFAULT_PAIR.check(RB87_F1)
    with pytest.raises(OutOfScopeTransitionError):
        SpinPair(0, 0).check(RB87_F1)
    with pytest.raises(ForbiddenTransitionError):
        SpinPair(1, -1).check(RB87_F1)
    with pytest.raises(DomainError):
        SpinPair(2, 1).check(RB87_F1)
    # Δm = 0 is a distinct, more specific error
    assert issubclass(OutOfScopeTransitionError, ForbiddenTransitionError)


def test_zero_point_motion_anchor():
    assert zero_point_motion(REFERENCE_RESONATOR) == pytest.approx(ALPHA0, rel=1e-14)
    assert zero_point_motion(REFERENCE_RESONATOR) == pytest.approx(3.43e-15, rel=1e-3)


@given(st.floats(1e4, 1e9), st.floats(1e-16, 1e-9), st.floats(1.0, 4.0))
def test_zero_point_motion_scaling(omega, mass, k):
    a = zero_point_motion(ResonatorSpec(omega, mass, 1e5))
    b = zero_point_motion(ResonatorSpec(k * omega, mass, 1e5))
    c = zero_point_motion(ResonatorSpec(omega, k * mass, 1e5))
    assert b == pytest.approx(a / math.sqrt(k), rel=1e-12)
    assert c == pytest.approx(a / math.sqrt(k), rel=1e-12)


@pytest.mark.parametrize("T", sorted(GAMMA_HZ))
def test_decoherence_rate_anchors(T):
    got = mechanical_decoherence_rate(REFERENCE_RESONATOR.Q, T) / (2 * math.pi)
    assert got == pytest.approx(GAMMA_HZ[T], rel=1e-13)


def test_decoherence_rate_published_values():
    for T, want in ((295.0, 39e6), (4.0, 520e3), (0.01, 1.3e3)):
        got = mechanical_decoherence_rate(1.6e5, T) / (2 * math.pi)
        assert abs(got / want - 1) < 0.05


def test_decoherence_rate_limits():
    assert mechanical_decoherence_rate(1e5, 0.0) == 0.0
    with pytest.raises(DomainError):
        mechanical_decoherence_rate(0.0, 1.0)
    with pytest.raises(DomainError):
        mechanical_decoherence_rate(1e5, -1.0)


def test_resonator_validation():
    with pytest.raises(DomainError):
        ResonatorSpec(-1.0, 1e-12, 1e5)
    with pytest.raises(DomainError):
        ResonatorSpec(1.0, 0.0, 1e5)
    with pytest.raises(DomainError):
        PermanentDipole(-1.0)
    assert isinstance(REFERENCE_RESONATOR.source, DCCurrent)


def test_resonator_presets():
    assert set(RESONATOR_PRESETS) == {"string-dc", "string-dipole", "string-ac"}
    for spec in RESONATOR_PRESETS.values():
        assert spec.omega_m == pytest.approx(2 * math.pi * 850e3)
        assert spec.m_eff == 8.4e-13
        assert spec.Q == 1.6e5


def test_config_roundtrip():
    text = """
    # comment
    label = Rb87
    F = 1
    g_F = -1/2
    omega_m = 5340707.511102648
    m_eff = 8.4e-13   # kg
    Q = 1.6e5
    source = permanent-dipole
    mu_m = 6.7e-11
    """
    cfg = parse_config_text(text)
    sp = species_from_config(cfg)
    assert sp.g_F == -0.5 and sp.label == "Rb87"
    spec = resonator_from_config(cfg)
    assert isinstance(spec.source, PermanentDipole)
    assert spec.source.mu_m == 6.7e-11


def test_config_errors():
    with pytest.raises(DomainError):
        parse_config_text("no equals sign here")
    with pytest.raises(DomainError):
        resonator_from_config(parse_config_text("omega_m = 1\nm_eff = 1\nQ = abc"))
    with pytest.raises(DomainError):
        resonator_from_config(parse_config_text("omega_m = 1\nm_eff = 1\nQ = 1\nsource = magic"))
