import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nanospin.constants import CODATA2018, REFERENCE_OMEGA_M, REFERENCE_RESONATOR, RB87_F1, zero_point_motion
from nanospin.coupling import field_for_splitting
from nanospin.errors import DomainError, LeakageWarning, TruncationError
from nanospin.ladder import (
    HybridState,
    LZSchedule,
    PopulationState,
    Spin,
    SweepDirection,
    amplitude_variance,
    apply_sweep,
    apply_sweep_populations,
    apply_sweep_to_array,
    boltzmann_factor,
    dressed_energies,
    lz_sweep_operator,
    mean_phonon,
    optical_pump,
    spin_expectations,
    state_from_csv,
    state_to_csv,
    suggested_n_max,
    temperature_for_occupation,
    thermal_occupation,
    thermal_populations,
    thermal_state,
    uncoupled_energies,
)

H2L, L2H = SweepDirection.HIGH_TO_LOW, SweepDirection.LOW_TO_HIGH
probs = st.floats(0.0, 1.0)


def schedules(max_len=40):
    return st.builds(
        lambda table, phi: LZSchedule.from_values(table, phi=phi),
        st.lists(probs, min_size=1, max_size=max_len),
        st.floats(0.0, 2 * math.pi),
    )


# --- states -------------------------------------------------------------------------


def test_basis_layout():
    s = HybridState.fock(3, Spin.UP, 5)
    assert s.n_max == 5
    assert s.amplitudes.size == 12
    assert s.amplitudes[7] == 1.0
    assert s.amplitude(3, "up") == 1.0


def test_state_validation():
    with pytest.raises(DomainError):
        HybridState(np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        HybridState(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        HybridState.fock(4, Spin.DOWN, 3)
    with pytest.raises(ValueError):
        HybridState.fock(0, Spin.DOWN, 3).amplitudes[0] = 0.5


def test_csv_roundtrip():
    rng = np.random.default_rng(1)
    s = HybridState.from_amplitudes(rng.normal(size=8) + 1j * rng.normal(size=8))
    back = state_from_csv(state_to_csv(s))
    assert np.array_equal(back.amplitudes, s.amplitudes)


def test_observables():
    s = HybridState.from_amplitudes([0, 0, 1, 0, 0, 1j])  # |1,dn> + |2,up>
    assert mean_phonon(s) == pytest.approx(1.5)
    assert spin_expectations(s) == pytest.approx((0.5, 0.5))


# --- thermal ------------------------------------------------------------------------


@given(st.floats(1e-6, 10.0))
def test_occupation_inverse(T):
    nbar = thermal_occupation(T, REFERENCE_OMEGA_M)
    assert temperature_for_occupation(nbar, REFERENCE_OMEGA_M) == pytest.approx(T, rel=1e-10)


def test_occupation_matches_boltzmann():
    T = 1e-4
    x = boltzmann_factor(T, REFERENCE_OMEGA_M)
    assert thermal_occupation(T, REFERENCE_OMEGA_M) == pytest.approx(x / (1 - x), rel=1e-13)
    assert boltzmann_factor(0.0, REFERENCE_OMEGA_M) == 0.0


def test_suggested_n_max():
    # ln(1e-9)/ln(50/51) = 1046.49, so 1046 needed, ceil(1.25 * 1046) = 1308
    assert suggested_n_max(50 / 51) == 1308
    assert suggested_n_max(0.1) == 32
    assert suggested_n_max(0.0) == 32


def test_thermal_state_truncation():
    T = temperature_for_occupation(50.0, REFERENCE_OMEGA_M)
    pops = thermal_populations(T, REFERENCE_OMEGA_M)
    x = boltzmann_factor(T, REFERENCE_OMEGA_M)
    assert pops.n_max == suggested_n_max(x)
    assert mean_phonon(pops) == pytest.approx(50.0, abs=1e-6)
    with pytest.raises(TruncationError) as exc:
        thermal_populations(T, REFERENCE_OMEGA_M, n_max=100)
    assert exc.value.suggested_n_max == suggested_n_max(x)


def test_thermal_state_amplitudes():
    T = temperature_for_occupation(2.0, REFERENCE_OMEGA_M)
    s = thermal_state(T, REFERENCE_OMEGA_M, spin=Spin.UP)
    assert np.all(s.amplitudes[0::2] == 0)
    assert spin_expectations(s)[1] == pytest.approx(1.0)


def test_amplitude_variance_limits():
    a0sq = zero_point_motion(REFERENCE_RESONATOR) ** 2
    assert amplitude_variance(0.0, REFERENCE_RESONATOR) == a0sq
    T = CODATA2018.hbar * REFERENCE_OMEGA_M / (CODATA2018.k_B * 1e-3)
    classical = CODATA2018.k_B * T / (REFERENCE_RESONATOR.m_eff * REFERENCE_OMEGA_M**2)
    assert amplitude_variance(T, REFERENCE_RESONATOR) == pytest.approx(classical, rel=1e-3)
    # (1 + x) / (1 - x) form at moderate temperature
    T = 1e-4
    x = boltzmann_factor(T, REFERENCE_OMEGA_M)
    assert amplitude_variance(T, REFERENCE_RESONATOR) == pytest.approx(a0sq * (1 + x) / (1 - x), rel=1e-12)


# --- dressed states -----------------------------------------------------------------


def _jc_oracle(B, g0, n_max):
    """Brute-force Jaynes-Cummings spectrum, in units of hbar omega_m."""
    wa = 0.5 * CODATA2018.mu_B * B / CODATA2018.hbar / REFERENCE_OMEGA_M
    g = g0 / REFERENCE_OMEGA_M
    dim = 2 * (n_max + 1)
    H = np.zeros((dim, dim))
    for n in range(n_max + 1):
        H[2 * n, 2 * n] = n - 0.5 * wa
        H[2 * n + 1, 2 * n + 1] = n + 0.5 * wa
        if n + 1 <= n_max:
            H[2 * (n + 1), 2 * n + 1] = H[2 * n + 1, 2 * (n + 1)] = 0.5 * g * math.sqrt(n + 1)
    return H


def test_dressed_energies_match_jc_oracle():
    g0 = 2e4  # large enough to resolve the splitting in the oracle's units
    B_res = field_for_splitting(RB87_F1, REFERENCE_OMEGA_M)
    for B in (0.95 * B_res, B_res, 1.07 * B_res):
        for n in range(4):
            H = _jc_oracle(B, g0, 6)
            block = H[np.ix_([2 * (n + 1), 2 * n + 1], [2 * (n + 1), 2 * n + 1])]
            want = np.linalg.eigvalsh(block) * CODATA2018.hbar * REFERENCE_OMEGA_M
            lo, hi, _ = dressed_energies(B, n, RB87_F1, g0, REFERENCE_OMEGA_M)
            assert lo == pytest.approx(want[0], rel=1e-9)
            assert hi == pytest.approx(want[1], rel=1e-9)
            # block eigenvalues are eigenvalues of the whole ladder
            full = np.linalg.eigvalsh(H) * CODATA2018.hbar * REFERENCE_OMEGA_M
            assert np.min(np.abs(full - lo)) < 1e-9 * abs(lo)


def test_gap_at_resonance():
    g0 = 21.318686718899477
    for n in range(5):
        _, _, gap = dressed_energies(1e-4, n, RB87_F1, g0, REFERENCE_OMEGA_M)
        assert gap == pytest.approx(CODATA2018.hbar * g0 * math.sqrt(n + 1), rel=1e-6)


def test_uncoupled_crossing():
    B_res = field_for_splitting(RB87_F1, REFERENCE_OMEGA_M)
    dn, _ = uncoupled_energies(B_res, 3, RB87_F1, REFERENCE_OMEGA_M)
    _, up = uncoupled_energies(B_res, 2, RB87_F1, REFERENCE_OMEGA_M)
    assert dn == pytest.approx(up, rel=1e-12)
    lo, hi, gap = dressed_energies(np.array([0.5 * B_res, 1.5 * B_res]), 2, RB87_F1, 0.0, REFERENCE_OMEGA_M)
    assert gap == pytest.approx(0.0, abs=1e-40)
    assert np.all(hi >= lo)


# --- sweeps -------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(schedules(), st.integers(1, 60), st.sampled_from([H2L, L2H]))
def test_sweep_unitary(schedule, n_max, direction):
    U = lz_sweep_operator(schedule.with_direction(direction), n_max)
    assert np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(probs, min_size=1, max_size=30), st.integers(1, 40))
def test_directions_are_inverses(table, n_max):
    s = LZSchedule.from_values(table)
    U = lz_sweep_operator(s.with_direction(H2L), n_max)
    V = lz_sweep_operator(s.with_direction(L2H), n_max)
    assert np.allclose(V @ U, np.eye(U.shape[0]), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(schedules(), st.integers(1, 40))
def test_ground_state_invariant(schedule, n_max):
    U = lz_sweep_operator(schedule.with_direction(H2L), n_max)
    e0 = np.zeros(U.shape[0])
    e0[0] = 1.0
    assert np.array_equal(U @ e0, e0)


@settings(max_examples=40, deadline=None)
@given(schedules(), st.integers(1, 30), st.sampled_from([H2L, L2H]))
def test_population_variant_is_squared_modulus(schedule, n_max, direction):
    sched = schedule.with_direction(direction)
    U = lz_sweep_operator(sched, n_max)
    rng = np.random.default_rng(n_max)
    w = rng.random(2 * (n_max + 1))
    w[-1] = 0.0
    pops = PopulationState.from_weights(w)
    out = apply_sweep_populations(pops, sched)
    assert np.allclose(out.populations, (np.abs(U) ** 2) @ pops.populations, atol=1e-14)


def test_fock_transfer_rules():
    p = 0.3
    s = LZSchedule.constant(p)
    out = apply_sweep(HybridState.fock(4, Spin.DOWN, 8), s)
    assert out.amplitude(4, Spin.DOWN) == pytest.approx(math.sqrt(1 - p))
    assert out.amplitude(3, Spin.UP) == pytest.approx(math.sqrt(p))
    back = apply_sweep(HybridState.fock(3, Spin.UP, 8), s)
    assert abs(back.amplitude(4, Spin.DOWN)) == pytest.approx(math.sqrt(p))
    low = apply_sweep(HybridState.fock(3, Spin.UP, 8), s.with_direction(L2H))
    assert low.amplitude(4, Spin.DOWN) == pytest.approx(math.sqrt(p))


def test_phase_enters_diagonal():
    phi = 0.7
    s = LZSchedule.constant(0.4, phi=phi)
    out = apply_sweep(HybridState.fock(2, Spin.DOWN, 4), s)
    assert out.amplitude(2, Spin.DOWN) == pytest.approx(math.sqrt(0.6) * np.exp(-1j * phi))


def test_batched_application():
    s = LZSchedule.from_first_rung(0.5)
    rng = np.random.default_rng(3)
    batch = rng.normal(size=(5, 12)) + 1j * rng.normal(size=(5, 12))
    U = lz_sweep_operator(s, 5)
    assert np.allclose(apply_sweep_to_array(batch, s), batch @ U.T)


def test_leakage_guard():
    s = LZSchedule.constant(1.0)
    a = np.zeros(10, dtype=complex)
    a[2] = 1.0
    a[-1] = 1e-4  # weight 1e-8: warn
    with pytest.warns(LeakageWarning):
        apply_sweep(HybridState.from_amplitudes(a), s)
    a[-1] = 1e-2  # weight 1e-4: refuse
    with pytest.raises(TruncationError):
        apply_sweep(HybridState.from_amplitudes(a), s)
    a[-1] = 1e-6  # weight 1e-12: silent
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        apply_sweep(HybridState.from_amplitudes(a), s)


def test_schedule_constructors():
    assert LZSchedule.constant(0.5)(0) == 0.0
    assert LZSchedule.constant(0.5)(7) == 0.5
    s = LZSchedule.from_first_rung(0.5)
    assert np.allclose(s(np.arange(4)), [0, 0.5, 0.75, 0.875])
    t = LZSchedule.from_values([0.9, 0.1, 0.2])
    assert np.allclose(t.probabilities(5), [0, 0.1, 0.2, 0.2, 0.2, 0.2])
    with pytest.raises(DomainError):
        LZSchedule.constant(1.5)
    with pytest.raises(DomainError):
        LZSchedule(lambda n: 2.0 * np.ones(np.shape(n))).probabilities(3)


def test_optical_pump():
    pops = PopulationState.from_weights([0.1, 0.2, 0.3, 0.4])
    out = optical_pump(pops)
    assert np.allclose(out.populations, [0.3, 0.0, 0.7, 0.0])
