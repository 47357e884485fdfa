"""Acceptance checks: published anchors plus oracle and property suites.

Each check returns a :class:`CriterionResult`; :func:`run_all` runs a
selection. Tolerances are fixed here and never loosened by callers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .chip import numeric_dipole_decomposition, numeric_wire_decomposition, trap_minimum
from .chip import z_trap_assembly, z_trap_search_box
from .constants import (
    CODATA2018,
    REFERENCE_DIPOLE_MOMENT,
    REFERENCE_OMEGA_M,
    REFERENCE_RESONATOR,
    RB87_F1,
    mechanical_decoherence_rate,
    zero_point_motion,
)
from .coupling import evaluate_coupling
from .fields import dc_wire_field, dipole_field
from .ladder import (
    LZSchedule,
    PopulationState,
    Spin,
    SweepDirection,
    amplitude_variance,
    lz_sweep_operator,
    temperature_for_occupation,
    thermal_populations,
)
from .lz import chirp_rate, lz_probability, rate_for_probability, tdse_transition_probability
from .protocols import (
    cooling_run,
    entangle_two_resonators,
    project_spin,
    sweep_temperature_drop,
    thermometry_flip_probabilities,
)

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail}"


def _rel(a, b):
    return abs(a - b) / abs(b)


def check_g0() -> CriterionResult:
    g0 = evaluate_coupling(REFERENCE_RESONATOR, 1e-6, 10e-9).g0
    err = _rel(g0, 21.0)
    return CriterionResult(1, "g0 anchor", err <= 0.05, f"g0 = {g0:.4f} 1/s (rel. dev {err:.3%})")


def check_decoherence() -> CriterionResult:
    targets = ((295.0, 39e6), (4.0, 520e3), (10e-3, 1.3e3))
    parts, ok = [], True
    for T, want in targets:
        got = mechanical_decoherence_rate(REFERENCE_RESONATOR.Q, T) / (2 * math.pi)
        err = _rel(got, want)
        ok &= err <= 0.05
        parts.append(f"{T:g} K: {got:.4g} Hz ({err:.2%})")
    return CriterionResult(2, "decoherence anchors", ok, "; ".join(parts))


def check_temperature_drop() -> CriterionResult:
    dT = sweep_temperature_drop(REFERENCE_OMEGA_M, 100_000, 1.0)
    err = _rel(dT, 4.1)
    return CriterionResult(3, "temperature drop per sweep", err <= 0.02, f"{dT:.4f} K ({err:.2%})")


def lz_oracle_grid(n_rates: int = 20, n_values=(1, 2, 5), p_range=(0.05, 0.95)):
    """(n, rate) grid for the TDSE comparison; rates set by first-rung probabilities."""
    g0 = evaluate_coupling(REFERENCE_RESONATOR, 1e-6, 10e-9).g0
    p1 = np.linspace(p_range[0], p_range[1], n_rates)
    rates = np.array([rate_for_probability(p, g0, RB87_F1) for p in p1])
    return g0, np.asarray(n_values), rates


def check_lz_oracle(n_rates: int = 20) -> CriterionResult:
    g0, n_values, rates = lz_oracle_grid(n_rates)
    nn, rr = np.meshgrid(n_values, rates, indexing="ij")
    analytic = np.array(
        [[lz_probability(n, g0, RB87_F1, r) for r in rates] for n in n_values]
    )
    t0 = time.perf_counter()
    tdse = tdse_transition_probability(np.sqrt(nn) * g0, chirp_rate(RB87_F1, rr))
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(tdse - analytic)))
    ok = err <= 1e-2 and elapsed < 60.0
    return CriterionResult(
        4,
        "LZ time-domain oracle",
        ok,
        f"max |dp| = {err:.2e} over {nn.size} points, {elapsed:.1f} s",
    )


def _random_schedule(rng, n_max):
    return LZSchedule.from_values(rng.uniform(0.0, 1.0, n_max + 1), phi=float(rng.uniform(0, 2 * np.pi)))


def _thermometry_cases(n_schedules: int, n_temps: int):
    rng = np.random.default_rng(SEED)
    nbar = np.geomspace(0.01, 50.0, n_temps)
    temps = [temperature_for_occupation(nb, REFERENCE_OMEGA_M) for nb in nbar]
    for _ in range(n_schedules):
        table = rng.uniform(0.0, 1.0, 4096)
        schedule = LZSchedule.from_values(table)
        for T in temps:
            yield T, schedule


def check_thermometry_ratio(n_schedules: int = 100, n_temps: int = 10) -> CriterionResult:
    worst = 0.0
    for T, schedule in _thermometry_cases(n_schedules, n_temps):
        res = thermometry_flip_probabilities(T, REFERENCE_OMEGA_M, schedule)
        expected = math.exp(-CODATA2018.hbar * REFERENCE_OMEGA_M / (CODATA2018.k_B * T))
        worst = max(worst, abs(res.ratio - expected))
    n = n_schedules * n_temps
    return CriterionResult(
        5, "thermometry ratio is schedule independent", worst <= 1e-9, f"max |ratio - x| = {worst:.2e} ({n} cases)"
    )


def check_flip_sums(n_schedules: int = 20, n_temps: int = 10) -> CriterionResult:
    worst = 0.0
    for T, schedule in _thermometry_cases(n_schedules, n_temps):
        res = thermometry_flip_probabilities(T, REFERENCE_OMEGA_M, schedule)
        worst = max(
            worst,
            abs(res.p_flip_down - res.p_flip_down_analytic),
            abs(res.p_flip_up - res.p_flip_up_analytic),
        )
    return CriterionResult(
        6, "operator vs analytic flip probabilities", worst <= 1e-9, f"max deviation {worst:.2e}"
    )


def check_cooling(steps: int = 120) -> CriterionResult:
    T0 = temperature_for_occupation(50.0, REFERENCE_OMEGA_M)
    initial = thermal_populations(T0, REFERENCE_OMEGA_M)
    P = initial.by_spin()[:, 0]
    n = np.arange(P.size)
    trace = cooling_run(initial, LZSchedule.constant(1.0), steps)
    closed = np.array([np.dot(P, np.maximum(n - k, 0)) for k in range(steps + 1)])
    closed_err = float(np.max(np.abs(trace.nbar - closed)))

    fock = PopulationState.fock(50, Spin.DOWN, 64)
    ftrace = cooling_run(fock, LZSchedule.constant(1.0), 60).nbar
    zero_at = int(np.argmax(ftrace == 0.0)) if np.any(ftrace == 0.0) else -1

    monotone = True
    for p1 in (1.0, 0.5, 0.1):
        nb = cooling_run(initial, LZSchedule.from_first_rung(p1), steps).nbar
        monotone &= bool(np.all(np.diff(nb) <= 1e-12))
    ok = closed_err <= 1e-9 and zero_at == 50 and monotone
    return CriterionResult(
        7,
        "cooling closed form",
        ok,
        f"closed-form dev {closed_err:.2e}; Fock 50 empty at step {zero_at}; monotone {monotone}",
    )


def check_unitarity(n_schedules: int = 50, n_max_cap: int = 512) -> CriterionResult:
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    ground_ok = True
    for _ in range(n_schedules):
        n_max = int(rng.integers(1, n_max_cap + 1))
        schedule = _random_schedule(rng, n_max)
        direction = SweepDirection.HIGH_TO_LOW if rng.random() < 0.5 else SweepDirection.LOW_TO_HIGH
        for d in (direction, SweepDirection.HIGH_TO_LOW):
            U = lz_sweep_operator(schedule.with_direction(d), n_max)
            worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))))
        U = lz_sweep_operator(schedule.with_direction(SweepDirection.HIGH_TO_LOW), n_max)
        e0 = np.zeros(U.shape[0])
        e0[0] = 1.0
        ground_ok &= bool(np.array_equal(U @ e0, e0))
    ok = worst < 1e-12 and ground_ok
    return CriterionResult(
        8, "sweep operator unitarity", ok, f"max |U^H U - I| = {worst:.2e}; |0,dn> invariant {ground_ok}"
    )


def _magnitudes(projected, expected: dict) -> float:
    amps = np.abs(projected.amplitudes)
    want = np.zeros_like(amps)
    for (i, j), v in expected.items():
        want[i, j] = v
    return float(np.max(np.abs(amps - want)))


def check_entanglement() -> CriterionResult:
    errs = []
    n1, n2 = 3, 2
    s = 1.0 / math.sqrt(2.0)
    st = entangle_two_resonators(n1, n2, 0.5, 0.5)
    down = project_spin(st, Spin.DOWN)
    up = project_spin(st, Spin.UP)
    errs.append(_magnitudes(down, {(n1 + 1, n2): s, (n1, n2 + 1): s}))
    errs.append(_magnitudes(up, {(n1, n2): s, (n1 + 1, n2 - 1): s}))
    ranks = (down.schmidt_rank(), up.schmidt_rank())

    g = entangle_two_resonators(0, 0, 0.5, 1.0)
    errs.append(abs(abs(g.amplitude(1, 0, Spin.DOWN)) - s))
    errs.append(abs(abs(g.amplitude(0, 1, Spin.DOWN)) - s))
    errs.append(abs(g.amplitude(0, 0, Spin.UP)))

    p2 = 0.6
    p1 = p2 / (1.0 + p2)  # p1 = (1 - p1) p2
    b = entangle_two_resonators(0, 0, p1, p2)
    balance = abs(abs(b.amplitude(1, 0, Spin.DOWN)) - abs(b.amplitude(0, 1, Spin.DOWN)))
    errs.append(balance)

    worst = max(errs)
    ok = worst <= 1e-12 and ranks == (2, 2)
    return CriterionResult(
        9, "entanglement algebra", ok, f"max magnitude error {worst:.2e}; Schmidt ranks {ranks}"
    )


def check_field_models() -> CriterionResult:
    r0, alpha = 1e-6, 10e-9
    pairs = (
        ("wire", numeric_wire_decomposition(1.0, r0, alpha), dc_wire_field(1.0, r0, alpha)),
        (
            "dipole",
            numeric_dipole_decomposition(REFERENCE_DIPOLE_MOMENT, r0, alpha),
            dipole_field(REFERENCE_DIPOLE_MOMENT, r0, alpha),
        ),
    )
    worst, parts = 0.0, []
    for name, num, ana in pairs:
        e_static = _rel(num.static_amplitude, ana.static_amplitude)
        e_grad = _rel(num.gradient, ana.gradient)
        worst = max(worst, e_static, e_grad)
        parts.append(f"{name}: static {e_static:.1e}, gradient {e_grad:.1e}")
    return CriterionResult(10, "finite-segment vs analytic fields", worst <= 1e-3, "; ".join(parts))


def check_chip_ordering(currents=(10.0, 6.0, 2.0), I_B: float = -5.0) -> CriterionResult:
    heights = []
    for I_Z in currents:
        heights.append(trap_minimum(z_trap_assembly(I_Z, I_B), z_trap_search_box()).height)
    ok = all(a > b for a, b in zip(heights, heights[1:]))
    detail = ", ".join(f"I_Z={I:g} A: {h * 1e3:.4f} mm" for I, h in zip(currents, heights))
    return CriterionResult(11, "Z-trap height ordering", ok, detail)


def check_amplitude_variance() -> CriterionResult:
    spec = REFERENCE_RESONATOR
    a0sq = zero_point_motion(spec) ** 2
    exact_zero = amplitude_variance(0.0, spec) == a0sq
    T = CODATA2018.hbar * spec.omega_m / (CODATA2018.k_B * 1e-3)
    classical = CODATA2018.k_B * T / (spec.m_eff * spec.omega_m**2)
    err = _rel(amplitude_variance(T, spec), classical)
    ok = exact_zero and err <= 1e-3
    return CriterionResult(
        12, "thermal amplitude limits", ok, f"T=0 exact {exact_zero}; equipartition dev {err:.2e}"
    )


CHECKS: dict[int, Callable[[], CriterionResult]] = {
    1: check_g0,
    2: check_decoherence,
    3: check_temperature_drop,
    4: check_lz_oracle,
    5: check_thermometry_ratio,
    6: check_flip_sums,
    7: check_cooling,
    8: check_unitarity,
    9: check_entanglement,
    10: check_field_models,
    11: check_chip_ordering,
    12: check_amplitude_variance,
}


def run_all(only: Optional[Iterable[int]] = None) -> list[CriterionResult]:
    numbers = sorted(CHECKS) if only is None else sorted(set(int(k) for k in only))
    out = []
    for k in numbers:
        if k not in CHECKS:
            raise KeyError(f"no acceptance criterion {k}")
        out.append(CHECKS[k]())
    return out
