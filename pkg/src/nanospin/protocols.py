"""Cooling, thermometry and two-resonator entanglement with Landau-Zener sweeps.

Cooling works on populations: one step is a sweep (population ``p(n)`` moves
from ``|n,dn>`` to ``|n-1,up>``) followed by ideal optical pumping that
returns every ``up`` population to ``dn`` at the same phonon number. Only one
spin is modelled per step; ensembles enter through
:func:`sweep_temperature_drop`.

Thermometry compares the flip probability of a spin prepared in ``dn`` with
one prepared in ``up`` after a high-to-low sweep over a thermal phonon state.
Because ``|0,dn>`` has no partner, the ratio is the Boltzmann factor whatever
the schedule.

The entanglement protocol uses the unitary sweep block of
:mod:`nanospin.ladder` with the low-to-high sign convention, so amplitudes on
the ``up -> dn`` branches are real and positive. The ``dn -> up`` branch then
carries a minus sign (unitarity forces one), which changes no magnitude and no
outcome probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .constants import CODATA2018, PhysicalConstants
from .errors import DomainError, TruncationError
from .ladder import (
    LZSchedule,
    PopulationState,
    Spin,
    SweepDirection,
    _spin,
    apply_sweep,
    apply_sweep_populations,
    apply_sweep_to_array,
    boltzmann_factor,
    mean_phonon,
    optical_pump,
    spin_expectations,
    suggested_n_max,
    temperature_for_occupation,
    thermal_state,
    TRUNCATION_TOL,
)

# --- cooling ------------------------------------------------------------------------


@dataclass(frozen=True)
class CoolingStep:
    step: int
    nbar: float
    p_down: float
    temperature: float  # K, NaN when omega_m is unknown


@dataclass(frozen=True)
class CoolingTrace:
    steps: tuple
    schedule: LZSchedule
    n_atoms: int = 1
    final_state: Optional[PopulationState] = None

    @property
    def nbar(self) -> np.ndarray:
        return np.array([s.nbar for s in self.steps])


def cooling_step(state: PopulationState, schedule: LZSchedule) -> PopulationState:
    """One sweep followed by one optical-pumping pulse.

    Input with spin-up weight is pumped to spin-down first, matching the
    initial optical pumping that precedes the sequence.
    """
    state = optical_pump(state)
    return optical_pump(apply_sweep_populations(state, schedule))


def cooling_run(
    initial: PopulationState,
    schedule: LZSchedule,
    steps: int,
    omega_m: Optional[float] = None,
    n_atoms: int = 1,
    constants: PhysicalConstants = CODATA2018,
) -> CoolingTrace:
    """Iterate :func:`cooling_step`, recording the mean phonon number after each step."""
    if steps < 0:
        raise DomainError("number of steps must be >= 0")

    def record(k, st):
        nbar = mean_phonon(st)
        temp = (
            temperature_for_occupation(nbar, omega_m, constants)
            if omega_m is not None
            else float("nan")
        )
        return CoolingStep(k, nbar, spin_expectations(st)[0], temp)

    state = initial
    trace = [record(0, state)]
    for k in range(1, steps + 1):
        state = cooling_step(state, schedule)
        trace.append(record(k, state))
    return CoolingTrace(tuple(trace), schedule, n_atoms, state)


def sweep_temperature_drop(
    omega_m: float, N: int, p: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Mode-temperature drop p N hbar omega_m / k_B for one sweep of N atoms (K).

    Each flipped spin removes one phonon, so a sweep removes ``p N`` quanta.
    """
    if N < 1:
        raise DomainError("need at least one atom")
    if not 0 <= p <= 1:
        raise DomainError("probability must lie in [0, 1]")
    return p * N * constants.hbar * omega_m / constants.k_B


# --- thermometry --------------------------------------------------------------------


@dataclass(frozen=True)
class ThermometryResult:
    """Spin-flip probabilities for spins prepared in down and in up.

    ``p_flip_down`` is the flip probability of a spin that started in ``dn``.
    The ``*_analytic`` fields come from the closed-form thermal sums at the
    same truncation.
    """

    T: float
    x: float
    n_max: int
    p_flip_down: float
    p_flip_up: float
    p_flip_down_analytic: float
    p_flip_up_analytic: float

    @property
    def ratio(self) -> float:
        return self.p_flip_down / self.p_flip_up if self.p_flip_up > 0 else float("nan")


def analytic_flip_probabilities(x: float, p: np.ndarray) -> tuple[float, float]:
    """Thermal sums with rung probabilities ``p[0..n_max]`` truncated at ``n_max``.

    Starting down: sum_{n>=1} p(n) P(n). Starting up: sum_{n>=0} p(n+1) P(n),
    where the top up state has no partner inside the truncation.
    """
    n_max = p.size - 1
    n = np.arange(n_max + 1)
    P = (1.0 - x) * x**n
    P = P / P.sum()
    down = float(np.dot(p[1:], P[1:]))
    up = float(np.dot(p[1:], P[:-1]))
    return down, up


def thermometry_flip_probabilities(
    T: float,
    omega_m: float,
    schedule: LZSchedule,
    n_max: Optional[int] = None,
    constants: PhysicalConstants = CODATA2018,
) -> ThermometryResult:
    """Flip probabilities from sweeping thermal states, by state simulation and by sums."""
    if schedule.direction is not SweepDirection.HIGH_TO_LOW:
        raise DomainError("thermometry is defined for high-to-low sweeps")
    x = boltzmann_factor(T, omega_m, constants)
    if n_max is None:
        n_max = suggested_n_max(x, TRUNCATION_TOL)
    from_down = apply_sweep(thermal_state(T, omega_m, n_max, Spin.DOWN, constants=constants), schedule)
    from_up = apply_sweep(thermal_state(T, omega_m, n_max, Spin.UP, constants=constants), schedule)
    p_down = spin_expectations(from_down)[1]
    p_up = spin_expectations(from_up)[0]
    a_down, a_up = analytic_flip_probabilities(x, schedule.probabilities(n_max))
    return ThermometryResult(T, x, n_max, p_down, p_up, a_down, a_up)


def temperature_from_ratio(
    ratio: float, omega_m: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Invert ratio = exp(-hbar omega_m / k_B T)."""
    if not 0 <= ratio < 1:
        raise DomainError(f"flip-probability ratio must lie in (0, 1), got {ratio}")
    if ratio == 0:
        return 0.0
    return constants.hbar * omega_m / (constants.k_B * math.log(1.0 / ratio))


# --- entanglement -------------------------------------------------------------------


@dataclass(frozen=True)
class TwoModeState:
    """Amplitudes over |n1, n2, s> stored with shape (n_max1 + 1, n_max2 + 1, 2)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 3 or a.shape[2] != 2:
            raise DomainError("expected amplitudes of shape (n1 + 1, n2 + 1, 2)")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"two-mode state not normalized ({norm!r})")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def n_max(self) -> tuple[int, int]:
        return self.amplitudes.shape[0] - 1, self.amplitudes.shape[1] - 1

    @classmethod
    def fock(cls, n1: int, n2: int, spin, n_max1: int, n_max2: int) -> "TwoModeState":
        if not (0 <= n1 <= n_max1 and 0 <= n2 <= n_max2):
            raise DomainError("Fock numbers outside the truncation")
        a = np.zeros((n_max1 + 1, n_max2 + 1, 2), dtype=complex)
        a[n1, n2, _spin(spin)] = 1.0
        return cls(a)

    def amplitude(self, n1: int, n2: int, spin) -> complex:
        return complex(self.amplitudes[n1, n2, _spin(spin)])

    def nonzero(self, tol: float = 1e-15):
        """List of ``(n1, n2, spin, amplitude)`` with |amplitude| > tol."""
        idx = np.argwhere(np.abs(self.amplitudes) > tol)
        return [
            (int(i), int(j), Spin(int(s)), complex(self.amplitudes[i, j, s])) for i, j, s in idx
        ]


@dataclass(frozen=True)
class ProjectedResonators:
    """Normalized resonator-pair state after a spin measurement."""

    outcome: Spin
    probability: float
    amplitudes: np.ndarray  # shape (n_max1 + 1, n_max2 + 1)

    def schmidt_coefficients(self) -> np.ndarray:
        return np.linalg.svd(self.amplitudes, compute_uv=False)

    def schmidt_rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.schmidt_coefficients() > tol))


def sweep_mode(state: TwoModeState, mode: int, schedule: LZSchedule) -> TwoModeState:
    """Apply a sweep between the spin and resonator ``mode`` (0 or 1)."""
    a = state.amplitudes
    if mode == 0:
        moved = np.moveaxis(a, 0, 1)  # (n2, n1, s): target mode next to spin
    elif mode == 1:
        moved = a
    else:
        raise DomainError("mode must be 0 or 1")
    top = float(np.sum(np.abs(moved[:, -1, 1]) ** 2))
    if top > 1e-9:
        raise TruncationError(f"resonator {mode + 1} truncation edge holds {top:.3g} of the state")
    flat = moved.reshape(moved.shape[0], -1)
    out = apply_sweep_to_array(flat, schedule).reshape(moved.shape)
    if mode == 0:
        out = np.moveaxis(out, 1, 0)
    return TwoModeState(out / np.sqrt(np.sum(np.abs(out) ** 2)))


def _as_schedule(p: Union[float, LZSchedule], phi: float) -> LZSchedule:
    if isinstance(p, LZSchedule):
        return p.with_direction(SweepDirection.LOW_TO_HIGH)
    return LZSchedule.constant(float(p), phi=phi, direction=SweepDirection.LOW_TO_HIGH)


def entangle_two_resonators(
    n1: int,
    n2: int,
    p1: Union[float, LZSchedule],
    p2: Union[float, LZSchedule],
    initial_spin=Spin.UP,
    n_max1: Optional[int] = None,
    n_max2: Optional[int] = None,
    phi: float = 0.0,
) -> TwoModeState:
    """Sweep the shared spin across resonator 1, then across resonator 2.

    Float ``p1``/``p2`` mean the same transfer probability on every rung,
    except that ``|0,dn>`` can never flip.
    """
    if n1 < 0 or n2 < 0:
        raise DomainError("phonon numbers must be >= 0")
    n_max1 = n1 + 2 if n_max1 is None else n_max1
    n_max2 = n2 + 2 if n_max2 is None else n_max2
    state = TwoModeState.fock(n1, n2, initial_spin, n_max1, n_max2)
    state = sweep_mode(state, 0, _as_schedule(p1, phi))
    return sweep_mode(state, 1, _as_schedule(p2, phi))


def project_spin(state: TwoModeState, outcome) -> ProjectedResonators:
    outcome = _spin(outcome)
    block = state.amplitudes[:, :, outcome]
    prob = float(np.sum(np.abs(block) ** 2))
    if prob == 0:
        return ProjectedResonators(outcome, 0.0, np.zeros_like(block))
    return ProjectedResonators(outcome, prob, block / math.sqrt(prob))
