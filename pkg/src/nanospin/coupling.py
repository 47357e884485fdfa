"""Zeeman splitting, magnetic-dipole Rabi coupling and the phonon coupling g0.

All rates are angular (rad/s). Magnitude formulas use ``|g_F|``; see
:mod:`nanospin.constants`.

Only Δm = ±1 transitions inside one hyperfine manifold are modelled. A Δm = 0
request belongs to the hyperfine-changing channel and raises
:class:`~nanospin.errors.OutOfScopeTransitionError` instead of silently
returning zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    CODATA2018,
    RB87_DEFAULT_PAIR,
    RB87_F1,
    ACCurrent,
    AtomSpecies,
    PhysicalConstants,
    ResonatorSpec,
    SpinPair,
    zero_point_motion,
)
from .errors import DomainError, ForbiddenTransitionError, OutOfScopeTransitionError
from .fields import bias_saturation, source_field


@dataclass(frozen=True)
class CouplingResult:
    omega_a: float
    rabi: float
    g0: float
    g_eff: float
    matrix_element: float
    theta: float
    n_atoms: int = 1


def zeeman_splitting(species: AtomSpecies, B, constants: PhysicalConstants = CODATA2018):
    """Adjacent-sublevel splitting |g_F| mu_B B / hbar (weak-field, linear)."""
    B_arr = np.asarray(B, dtype=float)
    if np.any(B_arr < 0):
        raise DomainError("field magnitude must be >= 0")
    out = species.abs_g_F * constants.mu_B * B_arr / constants.hbar
    return float(out) if out.ndim == 0 else out


def field_for_splitting(
    species: AtomSpecies, omega_a: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Field (T) at which the adjacent-sublevel splitting equals ``omega_a``."""
    if not omega_a >= 0:
        raise DomainError("splitting must be >= 0")
    return omega_a * constants.hbar / (species.abs_g_F * constants.mu_B)


def matrix_element(F: float, m: float, m_prime: float) -> float:
    """sqrt(F(F+1) - m m') for |m - m'| = 1; zero past the stretched state."""
    dm = abs(m - m_prime)
    if dm < 1e-12:
        raise OutOfScopeTransitionError("Δm = 0 transitions change F and are not modelled")
    if abs(dm - 1.0) > 1e-12:
        raise ForbiddenTransitionError(f"|Δm| = {dm}: only Δm = ±1 couples")
    value = F * (F + 1.0) - m * m_prime
    # m' = ±(F+1) lands exactly on zero; clip rounding noise
    return math.sqrt(value) if value > 1e-12 else 0.0


def rabi_frequency(
    species: AtomSpecies,
    pair: SpinPair,
    B_m0: float,
    theta: float = math.pi / 2,
    constants: PhysicalConstants = CODATA2018,
) -> float:
    """Rabi rate Omega for a transverse drive of amplitude ``B_m0 sin(theta)``.

    hbar Omega / 2 = |g_F| mu_B B_m0 sin(theta) / 4 * sqrt(F(F+1) - m m').
    """
    pair.check(species)
    if not B_m0 >= 0:
        raise DomainError("drive amplitude must be >= 0")
    me = matrix_element(species.F, pair.m_down, pair.m_up)
    transverse = B_m0 * abs(math.sin(theta))
    return species.abs_g_F * constants.mu_B * transverse * me / (2.0 * constants.hbar)


def single_phonon_coupling(
    species: AtomSpecies,
    pair: SpinPair,
    gradient: float,
    spec: ResonatorSpec,
    constants: PhysicalConstants = CODATA2018,
) -> float:
    """Single-atom, single-phonon coupling g0 = |g_F| mu_B b alpha0 sqrt(...) / (2 hbar)."""
    pair.check(species)
    if not gradient >= 0:
        raise DomainError("gradient must be >= 0")
    me = matrix_element(species.F, pair.m_down, pair.m_up)
    alpha0 = zero_point_motion(spec, constants)
    return species.abs_g_F * constants.mu_B * gradient * alpha0 * me / (2.0 * constants.hbar)


def collective_coupling(g0: float, N: int) -> float:
    """sqrt(N) enhancement of an N-atom ensemble."""
    if int(N) != N or N < 1:
        raise DomainError(f"atom number must be a positive integer, got {N}")
    return math.sqrt(N) * g0


def omega_max(rabi: float, B0z: float, B_m0: float, chi: float) -> float:
    """Rabi rate after the tilt of the quantization axis by the companion field."""
    if not rabi >= 0:
        raise DomainError("rabi must be >= 0")
    return rabi * bias_saturation(B0z, B_m0, chi).reduction_factor


def omega_max_ceiling(rabi: float, B0z: float, B_m0: float, chi: float) -> float:
    """Large-``B_m0`` asymptote Omega B0z / (chi B_m0) of :func:`omega_max`."""
    if not (B_m0 > 0 and chi > 0 and B0z > 0):
        raise DomainError("B0z, B_m0 and chi must be positive")
    return rabi * B0z / (chi * B_m0)


def effective_gradient(spec: ResonatorSpec, r0: float, constants: PhysicalConstants = CODATA2018):
    """Gradient that multiplies the displacement operator for a source.

    For the ac wire only one motional sideband is resonant, and it carries half
    the wire gradient.
    """
    decomposition = source_field(spec.source, r0, 0.0, spec.omega_m, constants)
    if isinstance(spec.source, ACCurrent):
        return 0.5 * decomposition.gradient
    return decomposition.gradient


def evaluate_coupling(
    spec: ResonatorSpec,
    r0: float,
    alpha: float,
    species: AtomSpecies = RB87_F1,
    pair: SpinPair = RB87_DEFAULT_PAIR,
    n_atoms: int = 1,
    theta: float = math.pi / 2,
    constants: PhysicalConstants = CODATA2018,
) -> CouplingResult:
    """Coupling summary at resonance (omega_a = omega_m) for a resonator preset."""
    decomposition = source_field(spec.source, r0, alpha, spec.omega_m, constants)
    rabi = rabi_frequency(species, pair, decomposition.drive_amplitude, theta, constants)
    g0 = single_phonon_coupling(
        species, pair, effective_gradient(spec, r0, constants), spec, constants
    )
    return CouplingResult(
        omega_a=spec.omega_m,
        rabi=rabi,
        g0=g0,
        g_eff=collective_coupling(g0, n_atoms),
        matrix_element=matrix_element(species.F, pair.m_down, pair.m_up),
        theta=theta,
        n_atoms=int(n_atoms),
    )
