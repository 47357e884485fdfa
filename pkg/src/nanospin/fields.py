"""Analytic magnetic fields of a vibrating nanostring.

Three sources are modelled, each reduced to the on-axis scalar amplitudes seen
by atoms a distance ``r0`` above the string:

* a point dipole on the string (static ~ r0**-3, gradient ~ r0**-4),
* a long wire carrying a dc current (static ~ r0**-1, gradient ~ r0**-2),
* the same wire carrying an ac current, whose motion produces sidebands at
  ``omega_ac +/- omega_m``.

The models are first order in ``alpha / r0``. Amplitudes ``alpha >= r0 / 10``
raise a :class:`~nanospin.errors.ModelValidityWarning`; ``alpha >= r0`` is an
error. The displacement sign printed with the dipole and dc models (the field
drops for positive displacement) only fixes a phase, so all amplitudes here
are magnitudes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Tuple

from .constants import (
    CODATA2018,
    REFERENCE_OMEGA_M,
    ACCurrent,
    CouplingSource,
    DCCurrent,
    PermanentDipole,
    PhysicalConstants,
)
from .errors import DomainError, ModelValidityError, ModelValidityWarning, UnsupportedSourceError

VALIDITY_RATIO = 0.1


@dataclass(frozen=True)
class OscillatingFieldDecomposition:
    """Stationary offset, spin-flip gradient and oscillating components.

    Attributes
    ----------
    static_amplitude : float
        Stationary field (T) along the string's field axis.
    gradient : float
        Field gradient ``b`` (T/m) that converts displacement into drive.
    drive_terms : tuple of (float, float)
        ``(angular frequency in rad/s, amplitude in T)`` pairs.
    """

    static_amplitude: float
    gradient: float
    drive_terms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if self.gradient < 0 or self.static_amplitude < 0:
            raise DomainError("field amplitudes are magnitudes and must be >= 0")

    @property
    def drive_amplitude(self) -> float:
        """Amplitude of the component at the mechanical frequency (dc models)."""
        return self.drive_terms[0][1] if len(self.drive_terms) == 1 else self.drive_terms[1][1]


@dataclass(frozen=True)
class BiasSaturation:
    chi: float
    B_perp: float
    reduction_factor: float


def _check_geometry(r0: float, alpha: float) -> None:
    if not r0 > 0:
        raise DomainError(f"distance r0 must be positive, got {r0}")
    if not alpha >= 0:
        raise DomainError(f"amplitude alpha must be >= 0, got {alpha}")
    if alpha >= r0:
        raise ModelValidityError(f"alpha = {alpha} >= r0 = {r0}: first-order field model invalid")
    if alpha >= VALIDITY_RATIO * r0:
        warnings.warn(
            f"alpha/r0 = {alpha / r0:.3g} exceeds {VALIDITY_RATIO}; first-order model degrades",
            ModelValidityWarning,
            stacklevel=3,
        )


def dipole_field(
    mu_m: float,
    r0: float,
    alpha: float,
    omega_m: float = REFERENCE_OMEGA_M,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Point dipole along x, atoms at distance r0 along the vibration axis."""
    if not mu_m >= 0:
        raise DomainError("dipole moment must be >= 0")
    _check_geometry(r0, alpha)
    k = constants.mu_0 * mu_m / (4.0 * math.pi)
    static = k / r0**3
    b = 3.0 * k / r0**4
    return OscillatingFieldDecomposition(static, b, ((omega_m, b * alpha),))


def dc_wire_field(
    I: float,
    r0: float,
    alpha: float,
    omega_m: float = REFERENCE_OMEGA_M,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Infinite straight wire with current I, vibrating towards the atoms."""
    _check_geometry(r0, alpha)
    k = constants.mu_0 * abs(I) / (2.0 * math.pi)
    static = k / r0
    b = k / r0**2
    return OscillatingFieldDecomposition(static, b, ((omega_m, b * alpha),))


def ac_wire_sidebands(
    I: float,
    omega_ac: float,
    omega_m: float,
    r0: float,
    alpha: float,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Carrier plus motional sidebands of an ac-driven wire.

    ``gradient`` is the wire gradient ``mu_0 I / (2 pi r0**2)``; each sideband
    carries half of ``gradient * alpha``.
    """
    if not omega_ac > 0:
        raise DomainError("omega_ac must be positive")
    _check_geometry(r0, alpha)
    k = constants.mu_0 * abs(I) / (2.0 * math.pi)
    carrier = k / r0
    b = k / r0**2
    side = 0.5 * b * alpha
    terms = ((omega_ac, carrier), (omega_ac + omega_m, side), (omega_ac - omega_m, side))
    return OscillatingFieldDecomposition(0.0, b, terms)


def resonant_drive_frequency(omega_a: float, omega_m: float) -> float:
    """Drive frequency whose upper motional sideband hits the atomic resonance."""
    return omega_a - omega_m


def source_field(
    source: CouplingSource,
    r0: float,
    alpha: float,
    omega_m: float = REFERENCE_OMEGA_M,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Dispatch on the coupling source type."""
    if isinstance(source, PermanentDipole):
        return dipole_field(source.mu_m, r0, alpha, omega_m, constants)
    if isinstance(source, DCCurrent):
        return dc_wire_field(source.I, r0, alpha, omega_m, constants)
    if isinstance(source, ACCurrent):
        return ac_wire_sidebands(source.I, source.omega_ac, omega_m, r0, alpha, constants)
    raise DomainError(f"unknown coupling source {source!r}")


def bias_saturation(B0z: float, B_m0: float, chi: float) -> BiasSaturation:
    """Transverse drive left after the string's static field tilts the quantization axis.

    The static companion field ``chi * B_m0`` adds in quadrature to ``B0z``;
    only the component of the drive orthogonal to the resulting axis couples.
    """
    if not B0z > 0:
        raise DomainError(f"quantization field B0z must be positive, got {B0z}")
    if not B_m0 >= 0:
        raise DomainError("oscillating amplitude must be >= 0")
    if not chi > 0:
        raise DomainError("chi must be positive")
    if B_m0 == 0:
        return BiasSaturation(chi, 0.0, 1.0)
    reduction = B0z / math.hypot(B0z, chi * B_m0)
    return BiasSaturation(chi, B_m0 * reduction, reduction)


def chi_for_source(source: CouplingSource, r0: float, alpha: float) -> float:
    """Ratio of the stationary to the oscillating field of a source."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    if isinstance(source, PermanentDipole):
        return r0 / (3.0 * alpha)
    if isinstance(source, DCCurrent):
        return r0 / alpha
    raise UnsupportedSourceError(
        f"{getattr(source, 'kind', source)!s} has no stationary companion field"
    )
