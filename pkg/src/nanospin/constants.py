"""Physical constants, atomic species and nanostring resonator specifications.

Constants are the CODATA 2018 recommended values in SI units. Species carry a
signed Landé factor ``g_F``; every coupling formula in the package uses its
magnitude ``|g_F|`` so that rates come out non-negative regardless of the
sign convention of the hyperfine manifold.

Presets can also be read from plain ``key = value`` text files (SI units,
``#`` starts a comment)::

    label = Rb87
    F = 1
    g_F = -0.5
    omega_m = 5340707.511102648
    m_eff = 8.4e-13
    Q = 1.6e5
    source = dc-current
    I = 1.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

from .errors import DomainError, ForbiddenTransitionError, OutOfScopeTransitionError


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (SI)."""

    mu_B: float = 9.2740100783e-24  # J/T
    mu_0: float = 1.25663706212e-6  # T m / A
    hbar: float = 1.054571817e-34  # J s
    k_B: float = 1.380649e-23  # J/K

    def __post_init__(self):
        for name in ("mu_B", "mu_0", "hbar", "k_B"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar


CODATA2018 = PhysicalConstants()


def _is_half_integer(value: float) -> bool:
    return abs(2.0 * value - round(2.0 * value)) < 1e-12


@dataclass(frozen=True)
class AtomSpecies:
    """Hyperfine ground-state manifold of an alkali atom.

    Parameters
    ----------
    F : float
        Total angular momentum quantum number (integer or half-integer).
    g_F : float
        Signed Landé factor. Only ``abs(g_F)`` enters coupling magnitudes.
    label : str
        Human readable name.
    """

    F: float
    g_F: float
    label: str = ""

    def __post_init__(self):
        if not self.F > 0 or not _is_half_integer(self.F):
            raise DomainError(f"F must be a positive (half-)integer, got {self.F}")
        if self.g_F == 0 or not math.isfinite(self.g_F):
            raise DomainError("g_F must be finite and non-zero")

    @property
    def abs_g_F(self) -> float:
        return abs(self.g_F)

    def is_trappable(self, m_F: float) -> bool:
        """Low-field seeking states (m_F g_F > 0) can sit in a field minimum."""
        return m_F * self.g_F > 0


RB87_F1 = AtomSpecies(F=1, g_F=-0.5, label="Rb87 F=1")
RB87_F2 = AtomSpecies(F=2, g_F=0.5, label="Rb87 F=2")

SPECIES_PRESETS = {"rb87-f1": RB87_F1, "rb87-f2": RB87_F2}


@dataclass(frozen=True)
class SpinPair:
    """The two Zeeman sublevels used as the effective spin-1/2.

    ``m_down`` labels ``|down>`` and ``m_up`` labels ``|up>``. Validation
    against ``F`` happens in :meth:`check`, since the pair itself does not
    know which manifold it belongs to.
    """

    m_up: float
    m_down: float

    def check(self, species: AtomSpecies) -> "SpinPair":
        F = species.F
        for m in (self.m_up, self.m_down):
            if abs(m) > F + 1e-12 or not _is_half_integer(m):
                raise DomainError(f"m_F = {m} is not a sublevel of F = {F}")
            if not _is_half_integer(m - F):
                raise DomainError(f"m_F = {m} and F = {F} differ by a non-integer")
        dm = abs(self.m_up - self.m_down)
        if dm < 1e-12:
            raise OutOfScopeTransitionError(
                "Δm = 0 couples only through the hyperfine (ΔF) channel, which is not modelled"
            )
        if abs(dm - 1) > 1e-12:
            raise ForbiddenTransitionError(f"|Δm| = {dm}; only Δm = ±1 is driven")
        return self


# |F=1, m=-1> is low-field seeking (g_F < 0) and is the magnetically trapped state.
RB87_DEFAULT_PAIR = SpinPair(m_up=0, m_down=-1)


@dataclass(frozen=True)
class PermanentDipole:
    """Magnetic point dipole deposited on the string."""

    mu_m: float  # J/T
    kind = "permanent-dipole"

    def __post_init__(self):
        if not self.mu_m >= 0:
            raise DomainError("dipole moment must be non-negative")


@dataclass(frozen=True)
class DCCurrent:
    """Direct current through a conducting string."""

    I: float  # A
    kind = "dc-current"


@dataclass(frozen=True)
class ACCurrent:
    """Alternating current through the string at ``omega_ac``."""

    I: float  # A
    omega_ac: float  # rad/s
    kind = "ac-current"

    def __post_init__(self):
        if not self.omega_ac > 0:
            raise DomainError("omega_ac must be positive")


CouplingSource = Union[PermanentDipole, DCCurrent, ACCurrent]


@dataclass(frozen=True)
class ResonatorSpec:
    """Fundamental flexural mode of a nanostring.

    Parameters
    ----------
    omega_m : float
        Angular mechanical frequency (rad/s).
    m_eff : float
        Effective modal mass (kg).
    Q : float
        Mechanical quality factor.
    source : CouplingSource
        How the string produces its magnetic field.
    """

    omega_m: float
    m_eff: float
    Q: float
    source: CouplingSource = field(default_factory=lambda: DCCurrent(I=1.0))

    def __post_init__(self):
        for name in ("omega_m", "m_eff", "Q"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")


REFERENCE_OMEGA_M = 2.0 * math.pi * 850e3
REFERENCE_RESONATOR = ResonatorSpec(omega_m=REFERENCE_OMEGA_M, m_eff=8.4e-13, Q=1.6e5)
REFERENCE_DIPOLE_MOMENT = 6.7e-11  # J/T, i.e. 0.067 nJ/T

RESONATOR_PRESETS = {
    "string-dc": REFERENCE_RESONATOR,
    "string-dipole": ResonatorSpec(
        REFERENCE_OMEGA_M, 8.4e-13, 1.6e5, PermanentDipole(mu_m=REFERENCE_DIPOLE_MOMENT)
    ),
    "string-ac": ResonatorSpec(
        REFERENCE_OMEGA_M, 8.4e-13, 1.6e5, ACCurrent(I=1.0, omega_ac=2.0 * math.pi * 10e6)
    ),
}

ROOM_TEMPERATURE = 295.0  # K


def zero_point_motion(spec: ResonatorSpec, constants: PhysicalConstants = CODATA2018) -> float:
    """Ground-state rms displacement sqrt(hbar / (2 m_eff omega_m)) in metres."""
    if not isinstance(spec, ResonatorSpec):
        raise DomainError("expected a ResonatorSpec")
    return math.sqrt(constants.hbar / (2.0 * spec.m_eff * spec.omega_m))


def mechanical_decoherence_rate(
    Q: float, T_s: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Thermal decoherence rate k_B T_s / (hbar Q) in rad/s."""
    if not Q > 0:
        raise DomainError(f"Q must be positive, got {Q}")
    if not T_s >= 0:
        raise DomainError(f"substrate temperature must be >= 0, got {T_s}")
    return constants.k_B * T_s / (constants.hbar * Q)


# --- key-value configuration files -------------------------------------------------


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DomainError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path: Union[str, Path]) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())


def _number(mapping: Mapping[str, str], key: str, default=None) -> float:
    if key not in mapping:
        if default is None:
            raise DomainError(f"missing key {key!r}")
        return default
    try:
        return float(Fraction(str(mapping[key]).strip()))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"{key}: not a number: {mapping[key]!r}") from exc


def species_from_config(mapping: Mapping[str, str]) -> AtomSpecies:
    return AtomSpecies(
        F=_number(mapping, "F"),
        g_F=_number(mapping, "g_F"),
        label=str(mapping.get("label", "")),
    )


def source_from_config(mapping: Mapping[str, str]) -> CouplingSource:
    kind = mapping.get("source", "dc-current")
    if kind == "permanent-dipole":
        return PermanentDipole(mu_m=_number(mapping, "mu_m"))
    if kind == "dc-current":
        return DCCurrent(I=_number(mapping, "I"))
    if kind == "ac-current":
        return ACCurrent(I=_number(mapping, "I"), omega_ac=_number(mapping, "omega_ac"))
    raise DomainError(f"unknown source {kind!r}")


def resonator_from_config(mapping: Mapping[str, str]) -> ResonatorSpec:
    return ResonatorSpec(
        omega_m=_number(mapping, "omega_m"),
        m_eff=_number(mapping, "m_eff"),
        Q=_number(mapping, "Q"),
        source=source_from_config(mapping),
    )
