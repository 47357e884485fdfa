"""Hybrid atom/nanostring coupling: fields, couplings, Landau-Zener ladders and protocols."""

from .constants import (
    CODATA2018,
    REFERENCE_RESONATOR,
    RB87_DEFAULT_PAIR,
    RB87_F1,
    RB87_F2,
    ACCurrent,
    AtomSpecies,
    DCCurrent,
    PermanentDipole,
    PhysicalConstants,
    ResonatorSpec,
    SpinPair,
)
from .coupling import evaluate_coupling, rabi_frequency, single_phonon_coupling
from .errors import (
    DomainError,
    NanospinError,
    NumericalError,
    SearchError,
    TruncationError,
)
from .ladder import HybridState, LZSchedule, PopulationState, Spin, SweepDirection
from .lz import SweepSpec, lz_probability, tdse_transition_probability

__version__ = "0.1.0"

__all__ = [
    "CODATA2018",
    "REFERENCE_RESONATOR",
    "RB87_DEFAULT_PAIR",
    "RB87_F1",
    "RB87_F2",
    "ACCurrent",
    "AtomSpecies",
    "DCCurrent",
    "PermanentDipole",
    "PhysicalConstants",
    "ResonatorSpec",
    "SpinPair",
    "evaluate_coupling",
    "rabi_frequency",
    "single_phonon_coupling",
    "DomainError",
    "NanospinError",
    "NumericalError",
    "SearchError",
    "TruncationError",
    "HybridState",
    "LZSchedule",
    "PopulationState",
    "Spin",
    "SweepDirection",
    "SweepSpec",
    "lz_probability",
    "tdse_transition_probability",
]
