"""Truncated phonon x spin state space |n, s>.

Basis order is ``[|0,dn>, |0,up>, |1,dn>, |1,up>, ...]``, i.e. index ``2 n + s``
with ``s = 0`` for down and ``s = 1`` for up.

A magnetic-field sweep through the avoided crossings of the Jaynes-Cummings
ladder couples ``|n,dn>`` with ``|n-1,up>`` (rung ``n``, gap ``sqrt(n) g0``).
Each rung is a 2x2 unitary block with transfer probability ``p(n)``; the
ground state ``|0,dn>`` has no partner and is left alone, which is the
asymmetry the thermometer relies on. The block is

    |n,dn>   -> sqrt(1-p) e^{-i phi} |n,dn>  + sqrt(p) |n-1,up>
    |n-1,up> -> sqrt(1-p) e^{+i phi} |n-1,up> - sqrt(p) |n,dn>

for high-to-low sweeps. Low-to-high sweeps put the positive sign on the
``up -> dn`` branch instead; with ``phi = 0`` the two are mutual inverses.
The symmetric ``[[c, s], [s, c]]`` block seen in some write-ups is not unitary;
it only describes the population transfer, which is what
:func:`apply_sweep_populations` implements.

The top state ``|n_max,up>`` would pair with ``|n_max+1,dn>`` outside the
truncation and is mapped to itself. Occupation above ``LEAKAGE_WARN`` there
emits :class:`~nanospin.errors.LeakageWarning`; above ``LEAKAGE_ERROR`` the
sweep refuses with :class:`~nanospin.errors.TruncationError`.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .constants import (
    CODATA2018,
    AtomSpecies,
    PhysicalConstants,
    ResonatorSpec,
    SpinPair,
    zero_point_motion,
)
from .coupling import zeeman_splitting
from .errors import DomainError, LeakageWarning, TruncationError

NORM_TOL = 1e-12
TRUNCATION_TOL = 1e-9
MIN_N_MAX = 32
HEADROOM = 1.25
LEAKAGE_WARN = 1e-9
LEAKAGE_ERROR = 1e-6


class Spin(IntEnum):
    DOWN = 0
    UP = 1


class SweepDirection(str, Enum):
    HIGH_TO_LOW = "high-to-low"
    LOW_TO_HIGH = "low-to-high"


def _spin(value) -> Spin:
    if isinstance(value, str):
        try:
            return {"down": Spin.DOWN, "dn": Spin.DOWN, "up": Spin.UP}[value.lower()]
        except KeyError:
            raise DomainError(f"unknown spin label {value!r}") from None
    return Spin(value)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


# --- states -------------------------------------------------------------------------


@dataclass(frozen=True)
class HybridState:
    """Normalized complex amplitudes over the |n, s> basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 2 or a.size % 2:
            raise DomainError("amplitude vector must have even length 2 (n_max + 1)")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state not normalized: <psi|psi> = {norm!r}")
        object.__setattr__(self, "amplitudes", _readonly(a))

    @property
    def n_max(self) -> int:
        return self.amplitudes.size // 2 - 1

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "HybridState":
        a = np.asarray(amplitudes, dtype=complex)
        if normalize:
            norm = np.linalg.norm(a)
            if norm == 0:
                raise DomainError("cannot normalize the zero vector")
            a = a / norm
        return cls(a)

    @classmethod
    def fock(cls, n: int, spin, n_max: int) -> "HybridState":
        if not 0 <= n <= n_max:
            raise DomainError(f"phonon number {n} outside 0..{n_max}")
        a = np.zeros(2 * (n_max + 1), dtype=complex)
        a[2 * n + _spin(spin)] = 1.0
        return cls(a)

    def populations(self) -> "PopulationState":
        return PopulationState(np.abs(self.amplitudes) ** 2)

    def amplitude(self, n: int, spin) -> complex:
        return complex(self.amplitudes[2 * n + _spin(spin)])


@dataclass(frozen=True)
class PopulationState:
    """Incoherent probabilities over the same basis as :class:`HybridState`."""

    populations: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.ndim != 1 or p.size < 2 or p.size % 2:
            raise DomainError("population vector must have even length 2 (n_max + 1)")
        if np.any(p < -NORM_TOL):
            raise DomainError("populations must be non-negative")
        p = np.clip(p, 0.0, None)
        total = float(p.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"populations sum to {total!r}, not 1")
        object.__setattr__(self, "populations", _readonly(p))

    @property
    def n_max(self) -> int:
        return self.populations.size // 2 - 1

    @classmethod
    def from_weights(cls, weights) -> "PopulationState":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def fock(cls, n: int, spin, n_max: int) -> "PopulationState":
        return HybridState.fock(n, spin, n_max).populations()

    def by_spin(self) -> np.ndarray:
        """Populations reshaped to ``(n_max + 1, 2)``."""
        return self.populations.reshape(-1, 2)


AnyState = Union[HybridState, PopulationState]


def _weights(state: AnyState) -> np.ndarray:
    if isinstance(state, HybridState):
        return np.abs(state.amplitudes) ** 2
    if isinstance(state, PopulationState):
        return state.populations
    raise DomainError(f"expected a HybridState or PopulationState, got {type(state).__name__}")


def mean_phonon(state: AnyState) -> float:
    w = _weights(state).reshape(-1, 2).sum(axis=1)
    return float(np.dot(np.arange(w.size), w))


def spin_expectations(state: AnyState) -> tuple[float, float]:
    """Expectation values of the spin-down and spin-up projectors."""
    w = _weights(state).reshape(-1, 2)
    return float(w[:, 0].sum()), float(w[:, 1].sum())


def state_to_csv(state: HybridState) -> str:
    buf = io.StringIO()
    buf.write("n,s,re,im\n")
    for idx, amp in enumerate(state.amplitudes):
        n, s = divmod(idx, 2)
        buf.write(f"{n},{'up' if s else 'down'},{amp.real:.17g},{amp.imag:.17g}\n")
    return buf.getvalue()


def state_from_csv(text: str) -> HybridState:
    rows = [line.split(",") for line in text.strip().splitlines()[1:] if line.strip()]
    n_max = max(int(r[0]) for r in rows)
    a = np.zeros(2 * (n_max + 1), dtype=complex)
    for n, s, re, im in rows:
        a[2 * int(n) + _spin(s)] = complex(float(re), float(im))
    return HybridState(a)


# --- thermal states -----------------------------------------------------------------


def boltzmann_factor(T: float, omega_m: float, constants: PhysicalConstants = CODATA2018) -> float:
    """x = exp(-hbar omega_m / k_B T); zero at T = 0."""
    if not T >= 0:
        raise DomainError(f"temperature must be >= 0, got {T}")
    if not omega_m > 0:
        raise DomainError("omega_m must be positive")
    if T == 0:
        return 0.0
    return math.exp(-constants.hbar * omega_m / (constants.k_B * T))


def thermal_occupation(T: float, omega_m: float, constants: PhysicalConstants = CODATA2018) -> float:
    """Bose-Einstein mean occupation x / (1 - x)."""
    if T == 0:
        return 0.0
    y = constants.hbar * omega_m / (constants.k_B * T)
    return 1.0 / math.expm1(y)


def temperature_for_occupation(
    nbar: float, omega_m: float, constants: PhysicalConstants = CODATA2018
) -> float:
    """Inverse of :func:`thermal_occupation`."""
    if not nbar >= 0:
        raise DomainError("mean occupation must be >= 0")
    if nbar == 0:
        return 0.0
    return constants.hbar * omega_m / (constants.k_B * math.log1p(1.0 / nbar))


def suggested_n_max(x: float, tol: float = TRUNCATION_TOL) -> int:
    """Default truncation for a thermal state with Boltzmann factor ``x``.

    Smallest n whose cumulative weight ``1 - x**(n+1)`` reaches ``1 - tol``,
    with 25 % headroom and a floor of 32.
    """
    if x <= 0:
        return MIN_N_MAX
    if x >= 1:
        raise DomainError("Boltzmann factor must be < 1")
    n_needed = max(math.ceil(math.log(tol) / math.log(x)) - 1, 0)
    return max(MIN_N_MAX, math.ceil(HEADROOM * n_needed))


def _thermal_weights(x: float, n_max: Optional[int], tol: float) -> np.ndarray:
    if n_max is None:
        n_max = suggested_n_max(x, tol)
    captured = 1.0 - x ** (n_max + 1)
    if captured < 1.0 - tol:
        raise TruncationError(
            f"n_max = {n_max} keeps only {captured:.12g} of the thermal weight",
            suggested_n_max=suggested_n_max(x, tol),
        )
    n = np.arange(n_max + 1)
    w = (1.0 - x) * x**n
    return w / w.sum()


def thermal_populations(
    T: float,
    omega_m: float,
    n_max: Optional[int] = None,
    spin=Spin.DOWN,
    tol: float = TRUNCATION_TOL,
    constants: PhysicalConstants = CODATA2018,
) -> PopulationState:
    """Bose-Einstein phonon distribution with the spin fixed to ``spin``."""
    w = _thermal_weights(boltzmann_factor(T, omega_m, constants), n_max, tol)
    p = np.zeros(2 * w.size)
    p[_spin(spin) :: 2] = w
    return PopulationState.from_weights(p)


def thermal_state(
    T: float,
    omega_m: float,
    n_max: Optional[int] = None,
    spin=Spin.DOWN,
    tol: float = TRUNCATION_TOL,
    constants: PhysicalConstants = CODATA2018,
) -> HybridState:
    """Amplitudes sqrt(P(n)) on |n, spin> (the purification used for sweeps)."""
    pops = thermal_populations(T, omega_m, n_max, spin, tol, constants)
    return HybridState.from_amplitudes(np.sqrt(pops.populations))


def amplitude_variance(
    T: float, spec: ResonatorSpec, constants: PhysicalConstants = CODATA2018
) -> float:
    """Thermal <alpha^2> = alpha0^2 (1 + x) / (1 - x), in m^2."""
    if not T >= 0:
        raise DomainError("temperature must be >= 0")
    alpha0_sq = zero_point_motion(spec, constants) ** 2
    if T == 0:
        return alpha0_sq
    y = constants.hbar * spec.omega_m / (constants.k_B * T)
    # (1 + x)/(1 - x) = coth(y/2), accurate in the classical limit
    return alpha0_sq / math.tanh(0.5 * y)


# --- dressed states -----------------------------------------------------------------


def uncoupled_energies(
    B,
    n: int,
    species: AtomSpecies,
    omega_m: float,
    constants: PhysicalConstants = CODATA2018,
):
    """Bare energies of |n,dn> and |n,up> (J) for the Jaynes-Cummings Hamiltonian."""
    hbar = constants.hbar
    omega_a = np.asarray(zeeman_splitting(species, B, constants))
    base = hbar * omega_m * n
    return base - 0.5 * hbar * omega_a, base + 0.5 * hbar * omega_a


def dressed_energies(
    B,
    n: int,
    species: AtomSpecies,
    g0: float,
    omega_m: float,
    pair: Optional[SpinPair] = None,
    constants: PhysicalConstants = CODATA2018,
):
    """Eigen-energies of the {|n+1,dn>, |n,up>} block versus field.

    Returns
    -------
    lower, upper : ndarray
        Dressed energies (J), same shape as ``B``.
    gap : float
        Splitting at exact resonance omega_a = omega_m; equals hbar g0 sqrt(n+1).
    """
    if n < 0:
        raise DomainError("phonon number must be >= 0")
    if pair is not None:
        pair.check(species)
    hbar = constants.hbar
    B_arr = np.atleast_1d(np.asarray(B, dtype=float))
    omega_a = np.asarray(zeeman_splitting(species, B_arr, constants))

    def blocks(wa):
        wa = np.atleast_1d(wa)
        h = np.empty(wa.shape + (2, 2))
        h[..., 0, 0] = hbar * omega_m * (n + 1) - 0.5 * hbar * wa
        h[..., 1, 1] = hbar * omega_m * n + 0.5 * hbar * wa
        h[..., 0, 1] = h[..., 1, 0] = 0.5 * hbar * g0 * math.sqrt(n + 1)
        return h

    # shift by the block mean before diagonalising so the coupling is not lost to rounding
    h = blocks(omega_a)
    mean = 0.5 * (h[..., 0, 0] + h[..., 1, 1])
    h[..., 0, 0] -= mean
    h[..., 1, 1] -= mean
    ev = np.linalg.eigvalsh(h)
    lower, upper = ev[..., 0] + mean, ev[..., 1] + mean

    h0 = blocks(np.array([omega_m]))
    m0 = 0.5 * (h0[..., 0, 0] + h0[..., 1, 1])
    h0[..., 0, 0] -= m0
    h0[..., 1, 1] -= m0
    ev0 = np.linalg.eigvalsh(h0)[0]
    gap = float(ev0[1] - ev0[0])

    if np.ndim(B) == 0:
        return float(lower[0]), float(upper[0]), gap
    return lower, upper, gap


# --- Landau-Zener sweeps ------------------------------------------------------------


@dataclass(frozen=True)
class LZSchedule:
    """Per-rung transfer probabilities of one field sweep.

    ``p`` maps an integer array of phonon numbers to probabilities; the value
    at ``n = 0`` is always forced to zero.
    """

    p: Callable[[np.ndarray], np.ndarray]
    phi: float = 0.0
    direction: SweepDirection = SweepDirection.HIGH_TO_LOW
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "direction", SweepDirection(self.direction))

    def probabilities(self, n_max: int) -> np.ndarray:
        n = np.arange(n_max + 1)
        p = np.broadcast_to(np.asarray(self.p(n), dtype=float), n.shape).copy()
        p[0] = 0.0
        if np.any(~np.isfinite(p)) or np.any(p < -1e-15) or np.any(p > 1 + 1e-15):
            raise DomainError("LZ probabilities must lie in [0, 1]")
        return np.clip(p, 0.0, 1.0)

    def __call__(self, n):
        n_arr = np.asarray(n, dtype=int)
        p = np.asarray(self.p(np.atleast_1d(n_arr)), dtype=float)
        p = np.where(np.atleast_1d(n_arr) == 0, 0.0, p)
        return float(p[0]) if n_arr.ndim == 0 else p

    def with_direction(self, direction) -> "LZSchedule":
        return replace(self, direction=SweepDirection(direction))

    @classmethod
    def constant(cls, p: float, **kwargs) -> "LZSchedule":
        """Same probability on every rung n >= 1 (ground state still blocked)."""
        if not 0 <= p <= 1:
            raise DomainError("probability must lie in [0, 1]")
        return cls(lambda n: np.full(np.shape(n), float(p)), label=f"constant {p}", **kwargs)

    @classmethod
    def from_first_rung(cls, p1: float, **kwargs) -> "LZSchedule":
        """p(n) = 1 - (1 - p1)**n, the n-scaling of the Landau-Zener exponent."""
        if not 0 <= p1 <= 1:
            raise DomainError("probability must lie in [0, 1]")
        q = 1.0 - float(p1)

        def p(n):
            return 1.0 - q ** np.asarray(n, dtype=float)

        return cls(p, label=f"p1 = {p1}", **kwargs)

    @classmethod
    def from_values(cls, values: Sequence[float], **kwargs) -> "LZSchedule":
        """Tabulated p(0), p(1), ...; rungs past the table reuse the last entry."""
        table = np.asarray(values, dtype=float)
        if table.ndim != 1 or table.size == 0:
            raise DomainError("need a non-empty 1-D table")
        if np.any(table < 0) or np.any(table > 1):
            raise DomainError("probabilities must lie in [0, 1]")
        return cls(lambda n: table[np.minimum(np.asarray(n), table.size - 1)], **kwargs)


def _rung_coefficients(schedule: LZSchedule, n_max: int):
    p = schedule.probabilities(n_max)[1:]
    return np.sqrt(p), np.sqrt(1.0 - p)


def _check_leakage(top_weight: float) -> None:
    if top_weight > LEAKAGE_ERROR:
        raise TruncationError(
            f"{top_weight:.3g} of the state sits on |n_max, up>, whose partner is truncated"
        )
    if top_weight > LEAKAGE_WARN:
        warnings.warn(
            f"{top_weight:.3g} of the state sits on the truncation edge |n_max, up>",
            LeakageWarning,
            stacklevel=3,
        )


def apply_sweep_to_array(amplitudes: np.ndarray, schedule: LZSchedule) -> np.ndarray:
    """Apply the sweep along the last axis of ``amplitudes``; leading axes are batch axes.

    O(n_max) per vector.
    """
    a = np.asarray(amplitudes, dtype=complex)
    n_max = a.shape[-1] // 2 - 1
    s, c = _rung_coefficients(schedule, n_max)
    phase = np.exp(1j * schedule.phi)
    down = a[..., 2::2]  # |n,dn>,   n = 1..n_max
    up = a[..., 1:-1:2]  # |n-1,up>, n = 1..n_max
    sign = 1.0 if schedule.direction is SweepDirection.HIGH_TO_LOW else -1.0
    out = a.copy()
    out[..., 2::2] = c * np.conj(phase) * down - sign * s * up
    out[..., 1:-1:2] = sign * s * down + c * phase * up
    return out


def lz_sweep_operator(schedule: LZSchedule, n_max: int) -> np.ndarray:
    """Dense unitary matrix of the sweep on the (2 n_max + 2)-dimensional space."""
    dim = 2 * (n_max + 1)
    # rows of the result are U applied to basis vectors, i.e. the columns of U
    return apply_sweep_to_array(np.eye(dim, dtype=complex), schedule).T.copy()


def apply_sweep(state: HybridState, schedule: LZSchedule) -> HybridState:
    _check_leakage(abs(state.amplitudes[-1]) ** 2)
    out = apply_sweep_to_array(state.amplitudes, schedule)
    # remove rounding drift so long chains of sweeps stay inside NORM_TOL
    return HybridState(out / np.linalg.norm(out))


def apply_sweep_populations(state: PopulationState, schedule: LZSchedule) -> PopulationState:
    """Move probability p(n) across every rung in both directions."""
    _check_leakage(state.populations[-1])
    pop = state.populations
    p = schedule.probabilities(state.n_max)[1:]
    down = pop[2::2]
    up = pop[1:-1:2]
    out = pop.copy()
    out[2::2] = (1.0 - p) * down + p * up
    out[1:-1:2] = p * down + (1.0 - p) * up
    return PopulationState(out / out.sum())


def optical_pump(state: PopulationState) -> PopulationState:
    """Incoherently move every |n,up> population to |n,dn>."""
    w = state.by_spin().copy()
    w[:, 0] += w[:, 1]
    w[:, 1] = 0.0
    return PopulationState(w.ravel())
