"""Landau-Zener transfer probabilities and a time-domain oracle for them.

The analytic rung probability for a linear field ramp of rate ``dB/dt`` is

    p(n) = 1 - exp(-pi hbar n g0**2 / (2 |g_F| mu_B dB/dt)),

i.e. the textbook two-level result with coupling ``sqrt(n) g0`` and detuning
chirp ``lambda = |g_F| mu_B (dB/dt) / hbar``.

:func:`tdse_transition_probability` integrates the two-level Schrodinger
equation

    i d/dt c = 1/2 [[-lambda t, Omega], [Omega, lambda t]] c

in natural units (``tau = t sqrt(lambda)``) with an embedded Dormand-Prince
5(4) Runge-Kutta scheme. It starts in the lower adiabatic state at ``-T`` and
reports the overlap with the lower adiabatic state at ``+T``; measuring in the
adiabatic basis suppresses the finite-window diabatic ripple. Convergence in
the window is checked by doubling it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import CODATA2018, AtomSpecies, PhysicalConstants
from .errors import DomainError, LZValidityWarning, NumericalError
from .ladder import AnyState, HybridState, LZSchedule, PopulationState, SweepDirection
from .ladder import apply_sweep, apply_sweep_populations, mean_phonon


@dataclass(frozen=True)
class SweepSpec:
    """Linear field ramp of ``delta_B`` (T) over ``delta_t`` (s)."""

    delta_B: float
    delta_t: float
    direction: SweepDirection = SweepDirection.HIGH_TO_LOW

    def __post_init__(self):
        if not self.delta_t > 0:
            raise DomainError("sweep duration must be positive")
        if not self.delta_B > 0:
            raise DomainError("sweep excursion must be positive")
        object.__setattr__(self, "direction", SweepDirection(self.direction))

    @property
    def rate(self) -> float:
        return self.delta_B / self.delta_t


def chirp_rate(species: AtomSpecies, rate: float, constants: PhysicalConstants = CODATA2018):
    """Detuning chirp lambda (rad/s^2) produced by a field ramp of ``rate`` T/s."""
    return species.abs_g_F * constants.mu_B * rate / constants.hbar


def lz_probability(n, g0: float, species: AtomSpecies, sweep, constants=CODATA2018):
    """Rung transfer probability p(n) for a sweep (a :class:`SweepSpec` or a rate in T/s).

    A zero rate is the adiabatic limit: 1 for every ``n >= 1``.
    """
    rate = sweep.rate if isinstance(sweep, SweepSpec) else float(sweep)
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0):
        raise DomainError("phonon number must be >= 0")
    if not g0 >= 0:
        raise DomainError("g0 must be >= 0")
    if not rate >= 0:
        raise DomainError("sweep rate must be >= 0")
    if rate == 0:
        p = np.where(n_arr >= 1, 1.0, 0.0) if g0 > 0 else np.zeros_like(n_arr)
    else:
        exponent = math.pi * n_arr * g0**2 / (2.0 * chirp_rate(species, rate, constants))
        p = -np.expm1(-exponent)
    return float(p) if p.ndim == 0 else p


def rate_for_probability(p1: float, g0: float, species: AtomSpecies, constants=CODATA2018):
    """Sweep rate (T/s) for which the first rung transfers with probability ``p1``."""
    if not 0 < p1 < 1:
        raise DomainError("p1 must lie strictly between 0 and 1")
    lam = math.pi * g0**2 / (2.0 * -math.log1p(-p1))
    return lam * constants.hbar / (species.abs_g_F * constants.mu_B)


def lz_schedule_from_sweep(
    g0: float,
    species: AtomSpecies,
    sweep: SweepSpec,
    phi: float = 0.0,
    constants: PhysicalConstants = CODATA2018,
) -> LZSchedule:
    """Wrap :func:`lz_probability` as an :class:`~nanospin.ladder.LZSchedule`.

    Sweeps shorter than ten periods of the first-rung gap get a
    :class:`~nanospin.errors.LZValidityWarning`.
    """
    if g0 > 0 and sweep.delta_t < 10.0 * 2.0 * math.pi / g0:
        warnings.warn(
            f"sweep of {sweep.delta_t:.3g} s is shorter than 10 gap periods "
            f"({20 * math.pi / g0:.3g} s); asymptotic LZ formula may not apply",
            LZValidityWarning,
            stacklevel=2,
        )
    rate = sweep.rate

    def p(n):
        return lz_probability(np.asarray(n), g0, species, rate, constants)

    return LZSchedule(p, phi=phi, direction=sweep.direction, label=f"rate {rate:.6g} T/s")


def energy_change_per_sweep(
    state: AnyState, schedule: LZSchedule, omega_m: float, constants=CODATA2018
) -> float:
    """hbar omega_m times the change of mean phonon number over one sweep (J)."""
    if isinstance(state, HybridState):
        after = apply_sweep(state, schedule)
    elif isinstance(state, PopulationState):
        after = apply_sweep_populations(state, schedule)
    else:
        raise DomainError(f"unsupported state type {type(state).__name__}")
    return constants.hbar * omega_m * (mean_phonon(after) - mean_phonon(state))


# --- time-domain oracle -------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = _A[6] + (0.0,)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _rhs(tau, y, omega):
    y0, y1 = y
    return -0.5j * np.stack((-tau * y0 + omega * y1, omega * y0 + tau * y1))


def _lower_adiabatic(tau, omega):
    h = np.zeros(omega.shape + (2, 2))
    h[..., 0, 0] = -0.5 * tau
    h[..., 1, 1] = 0.5 * tau
    h[..., 0, 1] = h[..., 1, 0] = 0.5 * omega
    _, vecs = np.linalg.eigh(h)
    return vecs[..., :, 0].T.astype(complex)  # shape (2, N)


def _integrate(omega, window, rtol, atol, max_steps):
    """Dormand-Prince 5(4) over tau in [-window, window] for a batch of couplings."""
    y = _lower_adiabatic(-window, omega)
    tau, tau_end = -float(window), float(window)
    h = 1e-2 / max(1.0, window)
    k1 = _rhs(tau, y, omega)
    steps = rejected = 0
    while tau < tau_end:
        if steps + rejected >= max_steps:
            raise NumericalError(
                "Runge-Kutta step budget exhausted",
                {"tau": tau, "window": window, "steps": steps, "rejected": rejected, "h": h},
            )
        h = min(h, tau_end - tau)
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(_rhs(tau + _C[i] * h, yi, omega))
        y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b)
        err_vec = h * sum(e * k for e, k in zip(_E, ks) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2, axis=0))))
        if err <= 1.0:
            tau += h
            y = y_new
            k1 = ks[6]  # first-same-as-last
            steps += 1
        else:
            rejected += 1
        if not math.isfinite(err):
            raise NumericalError("non-finite error estimate", {"tau": tau, "h": h})
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
        if h < 1e-14 * max(1.0, abs(tau)):
            raise NumericalError("step size underflow", {"tau": tau, "h": h})
    final = _lower_adiabatic(tau_end, omega)
    amp = np.sum(np.conj(final) * y, axis=0)
    return np.abs(amp) ** 2, steps + rejected


def tdse_transition_probability(
    coupling,
    detuning_rate,
    window: float = 40.0,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    window_tol: float = 1e-3,
    max_doublings: int = 2,
    max_steps: int = 2_000_000,
    return_info: bool = False,
):
    """Adiabatic transfer probability from direct integration of the two-level TDSE.

    Parameters
    ----------
    coupling : float or array_like
        Coupling Omega_c (rad/s), i.e. the gap at the crossing.
    detuning_rate : float or array_like
        Chirp lambda (rad/s^2); broadcast against ``coupling``.
    window : float
        Half-width of the integration interval in units of 1/sqrt(lambda); >= 20.
    rtol, atol : float
        Runge-Kutta step control tolerances.
    window_tol : float
        Largest accepted change of the result when the window is doubled.

    Returns
    -------
    float or ndarray
        Transferred population; converges to 1 - exp(-pi Omega_c**2 / (2 lambda)).
    """
    omega_c, lam = np.broadcast_arrays(
        np.asarray(coupling, dtype=float), np.asarray(detuning_rate, dtype=float)
    )
    if np.any(omega_c <= 0):
        raise DomainError("coupling must be positive")
    if np.any(lam <= 0):
        raise DomainError("detuning rate must be positive")
    if window < 20:
        raise DomainError("window must be at least 20 natural units")
    omega = (omega_c / np.sqrt(lam)).ravel()

    w = float(window)
    previous, _ = _integrate(omega, w, rtol, atol, max_steps)
    history = []
    for _ in range(max_doublings + 1):
        w *= 2.0
        current, nsteps = _integrate(omega, w, rtol, atol, max_steps)
        change = float(np.max(np.abs(current - previous)))
        history.append((w, change, nsteps))
        if change <= window_tol:
            break
        previous = current
    else:
        raise NumericalError(
            "transfer probability did not settle as the window was doubled",
            {"history": history},
        )
    result = current.reshape(omega_c.shape)
    out = float(result) if result.ndim == 0 else result
    if return_info:
        return out, {"window": w, "window_change": change, "history": history}
    return out


@dataclass(frozen=True)
class LZCheckRow:
    rate: float
    n: int
    p_analytic: float
    p_tdse: float

    @property
    def abs_err(self) -> float:
        return abs(self.p_tdse - self.p_analytic)


def lz_oracle_table(
    g0: float,
    species: AtomSpecies,
    n_values,
    rates,
    window: float = 40.0,
    constants: PhysicalConstants = CODATA2018,
) -> list[LZCheckRow]:
    """Analytic vs time-domain transfer probability on an (n, rate) grid."""
    n_arr = np.asarray(list(n_values), dtype=int)
    rate_arr = np.asarray(list(rates), dtype=float)
    nn, rr = np.meshgrid(n_arr, rate_arr, indexing="ij")
    analytic = np.vectorize(lambda n, r: lz_probability(n, g0, species, r, constants))(nn, rr)
    lam = chirp_rate(species, rr, constants)
    tdse = tdse_transition_probability(np.sqrt(nn) * g0, lam, window=window)
    return [
        LZCheckRow(float(r), int(n), float(a), float(t))
        for n, r, a, t in zip(nn.ravel(), rr.ravel(), np.ravel(analytic), np.ravel(tdse))
    ]
