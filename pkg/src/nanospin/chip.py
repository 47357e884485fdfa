"""Magnetostatics of atom-chip conductors.

Fields are summed from straight finite segments using the closed-form
Biot-Savart result

    B = mu_0 I / (4 pi) (r1 x r2) (|r1| + |r2|) / (|r1| |r2| (|r1| |r2| + r1 . r2))

with ``r1``, ``r2`` the vectors from the segment's start and end to the field
point. Conductors of finite cross-section are split into a grid of filaments.

Coordinates: the chip's top surface is ``z = 0``; atoms live at ``z > 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from .constants import (
    CODATA2018,
    REFERENCE_OMEGA_M,
    RB87_DEFAULT_PAIR,
    RB87_F1,
    AtomSpecies,
    PhysicalConstants,
    SpinPair,
    parse_config_text,
)
from .coupling import rabi_frequency
from .errors import DomainError, SearchError, SingularPointError, UntrappableStateWarning
from .fields import OscillatingFieldDecomposition, dc_wire_field, dipole_field

AXIS_TOL = 1e-9  # m

Vector = Tuple[float, float, float]


def _vec(v) -> Vector:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise DomainError(f"expected a finite 3-vector, got {v!r}")
    return tuple(float(c) for c in arr)


@dataclass(frozen=True)
class WireSegment:
    """Thin straight wire; positive current flows from ``start`` to ``end``."""

    start: Vector
    end: Vector
    current: float

    def __post_init__(self):
        object.__setattr__(self, "start", _vec(self.start))
        object.__setattr__(self, "end", _vec(self.end))
        if self.start == self.end:
            raise DomainError("segment start and end coincide")

    def filaments(self) -> Tuple["WireSegment", ...]:
        return (self,)

    def scaled(self, factor: float) -> "WireSegment":
        return WireSegment(self.start, self.end, self.current * factor)


def segment_field(
    seg: WireSegment, points, constants: PhysicalConstants = CODATA2018
) -> np.ndarray:
    """Field (T) of one segment at ``points`` (shape ``(..., 3)``)."""
    p = np.asarray(points, dtype=float)
    a = np.asarray(seg.start)
    b = np.asarray(seg.end)
    r1 = p - a
    r2 = p - b
    d = b - a
    # distance to the segment's axis line
    cross_d = np.cross(r1, d)
    dist = np.linalg.norm(cross_d, axis=-1) / np.linalg.norm(d)
    if np.any(dist < AXIS_TOL):
        raise SingularPointError("field point lies on a wire axis")
    n1 = np.linalg.norm(r1, axis=-1)
    n2 = np.linalg.norm(r2, axis=-1)
    num = np.cross(r1, r2)
    denom = n1 * n2 * (n1 * n2 + np.sum(r1 * r2, axis=-1))
    factor = constants.mu_0 * seg.current / (4.0 * math.pi) * (n1 + n2) / denom
    return num * factor[..., None]


@dataclass(frozen=True)
class RectangularConductor:
    """Flat conductor of rectangular cross-section along a polyline.

    ``path`` lists the centre-line vertices. The thickness direction is
    ``normal``; the width direction is ``normal x segment``. The cross-section
    is integrated with a ``grid = (n_width, n_thickness)`` Gauss-Legendre
    product rule: one filament per node, carrying the node's share of the
    current. A 1x1 grid is the centre-line wire itself.
    """

    path: Tuple[Vector, ...]
    width: float
    thickness: float
    current: float
    grid: Tuple[int, int] = (8, 4)
    normal: Vector = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(_vec(v) for v in self.path))
        object.__setattr__(self, "normal", _vec(self.normal))
        if len(self.path) < 2:
            raise DomainError("path needs at least two vertices")
        if not (self.width > 0 and self.thickness > 0):
            raise DomainError("width and thickness must be positive")
        if min(self.grid) < 1:
            raise DomainError("filament grid must be at least 1x1")

    def filaments(self) -> Tuple[WireSegment, ...]:
        nw, nt = self.grid
        u, wu = np.polynomial.legendre.leggauss(nw)
        v, wv = np.polynomial.legendre.leggauss(nt)
        u = 0.5 * self.width * u
        v = 0.5 * self.thickness * v
        normal = np.asarray(self.normal) / np.linalg.norm(self.normal)
        out = []
        for a, b in zip(self.path[:-1], self.path[1:]):
            a, b = np.asarray(a), np.asarray(b)
            d = (b - a) / np.linalg.norm(b - a)
            w_dir = np.cross(normal, d)
            if np.linalg.norm(w_dir) < 1e-12:
                raise DomainError("conductor normal is parallel to a path segment")
            w_dir /= np.linalg.norm(w_dir)
            for du, w1 in zip(u, wu):
                for dv, w2 in zip(v, wv):
                    off = du * w_dir + dv * normal
                    out.append(WireSegment(a + off, b + off, 0.25 * w1 * w2 * self.current))
        return tuple(out)

    def scaled(self, factor: float) -> "RectangularConductor":
        return RectangularConductor(
            self.path, self.width, self.thickness, self.current * factor, self.grid, self.normal
        )


Conductor = Union[WireSegment, RectangularConductor]


@dataclass(frozen=True)
class FieldSample:
    position: Vector
    B: Vector

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position))
        object.__setattr__(self, "B", _vec(self.B))

    @property
    def magnitude(self) -> float:
        return math.sqrt(sum(c * c for c in self.B))


def assembly_field(
    wires: Iterable[Conductor],
    uniform_bias=(0.0, 0.0, 0.0),
    points=None,
    constants: PhysicalConstants = CODATA2018,
) -> np.ndarray:
    """Superposed field of all conductors plus a uniform bias, at ``points``."""
    p = np.asarray(points, dtype=float)
    total = np.broadcast_to(np.asarray(uniform_bias, dtype=float), p.shape).copy()
    for conductor in wires:
        for seg in conductor.filaments():
            total += segment_field(seg, p, constants)
    return total


@dataclass(frozen=True)
class ChipAssembly:
    conductors: Tuple[Conductor, ...]
    bias: Vector = (0.0, 0.0, 0.0)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "conductors", tuple(self.conductors))
        object.__setattr__(self, "bias", _vec(self.bias))

    def field(self, points, constants: PhysicalConstants = CODATA2018) -> np.ndarray:
        return assembly_field(self.conductors, self.bias, points, constants)

    def magnitude(self, points, constants: PhysicalConstants = CODATA2018) -> np.ndarray:
        return np.linalg.norm(self.field(points, constants), axis=-1)

    def sample(self, point, constants: PhysicalConstants = CODATA2018) -> FieldSample:
        return FieldSample(point, self.field(np.asarray(point, dtype=float), constants))

    def scaled(self, factor: float) -> "ChipAssembly":
        """All currents and the bias multiplied by ``factor``."""
        return ChipAssembly(
            tuple(c.scaled(factor) for c in self.conductors),
            tuple(factor * b for b in self.bias),
            self.label,
        )

    def __add__(self, other: "ChipAssembly") -> "ChipAssembly":
        return ChipAssembly(
            self.conductors + other.conductors,
            tuple(a + b for a, b in zip(self.bias, other.bias)),
        )


def trap_potential(
    species: AtomSpecies,
    m_F: float,
    points,
    assembly: ChipAssembly,
    constants: PhysicalConstants = CODATA2018,
):
    """Zeeman potential m_F g_F mu_B |B| (J)."""
    if not species.is_trappable(m_F):
        warnings.warn(
            f"m_F g_F = {m_F * species.g_F:g} <= 0: state is not magnetically trappable",
            UntrappableStateWarning,
            stacklevel=2,
        )
    u = m_F * species.g_F * constants.mu_B * assembly.magnitude(points, constants)
    return float(u) if np.ndim(u) == 0 else u


@dataclass(frozen=True)
class TrapMinimum:
    position: np.ndarray
    B_min: float
    curvatures: np.ndarray  # eigenvalues of the potential Hessian, J/m^2
    hessian: np.ndarray

    @property
    def height(self) -> float:
        return float(self.position[2])

    @property
    def is_local_minimum(self) -> bool:
        return bool(np.all(self.curvatures > 0))


def _hessian(f, x0, h):
    n = x0.size
    H = np.empty((n, n))
    f0 = f(x0)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(x0 + ei) - 2 * f0 + f(x0 - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def trap_minimum(
    assembly: ChipAssembly,
    box: Tuple[Sequence[float], Sequence[float]],
    species: AtomSpecies = RB87_F1,
    m_F: float = -1,
    grid: int = 64,
    xtol: float = 1e-9,
    constants: PhysicalConstants = CODATA2018,
) -> TrapMinimum:
    """Locate the |B| minimum inside ``box = (lower_corner, upper_corner)``.

    A coarse ``grid**3`` scan of |B|^2 seeds a Nelder-Mead refinement. |B|^2 is
    used because |B| has a cusp at field zeros.
    """
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    if lo.shape != (3,) or hi.shape != (3,) or np.any(hi <= lo):
        raise DomainError("box must be (lower corner, upper corner) with hi > lo")
    span = hi - lo
    axes = [np.linspace(lo[i], hi[i], grid) for i in range(3)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    b2 = np.sum(assembly.field(pts, constants) ** 2, axis=-1)
    i0 = np.unravel_index(np.argmin(b2), b2.shape)
    start = (pts[i0] - lo) / span
    scale = float(b2[i0]) if b2[i0] > 0 else float(np.max(b2))

    def objective(u):
        x = lo + u * span
        return float(np.sum(assembly.field(x, constants) ** 2)) / scale

    res = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={
            "xatol": xtol / float(np.max(span)),
            "fatol": 1e-14,
            "maxiter": 20000,
            "maxfev": 40000,
            "initial_simplex": start + np.vstack([np.zeros(3), np.eye(3) / grid]),
        },
    )
    u = res.x
    cell = 1.0 / (grid - 1)
    if np.any(u < 0.5 * cell) or np.any(u > 1.0 - 0.5 * cell):
        raise SearchError(
            f"field minimum at {lo + u * span} lies on the search-box boundary; "
            "no interior minimum found"
        )
    x = lo + u * span
    B_min = float(np.linalg.norm(assembly.field(x, constants)))

    def potential(y):
        return m_F * species.g_F * constants.mu_B * float(np.linalg.norm(assembly.field(y, constants)))

    h = np.maximum(1e-4 * span, 1e-8)
    H = _hessian(potential, x, h)
    return TrapMinimum(x, B_min, np.linalg.eigvalsh(H), H)


# --- presets ------------------------------------------------------------------------

Z_TRAP_PRESET = "z_trap_chip.cfg"


def load_geometry_preset(name: str = Z_TRAP_PRESET) -> dict[str, float]:
    text = resources.files("nanospin").joinpath("presets").joinpath(name).read_text()
    return {k: float(v) for k, v in parse_config_text(text).items()}


def z_trap_assembly(
    I_Z: float = 10.0,
    I_B: float = -5.0,
    geometry: Optional[dict] = None,
) -> ChipAssembly:
    """Z-wire on the chip's bottom face plus two parallel bias wires on top.

    The Z's central bar runs along +y at ``z = -chip_thickness``; the leads
    leave along +x on opposite ends. Bias wires run along y at
    ``x = +/- bias_separation / 2`` on the top face; ``I_B < 0`` is
    antiparallel to the bar current.
    """
    g = dict(load_geometry_preset())
    if geometry:
        g.update(geometry)
    z = -g["chip_thickness"]
    half = 0.5 * g["z_bar_length"]
    lead = g["z_lead_length"]
    zwire = (
        WireSegment((-lead, -half, z), (0.0, -half, z), I_Z),
        WireSegment((0.0, -half, z), (0.0, half, z), I_Z),
        WireSegment((0.0, half, z), (lead, half, z), I_Z),
    )
    hl = 0.5 * g["bias_length"]
    xb = 0.5 * g["bias_separation"]
    zb = g.get("bias_height", 0.0)
    bias = (
        WireSegment((-xb, -hl, zb), (-xb, hl, zb), I_B),
        WireSegment((xb, -hl, zb), (xb, hl, zb), I_B),
    )
    bias_field = (g.get("bias_x", 0.0), g.get("bias_y", 0.0), g.get("bias_z", 0.0))
    return ChipAssembly(zwire + bias, bias_field, label=f"Z-trap I_Z={I_Z} A, I_B={I_B} A")


def z_trap_search_box(geometry: Optional[dict] = None):
    g = dict(load_geometry_preset())
    if geometry:
        g.update(geometry)
    lo = (g["box_x_min"], g["box_y_min"], g["box_z_min"])
    hi = (g["box_x_max"], g["box_y_max"], g["box_z_max"])
    return lo, hi


# --- two-wire local bias ------------------------------------------------------------


def bias_pair_conductors(
    current: float = 1.0,
    width: float = 10e-6,
    thickness: float = 4e-6,
    gap: float = 10e-6,
    length: float = 10e-3,
    grid: Tuple[int, int] = (8, 4),
) -> Tuple[RectangularConductor, RectangularConductor]:
    """Two parallel on-chip wires along y, sitting on z = 0, edges ``gap`` apart."""
    xc = 0.5 * (gap + width)
    zc = 0.5 * thickness
    hl = 0.5 * length
    return tuple(
        RectangularConductor(((x, -hl, zc), (x, hl, zc)), width, thickness, current, grid)
        for x in (-xc, xc)
    )


@dataclass(frozen=True)
class BiasProfile:
    x: np.ndarray
    B: np.ndarray  # (N, 3)
    rabi_dipole: np.ndarray
    rabi_dc: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.B, axis=-1)


def bias_pair_profile(
    x,
    height: float = 4e-6,
    current: float = 1.0,
    width: float = 10e-6,
    thickness: float = 4e-6,
    gap: float = 10e-6,
    length: float = 10e-3,
    grid: Tuple[int, int] = (8, 4),
    r0: float = 1e-6,
    alpha: float = 10e-9,
    species: AtomSpecies = RB87_F1,
    pair: SpinPair = RB87_DEFAULT_PAIR,
    constants: PhysicalConstants = CODATA2018,
) -> BiasProfile:
    """Bias field across the two-wire pair and matched-offset coupling rates.

    At each position the dipole moment (or string current) is chosen so the
    string's static field equals the local bias magnitude; the resulting drive
    ``b alpha`` sets the Rabi rate. ``height`` is measured from the top face
    of the conductors.
    """
    if not height > 0:
        raise DomainError("profile height must be above the conductors")
    xs = np.asarray(x, dtype=float)
    pts = np.stack([xs, np.zeros_like(xs), np.full_like(xs, thickness + height)], axis=-1)
    conductors = bias_pair_conductors(current, width, thickness, gap, length, grid)
    B = assembly_field(conductors, (0.0, 0.0, 0.0), pts, constants)
    mag = np.linalg.norm(B, axis=-1)
    rabi_d = np.empty_like(mag)
    rabi_w = np.empty_like(mag)
    for i, b in enumerate(mag):
        mu_m = b * 4.0 * math.pi * r0**3 / constants.mu_0
        I = b * 2.0 * math.pi * r0 / constants.mu_0
        d = dipole_field(mu_m, r0, alpha, constants=constants)
        w = dc_wire_field(I, r0, alpha, constants=constants)
        rabi_d[i] = rabi_frequency(species, pair, d.drive_amplitude, constants=constants)
        rabi_w[i] = rabi_frequency(species, pair, w.drive_amplitude, constants=constants)
    return BiasProfile(xs, B, rabi_d, rabi_w)


# --- numerical counterparts of the analytic string fields ----------------------------


def _displaced_magnitudes(build, r0, delta, constants):
    atom = np.array([0.0, 0.0, r0])
    out = []
    for shift in (0.0, +delta, -delta):
        out.append(float(np.linalg.norm(assembly_field(build(shift), (0, 0, 0), atom, constants))))
    return out


def numeric_wire_decomposition(
    I: float,
    r0: float,
    alpha: float,
    omega_m: float = REFERENCE_OMEGA_M,
    length_factor: float = 1e4,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Finite-segment version of the vibrating dc wire.

    A segment of length ``length_factor * r0`` along y is displaced by
    ``+/- alpha`` along z; the gradient is the central difference of |B|.
    """
    hl = 0.5 * length_factor * r0

    def build(shift):
        return (WireSegment((0.0, -hl, shift), (0.0, hl, shift), I),)

    delta = alpha if alpha > 0 else 1e-3 * r0
    b0, b_plus, b_minus = _displaced_magnitudes(build, r0, delta, constants)
    grad = (b_plus - b_minus) / (2.0 * delta)
    return OscillatingFieldDecomposition(b0, abs(grad), ((omega_m, abs(grad) * alpha),))


def square_loop(center, side: float, current: float, normal_axis: int = 0):
    """Square current loop with its moment along a coordinate axis."""
    c = np.asarray(center, dtype=float)
    i, j = [k for k in range(3) if k != normal_axis]
    h = 0.5 * side
    corners = []
    for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        p = c.copy()
        p[i] += su * h
        p[j] += sv * h
        corners.append(p)
    return tuple(WireSegment(corners[k], corners[(k + 1) % 4], current) for k in range(4))


def numeric_dipole_decomposition(
    mu_m: float,
    r0: float,
    alpha: float,
    omega_m: float = REFERENCE_OMEGA_M,
    loop_fraction: float = 1e-2,
    constants: PhysicalConstants = CODATA2018,
) -> OscillatingFieldDecomposition:
    """Small square loop (moment along x) standing in for the point dipole."""
    side = loop_fraction * r0
    current = mu_m / side**2

    def build(shift):
        return square_loop((0.0, 0.0, shift), side, current, normal_axis=0)

    delta = alpha if alpha > 0 else 1e-3 * r0
    b0, b_plus, b_minus = _displaced_magnitudes(build, r0, delta, constants)
    grad = (b_plus - b_minus) / (2.0 * delta)
    return OscillatingFieldDecomposition(b0, abs(grad), ((omega_m, abs(grad) * alpha),))
