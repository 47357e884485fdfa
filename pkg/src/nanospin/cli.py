"""Command-line front end.

Every subcommand reads a flat set of SI-valued keys. Values are resolved in
order: built-in defaults, ``--preset``, ``--config`` file, then overrides given
either as ``--set key=value`` or as bare ``--key value`` pairs (dashes in key
names may be written as underscores or dashes). Output is CSV with ``#``
metadata lines echoing the resolved inputs, or an aligned table.

Exit status: 0 success, 1 failed acceptance criterion, 2 configuration
error, 3 numerical or convergence error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import acceptance
from .chip import (
    bias_pair_profile,
    load_geometry_preset,
    trap_minimum,
    trap_potential,
    z_trap_assembly,
)
from .constants import (
    CODATA2018,
    RESONATOR_PRESETS,
    SPECIES_PRESETS,
    ACCurrent,
    AtomSpecies,
    DCCurrent,
    PermanentDipole,
    ResonatorSpec,
    SpinPair,
    load_config,
    mechanical_decoherence_rate,
    zero_point_motion,
)
from .coupling import evaluate_coupling, field_for_splitting
from .errors import DomainError, NanospinError, NumericalError, SearchError, TruncationError
from .fields import source_field
from .chip import numeric_dipole_decomposition, numeric_wire_decomposition
from .ladder import (
    LZSchedule,
    PopulationState,
    Spin,
    boltzmann_factor,
    dressed_energies,
    temperature_for_occupation,
    thermal_populations,
    uncoupled_energies,
)
from .lz import chirp_rate, lz_probability, rate_for_probability, tdse_transition_probability
from .protocols import (
    cooling_run,
    entangle_two_resonators,
    project_spin,
    temperature_from_ratio,
    thermometry_flip_probabilities,
)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


# --- parameter schema ---------------------------------------------------------------


@dataclass(frozen=True)
class Key:
    default: object
    kind: str = "float"  # float | int | str | floats | ints
    help: str = ""


def _parse_value(name: str, key: Key, raw) -> object:
    text = str(raw).strip()
    try:
        if key.kind == "float":
            return float(Fraction(text))
        if key.kind == "int":
            return int(text)
        if key.kind == "floats":
            return tuple(float(Fraction(t)) for t in text.split(",") if t.strip())
        if key.kind == "ints":
            return tuple(int(t) for t in text.split(",") if t.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} as {key.kind}") from exc
    return text


def _echo(value) -> str:
    if isinstance(value, tuple):
        return ",".join(fmt(v) for v in value)
    return fmt(value)


SPECIES_KEYS = {
    "F": Key(1.0, help="hyperfine quantum number"),
    "g_F": Key(-0.5, help="Lande factor (signed)"),
    "m_up": Key(0.0),
    "m_down": Key(-1.0),
}
RESONATOR_KEYS = {
    "omega_m": Key(RESONATOR_PRESETS["string-dc"].omega_m, help="rad/s"),
    "m_eff": Key(8.4e-13, help="kg"),
    "Q": Key(1.6e5),
    "source": Key("dc-current", "str", "permanent-dipole | dc-current | ac-current"),
    "I": Key(1.0, help="string current, A"),
    "mu_m": Key(6.7e-11, help="dipole moment, J/T"),
    "omega_ac": Key(2 * math.pi * 10e6, help="ac drive, rad/s"),
}
GEOMETRY_KEYS = {k: Key(v) for k, v in load_geometry_preset().items() if k not in ("I_Z", "I_B")}


def _resonator_preset(spec: ResonatorSpec) -> dict:
    out = {"omega_m": spec.omega_m, "m_eff": spec.m_eff, "Q": spec.Q, "source": spec.source.kind}
    src = spec.source
    if isinstance(src, PermanentDipole):
        out["mu_m"] = src.mu_m
    elif isinstance(src, ACCurrent):
        out.update(I=src.I, omega_ac=src.omega_ac)
    else:
        out["I"] = src.I
    return out


PRESETS: dict[str, dict] = {name: _resonator_preset(s) for name, s in RESONATOR_PRESETS.items()}
PRESETS.update(
    {
        name: {"F": sp.F, "g_F": sp.g_F}
        for name, sp in SPECIES_PRESETS.items()
    }
)
PRESETS["z-trap"] = dict(load_geometry_preset())


def species_of(p) -> AtomSpecies:
    return AtomSpecies(F=p["F"], g_F=p["g_F"])


def pair_of(p) -> SpinPair:
    return SpinPair(m_up=p["m_up"], m_down=p["m_down"])


def resonator_of(p) -> ResonatorSpec:
    kind = p["source"]
    if kind == "permanent-dipole":
        src = PermanentDipole(p["mu_m"])
    elif kind == "dc-current":
        src = DCCurrent(p["I"])
    elif kind == "ac-current":
        src = ACCurrent(p["I"], p["omega_ac"])
    else:
        raise ConfigError(f"source: unknown kind {kind!r}")
    return ResonatorSpec(p["omega_m"], p["m_eff"], p["Q"], src)


def _g0(p) -> float:
    if p["g0"] != "auto":
        try:
            return float(Fraction(p["g0"]))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"g0: expected a number or 'auto', got {p['g0']!r}") from exc
    return evaluate_coupling(resonator_of(p), p["r0"], 0.0, species_of(p), pair_of(p)).g0


# --- output -------------------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, *values):
        self.rows.append(values)

    def render(self, command: str, params: dict, style: str) -> str:
        buf = io.StringIO()
        buf.write(f"# nanospin {command}\n")
        for k in sorted(params, key=str.lower):
            buf.write(f"# {k} = {_echo(params[k])}\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        cells = [[fmt(v) for v in row] for row in self.rows]
        if style == "csv":
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(self.columns)
            writer.writerows(cells)
        else:
            widths = [
                max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(self.columns)
            ]
            buf.write("  ".join(c.rjust(w) for c, w in zip(self.columns, widths)) + "\n")
            for row in cells:
                buf.write("  ".join(v.rjust(w) for v, w in zip(row, widths)) + "\n")
        return buf.getvalue()


# --- subcommands --------------------------------------------------------------------


def cmd_coupling(p) -> Table:
    spec = resonator_of(p)
    res = evaluate_coupling(spec, p["r0"], p["alpha"], species_of(p), pair_of(p), int(p["n_atoms"]), p["theta"])
    gamma = mechanical_decoherence_rate(spec.Q, p["T_s"])
    t = Table(["quantity", "value", "unit", "value_Hz"])
    two_pi = 2 * math.pi
    for name, value in (
        ("omega_a", res.omega_a),
        ("rabi", res.rabi),
        ("g0", res.g0),
        ("g_eff", res.g_eff),
        ("gamma_dec", gamma),
    ):
        t.add(name, value, "rad/s", value / two_pi)
    t.add("resonant_field", field_for_splitting(species_of(p), res.omega_a), "T", "")
    t.add("alpha0", zero_point_motion(spec), "m", "")
    t.add("matrix_element", res.matrix_element, "", "")
    t.add("n_atoms", res.n_atoms, "", "")
    return t


def cmd_fields(p) -> Table:
    spec = resonator_of(p)
    alphas = p["alphas"]
    cols = ["r0_m", "static_T", "gradient_T_per_m"]
    cols += [f"drive_T_alpha_{a * 1e9:g}nm" for a in alphas]
    numeric = bool(p["numeric"])
    if numeric:
        if spec.source.kind == "ac-current":
            raise ConfigError("numeric comparison is available for dipole and dc sources only")
        cols += ["static_numeric_T", "gradient_numeric_T_per_m"]
    t = Table(cols)
    for r0 in np.geomspace(p["r0_min"], p["r0_max"], int(p["n_points"])):
        base = source_field(spec.source, r0, 0.0, spec.omega_m)
        row = [r0, base.static_amplitude, base.gradient]
        row += [source_field(spec.source, r0, a, spec.omega_m).drive_amplitude for a in alphas]
        if numeric:
            delta = max(alphas)
            if spec.source.kind == "permanent-dipole":
                num = numeric_dipole_decomposition(spec.source.mu_m, r0, delta, spec.omega_m)
            else:
                num = numeric_wire_decomposition(spec.source.I, r0, delta, spec.omega_m)
            row += [num.static_amplitude, num.gradient]
        t.add(*row)
    return t


def cmd_ladder(p) -> Table:
    species = species_of(p)
    omega_m = p["omega_m"]
    g0 = _g0(p)
    B_res = field_for_splitting(species, omega_m)
    B_min = p["B_min"] if p["B_min"] > 0 else 0.9 * B_res
    B_max = p["B_max"] if p["B_max"] > 0 else 1.1 * B_res
    B = np.linspace(B_min, B_max, int(p["n_points"]))
    hbar_w = CODATA2018.hbar * omega_m
    t = Table(["B_T", "n", "E_dn_n_plus_1_J", "E_up_n_J", "E_lower_J", "E_upper_J", "gap_J"])
    t.notes.append(f"g0 = {fmt(g0)} rad/s; resonance field = {fmt(B_res)} T; hbar*omega_m = {fmt(hbar_w)} J")
    for n in range(int(p["n_levels"])):
        dn, _ = uncoupled_energies(B, n + 1, species, omega_m)
        _, up = uncoupled_energies(B, n, species, omega_m)
        lo, hi, gap = dressed_energies(B, n, species, g0, omega_m, pair_of(p))
        for i in range(B.size):
            t.add(B[i], n, dn[i], up[i], lo[i], hi[i], gap)
    return t


def cmd_lz_check(p) -> Table:
    species = species_of(p)
    g0 = _g0(p)
    p1 = np.linspace(p["p_min"], p["p_max"], int(p["n_rates"]))
    rates = np.array([rate_for_probability(q, g0, species) for q in p1])
    n_values = np.asarray(p["n_values"])
    nn, rr = np.meshgrid(n_values, rates, indexing="ij")
    tdse = tdse_transition_probability(np.sqrt(nn) * g0, chirp_rate(species, rr), window=p["window"])
    t = Table(["rate_T_per_s", "n", "p_analytic", "p_tdse", "abs_err"])
    t.notes.append(f"g0 = {fmt(g0)} rad/s")
    for i, n in enumerate(n_values):
        for j, r in enumerate(rates):
            a = lz_probability(int(n), g0, species, r)
            t.add(r, int(n), a, tdse[i, j], abs(tdse[i, j] - a))
    return t


def _schedule(p, key="p1") -> LZSchedule:
    kind = p["schedule"]
    if kind == "first-rung":
        return LZSchedule.from_first_rung(p[key])
    if kind == "constant":
        return LZSchedule.constant(p[key])
    raise ConfigError(f"schedule: expected 'first-rung' or 'constant', got {kind!r}")


def _n_max(p) -> Optional[int]:
    return int(p["n_max"]) if int(p["n_max"]) > 0 else None


def cmd_cool(p) -> Table:
    omega_m = p["omega_m"]
    if int(p["fock_n"]) >= 0:
        n = int(p["fock_n"])
        initial = PopulationState.fock(n, Spin.DOWN, _n_max(p) or n + 1)
    else:
        T0 = temperature_for_occupation(p["nbar0"], omega_m)
        initial = thermal_populations(T0, omega_m, _n_max(p))
    schedule = _schedule(p)
    trace = cooling_run(initial, schedule, int(p["steps"]), omega_m=omega_m)
    t = Table(["step", "nbar", "p1", "p_down", "T_K"])
    t.notes.append(f"resolved n_max: {initial.n_max}")
    for s in trace.steps:
        t.add(s.step, s.nbar, schedule(1), s.p_down, s.temperature)
    return t


def cmd_thermo(p) -> Table:
    omega_m = p["omega_m"]
    schedule = _schedule(p)
    t = Table(["T", "p_flip_down", "p_flip_up", "ratio", "boltzmann", "recovered_T", "n_max"])
    for T in p["T"]:
        res = thermometry_flip_probabilities(T, omega_m, schedule, _n_max(p))
        recovered = temperature_from_ratio(res.ratio, omega_m) if 0 <= res.ratio < 1 else float("nan")
        t.add(T, res.p_flip_down, res.p_flip_up, res.ratio, boltzmann_factor(T, omega_m), recovered, res.n_max)
    return t


def cmd_entangle(p) -> Table:
    spin = p["initial_spin"]
    state = entangle_two_resonators(
        int(p["n1"]), int(p["n2"]), p["p1"], p["p2"], initial_spin=spin, phi=p["phi"]
    )
    t = Table(["n1", "n2", "spin", "re", "im", "abs", "p_outcome", "conditional_abs", "schmidt_rank"])
    projected = {s: project_spin(state, s) for s in (Spin.DOWN, Spin.UP)}
    for n1, n2, s, amp in state.nonzero(1e-15):
        pr = projected[s]
        t.add(n1, n2, s.name.lower(), amp.real, amp.imag, abs(amp), pr.probability,
              abs(pr.amplitudes[n1, n2]), pr.schmidt_rank())
    return t


def _chip_geometry(p) -> dict:
    return {k: p[k] for k in GEOMETRY_KEYS}


def cmd_chip_map(p) -> Table:
    species = species_of(p)
    m_F = p["m_F"]
    mode = p["mode"]
    geom = _chip_geometry(p)
    box = (
        (geom["box_x_min"], geom["box_y_min"], geom["box_z_min"]),
        (geom["box_x_max"], geom["box_y_max"], geom["box_z_max"]),
    )
    if mode == "bias-pair":
        x = np.linspace(p["x_min"], p["x_max"], int(p["n_points"]))
        prof = bias_pair_profile(
            x, height=p["height"], current=p["wire_current"], r0=p["r0"], alpha=p["alpha"],
            species=species, pair=pair_of(p),
        )
        t = Table(["x", "Bx", "By", "Bz", "B", "rabi_dipole_rad_s", "rabi_dc_rad_s"])
        for i in range(x.size):
            t.add(x[i], *prof.B[i], prof.magnitude[i], prof.rabi_dipole[i], prof.rabi_dc[i])
        return t
    t = Table(["I_Z", "axis", "x", "y", "z", "Bx", "By", "Bz", "B", "U"])
    for I_Z in p["I_Z"]:
        asm = z_trap_assembly(I_Z, p["I_B"], geom)
        if mode == "grid":
            k = int(p["grid_points"])
            axes = [np.linspace(box[0][i], box[1][i], k) for i in range(3)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
            label = "grid"
        elif mode == "section":
            m = trap_minimum(asm, box, species, m_F)
            t.notes.append(
                f"I_Z = {fmt(I_Z)}: minimum at ({', '.join(fmt(c) for c in m.position)}) m, "
                f"|B| = {fmt(m.B_min)} T, curvatures = ({', '.join(fmt(c) for c in m.curvatures)}) J/m^2"
            )
            s = np.linspace(-p["half_width"], p["half_width"], int(p["n_points"]))
            pts, labels = [], []
            for axis, name in enumerate("xyz"):
                line = np.tile(m.position, (s.size, 1))
                line[:, axis] = line[:, axis] + s
                keep = line[:, 2] > 0
                pts.append(line[keep])
                labels += [name] * int(keep.sum())
            pts = np.concatenate(pts)
            label = labels
        else:
            raise ConfigError(f"mode: expected section | grid | bias-pair, got {mode!r}")
        B = asm.field(pts)
        mag = np.linalg.norm(B, axis=-1)
        U = trap_potential(species, m_F, pts, asm)
        for i in range(pts.shape[0]):
            lab = label if isinstance(label, str) else label[i]
            t.add(I_Z, lab, *pts[i], *B[i], mag[i], U[i])
    return t


def cmd_acceptance(p) -> Table:
    only = p["only"] or None
    t = Table(["criterion", "name", "passed", "detail"])
    for r in acceptance.run_all(only):
        t.add(r.number, r.name, r.passed, r.detail)
    return t


@dataclass(frozen=True)
class Command:
    run: Callable
    keys: dict
    help: str
    default_preset: Optional[str] = None


_R = {**SPECIES_KEYS, **RESONATOR_KEYS}

COMMANDS: dict[str, Command] = {
    "coupling": Command(
        cmd_coupling,
        {**_R, "r0": Key(1e-6), "alpha": Key(10e-9), "theta": Key(math.pi / 2),
         "n_atoms": Key(1, "int"), "T_s": Key(295.0, help="substrate temperature, K")},
        "coupling summary for a resonator preset",
    ),
    "fields": Command(
        cmd_fields,
        {**RESONATOR_KEYS, "r0_min": Key(0.2e-6), "r0_max": Key(10e-6), "n_points": Key(50, "int"),
         "alphas": Key((1e-9, 5e-9, 10e-9), "floats"), "numeric": Key(0, "int")},
        "static field, gradient and drive amplitude versus distance",
    ),
    "ladder": Command(
        cmd_ladder,
        {**_R, "g0": Key("auto", "str"), "r0": Key(1e-6), "B_min": Key(0.0), "B_max": Key(0.0),
         "n_points": Key(201, "int"), "n_levels": Key(4, "int")},
        "dressed-state energies versus static field",
    ),
    "lz-check": Command(
        cmd_lz_check,
        {**_R, "g0": Key("auto", "str"), "r0": Key(1e-6), "n_values": Key((1, 2, 5), "ints"),
         "p_min": Key(0.05), "p_max": Key(0.95), "n_rates": Key(20, "int"), "window": Key(40.0)},
        "analytic Landau-Zener probability against direct integration",
    ),
    "cool": Command(
        cmd_cool,
        {"omega_m": RESONATOR_KEYS["omega_m"], "nbar0": Key(50.0), "fock_n": Key(-1, "int"),
         "steps": Key(200, "int"), "p1": Key(1.0), "schedule": Key("first-rung", "str"),
         "n_max": Key(0, "int")},
        "sweep plus optical-pumping cooling trace",
    ),
    "thermo": Command(
        cmd_thermo,
        {"omega_m": RESONATOR_KEYS["omega_m"], "T": Key((1e-4,), "floats"), "p1": Key(0.5),
         "schedule": Key("first-rung", "str"), "n_max": Key(0, "int")},
        "flip-probability thermometry",
    ),
    "entangle": Command(
        cmd_entangle,
        {"n1": Key(0, "int"), "n2": Key(0, "int"), "p1": Key(0.5), "p2": Key(0.5),
         "initial_spin": Key("up", "str"), "phi": Key(0.0)},
        "two-resonator entanglement via a shared spin",
    ),
    "chip-map": Command(
        cmd_chip_map,
        {**SPECIES_KEYS, **GEOMETRY_KEYS, "m_F": Key(-1.0), "mode": Key("section", "str"),
         "I_Z": Key((10.0, 6.0, 2.0), "floats"), "I_B": Key(-5.0), "half_width": Key(0.3e-3),
         "n_points": Key(61, "int"), "grid_points": Key(16, "int"), "x_min": Key(-40e-6),
         "x_max": Key(40e-6), "height": Key(4e-6), "wire_current": Key(1.0), "r0": Key(1e-6),
         "alpha": Key(10e-9)},
        "Z-trap cross-sections, field grids and the two-wire bias profile",
    ),
    "acceptance": Command(
        cmd_acceptance,
        {"only": Key((), "ints")},
        "run the acceptance criteria",
    ),
}


# --- argument handling --------------------------------------------------------------


def _normalize(name: str, keys: dict) -> str:
    if name in keys:
        return name
    alt = name.replace("-", "_")
    if alt in keys:
        return alt
    raise ConfigError(f"unknown key {name!r}; valid keys: {', '.join(sorted(keys))}")


def _extra_pairs(tokens: list) -> list:
    out, i = [], 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        body = tok[2:]
        if "=" in body:
            k, v = body.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            k, v = body, tokens[i + 1]
            i += 2
        out.append((k, v))
    return out


def resolve(command: str, preset: Optional[str], config: Optional[str], sets: list, extras: list) -> dict:
    keys = COMMANDS[command].keys
    params = {k: key.default for k, key in keys.items()}

    def put(name, raw):
        k = _normalize(name, keys)
        params[k] = _parse_value(k, keys[k], raw)

    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        applicable = {k: v for k, v in PRESETS[preset].items() if k in keys}
        if not applicable:
            raise ConfigError(f"preset {preset!r} sets no keys used by {command!r}")
        for k, v in applicable.items():
            params[k] = _parse_value(k, keys[k], fmt(v) if not isinstance(v, str) else v)
    if config is not None:
        try:
            mapping = load_config(config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for k, v in mapping.items():
            if k == "version":
                continue
            put(k, v)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        put(k.strip(), v.strip())
    for k, v in _extra_pairs(extras):
        put(k, v)
    return params


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--preset", help="named preset: " + ", ".join(sorted(PRESETS)))
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a key (SI)")
    common.add_argument("--config", help="key = value file applied after the preset")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "table"), default="csv")
    parser = argparse.ArgumentParser(
        prog="nanospin",
        description="Atom/nanostring coupling, Landau-Zener protocols and chip fields.",
        epilog="Any other --key value pair overrides a key; see '<command> --help' for keys.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cmd in COMMANDS.items():
        keys = ", ".join(f"{k}={_echo(v.default)}" for k, v in cmd.keys.items())
        sub.add_parser(
            name, parents=[common], help=cmd.help, description=f"{cmd.help}. Keys: {keys}",
            allow_abbrev=False,
        )
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        params = resolve(args.command, args.preset, args.config, args.set, extras)
        table = COMMANDS[args.command].run(params)
    except (ConfigError, DomainError) as exc:
        print(f"nanospin {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, TruncationError, SearchError, ArithmeticError) as exc:
        hint = ""
        if getattr(exc, "suggested_n_max", None):
            hint = f" (try n_max = {exc.suggested_n_max})"
        print(f"nanospin {args.command}: numerical error: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    except NanospinError as exc:
        print(f"nanospin {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    echo = dict(params)
    if args.preset:
        echo["preset"] = args.preset
    text = table.render(args.command, echo, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "acceptance" and not all(row[2] for row in table.rows):
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
