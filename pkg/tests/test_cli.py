import csv
import io
import math
import subprocess
import sys

import pytest

from nanospin.cli import COMMANDS, main
from nanospin.constants import CODATA2018


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_fields_dipole_columns(capsys):
    code, out, _ = run(capsys, "fields", "--preset", "string-dipole", "--n_points", "5")
    assert code == 0
    data = rows(out)
    assert list(data[0]) == [
        "r0_m", "static_T", "gradient_T_per_m", "drive_T_alpha_1nm", "drive_T_alpha_5nm", "drive_T_alpha_10nm"
    ]
    k = CODATA2018.mu_0 * 6.7e-11 / (4 * math.pi)
    for r in data:
        r0 = float(r["r0_m"])
        assert float(r["static_T"]) == pytest.approx(k / r0**3, rel=1e-14)
        assert float(r["gradient_T_per_m"]) == pytest.approx(3 * k / r0**4, rel=1e-14)
        assert float(r["drive_T_alpha_5nm"]) == pytest.approx(3 * k / r0**4 * 5e-9, rel=1e-14)


def test_thermo_ratio_is_boltzmann(capsys):
    code, out, _ = run(capsys, "thermo", "--omega-m", "5.34e6", "--T", "1e-4")
    assert code == 0
    (r,) = rows(out)
    want = math.exp(-CODATA2018.hbar * 5.34e6 / (CODATA2018.k_B * 1e-4))
    assert float(r["ratio"]) == pytest.approx(want, abs=1e-12)
    assert float(r["recovered_T"]) == pytest.approx(1e-4, rel=1e-9)


def test_byte_determinism(capsys):
    args = ("cool", "--steps", "10", "--p1", "0.3")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert first.startswith("# nanospin cool\n")


def test_metadata_echo_and_precision(capsys):
    _, out, _ = run(capsys, "coupling", "--set", "r0=2e-6")
    assert "# r0 = 1.9999999999999999e-06" in out
    data = {r["quantity"]: r for r in rows(out)}
    g0 = float(data["g0"]["value"])
    assert float(data["g0"]["value_Hz"]) == pytest.approx(g0 / (2 * math.pi), rel=1e-15)
    # 17 significant digits round-trip exactly
    assert repr(float(data["g0"]["value"])) == repr(g0)


def test_unknown_preset_exit_2(capsys):
    code, out, err = run(capsys, "thermo", "--preset", "does-not-exist")
    assert code == 2 and out == ""
    assert "unknown preset" in err


def test_unknown_key_lists_valid_keys(capsys):
    code, _, err = run(capsys, "thermo", "--set", "colour=blue")
    assert code == 2
    for k in COMMANDS["thermo"].keys:
        assert k in err


def test_bad_value_exit_2(capsys):
    code, _, err = run(capsys, "thermo", "--T", "warm")
    assert code == 2


def test_numerical_error_exit_3(capsys):
    code, _, err = run(capsys, "thermo", "--T", "1", "--n_max", "3")
    assert code == 3
    assert "n_max" in err


def test_config_file_and_out(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\nn1 = 0\nn2 = 0\np1 = 1/2\np2 = 1\n")
    out = tmp_path / "ent.csv"
    code, stdout, _ = run(capsys, "entangle", "--config", str(cfg), "--out", str(out))
    assert code == 0 and stdout == ""
    data = rows(out.read_text())
    assert {(r["n1"], r["n2"], r["spin"]) for r in data} == {("1", "0", "down"), ("0", "1", "down")}
    for r in data:
        assert float(r["abs"]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_table_format(capsys):
    code, out, _ = run(capsys, "coupling", "--format", "table")
    assert code == 0
    assert "quantity" in out and "," not in out.splitlines()[-1]


def test_ladder_and_lz_check(capsys):
    code, out, _ = run(capsys, "ladder", "--n_points", "3", "--n_levels", "2", "--g0", "1e4")
    assert code == 0
    data = rows(out)
    assert len(data) == 6
    for r in data:
        assert float(r["E_lower_J"]) <= float(r["E_upper_J"])
    code, out, _ = run(capsys, "lz-check", "--n_rates", "3", "--n_values", "1")
    assert code == 0
    data = rows(out)
    assert len(data) == 3
    assert max(float(r["abs_err"]) for r in data) < 1e-2


def test_cool_fock(capsys):
    code, out, _ = run(capsys, "cool", "--fock_n", "4", "--steps", "5", "--schedule", "constant")
    assert [float(r["nbar"]) for r in rows(out)] == [4, 3, 2, 1, 0, 0]


def test_chip_map_modes(capsys):
    code, out, _ = run(capsys, "chip-map", "--I_Z", "10,2", "--n_points", "5")
    assert code == 0
    data = rows(out)
    assert {r["axis"] for r in data} == {"x", "y", "z"}
    assert list(data[0]) == ["I_Z", "axis", "x", "y", "z", "Bx", "By", "Bz", "B", "U"]
    code, out, _ = run(capsys, "chip-map", "--mode", "grid", "--grid_points", "3", "--I_Z", "6")
    assert len(rows(out)) == 27
    code, out, _ = run(capsys, "chip-map", "--mode", "bias-pair", "--n_points", "4")
    assert len(rows(out)) == 4
    code, _, _ = run(capsys, "chip-map", "--mode", "sideways")
    assert code == 2


def test_acceptance_subset(capsys):
    code, out, _ = run(capsys, "acceptance", "--only", "1,3,12")
    assert code == 0
    assert [r["criterion"] for r in rows(out)] == ["1", "3", "12"]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "nanospin.cli", "entangle"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert "n1,n2,spin" in proc.stdout
