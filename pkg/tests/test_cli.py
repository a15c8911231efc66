"""Model files and command-line behavior."""

import json
import subprocess
import sys

import pytest

from lcmech import ModelFileError, parse_model_text
from lcmech.cli import main, run_verification
from lcmech.modelfile import (
    E_COORDS_LEN,
    E_LAGRANGIAN_ORDER,
    E_MISSING_KEY,
    E_SIGMA_JETS,
    E_SYNTAX,
    E_VALUE,
    jet_key,
)
from lcmech.models import BUNDLED, bundled_path

GOOD = """
dim = 1
order = 1
coordinates = x
lagrangian = 1/2*x'^2 - 1/2*x^2
sigma = x
simulation {
  t0 = 0
  t1 = 1
  dt = 0.001
  initial = x: 1, x': 0
}
"""


def _mutate(**repl):
    lines = GOOD.strip().splitlines()
    out = []
    for line in lines:
        key = line.split("=")[0].strip() if "=" in line else None
        if key in repl:
            if repl[key] is not None:
                out.append(f"{key} = {repl[key]}")
        else:
            out.append(line)
    return "\n".join(out)


# ---------------------------------------------------------------------------
# model files


def test_parse_good_model():
    mf = parse_model_text(GOOD)
    assert mf.coordinates == ["x"]
    assert mf.simulation.dt == 0.001
    assert mf.simulation.initial == {"x": 1.0, "x'": 0.0}


def test_model_error_codes_are_distinct():
    cases = {
        E_SYNTAX: _mutate(lagrangian="1/2*x'^2 +"),
        E_MISSING_KEY: _mutate(sigma=None),
        E_VALUE: _mutate(dim="one"),
        E_COORDS_LEN: _mutate(coordinates="x, y"),
        E_LAGRANGIAN_ORDER: _mutate(lagrangian="1/2*x''^2"),
        E_SIGMA_JETS: _mutate(sigma="x'"),
    }
    for code, text in cases.items():
        with pytest.raises(ModelFileError) as err:
            parse_model_text(text)
        assert err.value.code == code, code


def test_model_abstract_sigma_keyword():
    mf = parse_model_text(_mutate(sigma="abstract"))
    assert mf.model.sigma.is_abstract


def test_model_syntax_errors_in_structure():
    with pytest.raises(ModelFileError) as err:
        parse_model_text("dim = 1\njust words\n")
    assert err.value.code == E_SYNTAX
    with pytest.raises(ModelFileError) as err:
        parse_model_text(GOOD.strip() + "\nsimulation {\n t0 = 0\n")
    assert err.value.code == E_SYNTAX


def test_jet_key_resolution():
    assert jet_key("x", ["x", "y"], 5) == (1, 0)
    assert jet_key("y''", ["x", "y"], 5) == (2, 2)
    assert jet_key("x(4)", ["x", "y"], 5) == (1, 4)
    with pytest.raises(ModelFileError):
        jet_key("z'", ["x", "y"], 5)


def test_bundled_models_all_load():
    for name in BUNDLED:
        mf = parse_model_text(bundled_path(name).read_text(), name=name)
        assert mf.model.space.dim >= 1


# ---------------------------------------------------------------------------
# verification reports


def test_run_verification_is_deterministic():
    from lcmech import load_model

    mf = load_model(bundled_path("conformal_toy_1d"))
    r1 = run_verification(mf.model, mf.name, seed=42, trials=20, tol=1e-8)
    r2 = run_verification(mf.model, mf.name, seed=42, trials=20, tol=1e-8)
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    assert r1["all_pass"]


def test_run_verification_fault_injection_fails_with_witness():
    from lcmech import load_model

    mf = load_model(bundled_path("chiral_lc"))
    report = run_verification(
        mf.model, mf.name, seed=42, trials=20, tol=1e-8, inject_fault=True
    )
    assert not report["all_pass"]
    failing = [c for c in report["checks"] if not c["pass"]]
    assert failing and failing[0]["witness"] is not None
    assert {"lhs", "rhs", "point"} <= set(failing[0]["witness"])


# ---------------------------------------------------------------------------
# CLI entry point (in-process via main())


def test_cli_derive_text(capsys):
    code = main(["derive", str(bundled_path("chiral_classical")), "--form", "classical"])
    out = capsys.readouterr().out
    assert code == 0
    assert "lam*y''' - m*x''" in out


def test_cli_derive_latex(capsys):
    code = main(["derive", str(bundled_path("harmonic_oscillator")), "--format", "latex"])
    out = capsys.readouterr().out
    assert code == 0
    assert "\\ddot{" in out


def test_cli_verify_exit_codes(capsys):
    assert main(["verify", str(bundled_path("chiral_lc")), "--seed", "1"]) == 0
    capsys.readouterr()
    assert (
        main(["verify", str(bundled_path("chiral_lc")), "--seed", "1", "--inject-fault"])
        == 1
    )
    report = json.loads(capsys.readouterr().out)
    assert not report["all_pass"]


def test_cli_input_error_exit_code(tmp_path, capsys):
    assert main(["derive", str(tmp_path / "missing.model")]) == 2
    bad = tmp_path / "bad.model"
    bad.write_text(_mutate(lagrangian="1/2*x'^2 +"))
    assert main(["derive", str(bad)]) == 2


def test_cli_numerical_error_exit_code(tmp_path, capsys):
    deg = tmp_path / "deg.model"
    deg.write_text(
        "dim = 1\norder = 1\ncoordinates = x\nlagrangian = x\nsigma = 0\n"
        "simulation {\n t0 = 0\n t1 = 1\n dt = 0.01\n initial = x: 0, x': 0\n}\n"
    )
    assert main(["simulate", str(deg)]) == 3


def test_cli_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = main(
        [
            "simulate",
            str(bundled_path("harmonic_oscillator")),
            "--output",
            str(out),
            "--t1",
            "0.5",
            "--dt",
            "0.01",
        ]
    )
    assert code == 0
    summary = capsys.readouterr().out
    assert "max_residual=" in summary and "min_det=" in summary
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,q1,q1_d1")
    assert lines[0].endswith("residual_max")
    assert len(lines) == 52  # header + 51 states


def test_cli_simulate_missing_initial_data(tmp_path, capsys):
    m = tmp_path / "m.model"
    m.write_text(_mutate(), encoding="utf-8")
    # Strip the initial line entirely.
    text = "\n".join(
        l for l in m.read_text().splitlines() if not l.strip().startswith("initial")
    )
    m.write_text(text)
    assert main(["simulate", str(m), "--output", str(tmp_path / "o.csv")]) == 2


def test_cli_bell_output(capsys):
    assert main(["bell", "--s", "3", "--m", "2"]) == 0
    out = capsys.readouterr().out
    assert "B[3,2] = 3*q''^i*q'^j" in out or "B[3,2] = 3*q'^i*q''^j" in out
    assert "phi_ij" in out


def test_cli_bell_rejects_bad_orders(capsys):
    assert main(["bell", "--s", "9"]) == 2
    assert main(["bell", "--s", "3", "--m", "5"]) == 2


def test_cli_byte_identical_reports():
    cmd = [sys.executable, "-m", "lcmech.cli", "verify", str(bundled_path("chiral_lc")), "--seed", "42"]
    r1 = subprocess.run(cmd, capture_output=True)
    r2 = subprocess.run(cmd, capture_output=True)
    assert r1.returncode == r2.returncode == 0
    assert r1.stdout == r2.stdout
