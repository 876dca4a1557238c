"""Config parsing and command-line behavior, including determinism."""

import json
import math
from pathlib import Path

import pytest

from fastgate.cli import main
from fastgate.config import parse_trap_ion, parse_sequence
from fastgate.exceptions import ConfigurationError

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "fastgate" / "data"

GATE_CONFIG = {
    "ion": {"mass_amu": 40.0, "kick_wavelength_nm": 393.3, "excited_state_lifetime_ns": 6.9},
    "trap": {"frequency_hz": 270000.0},
    "laser": {"repetition_rate_hz": 5e9, "momentum_factor": 2.0},
    "optimizer": {"population_size": 24, "generations": 5, "max_kicks": 8,
                  "max_multiplicity": 8, "duration_budget_trap_periods": 0.85,
                  "tolerance_eps": 1e-3, "tolerance_phi_rad": 1e-3,
                  "seed_kick_counts": [4]},
    "error_budget": {"t_wait_ps": 1.0, "pulse_duration_ps": 0.5},
    "hardware": {"horizon_slots": 100000},
}

RAP_CONFIG = {
    "pulse": {"fwhm_tl_ps": 1.0, "gdd_ps2": 5.0, "peak_rabi_rad_per_s": 6.283185307179586e12},
    "scan": {"energy_min": 0.05, "energy_max": 2.0, "points": 5, "spacing": "log"},
    "solver": {"tolerance": 1e-8},
}

DISPERSION_CONFIG = {
    "components": [
        {"name": "fiber grating", "dispersion_ps_nm": -9.5, "tunable_range_ps_nm": 0.005},
        {"name": "volume grating", "dispersion_ps_nm": 12.5},
        {"name": "stretcher 100 m", "dispersion_ps_nm": -4.1},
    ],
    "stretcher_coeff_ps_nm_per_m": -0.041,
}

PATTERN_CONFIG = {
    "sequence": {"slots": [0, 40, 300], "multiplicities": [2, 5, 1]},
    "hardware": {"horizon_slots": 20000},
}

BUDGET_CONFIG = {"t_wait_ps": 1.0, "pulse_duration_ps": 0.5, "lifetime_ns": 6.9, "kicks": 4}

TRAJECTORY_CONFIG = {
    "ion": {"mass_amu": 40.0},
    "trap": {"frequency_hz": 270000.0},
    "laser": {"repetition_rate_hz": 5e9, "momentum_factor": 2.0},
    "sequence": {"slots": [0, 5000, 9500, 14000], "multiplicities": [1, 2, 2, 1]},
    "spins": [[1, 1], [1, -1]],
}

ELLIPSE_CONFIG = {"input_csv": str(DATA_DIR / "ellipse_fixture.csv")}


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def run_cli(tmp_path, command, payload, out="out", seed=1, extra=()):
    cfg = write_config(tmp_path, payload, f"{command}.json")
    return main([command, "--config", cfg, "--out", str(tmp_path / out),
                 "--seed", str(seed), *extra])


class TestConfigParsing:
    def test_unknown_keys_rejected_with_name(self, tmp_path):
        with pytest.raises(ConfigurationError, match="trap.frequnecy_hz"):
            parse_trap_ion({"trap": {"frequnecy_hz": 1.0}})

    def test_frequency_is_ordinary_hz(self):
        trap = parse_trap_ion({"trap": {"frequency_hz": 270000.0}})
        assert trap.trap_frequency == pytest.approx(2 * math.pi * 270000.0)

    def test_sequence_parsing_defaults(self):
        seq = parse_sequence({"sequence": {"slots": [3, 9]}})
        assert seq.multiplicities == (1, 1)
        assert seq.momentum_factor == 2.0

    def test_non_numeric_rejected(self):
        with pytest.raises(ConfigurationError, match="ion.mass_amu"):
            parse_trap_ion({"ion": {"mass_amu": "forty"}})


class TestSubcommands:
    def test_design_gate_writes_artifacts(self, tmp_path):
        code = run_cli(tmp_path, "design-gate", GATE_CONFIG, seed=5)
        assert code == 0
        out = tmp_path / "out"
        for name in ("best_sequence.json", "gate_report.json", "ga_history.csv",
                     "trajectory.svg", "pattern.json", "pattern.bin"):
            assert (out / name).exists(), name
        report = json.loads((out / "gate_report.json").read_text())
        assert report["feasible"] is True
        assert report["duration_trap_periods"] <= 0.85
        assert report["gate_error"] <= 1e-3
        assert report["_meta"]["tool"] == "fastgate"

    def test_trajectory_and_formats_filter(self, tmp_path):
        code = run_cli(tmp_path, "simulate-trajectory", TRAJECTORY_CONFIG,
                       extra=("--format", "csv"))
        assert code == 0
        out = tmp_path / "out"
        assert (out / "trajectory.csv").exists()
        assert not (out / "trajectory.svg").exists()
        assert not (out / "gate_report.json").exists()

    def test_rap_scan_outputs_monotone_then_plateau(self, tmp_path):
        code = run_cli(tmp_path, "rap-scan", RAP_CONFIG)
        assert code == 0
        rows = (tmp_path / "out" / "rap_scan.csv").read_text().splitlines()
        data = [tuple(map(float, line.split(","))) for line in rows
                if line and not line.startswith(("#", "energy"))]
        assert len(data) == 5
        probs = [p for _, p in data]
        assert probs == sorted(probs)
        assert probs[-1] > 0.99

    def test_fit_ellipse_bundled_fixture(self, tmp_path):
        code = run_cli(tmp_path, "fit-ellipse", ELLIPSE_CONFIG)
        assert code == 0
        fit = json.loads((tmp_path / "out" / "ellipse_fit.json").read_text())
        assert fit["relative_phase_rad"] == pytest.approx(0.7, abs=1e-6)
        assert fit["degenerate"] is False

    def test_dispersion_reference_numbers(self, tmp_path):
        code = run_cli(tmp_path, "dispersion", DISPERSION_CONFIG)
        assert code == 0
        doc = json.loads((tmp_path / "out" / "dispersion.json").read_text())
        assert doc["residual_ps_nm"] == pytest.approx(-1.1)
        assert doc["stretcher_delta_m"] == pytest.approx(-26.829, abs=0.01)

    def test_pattern_compiles_and_validates(self, tmp_path):
        code = run_cli(tmp_path, "pattern", PATTERN_CONFIG)
        assert code == 0
        validation = json.loads((tmp_path / "out" / "pattern_validation.json").read_text())
        assert validation["passed"] is True

    def test_error_budget_values(self, tmp_path, capsys):
        code = run_cli(tmp_path, "error-budget", BUDGET_CONFIG)
        assert code == 0
        doc = json.loads((tmp_path / "out" / "error_budget.json").read_text())
        assert doc["per_kick_error"] == pytest.approx(1.8e-4, rel=1e-2)
        assert doc["total_infidelity"] == pytest.approx(7.24e-4, rel=1e-2)


class TestErrorPaths:
    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        bad = dict(BUDGET_CONFIG)
        bad["liftime_ns"] = 6.9
        code = run_cli(tmp_path, "error-budget", bad)
        assert code == 2
        assert "liftime_ns" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        code = main(["dispersion", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)])
        assert code == 2

    def test_invalid_sequence_exits_2(self, tmp_path):
        bad = {"sequence": {"slots": [5, 5]}, "hardware": {}}
        assert run_cli(tmp_path, "pattern", bad) == 2

    def test_infeasible_design_exits_3_with_artifacts(self, tmp_path):
        cfg = json.loads(json.dumps(GATE_CONFIG))
        cfg["optimizer"].update({"max_kicks": 2, "max_multiplicity": 1,
                                 "generations": 3, "population_size": 8,
                                 "seed_kick_counts": [2]})
        code = run_cli(tmp_path, "design-gate", cfg)
        assert code == 3
        report = json.loads((tmp_path / "out" / "gate_report.json").read_text())
        assert report["feasible"] is False

    def test_env_var_default_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FASTGATE_OUT", str(tmp_path / "envout"))
        cfg = write_config(tmp_path, BUDGET_CONFIG)
        assert main(["error-budget", "--config", cfg]) == 0
        assert (tmp_path / "envout" / "error_budget.json").exists()


class TestDeterminism:
    @pytest.mark.parametrize("command,payload", [
        ("design-gate", GATE_CONFIG),
        ("simulate-trajectory", TRAJECTORY_CONFIG),
        ("rap-scan", RAP_CONFIG),
        ("fit-ellipse", ELLIPSE_CONFIG),
        ("dispersion", DISPERSION_CONFIG),
        ("pattern", PATTERN_CONFIG),
        ("error-budget", BUDGET_CONFIG),
    ])
    def test_byte_identical_outputs(self, tmp_path, command, payload):
        run_cli(tmp_path, command, payload, out="a", seed=7)
        run_cli(tmp_path, command, payload, out="b", seed=7)
        files_a = sorted((tmp_path / "a").iterdir())
        files_b = sorted((tmp_path / "b").iterdir())
        assert [f.name for f in files_a] == [f.name for f in files_b]
        for fa, fb in zip(files_a, files_b):
            assert fa.read_bytes() == fb.read_bytes(), fa.name
