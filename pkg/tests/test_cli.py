import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from cptsim import cli


def write_config(path: Path, config: dict) -> Path:
    target = path / "config.json"
    target.write_text(json.dumps(config))
    return target


def read_summary(directory: Path, label: str) -> dict:
    return json.loads((directory / f"{label}_summary.json").read_text())


def read_rows(directory: Path, label: str):
    with open(directory / f"{label}_timeseries.csv") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, rows


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(cli.ValidationError, match="bogus"):
            cli.validate_config({"kind": "pump", "bogus": 1})

    def test_unknown_parameter_named(self):
        with pytest.raises(cli.ValidationError, match="rabi_typo"):
            cli.validate_config({"kind": "pump", "params": {"which": 1, "rabi_typo": 2}})

    def test_missing_required_parameter_named(self):
        with pytest.raises(cli.ValidationError, match="total_rabi"):
            cli.validate_config({"kind": "flip", "params": {"ramp_time": 1.0}})

    def test_unknown_kind(self):
        with pytest.raises(cli.ValidationError, match="kind"):
            cli.validate_config({"kind": "teleport"})

    def test_type_checking(self):
        with pytest.raises(cli.ValidationError, match="which"):
            cli.validate_config({"kind": "pump", "params": {"which": "one"}})

    def test_defaults_filled(self):
        effective = cli.validate_config({"kind": "pump", "params": {"which": 0}})
        assert effective["params"]["pump_rabi"] == 1.0
        assert effective["seed"] == 0
        assert effective["label"] == "pump"

    def test_schema_covers_every_runner(self):
        assert set(cli.SCENARIO_SCHEMAS) == set(cli.RUNNERS)


class TestRun:
    def test_pump_writes_artifacts(self, tmp_path, capsys):
        code = cli.run(
            {"kind": "pump", "params": {"which": 1}, "reproducible": True},
            out_dir=str(tmp_path),
        )
        assert code == 0
        summary = read_summary(tmp_path, "pump")
        assert summary["results"]["fidelity"] >= 0.999999
        assert summary["results"]["t_settle"] <= 500.0
        header, rows = read_rows(tmp_path, "pump")
        assert header == cli.ATOM_COLUMNS
        for row in rows:
            assert sum(row[1:8]) == pytest.approx(1.0, abs=1e-9)

    def test_missing_required_key_exit_code(self, tmp_path, capsys):
        code = cli.run({"kind": "flip", "params": {"ramp_time": 1.0}}, str(tmp_path))
        assert code == cli.EXIT_VALIDATION
        assert "total_rabi" in capsys.readouterr().err

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        with np.errstate(all="ignore"):
            code = cli.run(
                {"kind": "pump", "params": {"which": 1}, "dt": 3.0}, str(tmp_path)
            )
        assert code == cli.EXIT_NUMERICAL

    def test_hold_scenario_phase(self, tmp_path):
        omega_dd = 0.05
        code = cli.run(
            {
                "kind": "cphasehold",
                "params": {"omega_dd": omega_dd, "hold_time": math.pi / omega_dd},
                "reproducible": True,
            },
            str(tmp_path),
        )
        assert code == 0
        summary = read_summary(tmp_path, "cphasehold")
        assert abs(summary["results"]["phase_accumulated"] - math.pi) <= 1e-6
        header, rows = read_rows(tmp_path, "cphasehold")
        assert header == cli.PAIR_COLUMNS
        assert rows[-1][7] == pytest.approx(math.pi, abs=1e-6)

    def test_deterministic_summaries(self, tmp_path):
        config = {"kind": "pump", "params": {"which": 0}, "reproducible": True}
        cli.run(dict(config), str(tmp_path / "a"))
        cli.run(dict(config), str(tmp_path / "b"))
        a = (tmp_path / "a" / "pump_summary.json").read_bytes()
        b = (tmp_path / "b" / "pump_summary.json").read_bytes()
        assert a == b

    def test_timestamp_present_without_reproducible(self, tmp_path):
        cli.run({"kind": "units", "params": {
            "gamma1": 2.2e10, "gamma2": 1.85e10, "b_field": 1e-4, "r": 1e-6,
        }}, str(tmp_path))
        summary = read_summary(tmp_path, "units")
        assert "meta" in summary and "written_at" in summary["meta"]

    def test_config_echo_round_trip(self, tmp_path):
        config = {
            "kind": "pump",
            "params": {"which": 1, "pump_rabi": 0.8},
            "reproducible": True,
        }
        cli.run(dict(config), str(tmp_path / "first"))
        echoed = read_summary(tmp_path / "first", "pump")["inputs"]
        echoed = dict(echoed, output_dir=str(tmp_path / "second"))
        code = cli.run(echoed)
        assert code == 0
        first = read_summary(tmp_path / "first", "pump")["results"]
        second = read_summary(tmp_path / "second", "pump")["results"]
        assert first == second

    def test_units_scenario_reports_per_gauss_line(self, tmp_path):
        gamma = 2 * math.pi * 350e3 / 1e-4
        cli.run(
            {
                "kind": "units",
                "params": {"gamma1": gamma, "gamma2": gamma, "b_field": 1e-4, "r": 1e-6},
                "reproducible": True,
            },
            str(tmp_path),
        )
        results = read_summary(tmp_path, "units")["results"]
        assert results["khz_per_gauss_1"] == pytest.approx(350.0)
        assert "kHz per Gauss" in results["sanity_line"]

    def test_random_initial_seeded(self, tmp_path):
        base = {
            "kind": "pump",
            "params": {"which": 1, "initial": "random"},
            "reproducible": True,
        }
        cli.run(dict(base, seed=3), str(tmp_path / "a"))
        cli.run(dict(base, seed=3), str(tmp_path / "b"))
        cli.run(dict(base, seed=4), str(tmp_path / "c"))
        a = read_summary(tmp_path / "a", "pump")
        b = read_summary(tmp_path / "b", "pump")
        c = read_summary(tmp_path / "c", "pump")
        assert a == b
        assert a["results"]["t_settle"] != c["results"]["t_settle"]


class TestMain:
    def test_list_catalog(self, capsys):
        assert cli.main(["--list"]) == 0
        out = capsys.readouterr().out
        for kind in cli.SCENARIO_SCHEMAS:
            assert kind in out
        assert "kHz-per-Gauss" in out or "kHz per Gauss" in out

    def test_config_and_overrides(self, tmp_path, capsys):
        path = write_config(tmp_path, {"kind": "pump", "params": {"which": 1}})
        code = cli.main(
            [
                "--config", str(path),
                "--set", "params.which=0",
                "--set", "params.max_time=200",
                "--out", str(tmp_path / "out"),
                "--reproducible",
            ]
        )
        assert code == 0
        summary = read_summary(tmp_path / "out", "pump")
        assert summary["inputs"]["params"]["which"] == 0
        assert summary["inputs"]["params"]["max_time"] == 200

    def test_missing_config_file(self, tmp_path, capsys):
        assert cli.main(["--config", str(tmp_path / "nope.json")]) == cli.EXIT_IO

    def test_invalid_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["--config", str(bad)]) == cli.EXIT_VALIDATION

    def test_batch_configs(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            {
                "scenarios": [
                    {"kind": "pump", "params": {"which": 0}, "label": "zero"},
                    {"kind": "pump", "params": {"which": 1}, "label": "one"},
                ]
            },
        )
        code = cli.main(
            ["--config", str(path), "--out", str(tmp_path / "out"), "--reproducible"]
        )
        assert code == 0
        assert read_summary(tmp_path / "out", "zero")["results"]["fidelity"] >= 0.999999
        assert read_summary(tmp_path / "out", "one")["results"]["fidelity"] >= 0.999999

    def test_validation_exit_bubbles_from_batch(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            {"scenarios": [{"kind": "pump", "params": {"which": 1, "oops": 2}}]},
        )
        assert cli.main(["--config", str(path)]) == cli.EXIT_VALIDATION
