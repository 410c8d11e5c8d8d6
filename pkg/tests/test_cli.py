"""Tests for the command-line front end."""

import csv
import json

import numpy as np
import pytest

from nmsd import __version__
from nmsd.commands import analysis
from nmsd.commands.output import flatten
from nmsd.main import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, dispatch
from nmsd.models.results import NoiseModel
from nmsd.services import analysis_service

SMALL_DESIGN = "p = 40\nn1 = 600\nn2 = 600\n"


@pytest.fixture
def dataset_files(tmp_path):
    """Export the first trial of a small null design and return both paths."""
    config = tmp_path / "sim.cfg"
    config.write_text(SMALL_DESIGN)
    out_dir = tmp_path / "data"
    code = dispatch([
        "simulate", "--experiment", "export", "--config", str(config),
        "--export-dir", str(out_dir), "--out", str(tmp_path / "export.json"),
    ])
    assert code == EXIT_OK
    return str(out_dir / "dataset_1.csv"), str(out_dir / "dataset_2.csv")


def read_report(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


class TestAnalysisCommands:
    """Tests for noise, profile, distance and test."""

    def test_test_command(self, dataset_files, tmp_path):
        """Test the JSON report of the alignability test."""
        out = tmp_path / "test.json"
        code = dispatch(["test", "--rank", "3", *dataset_files, "--out", str(out)])
        assert code == EXIT_OK
        report = read_report(out)
        assert report["tool_version"] == __version__
        assert report["command"] == "test"
        results = report["results"]
        assert results["df"] == 2
        assert 0.0 <= results["p_value"] <= 1.0
        assert results["t_stat"] >= 0
        assert report["config_echo"]["rank"] == 3
        assert report["config_echo"]["center"] is True

    def test_noise_command_csv(self, dataset_files, tmp_path):
        """Test the per-feature CSV table of the noise command."""
        out = tmp_path / "noise.csv"
        code = dispatch(["noise", "--rank", "3", dataset_files[0], "--format", "csv", "--out", str(out)])
        assert code == EXIT_OK
        with open(out, encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 40
        assert set(rows[0]) == {"feature", "residual", "sigma"}

    def test_profile_with_intervals(self, dataset_files, tmp_path):
        """Test that --ci adds profile intervals."""
        out = tmp_path / "profile.json"
        code = dispatch(["profile", "--rank", "3", "--ci", dataset_files[0], "--out", str(out)])
        assert code == EXIT_OK
        results = read_report(out)["results"]
        assert sum(results["profile"]) == pytest.approx(1.0)
        assert len(results["intervals"]["profile"]) == 3
        assert len(results["diagnostics"]["delocalization"]) == 3

    def test_distance_command(self, dataset_files, tmp_path):
        """Test the point distance and its interval."""
        out = tmp_path / "distance.json"
        code = dispatch(["distance", "--rank", "3", "--ci", *dataset_files, "--out", str(out)])
        assert code == EXIT_OK
        results = read_report(out)["results"]
        assert results["nmsd"] >= 0
        assert "intervals" in results

    def test_kernel_command(self, dataset_files, tmp_path):
        """Test the rbf kernel comparison with the median bandwidth."""
        out = tmp_path / "kernel.json"
        code = dispatch(["kernel", "--rank", "2", "--kernel", "rbf", *dataset_files, "--out", str(out)])
        assert code == EXIT_OK
        results = read_report(out)["results"]
        assert results["bandwidth"] > 0
        assert len(results["profile_1"]) == 2

    def test_transposed_input(self, tmp_path, rng):
        """Test that --transpose reads rows as samples."""
        path = tmp_path / "samples.csv"
        np.savetxt(path, rng.standard_normal((200, 6)) * np.array([5, 1, 1, 1, 1, 1]), delimiter=",")
        out = tmp_path / "noise.json"
        code = dispatch(["noise", "--rank", "1", "--transpose", str(path), "--out", str(out)])
        assert code == EXIT_OK
        assert read_report(out)["results"]["p"] == 6


class TestExitCodes:
    """Tests for error reporting."""

    def test_missing_rank(self, dataset_files, capsys):
        """Test that a missing --rank is a usage error."""
        assert dispatch(["test", *dataset_files]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_unknown_command(self):
        """Test that an unknown subcommand is a usage error."""
        assert dispatch(["frobnicate"]) == EXIT_USAGE

    def test_version(self, capsys):
        """Test that --version exits cleanly."""
        assert dispatch(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_bad_file(self, tmp_path, capsys):
        """Test that a malformed CSV is a data error naming the line."""
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        assert dispatch(["noise", "--rank", "1", str(path)]) == EXIT_DATA
        assert "line 2" in capsys.readouterr().err

    def test_bad_config(self, tmp_path):
        """Test that an unknown config key is a data error."""
        config = tmp_path / "sim.cfg"
        config.write_text("bogus = 1\n")
        assert dispatch(["simulate", "--config", str(config)]) == EXIT_DATA

    def test_subcritical_is_numerical_error(self, dataset_files, monkeypatch, capsys):
        """Test that a subcritical spike exits 4 and names the spike."""
        def overwhelming(Y, r, c, center=False):
            return NoiseModel(
                sigma=np.full(Y.p, 1e4), boundaries=[0], kappa3=0.0, kappa4=0.0, penalty_beta=0.0
            )

        monkeypatch.setattr(analysis_service, "estimate_noise", overwhelming)
        assert dispatch(["test", "--rank", "3", *dataset_files]) == EXIT_NUMERICAL
        assert "spike 1 of dataset 1" in capsys.readouterr().err


class TestSimulateCommand:
    """Tests for the simulate subcommand."""

    def test_null_experiment(self, tmp_path):
        """Test a tiny null calibration through the CLI."""
        config = tmp_path / "sim.cfg"
        config.write_text(SMALL_DESIGN)
        out = tmp_path / "null.json"
        code = dispatch([
            "simulate", "--experiment", "null", "--config", str(config),
            "--reps", "3", "--seed", "7", "--out", str(out),
        ])
        assert code == EXIT_OK
        report = read_report(out)
        assert report["config_echo"]["sim"]["n_rep"] == 3
        assert report["config_echo"]["sim"]["master_seed"] == 7
        assert report["results"]["df"] == 2

    def test_power_experiment_csv(self, tmp_path):
        """Test the power table as CSV."""
        config = tmp_path / "sim.cfg"
        config.write_text(SMALL_DESIGN + "n_pilot = 2\n")
        out = tmp_path / "power.csv"
        code = dispatch([
            "simulate", "--experiment", "power", "--config", str(config), "--reps", "2",
            "--c-values", "1.0,1.5", "--format", "csv", "--out", str(out),
        ])
        assert code == EXIT_OK
        with open(out, encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [float(row["c"]) for row in rows] == [1.0, 1.5]


class TestOutput:
    """Tests for report flattening."""

    def test_flatten(self):
        """Test dotted keys for nested payloads."""
        rows = flatten({"a": {"b": 1, "c": [1.5, 2.0]}, "d": [{"e": 3}]})
        assert rows == [
            {"key": "a.b", "value": 1},
            {"key": "a.c", "value": "1.5;2.0"},
            {"key": "d[1].e", "value": 3},
        ]

    def test_centering_default(self):
        """Test that analysis commands center unless told otherwise."""
        class Args:
            center = None

        assert analysis.use_centering(Args()) is True
        Args.center = False
        assert analysis.use_centering(Args()) is False
