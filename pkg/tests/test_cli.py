"""
Tests for Experiment Config, Runner, Outputs and the Command Line
"""

import json
import os

import pytest
import pandas as pd
import sys
sys.path.insert(0, '..')

from config.settings import BRIDGE_SETTINGS, ENV_OVERRIDES, MONTE_CARLO_SETTINGS
from core.errors import ConfigError, CoverageError
from core.spectral import sample_path
from experiments.acceptance import run_suite
from experiments.config_loader import ExperimentConfig, env_overrides, resolve_config
from experiments.manifest import RunManifest
from experiments.runner import run_experiment
from main import main


def write_config(path, data: dict) -> str:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle)
    return str(path)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep BRT_* variables from the shell out of the tests."""
    for variable in ENV_OVERRIDES.values():
        monkeypatch.delenv(variable, raising=False)


class TestExperimentConfig:
    """Test suite for config validation and canonical form."""

    def test_defaults(self):
        """Test subcommand defaults fill missing fields."""
        config = ExperimentConfig.from_dict({"subcommand": "norm"})
        assert config.N == [1024]
        assert config.specs == ["fl:0.3:·:2"]
        assert config.seed == MONTE_CARLO_SETTINGS['default_seed']
        assert config.workers == 1
        assert config.format == "csv"

    def test_spec_normalization(self):
        """Test specs are stored in canonical text."""
        config = ExperimentConfig.from_dict({"subcommand": "norm", "specs": "FL:0.30:-:2"})
        assert config.specs == ["fl:0.3:·:2"]

    def test_round_trip(self):
        """Test the canonical JSON parses back to the same config."""
        config = ExperimentConfig.from_dict({"subcommand": "scan", "seed": 9, "N": [64, 256]})
        assert ExperimentConfig.parse(config.to_json()) == config

    @pytest.mark.parametrize("data", [
        {"subcommand": "norm", "colour": "red"},
        {"subcommand": "bogus"},
        {"subcommand": "norm", "format": "xml"},
        {"subcommand": "norm", "seed": -1},
        {"subcommand": "norm", "seed": 2 ** 64},
        {"subcommand": "norm", "workers": 0},
        {"subcommand": "norm", "specs": ["fl:0.3:2"]},
        {"subcommand": "norm", "N": [1.5]},
    ])
    def test_invalid(self, data):
        """Test invalid configs raise ConfigError."""
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(data)

    def test_hash_ignores_run_location(self):
        """Test out, workers and format do not change the config hash."""
        base = ExperimentConfig.from_dict({"subcommand": "norm"})
        moved = ExperimentConfig.from_dict({"subcommand": "norm", "out": "elsewhere",
                                            "workers": 4, "format": "json"})
        reseeded = ExperimentConfig.from_dict({"subcommand": "norm", "seed": 1})
        assert base.config_hash() == moved.config_hash()
        assert base.config_hash() != reseeded.config_hash()


class TestConfigResolution:
    """Test suite for flag > environment > file precedence."""

    def setup_method(self):
        """Set up test fixtures."""
        self.environ = {ENV_OVERRIDES["seed"]: "2", ENV_OVERRIDES["out"]: ""}

    def test_env_overrides(self):
        """Test empty variables are ignored."""
        assert env_overrides(self.environ) == {"seed": "2"}

    def test_precedence(self, tmp_path):
        """Test flag beats environment beats file."""
        path = write_config(tmp_path / "norm.json", {"subcommand": "norm", "seed": 1, "samples": 3})
        assert resolve_config("norm", path, {}, environ={}).seed == 1
        assert resolve_config("norm", path, {}, environ=self.environ).seed == 2
        config = resolve_config("norm", path, {"seed": 3, "workers": None}, environ=self.environ)
        assert config.seed == 3
        assert config.samples == 3

    def test_file_errors(self, tmp_path):
        """Test missing, malformed and mismatched config files."""
        with pytest.raises(ConfigError):
            resolve_config("norm", str(tmp_path / "missing.json"), environ={})
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            resolve_config("norm", str(bad), environ={})
        other = write_config(tmp_path / "scan.json", {"subcommand": "scan"})
        with pytest.raises(ConfigError):
            resolve_config("norm", other, environ={})


class TestRunner:
    """Test suite for subcommand handlers and their outputs."""

    def run(self, out, **data):
        config = ExperimentConfig.from_dict({"out": str(out), **data})
        return run_experiment(config)

    def test_norm_stub(self, tmp_path):
        """Test a single unit coefficient has FL^{0,2} norm 1."""
        outcome = self.run(tmp_path, subcommand="norm", specs=["fl:0:·:2"], N=[8],
                           params={"stub": {"5": 1}})
        assert outcome.exit_code == 0
        frame = pd.read_csv(tmp_path / "norm.csv")
        assert list(frame.columns) == ["spec", "seed", "N", "alpha", "value"]
        assert frame["value"].iloc[0] == pytest.approx(1.0)

    def test_worker_count_does_not_change_output(self, tmp_path):
        """Test norm.csv is byte-identical for one and two workers."""
        data = {"subcommand": "norm", "samples": 6, "N": [64, 128],
                "specs": ["fl:0.3:·:2", "fbesov:0.5:2:inf"]}
        self.run(tmp_path / "one", workers=1, **data)
        self.run(tmp_path / "two", workers=2, **data)
        one = (tmp_path / "one" / "norm.csv").read_bytes()
        two = (tmp_path / "two" / "norm.csv").read_bytes()
        assert one == two

    def test_manifest(self, tmp_path):
        """Test the manifest lists digests that detect edits."""
        self.run(tmp_path, subcommand="norm", samples=2, N=[32])
        manifest = RunManifest.read(str(tmp_path / "manifest.json"))
        assert manifest.exit_code == 0
        assert "norm.csv" in manifest.files and "summary.json" in manifest.files
        assert manifest.verify(str(tmp_path)) == []
        with open(tmp_path / "norm.csv", "a", encoding="utf-8") as handle:
            handle.write("tampered\n")
        assert manifest.verify(str(tmp_path)) == ["norm.csv"]

    def test_json_format(self, tmp_path):
        """Test JSON records carry the same columns."""
        self.run(tmp_path, subcommand="norm", samples=2, N=[32], format="json")
        with open(tmp_path / "norm.json", encoding="utf-8") as handle:
            records = json.load(handle)
        assert len(records) == 2
        assert set(records[0]) == {"spec", "seed", "N", "alpha", "value"}

    def test_scan_verdicts(self, tmp_path):
        """Test a Brownian scan agrees with the predicted regimes."""
        config = ExperimentConfig.from_dict({
            "subcommand": "scan", "seed": 11, "samples": 20, "N": [64, 256, 1024],
            "out": str(tmp_path), "gnuplot": True,
        })
        outcome = run_experiment(config, verdict_mode=True)
        assert outcome.exit_code == 0
        verdicts = pd.read_csv(tmp_path / "scan_verdicts.csv")
        assert list(verdicts["predicted"]) == ["converge", "endpoint-growth", "diverge"]
        assert (tmp_path / "scan.gp").exists()

    def test_wick_table(self, tmp_path):
        """Test the Hermite table has one row per grid point."""
        self.run(tmp_path, subcommand="wick", samples=2000)
        frame = pd.read_csv(tmp_path / "wick.csv")
        assert len(frame) == 61
        assert list(frame.columns[:3]) == ["x", "H_0", "H_1"]
        assert frame["H_2"].iloc[0] == pytest.approx(8.0)

    def test_sample_writes_path_document(self, tmp_path):
        """Test path.json holds the serialized SpectralPath next to sample.csv."""
        outcome = self.run(tmp_path, subcommand="sample", N=[8], seed=3, alpha=0.5)
        assert outcome.exit_code == 0
        with open(tmp_path / "path.json", encoding="utf-8") as handle:
            document = json.load(handle)
        assert set(document) == {"dim", "N", "alpha", "seed", "coeffs"}
        assert (document["dim"], document["N"], document["alpha"], document["seed"]) == (1, 8, 0.5, 3)
        assert document == json.loads(sample_path(3, 8, 0.5).to_json())
        assert len(pd.read_csv(tmp_path / "sample.csv")) == len(document["coeffs"]) == 16
        manifest = RunManifest.read(str(tmp_path / "manifest.json"))
        assert "path.json" in manifest.files

    def test_bridge_defaults_and_covariance_columns(self, tmp_path):
        """Test an empty N list takes the configured mode count and covariances keep Im."""
        outcome = self.run(tmp_path, subcommand="bridge", N=[], samples=20,
                           params={"M": 256, "n_list": [1, 2], "min_samples": 10})
        assert outcome.exit_code == 0
        bridge = pd.read_csv(tmp_path / "bridge.csv")
        assert len(bridge) == 20 * 2 * BRIDGE_SETTINGS['default_modes']
        covariance = pd.read_csv(tmp_path / "bridge_covariance.csv")
        assert list(covariance.columns) == ["m", "n", "re", "im", "se", "expected"]
        assert len(covariance) == 4

    def test_stats_coverage(self, tmp_path):
        """Test shells beyond the truncation fail at run time."""
        with pytest.raises(CoverageError):
            self.run(tmp_path, subcommand="stats", N=[4], samples=1)


class TestAcceptanceSuite:
    """Test suite for acceptance selection."""

    def test_selected_checks(self):
        """Test a cheap subset runs and passes."""
        checks = run_suite("desk", seed=1, only=["norms"])
        assert checks
        assert all(check.passed for check in checks)

    def test_invalid_selection(self):
        """Test unknown scales and names are config errors."""
        with pytest.raises(ConfigError):
            run_suite("huge")
        with pytest.raises(ConfigError):
            run_suite("desk", only=["nope"])


class TestMain:
    """Test suite for the command line entry point."""

    def test_success(self, tmp_path):
        """Test exit code 0 and files on disk."""
        path = write_config(tmp_path / "norm.json",
                            {"subcommand": "norm", "samples": 2, "N": [32]})
        out = tmp_path / "out"
        assert main(["norm", "--config", path, "--out", str(out), "--seed", "4"]) == 0
        assert os.path.exists(out / "norm.csv")
        assert os.path.exists(out / "manifest.json")

    def test_config_error(self, tmp_path, capsys):
        """Test exit code 2 with a JSON error on stderr."""
        code = main(["norm", "--config", str(tmp_path / "missing.json")])
        assert code == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "config-error"

    def test_runtime_error(self, tmp_path, capsys):
        """Test exit code 3 for a failure during the run."""
        path = write_config(tmp_path / "stats.json", {"subcommand": "stats", "N": [4], "samples": 1})
        assert main(["stats", "--config", path, "--out", str(tmp_path / "out")]) == 3
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "coverage-error"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
