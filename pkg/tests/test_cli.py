"""End-to-end CLI tests on deliberately tiny systems."""

import json
import os

import numpy as np
import pytest

from relaxlab import cli
from relaxlab.config import RunConfig, save_config


@pytest.fixture(scope="module")
def tiny_config_path(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    config = RunConfig(
        dimension=150, seeds=(1,), mu_list=(0.5, 2.0), dt=0.3, t_max=30.0,
        targets=({"target": "exponential", "tau": 15.0},),
        out_dir=str(base / "run"),
    )
    path = base / "config.json"
    save_config(config, path)
    return str(path)


@pytest.fixture(scope="module")
def completed_run(tiny_config_path):
    assert cli.main(["sweep", "--config", tiny_config_path]) == 0
    with open(tiny_config_path) as fh:
        return json.load(fh)["out_dir"]


class TestSweep:
    def test_artifact_inventory(self, completed_run):
        out = completed_run
        for rel in (
            "config.json", "manifest.json",
            "models/exponential_s1.bin", "models/exponential_s1.json",
            "series/a_exponential_s1.csv",
            "series/at_exponential_s1_mu2.csv",
            "series/fid_exponential_s1_mu0p5.csv",
            "kernels/exponential_s1.csv",
            "kernels/pred_exponential_s1_mu2.csv",
            "reports/beta_mu.csv", "reports/sigma_mu.csv",
            "reports/fits.json", "reports/fidelity_rates.json",
            "reports/recurrence.json", "reports/sweep_status.json",
        ):
            assert os.path.exists(os.path.join(out, rel)), rel

    def test_manifest_hashes_current(self, completed_run):
        from relaxlab import io as rio
        manifest = rio.read_manifest(os.path.join(completed_run, "manifest.json"))
        for rel, digest in manifest["files"].items():
            assert rio.file_hash(os.path.join(completed_run, rel)) == digest, rel

    def test_series_normalization(self, completed_run):
        from relaxlab import io as rio
        a = rio.read_series_csv(
            os.path.join(completed_run, "series/a_exponential_s1.csv"))
        assert a.values[0] == pytest.approx(1.0, abs=1e-9)
        fid = rio.read_series_csv(
            os.path.join(completed_run, "series/fid_exponential_s1_mu2.csv"))
        assert fid.values[0] == pytest.approx(1.0, abs=1e-9)
        assert 0.0 <= fid.values.min() and fid.values.max() <= 1.0 + 1e-9

    def test_worker_count_does_not_change_bytes(self, tiny_config_path,
                                                completed_run, tmp_path):
        other = str(tmp_path / "run8")
        assert cli.main(["sweep", "--config", tiny_config_path,
                         "--out", other, "--workers", "4"]) == 0
        for root, _, files in os.walk(completed_run):
            for name in files:
                if not (name.endswith(".csv") or name.endswith(".bin")):
                    continue
                rel = os.path.relpath(os.path.join(root, name), completed_run)
                with open(os.path.join(completed_run, rel), "rb") as fh:
                    first = fh.read()
                with open(os.path.join(other, rel), "rb") as fh:
                    second = fh.read()
                assert first == second, rel

    def test_resume_skips_finished_artifacts(self, tiny_config_path, completed_run):
        marker = os.path.join(completed_run, "models/exponential_s1.bin")
        before = os.path.getmtime(marker)
        assert cli.main(["build", "--config", tiny_config_path]) == 0
        assert os.path.getmtime(marker) == before

    def test_report_runs(self, tiny_config_path, completed_run, capsys):
        assert cli.main(["report", "--config", tiny_config_path]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert "tailoring_max_abs_error" in summary


class TestExitCodes:
    def test_missing_models_is_io_error(self, tiny_config_path, tmp_path):
        code = cli.main(["evolve", "--config", tiny_config_path,
                         "--out", str(tmp_path / "empty")])
        assert code == cli.EXIT_IO

    def test_bad_mu_is_validation_error(self, tiny_config_path):
        assert cli.main(["build", "--config", tiny_config_path,
                         "--mu", "5.0"]) == cli.EXIT_VALIDATION

    def test_bad_config_file_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dimension": 1}')
        assert cli.main(["build", "--config", str(bad)]) == cli.EXIT_VALIDATION

    def test_target_flag_restricts(self, tiny_config_path, tmp_path):
        out = str(tmp_path / "restricted")
        assert cli.main(["build", "--config", tiny_config_path,
                         "--out", out, "--target", "gaussian",
                         "--dimension", "80"]) == 0
        assert os.path.exists(os.path.join(out, "models/gaussian_s1.bin"))
        assert not os.path.exists(os.path.join(out, "models/exponential_s1.bin"))
