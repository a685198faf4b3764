import numpy as np
import pytest

from relaxlab import ensemble as en
from relaxlab import io as rio
from relaxlab import perturbation as pb
from relaxlab import targets as tg
from relaxlab.evolve import TimeGrid, TimeSeries
from relaxlab.memkernel import MemoryKernel


@pytest.fixture(scope="module")
def model():
    target = tg.gaussian(15.0)
    return en.build_observable(en.ModelSpec(60, target, seed=2),
                               tg.envelope_for(target))


class TestBlobs:
    def test_model_round_trip(self, model, tmp_path):
        path = tmp_path / "model.bin"
        rio.save_model(model, path)
        back = rio.load_model(path)
        assert back.spec == model.spec
        np.testing.assert_array_equal(back.a_matrix, model.a_matrix)
        np.testing.assert_array_equal(back.spectrum.eigenvalues,
                                      model.spectrum.eigenvalues)
        np.testing.assert_array_equal(back.a_eigenvalues, model.a_eigenvalues)
        np.testing.assert_array_equal(back.a_eigenvectors, model.a_eigenvectors)

    def test_perturbation_round_trip(self, model, tmp_path):
        pert = pb.build_perturbation(model, 0.5, 0.029, seed=9)
        path = tmp_path / "pert.bin"
        rio.save_perturbation(pert, path)
        back = rio.load_perturbation(path)
        assert (back.mu, back.epsilon, back.seed) == (0.5, 0.029, 9)
        assert back.sigma == pert.sigma
        np.testing.assert_array_equal(back.v_matrix, pert.v_matrix)

    def test_bad_magic_rejected(self, model, tmp_path):
        path = tmp_path / "model.bin"
        rio.save_model(model, path)
        with pytest.raises(OSError):
            rio.load_perturbation(path)

    def test_truncation_detected(self, model, tmp_path):
        path = tmp_path / "model.bin"
        rio.save_model(model, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(OSError):
            rio.load_model(path)

    def test_save_is_deterministic(self, model, tmp_path):
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        rio.save_model(model, p1)
        rio.save_model(model, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCsv:
    def test_series_round_trip_exact(self, tmp_path):
        grid = TimeGrid(0.1, 50)
        values = np.random.default_rng(0).standard_normal(50)
        series = TimeSeries(grid, values)
        path = tmp_path / "series.csv"
        rio.write_series_csv(path, series)
        back = rio.read_series_csv(path)
        np.testing.assert_array_equal(back.values, values)
        assert back.grid.n_steps == 50
        assert back.grid.dt == pytest.approx(0.1)

    def test_series_header_contract(self, tmp_path):
        path = tmp_path / "series.csv"
        rio.write_series_csv(path, TimeSeries(TimeGrid(0.5, 3), np.ones(3)))
        assert path.read_text().splitlines()[0] == "t,value"

    def test_kernel_header_contract(self, tmp_path):
        grid = TimeGrid(0.5, 3)
        path = tmp_path / "kernel.csv"
        rio.write_kernel_csv(path, MemoryKernel(grid, np.zeros(3), 0.1))
        assert path.read_text().splitlines()[0] == "tau,K"

    def test_report_header_contracts(self, tmp_path):
        beta = tmp_path / "beta.csv"
        cal = tmp_path / "cal.csv"
        from relaxlab.fitting import BetaRow
        from relaxlab.perturbation import CalibrationRow
        rio.write_beta_csv(beta, [BetaRow(0.1, 0.0, 0.01)])
        rio.write_calibration_csv(cal, [CalibrationRow(0.1, 1.0, 1.1, 0.909)])
        assert beta.read_text().splitlines()[0] == "mu,beta,rms"
        assert cal.read_text().splitlines()[0] == "mu,sigma_exact,sigma_estimate,ratio"

    def test_nonuniform_grid_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,1\n1,0.5\n3,0.2\n")
        with pytest.raises(ValueError):
            rio.read_series_csv(path)


class TestSeedsAndManifests:
    def test_artifact_seed_deterministic_and_distinct(self):
        a = rio.artifact_seed(1, "models/exp_s1.bin")
        assert a == rio.artifact_seed(1, "models/exp_s1.bin")
        assert a != rio.artifact_seed(2, "models/exp_s1.bin")
        assert a != rio.artifact_seed(1, "models/exp_s2.bin")
        assert 0 <= a < 2**64

    def test_manifest_round_trip(self, tmp_path):
        path = tmp_path / "manifest.json"
        rio.write_manifest(path, {"files": {"a.csv": "00ff"}})
        assert rio.read_manifest(path)["files"]["a.csv"] == "00ff"

    def test_file_hash_tracks_content(self, tmp_path):
        p = tmp_path / "x"
        p.write_text("one")
        h1 = rio.file_hash(p)
        p.write_text("two")
        assert rio.file_hash(p) != h1
