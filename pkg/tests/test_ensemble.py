import numpy as np
import pytest

from relaxlab import ensemble as en
from relaxlab import targets as tg
from relaxlab.evolve import TimeGrid, autocorrelation_series


def small_model(n=400, seed=3, variant=tg.exponential):
    target = variant(15.0)
    return en.build_observable(en.ModelSpec(n, target, seed=seed),
                               tg.envelope_for(target))


class TestSampleSpectrum:
    def test_sorted_and_bounded(self):
        spec = en.ModelSpec(50, tg.exponential(15.0), seed=7)
        spectrum = en.sample_spectrum(spec)
        ev = spectrum.eigenvalues
        assert (np.diff(ev) >= 0).all()
        assert np.abs(ev).max() <= 30.0
        assert spectrum.dimension == 50

    def test_reproducible(self):
        spec = en.ModelSpec(20, tg.exponential(15.0), seed=11)
        a = en.sample_spectrum(spec).eigenvalues
        b = en.sample_spectrum(spec).eigenvalues
        np.testing.assert_array_equal(a, b)

    def test_second_moment(self):
        # var of U(-30, 30) is 300; mean of eps^2 within 3 standard errors
        spec = en.ModelSpec(10_000, tg.exponential(15.0), seed=5)
        ev = en.sample_spectrum(spec).eigenvalues
        se = np.std(ev**2, ddof=1) / np.sqrt(ev.size)
        assert abs(np.mean(ev**2) - 300.0) <= 3 * se

    def test_two_levels(self):
        spec = en.ModelSpec(2, tg.exponential(15.0), seed=1)
        ev = en.sample_spectrum(spec).eigenvalues
        assert ev[0] <= ev[1]


class TestBuildObservable:
    def test_contract_invariants(self):
        model = small_model()
        a = model.a_matrix
        np.testing.assert_allclose(a, a.T, rtol=0, atol=1e-14)
        assert abs(np.trace(a)) <= 1e-9 * model.dimension
        assert np.abs(model.a_eigenvalues).max() == pytest.approx(1.0, abs=1e-14)
        q = model.a_eigenvectors
        assert np.abs(q.T @ q - np.eye(model.dimension)).max() <= 1e-10

    def test_deterministic(self):
        a = small_model(n=120, seed=9).a_matrix
        b = small_model(n=120, seed=9).a_matrix
        np.testing.assert_array_equal(a, b)

    def test_two_level_flat_envelope_gives_cosine(self):
        # eigensplit omega0 with flat coupling: autocorrelation is cos(omega0 t)
        omega0 = 2.0
        # narrow spectrum keeps the sampled transition inside the flat part
        spec = en.ModelSpec(2, tg.exponential(15.0), seed=2, half_width=1.0)
        omega = np.linspace(-10, 10, 1001)
        flat = tg.SpectralEnvelope(omega, 1.0 / (1.0 + (omega / 5.0) ** 20), {})
        model = en.build_observable(spec, flat)
        ev = np.array([-omega0 / 2, omega0 / 2])
        grid = TimeGrid(0.05, 200)
        series = autocorrelation_series(ev, model.a_matrix, grid, method="direct")
        np.testing.assert_allclose(series.values, np.cos(omega0 * grid.times()),
                                   atol=1e-10)

    def test_envelope_tail_guard(self):
        # an envelope cut far inside its support must be rejected
        target = tg.exponential(0.5)  # very wide Lorentzian
        env = tg.envelope_for(target, omega_max=1.0)
        with pytest.raises(ValueError):
            en.build_observable(en.ModelSpec(50, target), env)

    def test_diagonal_mode_validation(self):
        with pytest.raises(ValueError):
            en.ModelSpec(50, tg.exponential(15.0), diagonal_mode="bogus")

    def test_diagonal_window_statistic(self):
        assert en.diagonal_window_check(small_model()) <= 5.0


class TestSemicircle:
    def test_cdf_endpoints(self):
        assert en.semicircle_cdf(-1.0) == 0.0
        assert en.semicircle_cdf(1.0) == 1.0
        assert en.semicircle_cdf(0.0) == pytest.approx(0.5)

    def test_self_distance_near_zero(self):
        # eigenvalues placed at exact semicircle quantiles
        n = 2000
        probs = (np.arange(n) + 0.5) / n
        grid = np.linspace(-1, 1, 200_001)
        vals = np.interp(probs, en.semicircle_cdf(grid), grid)
        model = small_model(n=50)
        fake = en.TailoredModel(model.spec, model.spectrum, model.a_matrix,
                                vals, model.a_eigenvectors)
        report = en.spectral_statistics(fake)
        assert report.kolmogorov_distance <= 1.0 / n + 1e-4

    def test_distance_bounded(self):
        report = en.spectral_statistics(small_model(n=100))
        assert 0.0 <= report.kolmogorov_distance <= 1.0

    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        model = small_model(n=300)
        ours = en.spectral_statistics(model).kolmogorov_distance
        theirs = scipy_stats.kstest(model.a_eigenvalues, en.semicircle_cdf).statistic
        assert ours == pytest.approx(theirs, abs=1e-12)
