"""Construction of the tailored Hamiltonian/observable pair (H0, A).

H0 has a flat random spectrum on [-half_width, half_width].  The observable
is built in the H0 eigenbasis from Gaussian matrix elements whose variance at
transition frequency ω follows the target's spectral envelope, so the
autocorrelation Tr(A(t)A) tracks the prescribed g(t).  The observable is made
traceless and rescaled so its spectrum sits in [-1, 1] with one extreme
exactly at ±1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .targets import SpectralEnvelope, TargetDynamics


@dataclass(frozen=True)
class ModelSpec:
    dimension: int
    target: TargetDynamics
    half_width: float = 30.0
    seed: int = 0
    # Diagonal of the observable matrix.  The smooth diagonal part is zero;
    # "zero" also drops the diagonal fluctuation term, whose weight at ω = 0
    # is a finite-size artifact (relative offset ~ W f²(0)/(πN)) that spoils
    # the tailored autocorrelation at desk-scale N.  "ansatz" keeps f(0) R_jj,
    # "doubled" uses the doubled-variance convention for comparison.
    diagonal_mode: str = "zero"

    _DIAGONAL_MODES = ("zero", "ansatz", "doubled")

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if not (self.half_width > 0):
            raise ValueError("half_width must be positive")
        if self.diagonal_mode not in self._DIAGONAL_MODES:
            raise ValueError(f"diagonal_mode must be one of {self._DIAGONAL_MODES}")


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues of H0, all inside [-half_width, half_width]."""

    eigenvalues: np.ndarray
    half_width: float

    def __post_init__(self):
        ev = self.eigenvalues
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        if np.any(np.abs(ev) > self.half_width):
            raise ValueError("eigenvalues outside [-half_width, half_width]")

    @property
    def dimension(self) -> int:
        return self.eigenvalues.size

    def hs_norm(self) -> float:
        """Hilbert-Schmidt norm of H0 for the realized spectrum."""
        return float(np.sqrt(np.sum(self.eigenvalues**2)))


@dataclass
class TailoredModel:
    spec: ModelSpec
    spectrum: Spectrum
    a_matrix: np.ndarray        # A in the H0 eigenbasis, symmetric, traceless
    a_eigenvalues: np.ndarray   # sorted, in [-1, 1], max |a_i| = 1
    a_eigenvectors: np.ndarray  # columns: A eigenvectors in the H0 eigenbasis
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.spec.dimension


def _streams(seed: int):
    return np.random.SeedSequence(seed).spawn(2)


def sample_spectrum(spec: ModelSpec) -> Spectrum:
    """Draw the H0 spectrum: N i.i.d. uniforms on [-W/2, W/2], sorted."""
    rng = np.random.default_rng(_streams(spec.seed)[0])
    ev = np.sort(rng.uniform(-spec.half_width, spec.half_width, spec.dimension))
    return Spectrum(ev, spec.half_width)


def build_observable(spec: ModelSpec, envelope: SpectralEnvelope) -> TailoredModel:
    """Build the tailored observable for a model spec.

    Matrix elements a_jl = f(ω_jl) R_jl with ω_jl the transition frequency,
    f the square root of the envelope (0 beyond its grid) and R_jl standard
    normal i.i.d.; the matrix is symmetrized, trace-subtracted, diagonalized
    and rescaled so max |a_i| = 1.
    """
    spectrum = sample_spectrum(spec)
    rng = np.random.default_rng(_streams(spec.seed)[1])
    n = spec.dimension
    ev = spectrum.eigenvalues

    # Frequencies reach the full spectral span 2*half_width; the envelope may
    # end earlier (f = 0 beyond the grid) as long as its own tail is spent.
    if envelope.values[-1] > 1e-4 * envelope.values.max():
        raise ValueError(
            f"envelope grid ends at {envelope.omega_max} with non-negligible "
            "weight; widen omega_max to cover the target's spectral support")

    a = envelope.amplitude_at(ev[None, :] - ev[:, None])
    a *= rng.standard_normal((n, n))
    if spec.diagonal_mode == "zero":
        diag = np.zeros(n)
    else:
        diag = a.diagonal().copy()
        if spec.diagonal_mode == "doubled":
            diag *= math.sqrt(2.0)
    u = np.triu(a, 1)
    a = u + u.T
    del u
    a[np.diag_indices(n)] = diag
    a[np.diag_indices(n)] -= a.trace() / n

    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"observable diagonalization failed: {exc}") from exc
    scale = np.abs(vals).max()
    vals = vals / scale
    a /= scale
    return TailoredModel(
        spec=spec,
        spectrum=spectrum,
        a_matrix=a,
        a_eigenvalues=vals,
        a_eigenvectors=vecs,
        metadata={"eth_diagonal": 0.0, "envelope_variant": envelope.metadata.get("variant")},
    )


def semicircle_cdf(x):
    """CDF of the semicircle law on [-1, 1]."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return 0.5 + (x * np.sqrt(1.0 - x * x) + np.arcsin(x)) / math.pi


@dataclass(frozen=True)
class SpectralReport:
    kolmogorov_distance: float
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray


def spectral_statistics(model: TailoredModel, n_hist_bins: int = 101) -> SpectralReport:
    """Kolmogorov distance of the observable spectrum to the semicircle law."""
    vals = np.sort(model.a_eigenvalues)
    n = vals.size
    cdf = semicircle_cdf(vals)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    dist = float(max(np.abs(cdf - upper).max(), np.abs(cdf - lower).max()))
    counts, edges = np.histogram(vals, bins=n_hist_bins, range=(-1.0, 1.0))
    return SpectralReport(dist, counts, edges)


def diagonal_window_check(model: TailoredModel, window: int = 100) -> float:
    """Max |window mean| of a_jj in units of the window standard error.

    Probes the flat-diagonal choice of the construction: sliding means of the
    diagonal should be statistically compatible with zero.
    """
    d = np.diag(model.a_matrix)
    n = d.size
    if n < window:
        window = n
    csum = np.concatenate([[0.0], np.cumsum(d)])
    means = (csum[window:] - csum[:-window]) / window
    se = d.std(ddof=1) / math.sqrt(window)
    return float(np.abs(means).max() / se) if se > 0 else 0.0
