"""Prescribed relaxation functions g(t) and their spectral envelopes f²(ω).

The catalog covers four closed-form decay shapes (exponential, damped
oscillation, linear ramp, Gaussian), a decay-plus-late-revival variant, and
tabulated data.  Every g is even in t and normalized so the closed-form
variants satisfy g(0) = 1.  The envelope of a target is the cosine transform
of g; it sets the variance profile of observable matrix elements downstream,
so it must be non-negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EXPONENTIAL = "exponential"
DAMPED_OSCILLATION = "oscillation"
LINEAR = "linear"
GAUSSIAN = "gaussian"
RECURRENCE = "recurrence"
TABULATED = "tabulated"

CLOSED_FORM_VARIANTS = (EXPONENTIAL, DAMPED_OSCILLATION, LINEAR, GAUSSIAN)
ALL_VARIANTS = CLOSED_FORM_VARIANTS + (RECURRENCE, TABULATED)

# Default frequency cutoff: half the Hamiltonian spectral span of 60.
DEFAULT_OMEGA_MAX = 30.0
DEFAULT_N_BINS = 8192


@dataclass(frozen=True)
class TargetDynamics:
    """A prescribed relaxation function g(t).

    tau is the common half-decay scale; recurrence_time (revival time T,
    recurrence variant only) must satisfy T >= 3 tau for the revival to be
    cleanly separated from the initial decay.
    """

    variant: str
    tau: float = 15.0
    recurrence_time: float | None = None
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.variant not in ALL_VARIANTS:
            raise ValueError(f"unknown target variant {self.variant!r}")
        if not (self.tau > 0):
            raise ValueError("tau must be positive")
        if self.variant == RECURRENCE:
            if self.recurrence_time is None:
                raise ValueError("recurrence target needs recurrence_time")
            if self.recurrence_time < 3.0 * self.tau:
                raise ValueError("recurrence_time must be >= 3*tau")
        if self.variant == TABULATED:
            if not self.table or len(self.table) < 2:
                raise ValueError("tabulated target needs >= 2 (t, value) pairs")
            times = [p[0] for p in self.table]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("table times must be strictly increasing")

    def label(self) -> str:
        return self.variant

    def to_dict(self) -> dict:
        d = {"target": self.variant, "tau": self.tau}
        if self.recurrence_time is not None:
            d["recurrence_time"] = self.recurrence_time
        if self.table is not None:
            d["table"] = [list(p) for p in self.table]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TargetDynamics":
        return cls(
            variant=d["target"],
            tau=float(d.get("tau", 15.0)),
            recurrence_time=d.get("recurrence_time"),
            table=tuple(tuple(p) for p in d["table"]) if d.get("table") else None,
        )


def exponential(tau: float = 15.0) -> TargetDynamics:
    return TargetDynamics(EXPONENTIAL, tau)


def damped_oscillation(tau: float = 15.0) -> TargetDynamics:
    return TargetDynamics(DAMPED_OSCILLATION, tau)


def linear(tau: float = 15.0) -> TargetDynamics:
    return TargetDynamics(LINEAR, tau)


def gaussian(tau: float = 15.0) -> TargetDynamics:
    return TargetDynamics(GAUSSIAN, tau)


def recurrence(tau: float, recurrence_time: float) -> TargetDynamics:
    return TargetDynamics(RECURRENCE, tau, recurrence_time=recurrence_time)


def tabulated(points, tau: float = 15.0) -> TargetDynamics:
    return TargetDynamics(TABULATED, tau, table=tuple(tuple(p) for p in points))


STANDARD_TARGETS = (exponential, damped_oscillation, linear, gaussian)


def evaluate_target(target: TargetDynamics, t):
    """Evaluate g(t).  Accepts scalars or arrays; even in t by construction."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("t must be finite")
    at = np.abs(t)
    tau = target.tau
    v = target.variant
    if v == EXPONENTIAL:
        out = np.exp(-(math.log(2.0) / tau) * at)
    elif v == DAMPED_OSCILLATION:
        out = np.cos(2.0 * math.pi / tau * t) * np.exp(-at / (2.0 * tau))
    elif v == LINEAR:
        out = np.where(at <= 2.0 * tau, 1.0 - at / (2.0 * tau), 0.0)
    elif v == GAUSSIAN:
        out = np.exp(-(math.log(2.0) / tau**2) * t * t)
    elif v == RECURRENCE:
        T = target.recurrence_time
        out = np.exp(-at / tau) + 0.5 * np.exp(-np.abs(at - T) / tau)
    elif v == TABULATED:
        xs = np.array([p[0] for p in target.table])
        ys = np.array([p[1] for p in target.table])
        if np.any(at < xs[0]) or np.any(at > xs[-1]):
            raise ValueError("t outside tabulated range")
        out = np.interp(at, xs, ys)
    else:  # pragma: no cover - guarded in __post_init__
        raise ValueError(v)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectralEnvelope:
    """f²(ω) samples on a uniform grid over [-omega_max, omega_max].

    Values are non-negative (a valid autocorrelation has a non-negative power
    spectrum) and even; the overall scale is arbitrary because the observable
    spectrum is rescaled downstream.
    """

    omega_grid: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.omega_grid.shape != self.values.shape:
            raise ValueError("grid/values shape mismatch")
        if np.any(self.values < 0):
            raise ValueError("envelope values must be non-negative")

    @property
    def omega_max(self) -> float:
        return float(self.omega_grid[-1])

    def amplitude_at(self, omega):
        """f(ω) = sqrt of the envelope, interpolated; 0 beyond the grid."""
        half = self.omega_grid.size // 2
        return np.sqrt(
            np.interp(np.abs(omega), self.omega_grid[half:], self.values[half:],
                      left=0.0, right=0.0)
        )


def _closed_form_envelope(target: TargetDynamics, omega: np.ndarray) -> np.ndarray:
    tau = target.tau
    if target.variant == EXPONENTIAL:
        lam = math.log(2.0) / tau
        return 2.0 * lam / (lam**2 + omega**2)
    if target.variant == DAMPED_OSCILLATION:
        w0 = 2.0 * math.pi / tau
        gam = 1.0 / (2.0 * tau)
        return gam / (gam**2 + (omega - w0) ** 2) + gam / (gam**2 + (omega + w0) ** 2)
    if target.variant == LINEAR:
        x = omega * tau
        s = np.ones_like(x)
        nz = x != 0
        s[nz] = np.sin(x[nz]) / x[nz]
        return 2.0 * tau * s * s
    if target.variant == GAUSSIAN:
        c = math.log(2.0) / tau**2
        return math.sqrt(math.pi / c) * np.exp(-(omega**2) / (4.0 * c))
    raise ValueError(target.variant)


def _numeric_envelope(target: TargetDynamics, omega: np.ndarray) -> np.ndarray:
    # Cosine transform of the even extension of g, trapezoid on a fine t grid.
    if target.variant == RECURRENCE:
        t_cut = target.recurrence_time + 40.0 * target.tau
    else:
        t_cut = target.table[-1][0]
    dt = min(0.02 * target.tau, math.pi / (4.0 * max(omega[-1], 1.0)))
    t = np.arange(0.0, t_cut + dt, dt)
    g = evaluate_target(target, t)
    w = np.full(t.size, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    # 2 * integral_0^inf g(t) cos(wt) dt, evaluated for each grid omega
    return 2.0 * np.cos(np.outer(omega, t)) @ (g * w)


def envelope_for(target: TargetDynamics, omega_max: float = DEFAULT_OMEGA_MAX,
                 n_bins: int = DEFAULT_N_BINS, tol_clip: float = 1e-3) -> SpectralEnvelope:
    """Spectral envelope f²(ω) of a target on a symmetric uniform grid.

    Closed forms are used for the four standard variants; recurrence and
    tabulated targets go through a numerical cosine transform with negative
    excursions clipped to zero.  A clip exceeding tol_clip times the peak is
    recorded in the metadata as a warning (signals a target whose even
    extension is not positive definite).
    """
    if not (omega_max > 0):
        raise ValueError("omega_max must be positive")
    if n_bins < 64:
        raise ValueError("n_bins must be >= 64")
    # Symmetric grid with an explicit ω = 0 sample.
    half = np.linspace(0.0, omega_max, n_bins // 2 + 1)
    omega = np.concatenate([-half[:0:-1], half])
    meta: dict = {"variant": target.variant}
    if target.variant in CLOSED_FORM_VARIANTS:
        values = _closed_form_envelope(target, omega)
    else:
        values = _numeric_envelope(target, omega)
        peak = float(values.max())
        worst = float(values.min())
        if worst < -tol_clip * peak:
            meta["warning"] = (
                f"clipped negative spectral weight {worst:.3e} "
                f"(peak {peak:.3e}); target may not be positive definite"
            )
        meta["clipped_mass"] = float(-values[values < 0].sum()) / max(
            float(np.abs(values).sum()), 1e-300)
        values = np.clip(values, 0.0, None)
    # Enforce exact evenness (closed forms are even analytically; the numeric
    # path evaluates cos(|ω|t) so this is a no-op up to rounding).
    values = 0.5 * (values + values[::-1])
    return SpectralEnvelope(omega, values, meta)


def reconstruct_target(envelope: SpectralEnvelope, t: np.ndarray) -> np.ndarray:
    """Inverse cosine transform of f²(ω), normalized to 1 at t = 0.

    Used as an independent check that envelope_for round-trips to g(t).
    """
    omega = envelope.omega_grid
    dw = omega[1] - omega[0]
    w = np.full(omega.size, dw)
    w[0] *= 0.5
    w[-1] *= 0.5
    weights = envelope.values * w
    series = np.cos(np.outer(np.asarray(t, float), omega)) @ weights
    norm = weights.sum()
    return series / norm
