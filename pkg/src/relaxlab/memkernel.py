"""Memory kernels: Volterra equation of motion, extraction, and the
perturbed-kernel heuristic.

The equation of motion is da/dt = -lam0 a(t) - ∫_0^t K(t-t') a(t') dt'.
A kernel is carried as grid samples K(τ) plus a local coefficient lam0 for
the delta component, which the stepper applies analytically (the delta never
lives on the quadrature grid, which avoids endpoint-weight ambiguity).

The forward solver is an exponential-trapezoid scheme: the local term is
integrated exactly via e^{-lam0 dt}, the convolution by the trapezoid rule
with an implicit endpoint.  Kernel extraction solves the same discrete
relations exactly, so extract-then-solve round-trips to machine precision,
and the damped-kernel transform with beta = 1 reproduces a(t) e^{-alpha t}
identically on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .evolve import TimeGrid, TimeSeries

_DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class HeuristicParams:
    """Damping rate alpha (1/time) and band-width weight beta in [0, 1]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must be in [0, 1]")


@dataclass
class MemoryKernel:
    grid: TimeGrid
    values: np.ndarray        # K(τ) on the grid, units 1/time²
    local_coefficient: float  # lam0: delta component, contributes -lam0 a(t)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps,):
            raise ValueError("kernel length does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("kernel values must be finite")


def dynamics_from_kernel(kernel: MemoryKernel, a0: float, grid: TimeGrid) -> TimeSeries:
    """Solve the integro-differential equation of motion on the grid.

    Exponential-trapezoid stepping: exact integrating factor for the local
    term, trapezoid quadrature for the convolution with an implicit
    endpoint; second-order accurate in dt.
    """
    if abs(kernel.grid.dt - grid.dt) > 1e-12 * grid.dt:
        raise ValueError("kernel grid dt does not match output grid")
    if kernel.grid.n_steps < grid.n_steps:
        raise ValueError("kernel grid shorter than output grid")
    dt = grid.dt
    n = grid.n_steps
    k = kernel.values
    damp = np.exp(-kernel.local_coefficient * dt)
    a = np.empty(n)
    conv = np.empty(n)  # trapezoid convolution ∫_0^{t_i} K(t_i - t') a(t') dt'
    a[0] = a0
    conv[0] = 0.0
    denom = 1.0 + 0.25 * dt * dt * k[0]
    if abs(denom) < 1e-12:
        raise NumericError("stepper denominator vanishes (K(0) too negative)")
    for i in range(n - 1):
        # conv[i+1] split into the implicit endpoint (0.5 dt K0 a_{i+1}) and
        # the rest, which only involves known history.
        partial = dt * (np.dot(k[1:i + 1], a[i:0:-1]) + 0.5 * k[i + 1] * a[0])
        a_next = (damp * (a[i] - 0.5 * dt * conv[i]) - 0.5 * dt * partial) / denom
        if not np.isfinite(a_next) or abs(a_next) > _DIVERGENCE_LIMIT:
            raise NumericError(f"stepper diverged at step {i + 1} (t = {(i + 1) * dt:g})")
        a[i + 1] = a_next
        conv[i + 1] = partial + 0.5 * dt * k[0] * a_next
    return TimeSeries(grid, a)


def _solve_kernel_sequence(a: np.ndarray, dt: float, k0: float, lam0: float) -> np.ndarray:
    """Kernel samples satisfying the discrete step relations, given K(0), lam0.

    Inverts the forward scheme exactly: for each step the trapezoid
    convolution at t_{n+1} required by the step equation determines K_{n+1}.
    """
    n = a.size
    k = np.empty(n)
    k[0] = k0
    v = np.exp(-lam0 * dt)
    denom = 1.0 + 0.25 * dt * dt * k0
    conv = 0.0  # conv at index i
    for i in range(n - 1):
        partial = (v * (a[i] - 0.5 * dt * conv) - denom * a[i + 1]) * 2.0 / dt
        known = np.dot(k[1:i + 1], a[i:0:-1]) if i >= 1 else 0.0
        k[i + 1] = (partial / dt - known) * 2.0 / a[0]
        conv = partial + 0.5 * dt * k0 * a[i + 1]
    return k


def _roughness_solution(a: np.ndarray, dt: float, lam0: float):
    """Best kernel for a given local coefficient.

    The discrete relations fix every K_n except K(0); that freedom is the
    classic sawtooth mode of trapezoid deconvolution, resolved by the K(0)
    minimizing the second-difference roughness.  Returns (kernel, roughness).
    """
    base = _solve_kernel_sequence(a, dt, 0.0, lam0)
    bump = _solve_kernel_sequence(a, dt, 1.0, lam0) - base
    d2b = np.diff(base, 2)
    d2h = np.diff(bump, 2)
    denom = float(np.dot(d2h, d2h))
    if denom > 0:
        k0 = -float(np.dot(d2b, d2h)) / denom
    else:
        # flat homogeneous mode: fall back to a one-sided curvature estimate
        k0 = -(2 * a[0] - 5 * a[1] + 4 * a[2] - a[3]) / (dt * dt * a[0])
    k = base + k0 * bump
    k[0] = k0
    return k, float(np.sum(np.diff(k, 2) ** 2))


def kernel_from_dynamics(a: TimeSeries, allow_local: bool = True) -> MemoryKernel:
    """Extract the kernel generating a given series (exact discrete inverse).

    Dynamics with a quasi-local kernel component (exponential-like decays)
    cannot be represented by smooth grid samples alone: forcing the delta
    onto the grid excites a large sawtooth that does not survive the damped
    transform.  When allow_local is set, a non-negative local coefficient is
    fitted jointly by minimizing the grid kernel's roughness; smooth data
    comes back with local_coefficient = 0.  Either way the result solves the
    discrete step relations exactly, so dynamics_from_kernel reproduces the
    input to rounding.
    """
    vals = a.values
    dt = a.grid.dt
    if vals[0] == 0.0:
        raise ValueError("a(0) must be nonzero for kernel extraction")
    if abs(vals[0]) * dt < 1e-12:
        raise NumericError("deconvolution is near-singular (|a(0)| dt too small)")
    k_zero, rough_zero = _roughness_solution(vals, dt, 0.0)
    lam_best, k_best, rough_best = 0.0, k_zero, rough_zero
    if allow_local and rough_zero > 0 and vals[1] != 0.0 and vals[0] * vals[1] > 0:
        # Candidate rate from the first-step ratio: exact for a pure
        # exponential, whose delta kernel is what the grid cannot hold.
        lam_c = -np.log(vals[1] / vals[0]) / dt
        if 0.0 < lam_c < 1.0 / dt:
            from scipy.optimize import minimize_scalar

            res = minimize_scalar(
                lambda lam: _roughness_solution(vals, dt, lam)[1],
                bounds=(0.5 * lam_c, 1.5 * lam_c), method="bounded",
                options={"xatol": 1e-9},
            )
            for lam in (lam_c, float(res.x)):
                k, rough = _roughness_solution(vals, dt, lam)
                if rough < rough_best * (1.0 - 1e-9):
                    lam_best, k_best, rough_best = lam, k, rough
    if not np.all(np.isfinite(k_best)):
        raise NumericError("kernel extraction produced non-finite values")
    return MemoryKernel(a.grid, k_best, lam_best)


def perturb_kernel(kernel: MemoryKernel, params: HeuristicParams) -> MemoryKernel:
    """Damped-kernel transform: K(τ) -> K(τ) e^{-ατ}, plus local damping βα.

    Sign convention: the delta component adds local damping -βα ã(t) to the
    derivative, i.e. in Laplace space κ̃(s) = κ(s + α) + βα.  This is the
    convention under which β = 1 reduces exactly to ã = a e^{-αt} and β = 0
    to the dephasing fixed-point equation.
    """
    tau = kernel.grid.times()
    values = kernel.values * np.exp(-params.alpha * tau)
    local = kernel.local_coefficient + params.beta * params.alpha
    return MemoryKernel(kernel.grid, values, local)


def predict_perturbed(a: TimeSeries, params: HeuristicParams) -> TimeSeries:
    """Heuristic prediction of the perturbed dynamics.

    Extracts the kernel of a, applies the damped-kernel transform, and
    solves the equation of motion again on the same grid.
    """
    if abs(a.values[0] - 1.0) > 0.05:
        raise ValueError("dynamics must be normalized to a(0) = 1")
    kernel = kernel_from_dynamics(a)
    return dynamics_from_kernel(perturb_kernel(kernel, params), a.values[0], a.grid)


def dephasing_residual(a: TimeSeries, a_tilde: TimeSeries, alpha: float) -> np.ndarray:
    """Residual of the β = 0 fixed-point equation.

    ã(t) - a(t) e^{-αt} - α ∫_0^t ã(t') a(t-t') e^{-α(t-t')} dt', evaluated
    with the trapezoid rule; an independent cross-check of predict_perturbed.
    """
    if a.grid != a_tilde.grid:
        raise ValueError("series grids differ")
    t = a.times
    dt = a.grid.dt
    n = t.size
    av = a.values
    tv = a_tilde.values
    damped = av * np.exp(-alpha * t)
    res = np.empty(n)
    res[0] = tv[0] - av[0]
    for i in range(1, n):
        integrand = tv[:i + 1] * damped[i::-1]
        res[i] = tv[i] - damped[i] - alpha * np.trapezoid(integrand, dx=dt)
    return res


def damped_convolution(a: TimeSeries, a_tilde: TimeSeries, alpha: float) -> np.ndarray:
    """∫_0^t ã(t') a(t-t') e^{-α(t-t')} dt' on the grid (trapezoid)."""
    if a.grid != a_tilde.grid:
        raise ValueError("series grids differ")
    dt = a.grid.dt
    damped = a.values * np.exp(-alpha * a.times)
    n = a.values.size
    out = np.empty(n)
    out[0] = 0.0
    for i in range(1, n):
        out[i] = np.trapezoid(a_tilde.values[:i + 1] * damped[i::-1], dx=dt)
    return out


@dataclass(frozen=True)
class RecurrenceReport:
    convolution_max: float
    convolution_bound: float          # 3 τ'
    suppression_ratio: float          # peak(ã)/peak(a) near the revival
    expected_suppression: float       # e^{-αT}
    max_deviation: float              # max |ã - a e^{-αt}|
    deviation_budget: float           # 5 α τ'

    @property
    def convolution_bound_holds(self) -> bool:
        return self.convolution_max <= self.convolution_bound

    @property
    def suppression_within_factor_two(self) -> bool:
        lo, hi = 0.5 * self.expected_suppression, 2.0 * self.expected_suppression
        return lo <= self.suppression_ratio <= hi


def recurrence_check(a_r: TimeSeries, params: HeuristicParams, tau_prime: float,
                     revival_time: float) -> RecurrenceReport:
    """Quantify how the heuristic damps a late revival.

    Checks the convolution bound (<= 3 τ'), the revival-peak suppression
    against e^{-αT}, and the deviation from pure exponential damping against
    the O(α τ') additive budget.
    """
    if revival_time < 3.0 * tau_prime:
        raise ValueError("revival time too small; need T >= 3 τ'")
    a_tilde = predict_perturbed(a_r, params)
    t = a_r.times
    conv = damped_convolution(a_r, a_tilde, params.alpha)
    window = (t >= revival_time - 2.0 * tau_prime) & (t <= revival_time + 2.0 * tau_prime)
    if not window.any():
        raise ValueError("grid does not cover the revival window")
    peak = float(np.max(np.abs(a_r.values[window])))
    peak_tilde = float(np.max(np.abs(a_tilde.values[window])))
    damped = a_r.values * np.exp(-params.alpha * t)
    return RecurrenceReport(
        convolution_max=float(np.abs(conv).max()),
        convolution_bound=3.0 * tau_prime,
        suppression_ratio=peak_tilde / peak,
        expected_suppression=float(np.exp(-params.alpha * revival_time)),
        max_deviation=float(np.abs(a_tilde.values - damped).max()),
        deviation_budget=5.0 * params.alpha * tau_prime,
    )
