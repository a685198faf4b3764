"""Command-line orchestration: seeded reproducible runs and parallel sweeps.

Artifacts live under the output directory:

    config.json                     frozen configuration snapshot
    models/<target>_s<seed>.bin     model blobs (+ .json sidecars)
    perturbations/<target>_s<seed>_mu<mu>.bin
    series/a_<target>_s<seed>.csv   unperturbed dynamics
    series/at_<target>_s<seed>_mu<mu>.csv, series/fid_..._mu<mu>.csv
    kernels/<target>_s<seed>.csv    extracted kernels
    kernels/pred_<target>_s<seed>_mu<mu>.csv  heuristic predictions
    reports/*.csv, reports/*.json   calibration, fits, recurrence, summary
    manifest.json                   file inventory with sha256 hashes

Every random draw is seeded from (master seed, artifact path), so outputs are
a pure function of the configuration and identical for any worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io as rio
from .config import DEFAULT_ALPHA, RunConfig, load_config, save_config
from .ensemble import ModelSpec, build_observable, spectral_statistics
from .errors import NumericError
from .evolve import TimeGrid, TimeSeries, assemble, autocorrelation_series, \
    fidelity_series, fit_exponential_rate
from .fitting import beta_curve, fit_params, fit_shared_alpha
from .memkernel import HeuristicParams, kernel_from_dynamics, \
    predict_perturbed, recurrence_check
from .perturbation import build_perturbation, calibration_report
from .targets import envelope_for, evaluate_target, recurrence

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


def _mu_tag(mu: float) -> str:
    return ("%g" % mu).replace(".", "p")


def _model_path(target, seed) -> str:
    return f"models/{target.label()}_s{seed}.bin"


def _grid(config: RunConfig) -> TimeGrid:
    return TimeGrid.from_t_max(config.dt, config.t_max)


def _is_current(out_dir: str, rel: str) -> bool:
    """True if the artifact exists and matches its recorded hash."""
    path = os.path.join(out_dir, rel)
    manifest_path = os.path.join(out_dir, "manifest.json")
    if not (os.path.exists(path) and os.path.exists(manifest_path)):
        return False
    inventory = rio.read_manifest(manifest_path).get("files", {})
    return inventory.get(rel) == rio.file_hash(path)


def _register(out_dir: str, rels) -> None:
    manifest_path = os.path.join(out_dir, "manifest.json")
    payload = rio.read_manifest(manifest_path) if os.path.exists(manifest_path) \
        else {"files": {}}
    for rel in rels:
        payload["files"][rel] = rio.file_hash(os.path.join(out_dir, rel))
    payload["updated"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    rio.write_manifest(manifest_path, payload)


def _build_one(config: RunConfig, target, seed: int, out_dir: str) -> list[str]:
    """Build one model and its unperturbed series; returns relative paths."""
    rel_model = _model_path(target, seed)
    rel_series = f"series/a_{target.label()}_s{seed}.csv"
    if _is_current(out_dir, rel_model) and _is_current(out_dir, rel_series):
        return []
    model_seed = rio.artifact_seed(seed, rel_model)
    spec = ModelSpec(config.dimension, target, half_width=config.half_width,
                     seed=model_seed)
    model = build_observable(spec, envelope_for(target))
    rio.ensure_dir(os.path.join(out_dir, "models"))
    rio.ensure_dir(os.path.join(out_dir, "series"))
    rio.save_model(model, os.path.join(out_dir, rel_model))
    report = spectral_statistics(model)
    rio.write_manifest(os.path.join(out_dir, rel_model.replace(".bin", ".json")), {
        "target": target.to_dict(), "seed": seed, "model_seed": model_seed,
        "dimension": config.dimension,
        "semicircle_distance": report.kolmogorov_distance,
    })
    series = autocorrelation_series(model.spectrum.eigenvalues, model.a_matrix,
                                    _grid(config))
    rio.write_series_csv(os.path.join(out_dir, rel_series), series)
    return [rel_model, rel_series]


def _evolve_one(config: RunConfig, target, seed: int, mu: float,
                out_dir: str) -> list[str]:
    """Perturb one model: perturbed series and fidelity."""
    tag = f"{target.label()}_s{seed}_mu{_mu_tag(mu)}"
    rel_pert = f"perturbations/{tag}.bin"
    rel_at = f"series/at_{tag}.csv"
    rel_fid = f"series/fid_{tag}.csv"
    rels = [rel_pert, rel_at, rel_fid]
    if all(_is_current(out_dir, r) for r in rels):
        return []
    model = rio.load_model(os.path.join(out_dir, _model_path(target, seed)))
    pert_seed = rio.artifact_seed(seed, rel_pert)
    pert = build_perturbation(model, mu, config.epsilon, pert_seed)
    rio.ensure_dir(os.path.join(out_dir, "perturbations"))
    rio.save_perturbation(pert, os.path.join(out_dir, rel_pert))
    system = assemble(model, pert)
    grid = _grid(config)
    at = autocorrelation_series(system.h_eigenvalues, system.a_in_h_basis, grid)
    rio.write_series_csv(os.path.join(out_dir, rel_at), at)
    fid = fidelity_series(system, grid)
    rio.write_series_csv(os.path.join(out_dir, rel_fid), fid)
    return rels


def cmd_build(config: RunConfig, workers: int = 1) -> int:
    out_dir = rio.ensure_dir(config.out_dir)
    save_config(config, os.path.join(out_dir, "config.json"))
    tasks = [(target, seed) for target in config.targets for seed in config.seeds]
    new = _run_tasks(_build_one, [(config, t, s, out_dir) for t, s in tasks], workers)
    _register(out_dir, ["config.json"] + new)
    return EXIT_OK


def cmd_evolve(config: RunConfig, workers: int = 1) -> int:
    out_dir = config.out_dir
    tasks = [(config, t, s, mu, out_dir) for t in config.targets
             for s in config.seeds for mu in config.mu_list]
    missing = [os.path.join(out_dir, _model_path(t, s))
               for _, t, s, _, _ in tasks]
    absent = sorted({p for p in missing if not os.path.exists(p)})
    if absent:
        raise FileNotFoundError(f"missing model artifacts (run build first): {absent[:3]}")
    new = _run_tasks(_evolve_one, tasks, workers)
    _register(out_dir, new)
    # fidelity-rate summary
    grid = _grid(config)
    window = (0.0, min(60.0, grid.t_max))
    rates = {}
    for target in config.targets:
        for seed in config.seeds:
            for mu in config.mu_list:
                tag = f"{target.label()}_s{seed}_mu{_mu_tag(mu)}"
                fid = rio.read_series_csv(os.path.join(out_dir, f"series/fid_{tag}.csv"))
                rates[tag] = fit_exponential_rate(fid, window)
    rio.ensure_dir(os.path.join(out_dir, "reports"))
    rio.write_manifest(os.path.join(out_dir, "reports/fidelity_rates.json"),
                       {"window": list(window), "rates": rates})
    _register(out_dir, ["reports/fidelity_rates.json"])
    return EXIT_OK


def _fitted_alpha(config: RunConfig, out_dir: str) -> float:
    if config.alpha is not None:
        return config.alpha
    path = os.path.join(out_dir, "reports/fits.json")
    if os.path.exists(path):
        return float(rio.read_manifest(path)["alpha"])
    return DEFAULT_ALPHA


def cmd_kernel(config: RunConfig, workers: int = 1) -> int:
    out_dir = config.out_dir
    rio.ensure_dir(os.path.join(out_dir, "kernels"))
    alpha = _fitted_alpha(config, out_dir)
    new = []
    for target in config.targets:
        for seed in config.seeds:
            a = rio.read_series_csv(
                os.path.join(out_dir, f"series/a_{target.label()}_s{seed}.csv"))
            kernel = kernel_from_dynamics(a)
            rel_k = f"kernels/{target.label()}_s{seed}.csv"
            rio.write_kernel_csv(os.path.join(out_dir, rel_k), kernel)
            rio.write_manifest(os.path.join(out_dir, rel_k.replace(".csv", ".json")),
                               {"local_coefficient": kernel.local_coefficient})
            new.append(rel_k)
            for mu in config.mu_list:
                tag = f"{target.label()}_s{seed}_mu{_mu_tag(mu)}"
                at = rio.read_series_csv(os.path.join(out_dir, f"series/at_{tag}.csv"))
                if config.beta is not None:
                    beta = config.beta
                else:
                    beta = fit_params(a, at, fix_alpha=alpha).params.beta
                pred = predict_perturbed(a, HeuristicParams(alpha, beta))
                rel_p = f"kernels/pred_{tag}.csv"
                rio.write_series_csv(os.path.join(out_dir, rel_p), pred)
                new.append(rel_p)
    _register(out_dir, new)
    return EXIT_OK


def cmd_fit(config: RunConfig, workers: int = 1) -> int:
    """Fit a shared alpha on the widest band, then beta per band width.

    Alpha is pooled across every configured target at mu = max: a pair whose
    unperturbed kernel is purely local (the exponential target) constrains
    only the product beta * alpha, so a single-pair alpha fit is ill-posed.
    """
    out_dir = config.out_dir
    rio.ensure_dir(os.path.join(out_dir, "reports"))
    exp_target = next((t for t in config.targets if t.variant == "exponential"),
                      config.targets[0])
    seed = config.seeds[0]
    a = rio.read_series_csv(
        os.path.join(out_dir, f"series/a_{exp_target.label()}_s{seed}.csv"))
    mu_wide = max(config.mu_list)
    wide_pairs = []
    for target in config.targets:
        tag = f"{target.label()}_s{seed}_mu{_mu_tag(mu_wide)}"
        wide_pairs.append((
            rio.read_series_csv(
                os.path.join(out_dir, f"series/a_{target.label()}_s{seed}.csv")),
            rio.read_series_csv(os.path.join(out_dir, f"series/at_{tag}.csv"))))
    if config.alpha is not None:
        alpha = config.alpha
        wide_fit = fit_params(*wide_pairs[0], fix_alpha=alpha)
        wide_info = {
            "mu": mu_wide, "alpha": alpha, "beta": wide_fit.params.beta,
            "rms": wide_fit.rms_residual, "degenerate": wide_fit.degenerate,
        }
    else:
        shared = fit_shared_alpha(wide_pairs)
        alpha = shared.alpha
        wide_info = {
            "mu": mu_wide, "alpha": alpha, "joint_rms": shared.joint_rms,
            "beta_per_target": {t.label(): f.params.beta
                                for t, f in zip(config.targets, shared.fits)},
        }
    pairs = {}
    for mu in config.mu_list:
        tag = f"{exp_target.label()}_s{seed}_mu{_mu_tag(mu)}"
        pairs[mu] = (a, rio.read_series_csv(
            os.path.join(out_dir, f"series/at_{tag}.csv")))
    rows = beta_curve(pairs, fix_alpha=alpha)
    rio.write_beta_csv(os.path.join(out_dir, "reports/beta_mu.csv"), rows)
    rio.write_manifest(os.path.join(out_dir, "reports/fits.json"), {
        "alpha": alpha,
        "alpha_source": "config" if config.alpha is not None else "fit",
        "wide_band_fit": wide_info,
        "target": exp_target.to_dict(), "seed": seed,
    })
    # sigma calibration table against the first available model
    model = rio.load_model(os.path.join(out_dir, _model_path(exp_target, seed)))
    cal_seed = rio.artifact_seed(seed, "reports/sigma_mu.csv")
    cal = calibration_report(model, config.epsilon, config.mu_list, seed=cal_seed)
    rio.write_calibration_csv(os.path.join(out_dir, "reports/sigma_mu.csv"), cal)
    _register(out_dir, ["reports/beta_mu.csv", "reports/fits.json",
                        "reports/sigma_mu.csv"])
    return EXIT_OK


def cmd_recurrence(config: RunConfig, workers: int = 1,
                   tau_prime: float = 2.0, revival_time: float = 20.0) -> int:
    out_dir = rio.ensure_dir(config.out_dir)
    rio.ensure_dir(os.path.join(out_dir, "reports"))
    alpha = _fitted_alpha(config, out_dir)
    grid = _grid(config)
    target = recurrence(tau_prime, revival_time)
    a_r = TimeSeries(grid, evaluate_target(target, grid.times()))
    payload = {"tau_prime": tau_prime, "revival_time": revival_time, "alpha": alpha}
    for beta in (0.0, 1.0):
        report = recurrence_check(a_r, HeuristicParams(alpha, beta),
                                  tau_prime, revival_time)
        payload[f"beta_{beta:g}"] = {
            "convolution_max": report.convolution_max,
            "convolution_bound": report.convolution_bound,
            "suppression_ratio": report.suppression_ratio,
            "expected_suppression": report.expected_suppression,
            "max_deviation": report.max_deviation,
            "deviation_budget": report.deviation_budget,
        }
    rio.write_manifest(os.path.join(out_dir, "reports/recurrence.json"), payload)
    _register(out_dir, ["reports/recurrence.json"])
    return EXIT_OK


def cmd_sweep(config: RunConfig, workers: int = 1) -> int:
    """Full suite: build, evolve, kernel, fit, recurrence; per-task status."""
    out_dir = rio.ensure_dir(config.out_dir)
    status = {}
    for name, fn in (("build", cmd_build), ("evolve", cmd_evolve),
                     ("kernel", cmd_kernel), ("fit", cmd_fit),
                     ("recurrence", cmd_recurrence)):
        try:
            fn(config, workers=workers)
            status[name] = "ok"
        except Exception as exc:  # noqa: BLE001 - partial-failure report
            status[name] = f"failed: {exc}"
    rio.write_manifest(os.path.join(out_dir, "reports/sweep_status.json"),
                       {"stages": status})
    _register(out_dir, ["reports/sweep_status.json"])
    if any(v != "ok" for v in status.values()):
        failed = {k: v for k, v in status.items() if v != "ok"}
        raise NumericError(f"sweep stages failed: {failed}")
    return EXIT_OK


def cmd_report(config: RunConfig, workers: int = 1) -> int:
    """Aggregate a human-readable summary of a completed run directory."""
    out_dir = config.out_dir
    summary = {"out_dir": out_dir}
    grid = _grid(config)
    tailoring = {}
    for target in config.targets:
        for seed in config.seeds:
            rel = f"series/a_{target.label()}_s{seed}.csv"
            path = os.path.join(out_dir, rel)
            if not os.path.exists(path):
                continue
            series = rio.read_series_csv(path)
            g = evaluate_target(target, series.times)
            mask = series.times <= 3.0 * config.tau
            tailoring[f"{target.label()}_s{seed}"] = float(
                np.abs(series.values - g)[mask].max())
    summary["tailoring_max_abs_error"] = tailoring
    for rel in ("reports/fidelity_rates.json", "reports/fits.json",
                "reports/recurrence.json"):
        path = os.path.join(out_dir, rel)
        if os.path.exists(path):
            summary[os.path.basename(rel)] = rio.read_manifest(path)
    rio.write_manifest(os.path.join(out_dir, "reports/summary.json"), summary)
    _register(out_dir, ["reports/summary.json"])
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _call(fn_args):
    fn, args = fn_args
    return fn(*args)


def _run_tasks(fn, arg_tuples, workers: int) -> list[str]:
    if workers <= 1:
        results = [fn(*args) for args in arg_tuples]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_call, [(fn, args) for args in arg_tuples]))
    new = []
    for rels in results:
        new.extend(rels)
    return new


COMMANDS = {
    "build": cmd_build, "evolve": cmd_evolve, "kernel": cmd_kernel,
    "fit": cmd_fit, "recurrence": cmd_recurrence, "sweep": cmd_sweep,
    "report": cmd_report,
}

_TARGET_FACTORY_NAMES = ("exponential", "oscillation", "linear", "gaussian")


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="relaxlab",
        description="Random-matrix relaxation laboratory: build tailored "
                    "models, perturb them, and validate the damped-kernel "
                    "heuristic.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, help="single master seed override")
    parser.add_argument("--workers", type=int, default=1, help="worker processes")
    parser.add_argument("--dimension", type=int, help="matrix dimension override")
    parser.add_argument("--mu", help="comma-separated band widths override")
    parser.add_argument("--target", choices=_TARGET_FACTORY_NAMES,
                        help="restrict to a single relaxation target")
    return parser.parse_args(argv)


def _make_config(args) -> RunConfig:
    base = load_config(args.config).to_dict() if args.config else {}
    if args.out is not None:
        base["out_dir"] = args.out
    if args.seed is not None:
        base["seeds"] = [args.seed]
    if args.dimension is not None:
        base["dimension"] = args.dimension
    if args.mu is not None:
        base["mu_list"] = [float(m) for m in args.mu.split(",")]
    config = RunConfig.from_dict(base)
    if args.target is not None:
        chosen = [t for t in config.targets if t.variant == args.target]
        if not chosen:
            from .targets import TargetDynamics
            chosen = [TargetDynamics(args.target, config.tau)]
        config.targets = tuple(chosen)
    return config


def main(argv=None) -> int:
    args = _parse_args(argv if argv is not None else sys.argv[1:])
    try:
        config = _make_config(args)
        return COMMANDS[args.command](config, workers=max(args.workers, 1))
    except (ValueError, TypeError, KeyError, FileNotFoundError) as exc:
        if isinstance(exc, FileNotFoundError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
