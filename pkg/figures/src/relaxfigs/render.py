"""Render figures from the CSV/JSON artifacts of a completed run directory.

Five figure ids are supported:

    fidelity   fidelity decay per band width with exponential-fit overlays
    panels     one panel per relaxation target: unperturbed dynamics (solid),
               measured perturbed dynamics (symbols), heuristic prediction
               (dashed), one curve set per band width
    sigma_mu   calibrated perturbation element scale versus band width,
               exact versus closed-form estimate
    beta_mu    fitted local damping weight versus band width
    recurrence recurrence suppression diagnostics versus their bounds

Rendering is read-only over the run directory and deterministic: a fixed
style, no timestamps, identical inputs give identical images.  Missing series
produce an explicit placeholder in the affected panel and a nonzero exit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 (backend must be set first)
import numpy as np  # noqa: E402

FIGURE_IDS = ("fidelity", "panels", "sigma_mu", "beta_mu", "recurrence")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MISSING = 2

_STYLE = {
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.framealpha": 0.9,
    "savefig.dpi": 120,
}
_MARKERS = ("o", "s", "^", "d", "v", "*")


@dataclass
class FigureSpec:
    """What to draw: a run directory, a figure id and an output path."""

    in_dir: str
    fig_id: str
    out_path: str

    def __post_init__(self):
        if self.fig_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.fig_id!r}; "
                             f"expected one of {FIGURE_IDS}")


def _mu_tag(mu: float) -> str:
    return ("%g" % mu).replace(".", "p")


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_csv(path: str, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Load a CSV with an exact header contract into named columns."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != ",".join(columns):
        raise ValueError(f"{path}: header {header!r} does not match "
                         f"expected columns {columns}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(columns):
        raise ValueError(f"{path}: expected {len(columns)} columns")
    return {name: data[:, i] for i, name in enumerate(columns)}


def _load_run_config(in_dir: str) -> dict:
    config = _read_json(os.path.join(in_dir, "config.json"))
    if not config.get("mu_list"):
        raise ValueError("run configuration has an empty band-width list")
    if not config.get("targets"):
        raise ValueError("run configuration lists no relaxation targets")
    if not config.get("seeds"):
        raise ValueError("run configuration lists no seeds")
    return config


def _target_labels(config: dict) -> list[str]:
    return [t["target"] for t in config["targets"]]


def _placeholder(ax, path: str) -> None:
    ax.text(0.5, 0.5, f"missing input:\n{os.path.basename(path)}",
            ha="center", va="center", transform=ax.transAxes,
            fontsize=8, color="crimson",
            bbox={"boxstyle": "round", "fc": "mistyrose", "ec": "crimson"})


def _fig_fidelity(in_dir: str, config: dict):
    """Fidelity decay for every band width of the first target and seed."""
    label = _target_labels(config)[0]
    seed = config["seeds"][0]
    rates_path = os.path.join(in_dir, "reports", "fidelity_rates.json")
    rates = _read_json(rates_path)["rates"] if os.path.exists(rates_path) else {}
    missing = []
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    for i, mu in enumerate(config["mu_list"]):
        tag = f"{label}_s{seed}_mu{_mu_tag(mu)}"
        path = os.path.join(in_dir, "series", f"fid_{tag}.csv")
        if not os.path.exists(path):
            missing.append(path)
            continue
        series = _read_csv(path, ("t", "value"))
        t, f = series["t"], series["value"]
        step = max(1, len(t) // 45)
        ax.semilogy(t[::step], f[::step], _MARKERS[i % len(_MARKERS)],
                    ms=3.5, mfc="none", label=f"$\\mu = {mu:g}$")
        if tag in rates:
            ax.semilogy(t, np.exp(-rates[tag] * t), "-", lw=1,
                        color=ax.lines[-1].get_color())
    if missing:
        _placeholder(ax, missing[0])
    ax.set_xlabel("t")
    ax.set_ylabel("fidelity F(t)")
    ax.set_title(f"fidelity decay, {label} target")
    ax.set_ylim(bottom=max(ax.get_ylim()[0], 1e-3))
    if ax.lines:
        ax.legend(loc="lower left", fontsize=8)
    return fig, missing


def _fig_panels(in_dir: str, config: dict):
    """Per-target dynamics: unperturbed, perturbed and predicted curves."""
    labels = _target_labels(config)
    seed = config["seeds"][0]
    n = len(labels)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.0 * ncols, 2.8 * nrows),
                             squeeze=False, sharex=True)
    missing = []
    for k, label in enumerate(labels):
        ax = axes[k // ncols][k % ncols]
        a_path = os.path.join(in_dir, "series", f"a_{label}_s{seed}.csv")
        if not os.path.exists(a_path):
            missing.append(a_path)
            _placeholder(ax, a_path)
            continue
        a = _read_csv(a_path, ("t", "value"))
        ax.plot(a["t"], a["value"], "k-", lw=1.2, label="unperturbed")
        for i, mu in enumerate(config["mu_list"]):
            tag = f"{label}_s{seed}_mu{_mu_tag(mu)}"
            at_path = os.path.join(in_dir, "series", f"at_{tag}.csv")
            pred_path = os.path.join(in_dir, "kernels", f"pred_{tag}.csv")
            if not os.path.exists(at_path) or not os.path.exists(pred_path):
                missing.append(at_path if not os.path.exists(at_path)
                               else pred_path)
                _placeholder(ax, missing[-1])
                continue
            at = _read_csv(at_path, ("t", "value"))
            step = max(1, len(at["t"]) // 40)
            ax.plot(at["t"][::step], at["value"][::step],
                    _MARKERS[i % len(_MARKERS)], ms=3, mfc="none",
                    label=f"$\\mu = {mu:g}$")
            pred = _read_csv(pred_path, ("t", "value"))
            ax.plot(pred["t"], pred["value"], "--", lw=1,
                    color=ax.lines[-1].get_color())
        ax.set_title(label, fontsize=9)
        if k // ncols == nrows - 1:
            ax.set_xlabel("t")
        if k % ncols == 0:
            ax.set_ylabel("a(t)")
        if k == 0 and ax.lines:
            ax.legend(fontsize=7, loc="upper right")
    for k in range(n, nrows * ncols):
        axes[k // ncols][k % ncols].set_axis_off()
    fig.tight_layout()
    return fig, missing


def _fig_sigma_mu(in_dir: str, config: dict):
    path = os.path.join(in_dir, "reports", "sigma_mu.csv")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    if not os.path.exists(path):
        _placeholder(ax, path)
        return fig, [path]
    table = _read_csv(path, ("mu", "sigma_exact", "sigma_estimate", "ratio"))
    ax.loglog(table["mu"], table["sigma_exact"], "o-", ms=4,
              label="calibrated (exact norm)")
    ax.loglog(table["mu"], table["sigma_estimate"], "s--", ms=4, mfc="none",
              label="closed-form estimate")
    ax.set_xlabel("band width $\\mu$")
    ax.set_ylabel("element scale $\\sigma$")
    ax.set_title("perturbation calibration")
    ax.legend(fontsize=8)
    return fig, []


def _fig_beta_mu(in_dir: str, config: dict):
    path = os.path.join(in_dir, "reports", "beta_mu.csv")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    if not os.path.exists(path):
        _placeholder(ax, path)
        return fig, [path]
    table = _read_csv(path, ("mu", "beta", "rms"))
    ax.semilogx(table["mu"], table["beta"], "o-", ms=5)
    ax.set_xlabel("band width $\\mu$")
    ax.set_ylabel("local damping weight $\\beta$")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("fitted damping split")
    return fig, []


def _fig_recurrence(in_dir: str, config: dict):
    path = os.path.join(in_dir, "reports", "recurrence.json")
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    if not os.path.exists(path):
        _placeholder(ax, path)
        return fig, [path]
    report = _read_json(path)
    pairs = [
        ("convolution max", "convolution_max", "convolution_bound"),
        ("revival suppression", "suppression_ratio", "expected_suppression"),
        ("max deviation", "max_deviation", "deviation_budget"),
    ]
    width = 0.2
    x = np.arange(len(pairs))
    for j, beta in enumerate(("beta_0", "beta_1")):
        block = report.get(beta, {})
        values = [block.get(v, np.nan) for _, v, _ in pairs]
        ax.bar(x + (j - 0.5) * 2 * width, values, width=1.6 * width,
               label=f"$\\beta = {beta[-1]}$")
    bounds = [report.get("beta_0", {}).get(b, np.nan) for _, _, b in pairs]
    for xi, bound in zip(x, bounds):
        ax.hlines(bound, xi - 2.2 * width, xi + 2.2 * width,
                  color="k", ls=":", lw=1.2)
    ax.set_xticks(x, [name for name, _, _ in pairs], fontsize=8)
    alpha = report.get("alpha")
    alpha_text = "?" if alpha is None else f"{alpha:.4g}"
    ax.set_title(f"recurrence check ($\\tau' = {report.get('tau_prime', '?')}$, "
                 f"$T = {report.get('revival_time', '?')}$, "
                 f"$\\alpha = {alpha_text}$); dotted = bound", fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, []


_BUILDERS = {
    "fidelity": _fig_fidelity,
    "panels": _fig_panels,
    "sigma_mu": _fig_sigma_mu,
    "beta_mu": _fig_beta_mu,
    "recurrence": _fig_recurrence,
}


def render(spec: FigureSpec) -> list[str]:
    """Render one figure; returns the list of missing input paths (empty on
    full success).  The image is written even when placeholders appear so the
    gap is visible in the output."""
    config = _load_run_config(spec.in_dir)
    with plt.rc_context(_STYLE):
        fig, missing = _BUILDERS[spec.fig_id](spec.in_dir, config)
        out_dir = os.path.dirname(os.path.abspath(spec.out_path))
        os.makedirs(out_dir, exist_ok=True)
        fig.savefig(spec.out_path)
        plt.close(fig)
    return missing


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="relaxfigs",
        description="Render figures from a completed run directory.")
    parser.add_argument("--in", dest="in_dir", required=True, metavar="DIR",
                        help="run directory (with config.json and artifacts)")
    parser.add_argument("--fig", required=True, choices=FIGURE_IDS,
                        help="figure id")
    parser.add_argument("--out", required=True, metavar="PATH",
                        help="output image path (.png, .pdf, .svg)")
    args = parser.parse_args(argv)
    try:
        missing = render(FigureSpec(args.in_dir, args.fig, args.out))
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if missing:
        for path in missing:
            print(f"missing input: {path}", file=sys.stderr)
        return EXIT_MISSING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
