"""Figure rendering against a synthetic run directory.

The fixture fabricates the documented CSV/JSON artifacts directly; nothing
here touches the simulation package.
"""

import json
import os

import numpy as np
import pytest

from relaxfigs.render import EXIT_MISSING, EXIT_OK, EXIT_VALIDATION, \
    FIGURE_IDS, FigureSpec, main, render

MUS = [0.5, 2.0]
TARGETS = ["exponential", "gaussian"]
SEED = 1


def _write_series(path, t, values):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,value\n")
        for ti, vi in zip(t, values):
            fh.write(f"{ti:.17g},{vi:.17g}\n")


@pytest.fixture
def run_dir(tmp_path):
    root = tmp_path / "run"
    root.mkdir()
    config = {
        "dimension": 100, "tau": 15.0, "epsilon": 0.029,
        "mu_list": MUS, "seeds": [SEED],
        "targets": [{"target": name, "tau": 15.0} for name in TARGETS],
        "dt": 0.1, "t_max": 30.0, "out_dir": str(root),
    }
    (root / "config.json").write_text(json.dumps(config))
    t = np.arange(0.0, 30.0 + 1e-9, 0.1)
    rates = {}
    for name in TARGETS:
        a = np.exp(-t / 15.0)
        _write_series(str(root / "series" / f"a_{name}_s{SEED}.csv"), t, a)
        for mu in MUS:
            tag = f"{name}_s{SEED}_mu{('%g' % mu).replace('.', 'p')}"
            _write_series(str(root / "series" / f"at_{tag}.csv"),
                          t, a * np.exp(-0.02 * mu * t))
            _write_series(str(root / "series" / f"fid_{tag}.csv"),
                          t, np.exp(-0.029 * t))
            _write_series(str(root / "kernels" / f"pred_{tag}.csv"),
                          t, a * np.exp(-0.019 * mu * t))
            rates[tag] = 0.029
    reports = root / "reports"
    reports.mkdir()
    (reports / "fidelity_rates.json").write_text(
        json.dumps({"window": [0.0, 30.0], "rates": rates}))
    with open(reports / "beta_mu.csv", "w", encoding="utf-8") as fh:
        fh.write("mu,beta,rms\n")
        for mu, beta in zip(MUS, (0.2, 0.9)):
            fh.write(f"{mu},{beta},0.01\n")
    with open(reports / "sigma_mu.csv", "w", encoding="utf-8") as fh:
        fh.write("mu,sigma_exact,sigma_estimate,ratio\n")
        for mu in MUS:
            sig = 0.029 * 30.0 / np.sqrt(100 * mu)
            fh.write(f"{mu},{sig},{sig * 1.01},{1 / 1.01}\n")
    (reports / "recurrence.json").write_text(json.dumps({
        "tau_prime": 2.0, "revival_time": 20.0, "alpha": 0.027,
        "beta_0": {"convolution_max": 0.76, "convolution_bound": 6.0,
                   "suppression_ratio": 0.65, "expected_suppression": 0.58,
                   "max_deviation": 0.04, "deviation_budget": 0.27},
        "beta_1": {"convolution_max": 0.76, "convolution_bound": 6.0,
                   "suppression_ratio": 0.58, "expected_suppression": 0.58,
                   "max_deviation": 0.0, "deviation_budget": 0.27},
    }))
    return root


@pytest.mark.parametrize("fig_id", FIGURE_IDS)
def test_each_figure_renders(run_dir, tmp_path, fig_id):
    out = tmp_path / f"{fig_id}.png"
    missing = render(FigureSpec(str(run_dir), fig_id, str(out)))
    assert missing == []
    assert out.exists() and out.stat().st_size > 1000


def test_cli_success_and_formats(run_dir, tmp_path):
    for ext in ("png", "svg"):
        out = tmp_path / f"beta.{ext}"
        code = main(["--in", str(run_dir), "--fig", "beta_mu",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert out.exists()


def test_identical_inputs_identical_images(run_dir, tmp_path):
    outs = []
    for name in ("one.png", "two.png"):
        out = tmp_path / name
        assert main(["--in", str(run_dir), "--fig", "panels",
                     "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_missing_series_placeholder_and_nonzero_exit(run_dir, tmp_path):
    (run_dir / "series" / f"at_gaussian_s{SEED}_mu2.csv").unlink()
    out = tmp_path / "panels.png"
    code = main(["--in", str(run_dir), "--fig", "panels", "--out", str(out)])
    assert code == EXIT_MISSING
    assert out.exists()  # image still written, with a visible placeholder


def test_missing_report_nonzero(run_dir, tmp_path):
    (run_dir / "reports" / "beta_mu.csv").unlink()
    code = main(["--in", str(run_dir), "--fig", "beta_mu",
                 "--out", str(tmp_path / "b.png")])
    assert code == EXIT_MISSING


def test_missing_config_is_missing_input(tmp_path):
    code = main(["--in", str(tmp_path), "--fig", "fidelity",
                 "--out", str(tmp_path / "f.png")])
    assert code == EXIT_MISSING


def test_empty_mu_list_is_validation_error(run_dir, tmp_path):
    config = json.loads((run_dir / "config.json").read_text())
    config["mu_list"] = []
    (run_dir / "config.json").write_text(json.dumps(config))
    code = main(["--in", str(run_dir), "--fig", "fidelity",
                 "--out", str(tmp_path / "f.png")])
    assert code == EXIT_VALIDATION


def test_header_contract_enforced(run_dir, tmp_path):
    path = run_dir / "reports" / "beta_mu.csv"
    path.write_text("mu,b,rms\n0.5,0.2,0.01\n")
    code = main(["--in", str(run_dir), "--fig", "beta_mu",
                 "--out", str(tmp_path / "b.png")])
    assert code == EXIT_VALIDATION


def test_unknown_figure_id_rejected(run_dir, tmp_path):
    with pytest.raises(ValueError):
        FigureSpec(str(run_dir), "nope", str(tmp_path / "x.png"))
