"""Artifact persistence.

Binary blobs carry one JSON header plus raw little-endian float64 arrays:

    bytes 0..3   magic (b"RLXM" model, b"RLXV" perturbation)
    bytes 4..7   header length L, uint32 little-endian
    bytes 8..8+L JSON header (dimension, seeds, parameters, array order)
    remainder    the arrays named in header["arrays"], row-major float64,
                 concatenated in order

Series, kernels and report tables are CSV with fixed column contracts
(`t,value`, `tau,K`, `mu,beta,rms`, `mu,sigma_exact,sigma_estimate,ratio`);
JSON sidecar manifests record provenance and sha256 content hashes.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .ensemble import ModelSpec, Spectrum, TailoredModel
from .evolve import TimeGrid, TimeSeries
from .memkernel import MemoryKernel
from .perturbation import Perturbation
from .targets import TargetDynamics

MODEL_MAGIC = b"RLXM"
PERTURBATION_MAGIC = b"RLXV"
_FLOAT_FMT = "%.17g"


def _write_blob(path, magic: bytes, header: dict, arrays: dict) -> None:
    header = dict(header)
    header["arrays"] = [
        {"name": name, "shape": list(arr.shape)} for name, arr in arrays.items()
    ]
    head = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(np.uint32(len(head)).tobytes())
        fh.write(head)
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_blob(path, magic: bytes):
    with open(path, "rb") as fh:
        if fh.read(4) != magic:
            raise OSError(f"{path}: bad magic, not a {magic.decode()} blob")
        (length,) = np.frombuffer(fh.read(4), dtype="<u4")
        header = json.loads(fh.read(int(length)).decode())
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise OSError(f"{path}: truncated array {entry['name']}")
            data = np.frombuffer(raw, dtype="<f8")
            arrays[entry["name"]] = data.reshape(shape).copy()
    return header, arrays


def save_model(model: TailoredModel, path) -> None:
    header = {
        "dimension": model.dimension,
        "half_width": model.spec.half_width,
        "seed": model.spec.seed,
        "diagonal_mode": model.spec.diagonal_mode,
        "target": model.spec.target.to_dict(),
        "metadata": model.metadata,
    }
    _write_blob(path, MODEL_MAGIC, header, {
        "spectrum": model.spectrum.eigenvalues,
        "a_matrix": model.a_matrix,
        "a_eigenvalues": model.a_eigenvalues,
        "a_eigenvectors": model.a_eigenvectors,
    })


def load_model(path) -> TailoredModel:
    header, arrays = _read_blob(path, MODEL_MAGIC)
    spec = ModelSpec(
        dimension=int(header["dimension"]),
        target=TargetDynamics.from_dict(header["target"]),
        half_width=float(header["half_width"]),
        seed=int(header["seed"]),
        diagonal_mode=header["diagonal_mode"],
    )
    return TailoredModel(
        spec=spec,
        spectrum=Spectrum(arrays["spectrum"], spec.half_width),
        a_matrix=arrays["a_matrix"],
        a_eigenvalues=arrays["a_eigenvalues"],
        a_eigenvectors=arrays["a_eigenvectors"],
        metadata=header.get("metadata", {}),
    )


def save_perturbation(pert: Perturbation, path) -> None:
    header = {"mu": pert.mu, "epsilon": pert.epsilon, "sigma": pert.sigma,
              "seed": pert.seed}
    _write_blob(path, PERTURBATION_MAGIC, header, {"v_matrix": pert.v_matrix})


def load_perturbation(path) -> Perturbation:
    header, arrays = _read_blob(path, PERTURBATION_MAGIC)
    return Perturbation(mu=float(header["mu"]), epsilon=float(header["epsilon"]),
                        sigma=float(header["sigma"]), v_matrix=arrays["v_matrix"],
                        seed=int(header["seed"]))


def _write_csv(path, columns: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(columns + "\n")
        for row in rows:
            fh.write(",".join(_FLOAT_FMT % v for v in row) + "\n")


def write_series_csv(path, series: TimeSeries) -> None:
    _write_csv(path, "t,value", zip(series.times, series.values))


def read_series_csv(path) -> TimeSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    t, values = data[:, 0], data[:, 1]
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-9 * max(dt, 1.0)):
        raise ValueError(f"{path}: time column is not a uniform grid")
    return TimeSeries(TimeGrid(dt, t.size), values)


def write_kernel_csv(path, kernel: MemoryKernel) -> None:
    _write_csv(path, "tau,K", zip(kernel.grid.times(), kernel.values))


def write_beta_csv(path, rows) -> None:
    _write_csv(path, "mu,beta,rms", ((r.mu, r.beta, r.rms) for r in rows))


def write_calibration_csv(path, rows) -> None:
    _write_csv(path, "mu,sigma_exact,sigma_estimate,ratio",
               ((r.mu, r.sigma_exact, r.sigma_estimate, r.ratio) for r in rows))


def file_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def artifact_seed(master_seed: int, artifact_path: str) -> int:
    """Deterministic per-artifact seed from the master seed and relative path."""
    digest = hashlib.sha256(f"{master_seed}:{artifact_path}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
