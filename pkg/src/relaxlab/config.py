"""Run configuration: one JSON-serializable record driving the whole pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .perturbation import DEFAULT_EPSILON, DEFAULT_MU_GRID
from .targets import TargetDynamics, STANDARD_TARGETS

DEFAULT_TAU = 15.0
DEFAULT_ALPHA = 0.027


@dataclass
class RunConfig:
    dimension: int = 4000
    half_width: float = 30.0
    tau: float = DEFAULT_TAU
    epsilon: float = DEFAULT_EPSILON
    mu_list: tuple = DEFAULT_MU_GRID
    targets: tuple = ()          # tuple of TargetDynamics
    seeds: tuple = (1,)
    dt: float = 0.1
    t_max: float = 90.0
    alpha: float | None = None   # damping-rate override for kernel/fit stages
    beta: float | None = None    # band-width weight override
    out_dir: str = "runs"

    def __post_init__(self):
        if not self.targets:
            self.targets = tuple(f(self.tau) for f in STANDARD_TARGETS)
        self.targets = tuple(
            t if isinstance(t, TargetDynamics) else TargetDynamics.from_dict(t)
            for t in self.targets)
        self.mu_list = tuple(float(m) for m in self.mu_list)
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        for name in ("half_width", "tau", "epsilon", "dt", "t_max"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if not self.mu_list:
            raise ValueError("mu_list must not be empty")
        if any(not (0.0 < m <= 2.0) for m in self.mu_list):
            raise ValueError("mu values must be in (0, 2]")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta is not None and not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must be in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["targets"] = [t.to_dict() for t in self.targets]
        d["mu_list"] = list(self.mu_list)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_json(fh.read())


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(config.to_json() + "\n")
