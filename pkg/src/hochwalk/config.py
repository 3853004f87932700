"""Experiment configuration: one JSON file with every numeric input inline.

Complex matrices are nested lists whose entries are numbers or ``[re, im]``
pairs.  Example::

    {
      "algebra": {"preset": "full_matrix", "d": 2},
      "generator": {"H": [[0, 0], [0, 0]], "lindblad": [[[0, 0], [1, 0]]]},
      "run": {"order": 4, "t": 1.0, "h_list": [0.0625, 0.03125], "tol": 1e-10},
      "output": {"coeffs": "coeffs.json", "report": "walk.csv"}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hochwalk import models
from hochwalk.bimodule import LindbladGenerator
from hochwalk.star_algebra import (
    AlgebraError,
    FiniteAlgebra,
    StarAlgebra,
    build_algebra,
    diagonal,
    direct_sum,
    dual_numbers,
    full_matrix,
)
from hochwalk.toy_fock import DEFAULT_MAX_DIM


class ConfigError(ValueError):
    pass


def decode_matrix(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == 2:
        return a.astype(complex)
    raise ConfigError(f"cannot read a matrix from an array of shape {a.shape}")


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


@dataclass
class ExperimentConfig:
    algebra: FiniteAlgebra
    generator: LindbladGenerator | None
    order: int = 4
    t: float = 1.0
    h_list: list[float] = field(default_factory=lambda: [2.0**-k for k in range(4, 9)])
    tol: float = 1e-10
    seed: int = 0
    max_dim: int = DEFAULT_MAX_DIM
    beta: str = "truncated"
    coeffs_path: str | None = None
    report_path: str | None = None

    def validate(self):
        if self.order < 1:
            raise ConfigError("order must be at least 1")
        if self.tol <= 0 or self.t <= 0:
            raise ConfigError("tolerances and t must be positive")
        if not self.h_list or any(h <= 0 for h in self.h_list):
            raise ConfigError("h_list must contain positive steps")
        if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ConfigError("h_list must be strictly decreasing")
        if self.beta not in ("truncated", "unitary"):
            raise ConfigError(f"unknown beta constructor {self.beta!r}")
        if self.max_dim < 1:
            raise ConfigError("max_dim must be positive")
        return self


def _algebra(spec: dict) -> FiniteAlgebra:
    if "basis" in spec:
        return StarAlgebra(np.stack([decode_matrix(b) for b in spec["basis"]]))
    if "generators" in spec:
        return build_algebra([decode_matrix(g) for g in spec["generators"]], tol=float(spec.get("tol", 1e-10)))
    preset = spec.get("preset")
    if preset == "full_matrix":
        return full_matrix(int(spec["d"]))
    if preset == "diagonal":
        return diagonal(int(spec["n"]))
    if preset == "direct_sum":
        return direct_sum([int(b) for b in spec["blocks"]])
    if preset == "dual_numbers":
        return dual_numbers()
    raise ConfigError(f"unknown algebra spec {spec!r}")


def _generator(spec: dict):
    """Returns (generator, default algebra or None)."""
    model = spec.get("model")
    if model == "amplitude_damping":
        alg, gen = models.amplitude_damping(float(spec.get("gamma", 1.0)))
        return gen, alg
    if model == "random":
        alg, gen = models.random_model(
            int(spec.get("d", 3)), int(spec.get("nk", 2)), int(spec.get("seed", models.RANDOM_SEED)), float(spec.get("scale", 0.5))
        )
        return gen, alg
    if model == "zero":
        alg, gen = models.zero_model(int(spec.get("d", 2)), int(spec.get("nk", 1)))
        return gen, alg
    if model is not None:
        raise ConfigError(f"unknown model {model!r}")
    H = decode_matrix(spec["H"])
    ops = [decode_matrix(op) for op in spec.get("lindblad", [])]
    return LindbladGenerator(H, ops), None


def parse_config(data: dict, base: Path | None = None) -> ExperimentConfig:
    try:
        gen, default_alg = (None, None)
        if "generator" in data:
            gen, default_alg = _generator(data["generator"])
        if "algebra" in data:
            alg = _algebra(data["algebra"])
        elif default_alg is not None:
            alg = default_alg
        else:
            raise ConfigError("config needs an algebra")
        run = data.get("run", {})
        out = data.get("output", {})

        def path(key):
            if key not in out:
                return None
            p = Path(out[key])
            return str(p if p.is_absolute() or base is None else base / p)

        cfg = ExperimentConfig(
            algebra=alg,
            generator=gen,
            order=int(run.get("order", 4)),
            t=float(run.get("t", 1.0)),
            h_list=[float(h) for h in run.get("h_list", [2.0**-k for k in range(4, 9)])],
            tol=float(run.get("tol", 1e-10)),
            seed=int(run.get("seed", 0)),
            max_dim=int(run.get("max_dim", DEFAULT_MAX_DIM)),
            beta=str(run.get("beta", "truncated")),
            coeffs_path=path("coeffs"),
            report_path=path("report"),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, AlgebraError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(data, base=path.parent)
