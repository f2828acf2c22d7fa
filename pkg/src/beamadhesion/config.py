"""Run configuration: JSON in, validated dataclasses out.

Example::

    {
      "params": {"rho": 1.0, "mu": 1.0, "length": 1.0},
      "n_points": 401,
      "potential": {"kind": "smoothed", "eps": 0.1, "selection_at_one": 0.0},
      "initial": {"type": "uniform", "u0": 0.9, "v0": 0.0},
      "horizon": 10.0,
      "dt": "auto",
      "record_stride": 1000,
      "seed": 0,
      "harness": {}
    }

``initial`` may also be ``{"type": "cosine", "amplitude": A, "mode": m}``
(``u0 = A cos(2 pi m x / L)``, ``v0 = 0`` unless ``"velocity"`` is given) or
``{"type": "file", "path": "data.csv"}`` with header ``u0,u1``.
"""
from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beam_operator import BeamParams, BeamState, Grid
from .potential import PotentialSpec


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` names the offending key."""


@dataclass
class SimConfig:
    params: BeamParams
    n_points: int
    potential: PotentialSpec
    initial: dict
    horizon: float
    dt: float | str = "auto"
    record_stride: int | None = None
    seed: int = 0
    harness: dict = field(default_factory=dict)
    base_dir: Path = field(default=Path("."), repr=False, compare=False)

    @property
    def grid(self) -> Grid:
        return Grid.for_beam(self.params, self.n_points)

    def initial_state(self) -> BeamState:
        u0, u1 = initial_data(self.initial, self.grid, self.base_dir)
        return BeamState(0.0, u0, u1)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "n_points": self.n_points,
            "potential": self.potential.to_dict(),
            "initial": copy.deepcopy(self.initial),
            "horizon": self.horizon,
            "dt": self.dt,
            "record_stride": self.record_stride,
            "seed": self.seed,
            "harness": copy.deepcopy(self.harness),
        }


def initial_data(initial: dict, grid: Grid, base_dir: Path = Path(".")):
    kind = initial.get("type")
    n = grid.n_points
    if kind == "uniform":
        return np.full(n, float(initial.get("u0", 0.0))), np.full(n, float(initial.get("v0", 0.0)))
    if kind == "cosine":
        shape = np.cos(2.0 * math.pi * float(initial.get("mode", 1)) * grid.x / grid.length)
        return float(initial["amplitude"]) * shape, float(initial.get("velocity", 0.0)) * shape
    if kind == "file":
        path = Path(initial["path"])
        if not path.is_absolute():
            path = base_dir / path
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        u0 = np.array([float(r["u0"]) for r in rows])
        u1 = np.array([float(r["u1"]) for r in rows])
        if len(u0) != n:
            raise ConfigError(f"initial.path: file has {len(u0)} rows, grid has n_points={n}")
        return u0, u1
    raise ConfigError(f"initial.type: unknown initial data type {kind!r}")


def _require(d: dict, key: str, where: str = ""):
    if key not in d:
        raise ConfigError(f"{where}{key}: missing")
    return d[key]


def parse_config(raw: dict, base_dir: Path = Path(".")) -> SimConfig:
    """Validate a decoded JSON config; every error names its key."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    try:
        params = BeamParams(**raw.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from None
    n_points = _require(raw, "n_points")
    if not isinstance(n_points, int) or n_points < 5:
        raise ConfigError("n_points: must be an integer >= 5")
    try:
        potential = PotentialSpec.from_dict(raw.get("potential", {"kind": "exact"}))
    except ValueError as exc:
        raise ConfigError(f"potential: {exc}") from None
    horizon = _require(raw, "horizon")
    if not isinstance(horizon, (int, float)) or not horizon > 0 or not math.isfinite(horizon):
        raise ConfigError("horizon: must be a positive number")
    dt = raw.get("dt", "auto")
    if dt != "auto" and (not isinstance(dt, (int, float)) or not dt > 0):
        raise ConfigError("dt: must be 'auto' or a positive number")
    stride = raw.get("record_stride")
    if stride is not None and (not isinstance(stride, int) or stride < 1):
        raise ConfigError("record_stride: must be a positive integer")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed: must be an integer")
    initial = _require(raw, "initial")
    if not isinstance(initial, dict):
        raise ConfigError("initial: must be an object")
    cfg = SimConfig(params, n_points, potential, dict(initial), float(horizon), dt, stride, seed,
                    dict(raw.get("harness", {})), Path(base_dir))
    # materialise once so bad initial data fails at load time
    try:
        cfg.initial_state()
    except ConfigError:
        raise
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"initial: {exc}") from None
    return cfg


def load_config(path) -> SimConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
    try:
        return parse_config(raw, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}:{_key_line(path.read_text(), str(exc))}: {exc}") from None


def _key_line(text: str, message: str) -> int:
    """Line of the first top-level key named in ``message`` (1 if not found)."""
    key = message.split(":", 1)[0].split(".", 1)[0]
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return lineno
    return 1
