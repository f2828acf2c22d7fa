"""CSV and JSON artifacts.

Floats are written with 17 significant digits (``%.16e``) so values
round-trip exactly; every CSV starts with a header row.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .dynamics import Trajectory

FLOAT_FMT = "{:.16e}"
ENERGY_COLUMNS = ("t", "kinetic", "bending", "adhesion", "total", "contact_fraction")


def fmt(x: float) -> str:
    return FLOAT_FMT.format(float(x))


def trajectory_header(n_points: int) -> list[str]:
    return ["t"] + [f"x_{i}" for i in range(n_points)] + [f"u_{i}" for i in range(n_points)]


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    path = Path(path)
    x = [fmt(v) for v in traj.grid.x]
    with open(path, "w") as fh:
        fh.write(",".join(trajectory_header(traj.grid.n_points)) + "\n")
        for t, u in zip(traj.t, traj.u):
            fh.write(",".join([fmt(t), *x, *(fmt(v) for v in u)]) + "\n")
    return path


def write_energy_csv(path, traj: Trajectory) -> Path:
    path = Path(path)
    cols = (traj.t, traj.kinetic, traj.bending, traj.adhesion, traj.total_energy, traj.contact_fraction)
    with open(path, "w") as fh:
        fh.write(",".join(ENERGY_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_series_csv(path, t, u, v=None) -> Path:
    """Uniform-in-space series (oracle output) in the energy-CSV float format."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("t,u" + (",v" if v is not None else "") + "\n")
        rows = zip(t, u) if v is None else zip(t, u, v)
        for row in rows:
            fh.write(",".join(fmt(c) for c in row) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")
    return path
