"""JSON and CSV file helpers shared by the CLI and the service."""

from __future__ import annotations

import json

import numpy as np

from .errors import InputError
from .laws import ObservationLaw, ShotHistogram
from .sweep import SweepConfig


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from None


def write_json(path: str, data: dict):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def read_law(path: str) -> ObservationLaw:
    return ObservationLaw.from_dict(_load_json(path))


def read_histogram(path: str) -> ShotHistogram:
    return ShotHistogram.from_dict(_load_json(path))


def read_sweep_config(path: str) -> SweepConfig:
    return SweepConfig.from_dict(_load_json(path))


def curve_to_csv(thetas: np.ndarray, values: np.ndarray) -> str:
    """Two-column CSV (theta, value) used for envelope and scan exports."""
    lines = ["theta,value"]
    for t, v in zip(thetas, values):
        lines.append(f"{t!r},{v!r}")
    return "\n".join(lines) + "\n"
