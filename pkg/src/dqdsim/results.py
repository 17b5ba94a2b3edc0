"""Sweep results: labeled axes plus data arrays, serializable to CSV + JSON."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-9


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis: name (with unit suffix, e.g. ``tau_s``) and its values."""

    name: str
    values: np.ndarray
    repeat: int = 1

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            raise ValueError("sweep axis must not be empty")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ExperimentResult:
    """Probabilities/expectations on a 1- or 2-axis grid plus metadata."""

    axes: tuple[SweepSpec, ...]
    data: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("one or two sweep axes are supported")
        shape = tuple(len(ax.values) for ax in self.axes)
        for name, arr in self.data.items():
            arr = np.asarray(arr, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"column {name!r} has shape {arr.shape}, axes imply {shape}")
            if name.startswith("p_"):
                if arr.min() < -PROB_TOL or arr.max() > 1.0 + PROB_TOL:
                    raise ValueError(f"column {name!r} leaves [0, 1]")
                arr = np.clip(arr, 0.0, 1.0)
            self.data[name] = arr

    def to_csv(self, path: str | Path) -> None:
        """Axes columns then data columns, one grid point per row."""
        path = Path(path)
        columns = [ax.name for ax in self.axes] + list(self.data)
        grids = np.meshgrid(*(ax.values for ax in self.axes), indexing="ij")
        rows = [g.ravel() for g in grids] + [self.data[k].ravel() for k in self.data]
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for vals in zip(*rows):
                fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")

    def write_metadata(self, path: str | Path) -> None:
        payload = dict(self.metadata)
        payload["axes"] = [
            {"name": ax.name, "n": int(len(ax.values)), "repeat": ax.repeat}
            for ax in self.axes
        ]
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonify) + "\n",
                              encoding="utf-8")

    def save(self, out_dir: str | Path, name: str) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{name}.csv"
        meta_path = out_dir / f"{name}.meta.json"
        self.to_csv(csv_path)
        self.write_metadata(meta_path)
        return csv_path, meta_path


def _jsonify(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if is_dataclass(obj) and not isinstance(obj, type):
        return asdict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def params_digest(params: Any) -> str:
    """Stable short hash of a (nested) parameter object for provenance."""
    payload = json.dumps(params, sort_keys=True, default=_jsonify)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def base_metadata(protocol: str, params: Any, seed: int | None = None, **extra: Any) -> dict[str, Any]:
    meta: dict[str, Any] = {
        "protocol": protocol,
        "device_digest": params_digest(params),
        "device": params,
    }
    if seed is not None:
        meta["seed"] = int(seed)
    meta.update(extra)
    return meta
