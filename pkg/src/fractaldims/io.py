"""Plain CSV and JSON writers with deterministic formatting."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, is_dataclass

import numpy as np

__all__ = ["jsonable", "dumps", "write_json", "write_csv", "write_exit_curve", "write_spectrum",
           "write_boxcount", "write_path", "write_crossings", "write_points"]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and dataclasses to JSON types."""
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def _open(path):
    d = os.path.dirname(os.fspath(path))
    if d:
        os.makedirs(d, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


def write_json(path, obj) -> None:
    with _open(path) as fh:
        fh.write(dumps(obj))


def write_csv(path, header, rows) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_exit_curve(path, curve) -> None:
    write_csv(path, ("r", "mean", "stderr"), curve.rows())


def write_spectrum(path, spectrum) -> None:
    write_csv(path, ("k", "lambda"), ((k + 1, lam) for k, lam in enumerate(spectrum.eigenvalues)))


def write_boxcount(path, result) -> None:
    write_csv(path, ("scale", "count"), zip(result.scales, result.counts))


def write_path(path, sample) -> None:
    write_csv(path, ("t", "value"), zip(sample.times, sample.values))


def write_crossings(path, dataset) -> None:
    write_csv(path, ("T", "r", "theta_minus", "theta_plus", "censored"),
              ((T, r, a, b, int(c)) for T, r, a, b, c in dataset.rows()))


def write_points(path, points) -> None:
    P = np.asarray(points, dtype=float)
    names = ("x", "y", "z")[: P.shape[1]] if P.ndim == 2 else ("x",)
    write_csv(path, names, P.reshape(len(P), -1))
