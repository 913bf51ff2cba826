"""CSV export of trajectories and fields."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import Trajectory


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_header(traj: Trajectory) -> list[str]:
    if traj.is_bloch:
        return ["t", "x", "y", "z"]
    n = traj.states.shape[1]
    cols = ["t"]
    for i in range(n):
        for j in range(n):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    return cols


def trajectory_rows(traj: Trajectory):
    for t, s in zip(traj.times, traj.states):
        if traj.is_bloch:
            yield [_fmt(t)] + [_fmt(v) for v in s]
        else:
            row = [_fmt(t)]
            for v in np.asarray(s).reshape(-1):
                row += [_fmt(v.real), _fmt(v.imag)]
            yield row


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_header(traj))
        w.writerows(trajectory_rows(traj))
    return path


def write_columns_csv(path, columns: dict) -> Path:
    """Write equal-length named columns; the first column should be time."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ValueError("all CSV columns must have the same length")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(n):
            w.writerow([_fmt(a[i]) for a in arrays])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float data of a CSV written by this module."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, data


def trajectory_states_from_csv(header, data):
    """Rebuild the state array from trajectory CSV columns."""
    if header[1:] == ["x", "y", "z"]:
        return data[:, 1:4]
    n = int(round(np.sqrt((len(header) - 1) / 2)))
    comp = data[:, 1::2] + 1j * data[:, 2::2]
    return comp.reshape(len(data), n, n)
