"""Re-check the invariants of a stored run from its files alone."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamics.io import read_csv, trajectory_states_from_csv

TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-6
BOUNDARY_TOL = 1e-12


class RunFilesError(ValueError):
    """Missing or unreadable run files."""


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    run_dir: Path
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail else "")
                for c in self.checks]


def _load_run(run_dir: Path) -> dict:
    path = run_dir / "run.json"
    if not path.is_file():
        raise RunFilesError(f"{path} is missing")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise RunFilesError(f"{path} is not valid JSON: {exc}") from exc


def _read(run_dir: Path, fname: str):
    path = run_dir / fname
    if not path.is_file():
        raise RunFilesError(f"{path} is missing")
    try:
        return read_csv(path)
    except (ValueError, UnicodeDecodeError) as exc:
        raise RunFilesError(f"{path} is corrupt: {exc}") from exc


def _finite_metrics(obj) -> bool:
    if isinstance(obj, dict):
        return all(_finite_metrics(v) for v in obj.values())
    if isinstance(obj, list):
        return all(_finite_metrics(v) for v in obj)
    if isinstance(obj, float):
        return bool(np.isfinite(obj))
    return True


def min_hermitian_eigenvalue(states) -> float:
    herm = 0.5 * (states + np.conj(np.swapaxes(states, -2, -1)))
    return float(np.min(np.linalg.eigvalsh(herm)))


def verify_run(run_dir) -> VerifyReport:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise RunFilesError(f"{run_dir} is not a run directory")
    run = _load_run(run_dir)
    rep = VerifyReport(run_dir)
    rep.add("status", run.get("status") == "ok", str(run.get("error") or ""))
    rep.add("metrics_finite", _finite_metrics(run.get("metrics", {})))
    data = run.get("data", {})
    for name, entry in sorted(run.get("outputs", {}).items()):
        header, arr = _read(run_dir, entry["file"])
        t = arr[:, 0] if arr.size else np.zeros(0)
        ok_format = len(header) == arr.shape[1] and arr.shape[0] > 0
        rep.add(f"{name}.format", ok_format, f"{arr.shape[0]} rows")
        rep.add(f"{name}.finite", bool(np.all(np.isfinite(arr))))
        rep.add(f"{name}.monotone_time", bool(np.all(np.diff(t) > 0)))
        kind = entry.get("kind")
        if kind == "density":
            rho = trajectory_states_from_csv(header, arr)
            drift = float(np.max(np.abs(np.einsum("kii->k", rho) - 1.0)))
            rep.add(f"{name}.trace", drift <= TRACE_TOL, f"max |Tr rho - 1| = {drift:.2e}")
            min_eig = min_hermitian_eigenvalue(rho)
            if "min_eigenvalue" in entry:
                # generator without a positivity guarantee: the stored value must be reproduced instead
                rec = float(entry["min_eigenvalue"])
                rep.add(f"{name}.positivity_recorded", abs(min_eig - rec) <= 1e-9,
                        f"min eigenvalue = {min_eig:.2e}, recorded {rec:.2e}")
            else:
                rep.add(f"{name}.positivity", min_eig >= -POSITIVITY_TOL, f"min eigenvalue = {min_eig:.2e}")
        elif kind == "bloch":
            r = trajectory_states_from_csv(header, arr)
            norm = float(np.max(np.linalg.norm(r, axis=1)))
            if "max_norm" in entry:
                rec = float(entry["max_norm"])
                rep.add(f"{name}.bloch_ball_recorded", abs(norm - rec) <= 1e-9,
                        f"max |R| = {norm:.6f}, recorded {rec:.6f}")
            else:
                rep.add(f"{name}.bloch_ball", norm <= 1.0 + POSITIVITY_TOL, f"max |R| = {norm:.6f}")
            if "initial" in data:
                dev = float(np.max(np.abs(r[0] - np.asarray(data["initial"]))))
                rep.add(f"{name}.initial_state", dev <= 1e-12, f"deviation {dev:.1e}")
        elif kind in ("fourier", "ramped"):
            vals = arr[:, 1:]
            first = float(np.max(np.abs(vals[0])))
            rep.add(f"{name}.boundary_start", first <= BOUNDARY_TOL, f"|eps(t0)| = {first:.1e}")
            if kind == "fourier":
                last = float(np.max(np.abs(vals[-1])))
                rep.add(f"{name}.boundary_end", last <= BOUNDARY_TOL, f"|eps(tf)| = {last:.1e}")
    return rep
