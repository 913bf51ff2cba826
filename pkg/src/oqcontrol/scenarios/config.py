"""Scenario configuration documents (TOML) with schema validation."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .catalog import CATALOG, SCENARIO_IDS

BUDGETS = ("desk", "paper")
TOP_LEVEL = ("scenario", "energy_unit", "seed", "budget", "output_dir", "model", "grid", "optimizer")
GRID_KEYS = ("t0", "tf", "n_steps")


class SchemaError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _merge(section: str, given: dict, defaults: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if key not in defaults:
            raise SchemaError(f"{section}.{key}", "unknown parameter for this scenario")
        ref = defaults[key]
        if isinstance(ref, dict):
            if not isinstance(value, dict):
                raise SchemaError(f"{section}.{key}", "expected a table")
            for sub in value:
                if sub not in ref:
                    raise SchemaError(f"{section}.{key}.{sub}", "unknown parameter for this scenario")
            out[key].update(value)
        elif isinstance(ref, bool) or isinstance(value, bool):
            if type(value) is not type(ref):
                raise SchemaError(f"{section}.{key}", f"expected {type(ref).__name__}")
            out[key] = value
        elif isinstance(ref, int):
            if not isinstance(value, int):
                raise SchemaError(f"{section}.{key}", "expected an integer")
            out[key] = value
        elif isinstance(ref, float):
            if not isinstance(value, (int, float)):
                raise SchemaError(f"{section}.{key}", "expected a number")
            out[key] = float(value)
        elif key == "initial":
            # "equilibrium" or an explicit Bloch vector
            if not (value == "equilibrium" or isinstance(value, list) and len(value) == 3):
                raise SchemaError(f"{section}.{key}", "expected 'equilibrium' or a Bloch vector")
            out[key] = value
        elif not isinstance(value, type(ref)):
            raise SchemaError(f"{section}.{key}", f"expected {type(ref).__name__}")
        else:
            out[key] = value
    return out


@dataclass
class ScenarioConfig:
    scenario: str
    energy_unit: str = "hbar_omega"
    seed: int = 0
    budget: str = "desk"
    output_dir: str = "runs"
    model: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise SchemaError("<root>", "configuration must be a table")
        for key in data:
            if key not in TOP_LEVEL:
                raise SchemaError(key, "unknown top-level field")
        if "scenario" not in data:
            raise SchemaError("scenario", "missing required field")
        sid = data["scenario"]
        if sid not in CATALOG:
            raise SchemaError("scenario", f"unknown scenario id {sid!r}; expected one of {list(SCENARIO_IDS)}")
        spec = CATALOG[sid]
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise SchemaError("seed", "expected a non-negative integer")
        budget = data.get("budget", "desk")
        if budget not in BUDGETS:
            raise SchemaError("budget", f"expected one of {list(BUDGETS)}")
        unit = data.get("energy_unit", spec.energy_unit)
        if not isinstance(unit, str) or not unit:
            raise SchemaError("energy_unit", "expected a unit name")
        out_dir = data.get("output_dir", "runs")
        if not isinstance(out_dir, str):
            raise SchemaError("output_dir", "expected a path string")
        for sec in ("model", "grid", "optimizer"):
            if sec in data and not isinstance(data[sec], dict):
                raise SchemaError(sec, "expected a table")
        model = _merge("model", data.get("model", {}), spec.model)
        grid = _merge("grid", data.get("grid", {}), spec.grid)
        opt_defaults = dict(spec.optimizer)
        optimizer = _merge("optimizer", data.get("optimizer", {}), opt_defaults)
        cfg = cls(sid, unit, seed, budget, out_dir, model, grid, optimizer)
        cfg.validate()
        return cfg

    def validate(self):
        g = self.grid
        if not isinstance(g["n_steps"], int) or g["n_steps"] < 1:
            raise SchemaError("grid.n_steps", "expected a positive integer")
        if not g["tf"] > g["t0"]:
            raise SchemaError("grid.tf", "final time must exceed the initial time")
        m = self.model
        for key in ("temperature", "omega_c", "beta", "e_c"):
            if key in m and not m[key] > 0:
                raise SchemaError(f"model.{key}", "must be positive")
        for key in ("eta", "alpha", "gamma", "gamma1", "gamma2", "charge_noise", "flux_noise"):
            if key in m and m[key] < 0:
                raise SchemaError(f"model.{key}", "must be non-negative")
        if "w1" in m and abs(m["w1"] + m["w2"] - 1.0) > 1e-12:
            raise SchemaError("model.w2", "weights must satisfy w1 + w2 = 1")
        if "bounds" in m:
            for name, b in m["bounds"].items():
                if not (isinstance(b, list) and len(b) == 2 and b[0] <= b[1]):
                    raise SchemaError(f"model.bounds.{name}", "expected [lower, upper]")

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "energy_unit": self.energy_unit, "seed": self.seed,
                "budget": self.budget, "output_dir": self.output_dir, "model": copy.deepcopy(self.model),
                "grid": copy.deepcopy(self.grid), "optimizer": copy.deepcopy(self.optimizer)}

    def effective_optimizer(self) -> dict:
        """Optimizer settings with the full (long) budget applied when requested."""
        opt = dict(self.optimizer)
        if self.budget == "paper":
            opt.update(CATALOG[self.scenario].full_optimizer)
        return opt

    def content_hash(self) -> str:
        """Hash of everything that affects the numbers (the output directory is excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(blob).hexdigest()


def default_config(scenario: str, **overrides) -> ScenarioConfig:
    return ScenarioConfig.from_dict(dict({"scenario": scenario}, **overrides))


def loads_config(text: str) -> ScenarioConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise SchemaError("<document>", f"not valid TOML: {exc}") from exc
    return ScenarioConfig.from_dict(data)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        raise SchemaError("<path>", f"configuration file {p} does not exist")
    return loads_config(p.read_text(encoding="utf-8"))


def dumps_config(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def dump_config(cfg: ScenarioConfig, path) -> Path:
    p = Path(path)
    p.write_text(dumps_config(cfg), encoding="utf-8")
    return p
