"""Scenario execution and run-directory layout."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import SIGMA_X, ContractError, chi_from_map, matrix_unit_basis
from ..dynamics.baths import OhmicBath
from ..dynamics.fields import FourierField, FunctionField, GridField, ZeroField
from ..dynamics.grid import TimeGrid, Trajectory
from ..dynamics.io import write_columns_csv, write_trajectory_csv
from ..dynamics.models import (
    CNOT,
    CnotModel,
    WhiteNoiseCorrelation,
    charge_qubit_channels,
    charge_qubit_controlled,
)
from ..dynamics.propagators import ControlledHamiltonian, IntegrationError, propagate_lindblad, propagate_superop
from ..dynamics.redfield import PSI_PLUS, RHO_PSI_I, propagate_redfield_doubledot
from ..dynamics.spin_boson import SpinBosonModel, propagate_nonmarkovian_bloch
from ..inversion import (
    RabiPrescription,
    SingularControlError,
    e0_field,
    control_function,
    inversion_channels,
    invert_control,
    rabi_trajectory,
)
from ..objectives import (
    chi_target_lifted,
    computational_projector,
    cost_chi_distance,
    cost_superop_Jn,
)
from ..optim.adjoint import SpinBosonStateProblem
from ..optim.fields import WindowedSineParameterization
from ..optim.gates import N_FIELDS, cnot_problem
from ..optim.gradients import finite_difference_gradient
from ..optim.minimizers import conjugate_gradient_minimize, differential_evolution_minimize
from ..optim.problem import OptimizationProblem
from .config import ScenarioConfig
from .verify import min_hermitian_eigenvalue

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
NUMERICAL_ERRORS = (IntegrationError, SingularControlError, FloatingPointError, np.linalg.LinAlgError,
                    ContractError)


@dataclass
class ScenarioOutput:
    metrics: dict
    trajectories: dict = field(default_factory=dict)
    fields: dict | None = None
    field_kind: str = "grid"  # "fourier" fields vanish at both ends, "ramped" at the start
    trace: list | None = None
    columns: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    run_dir: Path
    status: str
    metrics: dict
    outputs: dict
    wall_time: float
    input_hash: str
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _grid(cfg: ScenarioConfig) -> TimeGrid:
    g = cfg.grid
    return TimeGrid(float(g["t0"]), float(g["tf"]), int(g["n_steps"]))


def _f(x) -> float:
    return float(x)


# individual scenarios

def run_rabi_restore(cfg: ScenarioConfig) -> ScenarioOutput:
    m = cfg.model
    grid = _grid(cfg)
    p = RabiPrescription(A=m["A"], omega=m["omega"], a0=m["a0"], b0=m["b0"], gamma=m["gamma"])
    inv = invert_control(p, grid)
    horizon = inv.horizon
    t_check = min(0.95 * horizon, grid.tf)
    n_check = max(1, int(np.ceil((t_check - grid.t0) / grid.h)))
    sub = TimeGrid(grid.t0, t_check, n_check)
    h = ControlledHamiltonian(np.zeros((2, 2), dtype=complex), [(SIGMA_X, FunctionField(control_function(p)))])
    traj = propagate_lindblad(p.initial_density(), h, inversion_channels(p.gamma), sub)
    err = float(np.max(np.abs(traj.states[:, 0, 0].real - rabi_trajectory(p, sub))))
    # undamped inversion against its closed form on the same sub-grid
    p0 = RabiPrescription(A=m["A"], omega=m["omega"], a0=m["a0"], b0=m["b0"], gamma=0.0)
    e0_err = float(np.max(np.abs(control_function(p0)(sub.times) - e0_field(p0, sub.times))))
    metrics = {
        "horizon": _f(horizon),
        "checked_until": _f(t_check),
        "self_consistency_max_error": err,
        "e0_max_deviation": e0_err,
        "max_abs_field": _f(np.max(np.abs(inv.eps))) if len(inv.eps) else 0.0,
        "valid_nodes": int(len(inv.times)),
    }
    cols = {"t": sub.times, "rho11": traj.states[:, 0, 0].real, "rho11_prescribed": rabi_trajectory(p, sub)}
    return ScenarioOutput(metrics, {"trajectory": traj}, {"t": inv.times, "eps": inv.eps}, "grid",
                          columns={"population": cols})


def _spin_boson(cfg: ScenarioConfig) -> ScenarioOutput:
    m = cfg.model
    opt = cfg.effective_optimizer()
    grid = _grid(cfg)
    bath = OhmicBath(m["eta"], m["omega_c"], 1.0 / m["temperature"])
    model = SpinBosonModel(m["eps0"], m["delta"], bath)
    R0 = np.array([0.0, 0.0, model.equilibrium_z()]) if m["initial"] == "equilibrium" else np.asarray(m["initial"], float)
    target = np.asarray(m["target"], dtype=float)
    prob = SpinBosonStateProblem(model, grid, R0, target, m["w1"], m["w2"],
                                 desired_path=target if m["w2"] > 0 else None, alpha=m["alpha"])
    x0 = np.full(grid.n_nodes, float(m["initial_field"]))
    op = OptimizationProblem(prob.cost, grid.n_nodes, gradient=prob.gradient, grid=grid, seed=cfg.seed, x0=x0)
    res = conjugate_gradient_minimize(op, max_iters=int(opt["max_iters"]), tol=float(opt["tol"]))
    free = propagate_nonmarkovian_bloch(R0, model, ZeroField(), grid)
    best = propagate_nonmarkovian_bloch(R0, model, GridField(grid, res.best_params, kind="linear"), grid)
    R, gam, _ = prob.forward(res.best_params)
    metrics = {
        "baseline_cost": _f(prob.cost(np.zeros(grid.n_nodes))),
        "initial_cost": _f(prob.cost(x0)),
        "final_cost": _f(res.best_cost),
        "equilibrium_z": _f(model.equilibrium_z()),
        "final_bloch": [_f(v) for v in R[-1]],
        "max_bloch_norm": _f(np.max(np.linalg.norm(R, axis=1))),
        "max_abs_field": _f(np.max(np.abs(res.best_params))),
        "iterations": int(res.n_iterations),
        "evaluations": int(res.n_evaluations),
        "converged": bool(res.converged),
    }
    return ScenarioOutput(
        metrics, {"trajectory": best, "trajectory_free": free}, {"t": grid.times, "eps": res.best_params},
        "grid", res.cost_trace,
        columns={"gamma_o": {"t": grid.times, "gamma_o": gam, "gamma_o_free": free.info["gamma_o"]}},
        data={"initial": [_f(v) for v in R0], "target": [_f(v) for v in target]},
    )


def _dd_cost_fn(cfg: ScenarioConfig, grid, par):
    m = cfg.model
    bath = OhmicBath(m["eta"], m["omega_c"], m["beta"])
    target = np.outer(PSI_PLUS, PSI_PLUS.conj())

    def final_state(p, full=False):
        return propagate_redfield_doubledot(RHO_PSI_I, m["bz1"], m["bz2"], par.field(p), bath, grid,
                                            final_only=not full)

    def cost(p):
        try:
            d = final_state(p).final - target
        except IntegrationError:
            return np.inf
        return float(np.vdot(d, d).real)
    return cost, final_state


def run_doubledot_bell(cfg: ScenarioConfig) -> ScenarioOutput:
    m = cfg.model
    opt = cfg.effective_optimizer()
    grid = _grid(cfg)
    par = WindowedSineParameterization(grid)
    cost, final_state = _dd_cost_fn(cfg, grid, par)
    names = WindowedSineParameterization.names
    ref = [m["reference_field"][k] for k in names]
    bounds = [m["bounds"][k] for k in names]
    op = OptimizationProblem(cost, 5, bounds=bounds, parameterization=par, grid=grid, seed=cfg.seed)
    res = differential_evolution_minimize(op, int(opt["population"]), int(opt["generations"]),
                                          float(opt["F_weight"]), float(opt["CR"]), seed=cfg.seed)
    baseline = cost([0.0, 0.0, 0.0, 0.0, 0.0])
    ref_cost = cost(ref)
    metrics = {
        "baseline_cost": _f(baseline),
        "reference_cost": _f(ref_cost),
        "reference_improvement": _f(baseline / ref_cost) if ref_cost > 0 else float("inf"),
        "final_cost": _f(res.best_cost),
        "best_params": {k: _f(v) for k, v in zip(names, res.best_params)},
        "generations": int(res.n_iterations),
        "evaluations": int(res.n_evaluations),
    }
    traj_best = final_state(res.best_params, full=True)
    traj_ref = final_state(ref, full=True)
    fields = {"t": grid.times, "J_best": par.samples(res.best_params)[0], "J_reference": par.samples(ref)[0]}
    return ScenarioOutput(metrics, {"trajectory": traj_best, "trajectory_reference": traj_ref}, fields,
                          "ramped", res.cost_trace)


def run_cnot_superop(cfg: ScenarioConfig) -> ScenarioOutput:
    m = cfg.model
    opt = cfg.effective_optimizer()
    grid = _grid(cfg)
    model = CnotModel(m["coupling"], m["gamma1"], m["gamma2"], m["rate_scale"])
    F = int(m["n_coeffs"])
    pu, ctrl = cnot_problem(model, grid, F, dissipative=False)
    pd, _ = cnot_problem(model, grid, F, dissipative=True)
    rng = np.random.default_rng(cfg.seed)
    target = float(opt["unitary_target"]) or None
    restart_costs, best = [], None
    trace = []
    for _ in range(int(m["restarts"])):
        x0 = rng.normal(0.0, m["init_scale"], ctrl.size)
        op = OptimizationProblem(pu.cost, ctrl.size, value_and_gradient=pu.value_and_gradient, seed=cfg.seed)
        r = conjugate_gradient_minimize(op, x0=x0, max_iters=int(opt["max_iters"]), tol=float(opt["tol"]),
                                        target=target)
        u = pu.propagate(r.best_params)
        j = cost_superop_Jn(np.kron(u, u.conj()), CNOT)  # elementwise, free of cancellation
        restart_costs.append(_f(j))
        trace.extend(r.cost_trace)
        if best is None or j < best[0]:
            best = (j, r.best_params)
    op = OptimizationProblem(pd.cost, ctrl.size, value_and_gradient=pd.value_and_gradient, seed=cfg.seed)
    rd = conjugate_gradient_minimize(op, x0=best[1], max_iters=int(opt["dissipative_max_iters"]),
                                     tol=float(opt["tol"]))
    trace.extend(rd.cost_trace)
    x_diss = pd.propagate(rd.best_params)
    x_idle = pd.propagate(np.zeros(ctrl.size))
    metrics = {
        "unitary_best_cost": _f(best[0]),
        "unitary_restart_costs": restart_costs,
        "dissipative_cost": _f(cost_superop_Jn(x_diss, CNOT)),
        "superop_norm_sq": _f(np.sum(np.abs(x_diss) ** 2)),
        "idle_superop_norm_sq": _f(np.sum(np.abs(x_idle) ** 2)),
        "unitary_field_dissipative_cost": _f(pd.cost(best[1])),
        "dissipative_iterations": int(rd.n_iterations),
    }
    vals = ctrl.fields(rd.best_params, grid.times)
    vals[[0, -1]] = 0.0  # sin(k pi) is zero only up to rounding
    fields = {"t": grid.times}
    for i, name in enumerate(("eps_x1", "eps_z1", "eps_x2", "eps_z2")):
        fields[name] = vals[:, i]
    # a sample state through the dissipative gate for the trajectory checks
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    a = rd.best_params.reshape(N_FIELDS, F)
    h = model.hamiltonian([FourierField(a[i], grid.t0, grid.tf) for i in range(N_FIELDS)])
    traj = propagate_lindblad(rho0, h, model.channels(), grid)
    return ScenarioOutput(metrics, {"trajectory": traj}, fields, "fourier", trace,
                          data={"superop_abs": np.abs(x_diss).round(12).tolist(),
                                "coefficients": [_f(v) for v in rd.best_params]})


def _charge_map(cfg: ScenarioConfig, grid):
    m = cfg.model
    F = int(m["n_coeffs"])
    c_z = WhiteNoiseCorrelation(m["charge_noise"], m["noise_width"]) if m["charge_noise"] > 0 else None
    c_x = WhiteNoiseCorrelation(m["flux_noise"], m["noise_width"]) if m["flux_noise"] > 0 else None
    channels = charge_qubit_channels(c_x, c_z, grid)
    idx = (1, 2)
    target = chi_target_lifted(HADAMARD, 4, idx)
    proj = computational_projector(4, idx)

    def hamiltonian(p):
        a = np.asarray(p, dtype=float).reshape(2, F)
        return charge_qubit_controlled(FourierField(a[0], grid.t0, grid.tf), FourierField(a[1], grid.t0, grid.tf),
                                       m["e_c"], m["e_j0"])

    def chi_of(p):
        x = propagate_superop(hamiltonian(p), channels, grid, final_only=True)
        return chi_from_map(x.apply, basis=matrix_unit_basis(4))

    def cost(p):
        return cost_chi_distance(chi_of(p), target, proj)
    return cost, chi_of, hamiltonian, channels, target, proj


def run_charge_qubit_gate(cfg: ScenarioConfig) -> ScenarioOutput:
    m = cfg.model
    opt = cfg.effective_optimizer()
    grid = _grid(cfg)
    F = int(m["n_coeffs"])
    cost, chi_of, hamiltonian, channels, target, proj = _charge_map(cfg, grid)
    rng = np.random.default_rng(cfg.seed)
    x0 = rng.normal(0.0, m["init_scale"], 2 * F)
    op = OptimizationProblem(cost, 2 * F, gradient=lambda p: finite_difference_gradient(cost, p),
                             seed=cfg.seed, x0=x0)
    res = conjugate_gradient_minimize(op, max_iters=int(opt["max_iters"]), tol=float(opt["tol"]))
    chi = chi_of(res.best_params)
    pp = np.kron(proj, proj)
    overlap = float(np.real(np.trace(pp @ chi.lifted() @ pp @ target.conj().T))) / 4.0
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[1, 1] = 1.0
    traj = propagate_lindblad(rho0, hamiltonian(res.best_params), channels, grid)
    leak = 1.0 - float(np.real(traj.final[1, 1] + traj.final[2, 2]))
    metrics = {
        "initial_cost": _f(cost(x0)),
        "final_cost": _f(res.best_cost),
        "cost_bound": 2.0 * 2 ** 2,
        "process_overlap": _f(overlap),
        "leakage_from_0": _f(leak),
        "iterations": int(res.n_iterations),
    }
    a = res.best_params.reshape(2, F)
    ng = FourierField(a[0], grid.t0, grid.tf).samples(grid)
    phi = FourierField(a[1], grid.t0, grid.tf).samples(grid)
    return ScenarioOutput(metrics, {"trajectory": traj}, {"t": grid.times, "n_g": ng, "phi": phi}, "fourier",
                          res.cost_trace)


RUNNERS = {
    "rabi_restore": run_rabi_restore,
    "sb_drive_trap": _spin_boson,
    "sb_drive_tf": _spin_boson,
    "sb_flip": _spin_boson,
    "sb_weak_flip": _spin_boson,
    "doubledot_bell": run_doubledot_bell,
    "cnot_superop": run_cnot_superop,
    "charge_qubit_gate": run_charge_qubit_gate,
}


def _run_dir(root: Path, digest: str) -> Path:
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = root / f"{stamp}-{digest[:8]}"
    path, k = base, 1
    while path.exists():
        path = Path(f"{base}-{k}")
        k += 1
    path.mkdir(parents=True)
    return path


def _trajectory_kind(traj: Trajectory) -> str:
    return "bloch" if traj.is_bloch else "density"


def write_outputs(run_dir: Path, out: ScenarioOutput) -> dict:
    manifest = {}
    for name, traj in out.trajectories.items():
        fname = f"{name}.csv"
        write_trajectory_csv(run_dir / fname, traj)
        manifest[name] = {"file": fname, "kind": _trajectory_kind(traj)}
        if traj.info.get("completely_positive") is False:
            if traj.is_bloch:
                manifest[name]["max_norm"] = float(np.max(np.linalg.norm(traj.states, axis=1)))
            else:
                manifest[name]["min_eigenvalue"] = min_hermitian_eigenvalue(traj.states)
    if out.fields is not None:
        write_columns_csv(run_dir / "field.csv", out.fields)
        manifest["field"] = {"file": "field.csv", "kind": out.field_kind}
    if out.trace is not None:
        write_columns_csv(run_dir / "trace.csv", {"iteration": np.arange(len(out.trace)),
                                                  "best_cost": np.asarray(out.trace, dtype=float)})
        manifest["trace"] = {"file": "trace.csv", "kind": "trace"}
    for name, cols in out.columns.items():
        fname = f"{name}.csv"
        write_columns_csv(run_dir / fname, cols)
        manifest[name] = {"file": fname, "kind": "columns"}
    return manifest


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n", encoding="utf-8")


def run_scenario(cfg: ScenarioConfig, out_root=None) -> RunRecord:
    """Run one scenario and write its directory; numerical failures give status ``failed``."""
    root = Path(cfg.output_dir if out_root is None else out_root)
    digest = cfg.content_hash()
    run_dir = _run_dir(root, digest)
    start = time.perf_counter()
    status, error, metrics, manifest, data = "ok", None, {}, {}, {}
    try:
        out = RUNNERS[cfg.scenario](cfg)
        metrics, data = out.metrics, out.data
        manifest = write_outputs(run_dir, out)
    except NUMERICAL_ERRORS as exc:
        status, error = "failed", f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - start
    payload = {
        "scenario": cfg.scenario,
        "status": status,
        "error": error,
        "seed": cfg.seed,
        "budget": cfg.budget,
        "energy_unit": cfg.energy_unit,
        "config": cfg.to_dict(),
        "input_hash": digest,
        "metrics": metrics,
        "data": data,
        "outputs": manifest,
        "wall_time_s": wall,
    }
    _write_json(run_dir / "run.json", payload)
    return RunRecord(run_dir, status, metrics, manifest, wall, digest, error)
