"""Acceptance criteria 1-10; each test records one PASS/FAIL line in the terminal summary."""

import time

import numpy as np
import pytest

from oqcontrol.core import (
    SIGMA_X,
    chi_from_map,
    kraus_from_composite,
    random_density,
    random_kraus,
    random_unitary,
    superop_from_unitary,
)
from oqcontrol.dynamics.baths import OhmicBath, bath_phase_q1, bath_phase_q2
from oqcontrol.dynamics.fields import ConstantField, FourierField, FunctionField, ZeroField
from oqcontrol.dynamics.grid import TimeGrid, Trajectory
from oqcontrol.dynamics.models import CNOT, CnotModel, single_qubit_equilibrium
from oqcontrol.dynamics.propagators import (
    ControlledHamiltonian,
    LindbladChannel,
    propagate_lindblad,
    propagate_superop,
    propagate_unitary,
)
from oqcontrol.dynamics.spin_boson import (
    STEPPER_ORDER,
    SpinBosonModel,
    propagate_nonmarkovian_bloch,
    richardson_ratio,
    spin_boson_memory,
)
from oqcontrol.inversion import (
    RabiPrescription,
    control_function,
    e0_field,
    inversion_channels,
    rabi_trajectory,
    validity_horizon,
)
from oqcontrol.objectives import (
    chi_target_lifted,
    cost_chi_distance,
    cost_control_penalty,
    cost_dissipation_JD,
    cost_gate_JO,
    cost_gate_JO_phase,
    cost_state_transfer,
    cost_superop_Jn,
    cost_test_JZ,
    haar_pure_ensemble,
)
from oqcontrol.optim.adjoint import LindbladStateProblem, SpinBosonStateProblem
from oqcontrol.optim.gradients import directional_check
from oqcontrol.scenarios.config import default_config
from oqcontrol.scenarios.runner import run_scenario

LOWER = np.array([[0, 0], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def detail(request, text):
    request.node.user_properties.append(("detail", text))


def sigma_x_drive(eps):
    return ControlledHamiltonian(np.zeros((2, 2)), [(SIGMA_X, FunctionField(eps))])


@pytest.mark.criterion(1, "Rabi restoration by inversion")
def test_criterion_1_rabi_restoration(request):
    start = time.perf_counter()
    p = RabiPrescription(A=0.3, omega=1.0, a0=0.0, b0=0.2, gamma=0.0071)
    t_end = 0.95 * validity_horizon(p)
    sub = TimeGrid(0.0, t_end, int(np.ceil(t_end / (np.pi / 200))))
    traj = propagate_lindblad(p.initial_density(), sigma_x_drive(control_function(p)), inversion_channels(p.gamma),
                              sub)
    err = np.max(np.abs(traj.states[:, 0, 0].real - rabi_trajectory(p, sub)))
    t = np.linspace(0, 20, 4001)
    p0 = RabiPrescription(A=0.3, omega=1.0, b0=0.2, gamma=0.0)
    e0_err = np.max(np.abs(control_function(p0)(t) - e0_field(p0, t)))
    pc = RabiPrescription(A=0.3, omega=1.0, b0=0.0, gamma=0.0)
    const_err = np.max(np.abs(control_function(pc)(t) - 1.0))
    wall = time.perf_counter() - start
    detail(request, f"self-consistency {err:.2e}, e0 {e0_err:.1e}, constant {const_err:.1e}, {wall:.2f} s")
    assert err < 1e-3
    assert e0_err < 1e-10
    assert const_err < 1e-12
    assert wall < 5


@pytest.mark.criterion(2, "Lindblad analytic coherence decay")
def test_criterion_2_lindblad_decay(request):
    start = time.perf_counter()
    gamma, a0 = 0.05, 0.3
    rho0 = np.array([[0.5, a0], [a0, 0.5]], dtype=complex)
    h = sigma_x_drive(lambda t: 0.8 * np.sin(1.3 * t) + 0.2)
    tf = 5.0

    def final(n):
        return propagate_lindblad(rho0, h, inversion_channels(gamma), TimeGrid(0, tf, n)).final

    coarse, fine = final(200), final(400)
    exact = a0 * np.exp(-4 * gamma * tf)
    step_change = abs(fine[0, 1].real - coarse[0, 1].real)
    rel = abs(fine[0, 1].real - exact) / exact
    wall = time.perf_counter() - start
    detail(request, f"relative error {rel:.1e}, halving change {step_change:.1e}, {wall:.2f} s")
    assert step_change < 1e-8
    assert rel < 1e-6
    assert wall < 1


@pytest.mark.criterion(3, "Superoperator equivalence")
def test_criterion_3_superoperator(request):
    start = time.perf_counter()
    g = np.random.default_rng(30)
    model = CnotModel()
    h = model.hamiltonian([lambda t: np.sin(2 * t), 0.3, lambda t: t, -0.2])
    grid = TimeGrid(0, 1, 50)
    x = propagate_superop(h, model.channels(), grid, final_only=True)
    err = 0.0
    for _ in range(100):
        rho0 = random_density(4, g)
        err = max(err, np.abs(x.apply(rho0) - propagate_lindblad(rho0, h, model.channels(), grid).final).max())
    xs = propagate_superop(h, [], grid)
    us = propagate_unitary(h, grid)
    free = max(np.abs(xk.tensor - np.einsum("ir,js->ijrs", u, u.conj())).max() for xk, u in zip(xs, us))
    wall = time.perf_counter() - start
    detail(request, f"state mismatch {err:.1e}, dissipation-free mismatch {free:.1e}, {wall:.1f} s")
    assert err < 1e-8
    assert free < 1e-10
    assert wall < 30


@pytest.mark.criterion(4, "CNOT gate from the superoperator")
def test_criterion_4_cnot(request, tmp_path):
    rec = run_scenario(default_config("cnot_superop", output_dir=str(tmp_path)))
    m = rec.metrics
    detail(request, f"unitary J {m['unitary_best_cost']:.2e}, dissipative J {m['dissipative_cost']:.4f}, "
                    f"||X||^2 {m['superop_norm_sq']:.3f}, {rec.wall_time:.0f} s")
    assert rec.status == "ok"
    assert m["unitary_best_cost"] <= 1e-5
    assert m["dissipative_cost"] <= 0.20
    assert 12.5 <= m["superop_norm_sq"] <= 13.8
    assert rec.wall_time < 600


@pytest.mark.criterion(5, "Double-dot Bell state")
def test_criterion_5_doubledot(request, tmp_path):
    rec = run_scenario(default_config("doubledot_bell", output_dir=str(tmp_path)))
    m = rec.metrics
    detail(request, f"reference {m['reference_cost']:.2e} vs baseline {m['baseline_cost']:.3f}, "
                    f"DE J {m['final_cost']:.2e}, {rec.wall_time:.0f} s")
    assert rec.status == "ok"
    assert m["reference_cost"] * 100 <= m["baseline_cost"]
    assert m["final_cost"] <= 1e-3
    assert rec.wall_time < 900


@pytest.mark.criterion(6, "Adjoint gradients against finite differences")
def test_criterion_6_gradients(request):
    start = time.perf_counter()
    grid = TimeGrid(0, 3, 60)
    ket0, ket1 = np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)
    mk = LindbladStateProblem(0.5 * np.diag([1.0, -1.0]), [SIGMA_X], [LindbladChannel(LOWER, 0.05)], grid,
                              ket0, ket1, 0.6, 0.4, desired_path=ket1, alpha=0.01)
    eps = 0.5 * np.random.default_rng(1).standard_normal(grid.n_nodes)
    rel_a, _, _ = directional_check(mk.cost, mk.gradient(eps).ravel(), eps, n_dirs=16)
    model = SpinBosonModel(-1.0, 0.75, OhmicBath(0.45, 4.0, 5.0))
    sgrid = TimeGrid(0, 10, 100)
    sb = SpinBosonStateProblem(model, sgrid, [0, 0, model.equilibrium_z()], [0, 0, 1.0], 0.5, 0.5,
                               desired_path=[0, 0, 1.0], alpha=0.216)
    e = 0.3 * np.random.default_rng(3).standard_normal(sgrid.n_nodes)
    rel_b, _, _ = directional_check(sb.cost, sb.gradient(e), e, n_dirs=16, delta=1e-5)
    wall = time.perf_counter() - start
    detail(request, f"Markovian {rel_a:.1e}, spin-boson {rel_b:.1e}, {wall:.1f} s")
    assert rel_a < 1e-3
    assert rel_b < 1e-3
    assert wall < 300


def gamma_oracle(model, field, t, n=20000):
    w, a = field.omegas, field.coefficients

    def trap(m):
        tp = np.linspace(0.0, t, m + 1)
        f = model.eps0 * (t - tp) + np.sum(a[:, None] * (np.cos(w[:, None] * tp) - np.cos(w[:, None] * t))
                                           / w[:, None], axis=0)
        y = np.exp(-bath_phase_q2(t - tp, model.bath)) * np.sin(f) * np.sin(bath_phase_q1(t - tp, model.bath))
        return (t / m) * (y.sum() - 0.5 * (y[0] + y[-1]))
    coarse, fine = trap(n), trap(2 * n)
    return model.delta ** 2 * (fine + (fine - coarse) / 3.0)


@pytest.mark.criterion(7, "Non-Markovian propagator properties")
def test_criterion_7_nonmarkovian(request):
    start = time.perf_counter()
    bath = OhmicBath(0.45, 4.0, 5.0)
    drive = FourierField([0.4, -0.3, 0.2], 0.0, 10.0)
    r0 = np.array([0.6, -0.3, 0.5])
    traj = propagate_nonmarkovian_bloch(r0, SpinBosonModel(-1.5, 0.0, bath), drive, TimeGrid(0, 10, 300))
    dz = np.abs(traj.states[:, 2] - r0[2]).max()
    rho2 = np.sum(traj.states[:, :2] ** 2, axis=1)
    dperp = np.abs(rho2 - rho2[0]).max()
    weak = SpinBosonModel(-2.0, 0.25, OhmicBath(0.45, 2.0, 2.0))
    ratios = [richardson_ratio([0, 0, -0.96], weak, ZeroField(), 0.0, 20.0, 100),
              richardson_ratio([0.3, 0.2, 0.5], SpinBosonModel(-1.0, 0.75, bath), ConstantField(0.3), 0.0, 10.0, 100)]
    easy = SpinBosonModel(-1.0, 0.75, bath)
    mk = spin_boson_memory(easy, drive, TimeGrid(0, 10, 10))
    gerr = max(abs(mk.gamma_o(t) - gamma_oracle(easy, drive, t)) for t in np.linspace(0.5, 10.0, 10))
    wall = time.perf_counter() - start
    detail(request, f"dRz {dz:.1e}, dRperp^2 {dperp:.1e}, ratios {ratios[0]:.3f}/{ratios[1]:.3f}, "
                    f"Gamma_o {gerr:.1e}, {wall:.1f} s")
    assert dz < 1e-9 and dperp < 1e-9
    for r in ratios:
        assert abs(r / 2 ** STEPPER_ORDER - 1) < 0.15
    assert gerr < 1e-8
    assert wall < 120


@pytest.mark.criterion(8, "Kraus and process-matrix machinery")
def test_criterion_8_kraus_chi(request):
    start = time.perf_counter()
    g = np.random.default_rng(80)
    comp = 0.0
    for _ in range(100):
        rho_b = single_qubit_equilibrium(*g.uniform(0.05, 1.0, 2))
        ks = kraus_from_composite(random_unitary(4, g), rho_b, 2, 2)
        comp = max(comp, np.abs(ks.completeness() - np.eye(2)).max())
    ks = random_kraus(2, 3, g)
    chi = chi_from_map(ks.apply, dim=2)
    recon = max(np.abs(chi.apply(r) - ks.apply(r)).max() for r in (random_density(2, g) for _ in range(20)))
    target = chi_target_lifted(HADAMARD, 2, [0, 1])
    worst = max(cost_chi_distance(chi_from_map(random_kraus(2, int(g.integers(1, 5)), g).apply, dim=2),
                                  target, np.eye(2)) for _ in range(1000))
    wall = time.perf_counter() - start
    detail(request, f"completeness {comp:.1e}, reconstruction {recon:.1e}, max distance {worst:.3f} <= 8, "
                    f"{wall:.1f} s")
    assert comp < 1e-10
    assert recon < 1e-9
    assert worst <= 8.0
    assert wall < 60


@pytest.mark.criterion(9, "Cost fixed points and phase invariance")
def test_criterion_9_cost_fixed_points(request):
    start = time.perf_counter()
    grid = TimeGrid(0, 1, 20)
    ket0 = np.diag([1.0, 0.0]).astype(complex)
    traj = Trajectory(grid, np.broadcast_to(ket0, (21, 2, 2)).copy())
    us = np.broadcast_to(np.eye(2), (21, 2, 2))
    chi_h = chi_from_map(lambda r: HADAMARD @ r @ HADAMARD.conj().T, dim=2)
    target_h = chi_target_lifted(HADAMARD, 2, [0, 1])
    zeros = {
        "state_transfer": cost_state_transfer(traj, ket0, 0.5, 0.5, desired_path=ket0, alpha=1.0,
                                              field_samples=np.zeros(21)),
        "penalty": cost_control_penalty(np.zeros(21), 1.0, grid),
        "J_O": cost_gate_JO(CNOT, CNOT),
        "J_O_phase": cost_gate_JO_phase(CNOT, CNOT),
        "J_n": cost_superop_Jn(superop_from_unitary(CNOT), CNOT),
        "J_D": cost_dissipation_JD(us, [], haar_pure_ensemble(2, 16), 1.0, grid),
        "J_Z": cost_test_JZ(lambda f, r: HADAMARD @ r @ HADAMARD.conj().T, None, HADAMARD, 8),
        "chi": cost_chi_distance(chi_h, target_h, np.eye(2)),
    }
    u = random_unitary(4, np.random.default_rng(90))
    v = random_unitary(2, np.random.default_rng(91))
    chi_v = chi_from_map(lambda r: v @ r @ v.conj().T, dim=2)
    base = (cost_gate_JO(u, CNOT), cost_superop_Jn(superop_from_unitary(u), CNOT),
            cost_chi_distance(chi_v, target_h, np.eye(2)))
    drift = 0.0
    for phi in np.random.default_rng(92).uniform(0, 2 * np.pi, 100):
        w = np.exp(1j * phi)
        chi_w = chi_from_map(lambda r: (w * v) @ r @ (w * v).conj().T, dim=2)
        vals = (cost_gate_JO(w * u, CNOT), cost_superop_Jn(superop_from_unitary(w * u), CNOT),
                cost_chi_distance(chi_w, target_h, np.eye(2)))
        drift = max(drift, max(abs(a - b) for a, b in zip(vals, base)))
    worst_zero = max(abs(z) for z in zeros.values())
    wall = time.perf_counter() - start
    detail(request, f"max |J(target)| {worst_zero:.1e}, phase drift {drift:.1e}, {wall:.2f} s")
    assert worst_zero < 1e-12
    assert drift < 1e-12
    assert wall < 10


@pytest.mark.criterion(10, "Determinism of scenario runs")
def test_criterion_10_determinism(request, tmp_path):
    checked = []
    for sid, overrides in (("rabi_restore", {}), ("sb_flip", {"optimizer": {"max_iters": 10}}),
                           ("doubledot_bell", {"optimizer": {"population": 12, "generations": 5}})):
        runs = [run_scenario(default_config(sid, seed=7, output_dir=str(tmp_path / f"{sid}{k}"), **overrides))
                for k in range(2)]
        assert runs[0].status == runs[1].status == "ok"
        assert runs[0].metrics == runs[1].metrics
        assert (runs[0].run_dir / "run.json").is_file()
        checked.append(sid)
    detail(request, "identical metrics for " + ", ".join(checked))
