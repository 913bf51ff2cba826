"""Scenario catalogue: default parameters and figure anchors for every study."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    title: str
    anchor: str
    description: str
    model: dict
    grid: dict
    optimizer: dict
    full_optimizer: dict = field(default_factory=dict)
    energy_unit: str = "hbar_omega"


# spin-boson captions give eps0, Delta, omega_c, T and a scalar alpha; alpha is the
# intensity-penalty weight and eta defaults to the weak-coupling value
_SB_EASY = {"eps0": -1.0, "delta": 0.75, "eta": 0.45, "omega_c": 4.0, "temperature": 0.2, "alpha": 0.216,
            "initial_field": 0.0}

CATALOG = {
    "rabi_restore": ScenarioSpec(
        "rabi_restore", "Restoring Rabi oscillations by analytic inversion", "Fig. Grafik2",
        "Inverts the Lindblad equation for eps(t) that keeps rho11(t) = (1-2A) cos^2(Omega t) + A "
        "and forward-propagates the field as a self-consistency check.",
        {"gamma": 0.0071, "A": 0.3, "omega": 1.0, "a0": 0.0, "b0": 0.2},
        {"t0": 0.0, "tf": 10.0, "n_steps": 400},
        {},
    ),
    "sb_drive_trap": ScenarioSpec(
        "sb_drive_trap", "Spin-boson drive into the up state and trap", "Fig. popz-easy / Fig. E-trapz-easy",
        "Conjugate-gradient search over node controls with the non-Markovian adjoint; "
        "w1 = w2 = 1/2, start in thermal equilibrium, target R = (0, 0, 1).",
        dict(_SB_EASY, w1=0.5, w2=0.5, target=[0.0, 0.0, 1.0], initial="equilibrium"),
        {"t0": 0.0, "tf": 20.0, "n_steps": 200},
        {"method": "cg", "max_iters": 60, "tol": 1e-8},
        {"max_iters": 400},
    ),
    "sb_drive_tf": ScenarioSpec(
        "sb_drive_tf", "Spin-boson drive into the up state at the target time", "Fig. pop-drive / Fig. ES-drive",
        "Pure driving, w1 = 1 and w2 = 0, with intensity minimisation at tf = 80.",
        dict(_SB_EASY, w1=1.0, w2=0.0, target=[0.0, 0.0, 1.0], initial="equilibrium"),
        {"t0": 0.0, "tf": 80.0, "n_steps": 400},
        {"method": "cg", "max_iters": 60, "tol": 1e-8},
        {"max_iters": 400},
    ),
    "sb_flip": ScenarioSpec(
        "sb_flip", "Flip the Bloch vector from (1, 0, 0) to (-1, 0, 0)", "Fig. popxyz / Fig. ESxyz",
        "Driving problem w1 = 1 for the in-plane flip at a strongly damped bath.",
        {"eps0": -1.0, "delta": 0.25, "eta": 0.45, "omega_c": 0.5, "temperature": 0.5, "alpha": 0.25,
         "initial_field": 0.0, "w1": 1.0, "w2": 0.0, "target": [-1.0, 0.0, 0.0], "initial": [1.0, 0.0, 0.0]},
        {"t0": 0.0, "tf": 20.0, "n_steps": 200},
        {"method": "cg", "max_iters": 60, "tol": 1e-8},
        {"max_iters": 400},
    ),
    "sb_weak_flip": ScenarioSpec(
        "sb_weak_flip", "Weak-coupling flip from thermal equilibrium and trap", "Fig. popz-smD / Fig. ES-weak / Fig. rat0",
        "Flip from R = (0, 0, -0.96) into (0, 0, 1) and trap it there, w1 = w2 = 1/2. The search starts "
        "from the bias-cancelling field eps = -eps0 because eps = 0 is nearly stationary.",
        {"eps0": -2.0, "delta": 0.25, "eta": 0.45, "omega_c": 2.0, "temperature": 0.5, "alpha": 0.0,
         "initial_field": 2.0,
         "w1": 0.5, "w2": 0.5, "target": [0.0, 0.0, 1.0], "initial": "equilibrium"},
        {"t0": 0.0, "tf": 20.0, "n_steps": 200},
        {"method": "cg", "max_iters": 60, "tol": 1e-8},
        {"max_iters": 400},
    ),
    "doubledot_bell": ScenarioSpec(
        "doubledot_bell", "Double quantum dot steered into the Bell state psi+", "Table tab1 / Fig. qdot2",
        "Differential evolution over the windowed-sine exchange pulse J(t) with Ohmic dephasing baths; "
        "cost ||rho(tf) - |psi+><psi+| ||^2 from |psi_I>.",
        {"eta": 0.1215, "omega_c": 5.0, "beta": 232.1, "bz1": 0.0, "bz2": 0.0,
         "bounds": {"E0": [-1.0, 1.0], "omega": [0.0, 0.5], "phi0": [-3.141592653589793, 3.141592653589793],
                    "gamma": [0.0, 0.1], "t0": [0.0, 20.0]},
         "reference_field": {"E0": -0.99, "omega": 0.013, "phi0": 1.34, "gamma": 0.0, "t0": 10.71}},
        {"t0": 0.0, "tf": 20.0, "n_steps": 100},
        {"method": "de", "population": 64, "generations": 300, "F_weight": 0.7, "CR": 0.9},
        {"population": 230, "generations": 2000},
        "meV",
    ),
    "cnot_superop": ScenarioSpec(
        "cnot_superop", "CNOT gate from the evolution superoperator", "Fig. Grafik",
        "Four Fourier-series controls (F = 8 each) minimise ||X(tf) - O kron conj(O)||^2, first without "
        "dissipation from seeded restarts and then with gamma1 tf = gamma2 tf = 0.1.",
        {"coupling": 1.0, "gamma1": 0.1, "gamma2": 0.1, "rate_scale": 0.5, "n_coeffs": 8,
         "restarts": 10, "init_scale": 1.0},
        {"t0": 0.0, "tf": 1.0, "n_steps": 100},
        {"method": "cg", "max_iters": 300, "tol": 1e-9, "unitary_target": 1e-8, "dissipative_max_iters": 200},
        {"max_iters": 2000, "dissipative_max_iters": 1000, "unitary_target": 0.0},
    ),
    "charge_qubit_gate": ScenarioSpec(
        "charge_qubit_gate", "Hadamard gate on a leaky Josephson charge qubit", "Fig. charge_qubit",
        "Gate charge and flux as Fourier series minimise the chi-matrix distance to a Hadamard on the "
        "computational subspace, with white-noise charge fluctuations.",
        {"e_c": 1.0, "e_j0": 0.5, "n_coeffs": 3, "charge_noise": 0.002, "noise_width": 0.05,
         "flux_noise": 0.0, "init_scale": 0.1},
        {"t0": 0.0, "tf": 4.0, "n_steps": 80},
        {"method": "cg", "max_iters": 25, "tol": 1e-7},
        {"max_iters": 400},
    ),
}

SCENARIO_IDS = tuple(sorted(CATALOG))


def list_scenarios() -> list[dict]:
    """Sorted catalogue entries with their parameter defaults and anchors."""
    out = []
    for sid in SCENARIO_IDS:
        s = CATALOG[sid]
        out.append({"id": s.id, "title": s.title, "anchor": s.anchor, "description": s.description,
                    "model": s.model, "grid": s.grid, "optimizer": s.optimizer})
    return out


def format_listing() -> str:
    lines = []
    for e in list_scenarios():
        lines.append(f"{e['id']:<18} {e['anchor']}")
        lines.append(f"    {e['title']}")
        params = ", ".join(f"{k}={v}" for k, v in sorted(e["model"].items()) if not isinstance(v, dict))
        lines.append(f"    model: {params}")
        lines.append("    grid: " + ", ".join(f"{k}={v}" for k, v in e["grid"].items()))
    return "\n".join(lines) + "\n"
