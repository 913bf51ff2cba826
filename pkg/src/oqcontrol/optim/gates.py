"""Gate synthesis for the coupled two-qubit model with Fourier controls."""

from __future__ import annotations

import numpy as np

from ..dynamics.grid import TimeGrid
from ..dynamics.models import CNOT, CnotModel
from ..dynamics.propagators import dissipator_matrix, liouvillian_matrix
from .adjoint import ExponentialGateProblem

N_FIELDS = 4  # eps_x1, eps_z1, eps_x2, eps_z2


class FourierGateControls:
    """Coefficients ``(eps_x1, eps_z1, eps_x2, eps_z2, C eps_x1 eps_x2)`` of four Fourier fields."""

    def __init__(self, n_coeffs: int, t0: float, tf: float, coupling: float):
        self.n_coeffs = int(n_coeffs)
        self.t0, self.tf = float(t0), float(tf)
        self.coupling = float(coupling)
        self.omegas = np.arange(1, self.n_coeffs + 1) * np.pi / (self.tf - self.t0)

    @property
    def size(self) -> int:
        return N_FIELDS * self.n_coeffs

    def basis(self, t) -> np.ndarray:
        return np.sin(np.outer(np.asarray(t, dtype=float) - self.t0, self.omegas))

    def fields(self, p, t) -> np.ndarray:
        """``(len(t), 4)`` field values."""
        a = np.asarray(p, dtype=float).reshape(N_FIELDS, self.n_coeffs)
        return self.basis(t) @ a.T

    def coefficients(self, p, t) -> np.ndarray:
        e = self.fields(p, t)
        return np.column_stack([e, self.coupling * e[:, 0] * e[:, 2]])

    def jacobian(self, p, t) -> np.ndarray:
        b = self.basis(t)
        e = self.fields(p, t)
        nt, F = b.shape
        jac = np.zeros((nt, N_FIELDS + 1, N_FIELDS, F))
        for i in range(N_FIELDS):
            jac[:, i, i, :] = b
        jac[:, 4, 0, :] = self.coupling * e[:, 2:3] * b
        jac[:, 4, 2, :] = self.coupling * e[:, 0:1] * b
        return jac.reshape(nt, N_FIELDS + 1, -1)


def _hamiltonian_terms(model: CnotModel):
    return list(model.control_operators) + [model.coupling_operator]


def unitary_terminal(target):
    """``J = ||U kron conj(U) - O kron conj(O)||^2 = 2 (N^2 - |Tr O^dagger U|^2)`` for unitary ``U``."""
    o = np.asarray(target, dtype=complex)
    n = o.shape[0]

    def terminal(u):
        t = np.vdot(o, u)
        return 2.0 * (n * n - abs(t) ** 2), -4.0 * t * o
    return terminal


def superop_terminal(target):
    """``J = ||X - O kron conj(O)||^2``."""
    o = np.asarray(target, dtype=complex)
    big = np.kron(o, o.conj())

    def terminal(x):
        d = x - big
        return float(np.vdot(d, d).real), 2.0 * d
    return terminal


def cnot_problem(model: CnotModel, grid: TimeGrid, n_coeffs: int = 8, dissipative: bool = True,
                 target=CNOT) -> tuple[ExponentialGateProblem, FourierGateControls]:
    """Superoperator cost of the gate model; without dissipation the unitary form is used.

    Both forms report the same number, the superoperator distance, because
    ``U kron conj(U)`` is the superoperator of a unitary evolution.
    """
    ctrl = FourierGateControls(n_coeffs, grid.t0, grid.tf, model.coupling)
    terms = _hamiltonian_terms(model)
    channels = model.channels() if dissipative else []
    if channels:
        gens = np.array([liouvillian_matrix(h) for h in terms])
        drift = sum(ch.rate * dissipator_matrix(ch.L) for ch in channels)
        terminal = superop_terminal(target)
    else:
        gens = np.array([-1j * np.asarray(h, dtype=complex) for h in terms])
        drift = np.zeros((4, 4), dtype=complex)
        terminal = unitary_terminal(target)
    prob = ExponentialGateProblem(drift, gens, grid, ctrl.coefficients, ctrl.jacobian, terminal)
    return prob, ctrl


def superoperator_of(model: CnotModel, grid: TimeGrid, controls: FourierGateControls, p,
                     dissipative: bool = True) -> np.ndarray:
    """Superoperator matrix ``X(tf)`` for parameters ``p``."""
    prob, _ = cnot_problem(model, grid, controls.n_coeffs, dissipative)
    y = prob.propagate(p)
    return y if y.shape[0] == 16 else np.kron(y, y.conj())
