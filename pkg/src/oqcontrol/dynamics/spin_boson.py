"""Non-Markovian Bloch equations of the driven spin-boson model.

The kinetic equation is

    dR/dt = M(t) R + int_0^t K(t, t') R(t') dt' + (0, 0, -Gamma_o(t)),

with ``M(t)`` the z-rotation generator at frequency ``eps0 + eps(t)`` and a
memory kernel built from the bath phases ``Q1``, ``Q2`` and the accumulated
control phase ``f(t, t') = eps0 (t - t') + int_{t'}^t eps``.

The solver is the implicit trapezoidal rule for Volterra integro-differential
equations: the local rotation is Crank-Nicolson with the step-averaged field
(a Cayley transform, exactly norm preserving for a pure rotation) and the
history integral is the composite trapezoid on the same grid, so the scheme
is second order.  The equation is second order in the tunnelling and does
not guarantee |R| <= 1 under strong driving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..core import ContractError
from .baths import OhmicBath, bath_phase_q1, bath_phase_q2
from .fields import ConstantField, ControlField, FourierField, ZeroField, as_field
from .grid import TimeGrid, Trajectory

STEPPER_ORDER = 2


@dataclass(frozen=True)
class SpinBosonModel:
    """Static bias ``eps0``, renormalised tunnelling ``delta`` and an Ohmic bath."""

    eps0: float
    delta: float
    bath: OhmicBath

    def q1(self, tau):
        return bath_phase_q1(tau, self.bath)

    def q2(self, tau):
        return bath_phase_q2(tau, self.bath)

    def lag_tables(self, grid: TimeGrid):
        """``(Delta^2 e^{-Q2} cos Q1, Delta^2 e^{-Q2} sin Q1)`` at lags ``m h``, ``m = 0..n_steps``."""
        tau = grid.h * np.arange(grid.n_nodes)
        damp = self.delta ** 2 * np.exp(-self.q2(tau))
        q1 = self.q1(tau)
        return damp * np.cos(q1), damp * np.sin(q1)

    def equilibrium_z(self) -> float:
        """Detailed-balance population ``tanh(beta eps0 / 2)`` of the control-free model."""
        return float(np.tanh(0.5 * self.bath.beta * self.eps0))


# keep the name used by the kernel documentation
MemoryKernelModel = SpinBosonModel


def field_integral(field: ControlField, a: float, b: float) -> float:
    """``int_a^b eps(s) ds``, exact for the closed-form fields."""
    if isinstance(field, ZeroField):
        return 0.0
    if isinstance(field, ConstantField):
        return field.value * (b - a)
    if isinstance(field, FourierField):
        w = field.omegas
        prim = lambda t: -np.cos(w * (t - field.t0)) / w
        return float(np.dot(field.coefficients, prim(b) - prim(a)))
    return integrate.quad(lambda s: float(field(s)), a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]


class MemoryKernel:
    """Kernel pieces ``K(t, t')``, ``Gamma_o(t)`` and ``f(t, t')`` for one control field.

    Times must lie in ``[t0, t0 + horizon]``, where ``horizon`` is the lag
    range the bath phases were cached for.
    """

    def __init__(self, model: SpinBosonModel, field: ControlField, t0: float, horizon: float, n_cache: int = 4096):
        self.model = model
        self.field = as_field(field)
        self.t0 = float(t0)
        self.horizon = float(horizon)
        self._tau = np.linspace(0.0, self.horizon, n_cache + 1)
        self._q1 = model.q1(self._tau)
        self._q2 = model.q2(self._tau)

    def _check(self, *times):
        for t in times:
            if t < self.t0 - 1e-12 or t > self.t0 + self.horizon + 1e-12:
                raise ContractError(f"time {t} is outside the cached range [{self.t0}, {self.t0 + self.horizon}]")

    def _phases(self, tau):
        # closed forms are cheap; the table only fixes the admissible lag range
        return self.model.q1(tau), self.model.q2(tau)

    def f(self, t: float, tp: float) -> float:
        self._check(t, tp)
        return self.model.eps0 * (t - tp) + field_integral(self.field, tp, t)

    def K(self, t: float, tp: float) -> np.ndarray:
        self._check(t, tp)
        q1, q2 = self._phases(t - tp)
        amp = self.model.delta ** 2 * np.exp(-q2) * np.cos(q1)
        return amp * np.diag([0.0, -1.0, -np.cos(self.f(t, tp))])

    def gamma_o(self, t: float) -> float:
        self._check(t)
        if self.model.delta == 0 or t == self.t0:
            return 0.0
        def integrand(tp):
            q1, q2 = self._phases(t - tp)
            return np.exp(-q2) * np.sin(self.f(t, tp)) * np.sin(q1)
        val = integrate.quad(integrand, self.t0, t, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        return self.model.delta ** 2 * val


def spin_boson_memory(model: SpinBosonModel, eps_field, grid: TimeGrid) -> MemoryKernel:
    """Kernel pieces of the driven model with bath phases cached over the grid's lag range."""
    return MemoryKernel(model, eps_field, grid.t0, grid.duration)


def cumulative_field(eps: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid ``E_n = int_{t0}^{t_n} eps`` from node samples."""
    out = np.zeros_like(eps, dtype=float)
    out[1:] = np.cumsum(0.5 * h * (eps[1:] + eps[:-1]))
    return out


class DiscreteBlochModel:
    """Grid-discretised kinetic equation shared by the forward solver and its adjoint."""

    def __init__(self, model: SpinBosonModel, grid: TimeGrid):
        self.model = model
        self.grid = grid
        self.h = grid.h
        self.kc, self.ks = model.lag_tables(grid)
        self.lag = np.subtract.outer(np.arange(grid.n_nodes), np.arange(grid.n_nodes))
        self.dt = self.h * self.lag

    def row_weights(self, n: int) -> np.ndarray:
        """Trapezoid weights for the history integral over ``[t_0, t_n]``."""
        if n == 0:
            return np.zeros(1)
        w = np.full(n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def phase_row(self, n: int, E: np.ndarray) -> np.ndarray:
        """``f(t_n, t_j)`` for ``j = 0..n``."""
        return self.model.eps0 * self.h * (n - np.arange(n + 1)) + E[n] - E[: n + 1]

    @staticmethod
    def rotation(w: float) -> np.ndarray:
        return np.array([[0.0, w, 0.0], [-w, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def solve(self, R0, eps: np.ndarray):
        """Forward solve on node samples ``eps``; returns ``(R, gamma_o, G)``.

        ``G`` is the memory part of the right-hand side on every node; the
        rotation enters each step with the step-averaged field, so the local
        update is a Cayley transform.
        """
        n_nodes = self.grid.n_nodes
        h = self.h
        E = cumulative_field(eps, h)
        R = np.zeros((n_nodes, 3))
        G = np.zeros((n_nodes, 3))
        gam = np.zeros(n_nodes)
        R[0] = R0
        d2 = self.kc[0]
        eye = np.eye(3)
        for n in range(1, n_nodes):
            w = self.row_weights(n)
            f = self.phase_row(n, E)
            lagk = self.kc[n - np.arange(n + 1)]
            lags = self.ks[n - np.arange(n + 1)]
            gam[n] = np.dot(w * lags, np.sin(f))
            hist_y = -np.dot(w[:-1] * lagk[:-1], R[:n, 1])
            hist_z = -np.dot(w[:-1] * lagk[:-1] * np.cos(f[:-1]), R[:n, 2])
            hist = np.array([0.0, hist_y, hist_z - gam[n]])
            M = self.rotation(self.model.eps0 + 0.5 * (eps[n - 1] + eps[n]))
            Kd = -d2 * w[-1] * np.diag([0.0, 1.0, 1.0])
            rhs = (eye + 0.5 * h * M) @ R[n - 1] + 0.5 * h * (G[n - 1] + hist)
            R[n] = np.linalg.solve(eye - 0.5 * h * (M + Kd), rhs)
            G[n] = Kd @ R[n] + hist
        return R, gam, G


def propagate_nonmarkovian_bloch(R0, model: SpinBosonModel, eps_field, grid: TimeGrid) -> Trajectory:
    """Bloch vector on every grid node; ``info['gamma_o']`` holds the inhomogeneity."""
    R0 = np.asarray(R0, dtype=float)
    if R0.shape != (3,):
        raise ValueError(f"initial Bloch vector must have 3 components, got {R0.shape}")
    if np.linalg.norm(R0) > 1 + 1e-10:
        raise ContractError("initial Bloch vector lies outside the unit ball")
    eps = as_field(eps_field).samples(grid)
    R, gam, _ = DiscreteBlochModel(model, grid).solve(R0, eps)
    if not np.all(np.isfinite(R)):
        from .propagators import IntegrationError
        raise IntegrationError("non-finite Bloch vector; the step is too coarse")
    return Trajectory(grid, R, info={"gamma_o": gam, "field": eps, "order": STEPPER_ORDER,
                                       "completely_positive": False})


def richardson_ratio(R0, model, eps_field, t0: float, tf: float, n_steps: int) -> float:
    """``|R_h - R_{h/2}| / |R_{h/2} - R_{h/4}|`` at ``tf``; close to ``2^p`` in the asymptotic regime."""
    finals = []
    for k in (1, 2, 4):
        grid = TimeGrid(t0, tf, n_steps * k)
        finals.append(propagate_nonmarkovian_bloch(R0, model, eps_field, grid).final)
    return float(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))
