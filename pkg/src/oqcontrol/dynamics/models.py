"""Model Hamiltonians and dissipators for the Josephson charge qubit and the two-qubit CNOT study."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from ..core import kron
from .baths import OhmicBath, ohmic_correlation, ohmic_correlation_integral
from .fields import ControlField, as_field
from .grid import TimeGrid
from .propagators import ControlledHamiltonian, LindbladChannel


class ConfigurationError(ValueError):
    """Model inputs that cannot describe a physical system."""


# charge qubit: charge states |-1>, |0>, |1>, |2>; computational subspace is {|0>, |1>}
CHARGE_Z = np.diag([3.0, 1.0, -1.0, -3.0]).astype(complex)
CHARGE_X = (np.diag(np.ones(3), 1) + np.diag(np.ones(3), -1)).astype(complex)
CHARGE_COMPUTATIONAL = (1, 2)


def josephson_energy(phi_over_phi0, e_j0: float):
    return 2.0 * e_j0 * np.cos(np.pi * np.asarray(phi_over_phi0, dtype=float))


def charge_qubit_hamiltonian(n_g: float, phi_over_phi0: float, e_c: float, e_j0: float) -> np.ndarray:
    """Four-level charge qubit Hamiltonian including the two leakage states."""
    e_j = float(josephson_energy(phi_over_phi0, e_j0))
    h = np.diag([8.0 * e_c, 0.0, 0.0, 8.0 * e_c]).astype(complex) - 0.5 * e_j * CHARGE_X
    return h + 4.0 * e_c * n_g * CHARGE_Z


def charge_qubit_controlled(n_g: ControlField, phi: ControlField, e_c: float, e_j0: float) -> ControlledHamiltonian:
    """Time-dependent charge qubit with gate charge ``n_g(t)`` and flux ``phi(t)`` (units of Phi0)."""
    n_g, phi = as_field(n_g), as_field(phi)
    h0 = np.diag([8.0 * e_c, 0.0, 0.0, 8.0 * e_c]).astype(complex)
    return ControlledHamiltonian(h0, [
        (CHARGE_Z, lambda t: 4.0 * e_c * n_g(t)),
        (CHARGE_X, lambda t: -0.5 * josephson_energy(phi(t), e_j0)),
    ])


class WhiteNoiseCorrelation:
    """Narrow normalised bump ``c(tau) = c0 exp(-tau / width) / width``."""

    def __init__(self, c0: float, width: float):
        if width <= 0:
            raise ConfigurationError("white-noise correlation width must be positive")
        self.c0 = float(c0)
        self.width = float(width)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.c0 * np.exp(-tau / self.width) / self.width

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        return self.c0 * (-np.expm1(-t / self.width))


class OhmicCorrelation:
    """Real part of the Ohmic bath correlation function."""

    def __init__(self, bath: OhmicBath):
        self.bath = bath

    def __call__(self, tau):
        return np.real(ohmic_correlation(tau, self.bath))

    def integral(self, t):
        return np.real(ohmic_correlation_integral(t, self.bath))


class CallableCorrelation:
    """Generic ``c(t, t')`` integrated by adaptive quadrature."""

    def __init__(self, fn: Callable[[float, float], float]):
        self.fn = fn

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        vals = [integrate.quad(lambda tp, tt=tt: float(np.real(self.fn(tt, tp))), 0.0, tt, limit=200)[0]
                if tt > 0 else 0.0 for tt in np.atleast_1d(t)]
        return np.asarray(vals).reshape(t.shape)


def _as_correlation(c):
    if c is None or (np.isscalar(c) and c == 0):
        return None
    if hasattr(c, "integral"):
        return c
    if callable(c):
        return CallableCorrelation(c)
    raise ConfigurationError(f"cannot interpret {c!r} as a bath correlation")


def decay_rate(correlation, t):
    """``gamma(t) = 2 int_0^t c(t, t') dt'`` (hbar = 1)."""
    correlation = _as_correlation(correlation)
    t = np.asarray(t, dtype=float)
    if correlation is None:
        return np.zeros_like(t)
    return 2.0 * np.asarray(correlation.integral(t), dtype=float)


def charge_qubit_channels(c_x, c_z, grid: TimeGrid) -> list[LindbladChannel]:
    """Charge-noise (``H_z``) and flux-noise (``H_x``) channels with time-dependent rates."""
    channels = []
    for label, op, c in (("x", CHARGE_X, c_x), ("z", CHARGE_Z, c_z)):
        corr = _as_correlation(c)
        rates = decay_rate(corr, grid.times)
        if np.any(rates < -1e-14):
            raise ConfigurationError(f"bath correlation c_{label} gives a negative rate on the grid")
        if corr is None:
            channels.append(LindbladChannel(op, 0.0, label=label))
        else:
            channels.append(LindbladChannel(op, lambda t, corr=corr: np.maximum(decay_rate(corr, t), 0.0), label=label))
    return channels


# two-qubit CNOT model; per-qubit ordering (|0>, |1>)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|
_RAISE = np.array([[0, 0], [1, 0]], dtype=complex)   # |1><0|

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class CnotModel:
    """Two charge qubits with local ``x``/``z`` controls and a ``C eps_x1 eps_x2 sy sy`` coupling.

    ``rate_scale`` multiplies the nominal rates ``gamma_1, gamma_2`` when
    they enter the dissipator (see the project notes for the chosen value).
    """

    coupling: float = 1.0
    gamma1: float = 0.1
    gamma2: float = 0.1
    rate_scale: float = 0.5

    @property
    def control_operators(self):
        return [kron(_SX, _I2), kron(_SZ, _I2), kron(_I2, _SX), kron(_I2, _SZ)]

    @property
    def coupling_operator(self):
        return kron(_SY, _SY)

    def hamiltonian(self, fields) -> ControlledHamiltonian:
        """``fields`` are ``(eps_x1, eps_z1, eps_x2, eps_z2)``."""
        ex1, ez1, ex2, ez2 = [as_field(f) for f in fields]
        ops = self.control_operators
        c = self.coupling
        return ControlledHamiltonian(np.zeros((4, 4), dtype=complex), [
            (ops[0], ex1), (ops[1], ez1), (ops[2], ex2), (ops[3], ez2),
            (self.coupling_operator, lambda t: c * ex1(t) * ex2(t)),
        ])

    def channels(self) -> list[LindbladChannel]:
        if self.gamma1 == 0 and self.gamma2 == 0:
            return []
        g1 = self.rate_scale * self.gamma1
        g2 = self.rate_scale * self.gamma2
        return [
            LindbladChannel(kron(_LOWER, _I2), g1, label="L1"),
            LindbladChannel(kron(_RAISE, _I2), g2, label="L2"),
            LindbladChannel(kron(_I2, _LOWER), g1, label="L3"),
            LindbladChannel(kron(_I2, _RAISE), g2, label="L4"),
        ]


def single_qubit_equilibrium(gamma1: float, gamma2: float) -> np.ndarray:
    """Stationary state of ``|0><1|`` (rate ``gamma1``) and ``|1><0|`` (rate ``gamma2``) in the ``(|0>, |1>)`` order."""
    s = gamma1 + gamma2
    return np.diag([gamma1 / s, gamma2 / s]).astype(complex)
