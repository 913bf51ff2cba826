"""Direct inversion of the Lindblad equation for a driven, damped two-level system.

Model: ``H = eps(t) sigma_x`` with symmetric decay channels ``|0><1|`` and
``|1><0|``. Write ``rho = [[p, a + i b], [a - i b, 1 - p]]`` and let
``Gamma = 4 gamma`` be the coherence decay rate. The channels give coherence
decay ``a(t) = a0 exp(-Gamma t)`` and the purity balance

    d(b^2)/dt + 2 Gamma b^2 = (1 - 2p)(dp/dt + 2 Gamma p - Gamma),

so prescribing ``p(t)`` fixes ``b(t)``, and the control follows from
``eps = (db/dt + Gamma b) / (2p - 1)``.

For the Rabi prescription ``p = A + (1 - 2A) cos^2(Omega t)`` everything is
available in closed form. The control is evaluated as

    eps = c (Omega sin 2 Omega t - Gamma cos 2 Omega t) / (2 b),   c = 1 - 2A,

which is the quotient above with the common factor ``cos 2 Omega t``
cancelled, so it stays regular at the zeros of ``2p - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .dynamics.fields import FunctionField, GridField
from .dynamics.grid import TimeGrid
from .dynamics.propagators import LindbladChannel


class SingularControlError(ArithmeticError):
    """The prescribed trajectory requires an unbounded control."""


@dataclass(frozen=True)
class RabiPrescription:
    """Target population ``rho_11(t) = (1 - 2A) cos^2(Omega t) + A``."""

    A: float
    omega: float = 1.0
    a0: float = 0.0
    b0: float = 0.2
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.A <= 0.5:
            raise ValueError(f"offset A must lie in [0, 1/2], got {self.A}")
        if self.gamma < 0:
            raise ValueError(f"decay rate must be >= 0, got {self.gamma}")
        if self.omega <= 0:
            raise ValueError(f"Rabi frequency must be positive, got {self.omega}")
        if self.b0 < 0:
            raise ValueError("use b0 >= 0; negative b0 maps to b0 -> -b0 with eps -> -eps")
        z0 = 1.0 - 2.0 * self.A
        if z0 ** 2 + 4 * (self.a0 ** 2 + self.b0 ** 2) > 1 + 1e-12:
            raise ValueError("initial (rho_11, a0, b0) is not a valid density matrix")

    @property
    def contrast(self) -> float:
        return 1.0 - 2.0 * self.A

    @property
    def decay(self) -> float:
        """Coherence decay rate ``Gamma = 4 gamma``."""
        return 4.0 * self.gamma

    @property
    def signed_branch(self) -> bool:
        """``b0 = 0`` without damping: use the smooth signed root ``b = (c/2) sin 2 Omega t``."""
        return self.b0 == 0 and self.gamma == 0

    def initial_density(self) -> np.ndarray:
        p = 1.0 - self.A
        z = complex(self.a0, self.b0)
        return np.array([[p, z], [np.conj(z), 1.0 - p]])


def rabi_trajectory(p: RabiPrescription, grid_or_times) -> np.ndarray:
    t = grid_or_times.times if isinstance(grid_or_times, TimeGrid) else np.asarray(grid_or_times, dtype=float)
    return p.contrast * np.cos(p.omega * t) ** 2 + p.A


def inversion_channels(gamma: float) -> list[LindbladChannel]:
    """Decay ``|1> -> |0>`` and ``|0> -> |1>`` at rate ``4 gamma`` each (index 0 is ``|1>``)."""
    lower = np.array([[0, 0], [1, 0]], dtype=complex)   # |0><1|
    upper = np.array([[0, 1], [0, 0]], dtype=complex)   # |1><0|
    return [LindbladChannel(lower, 4.0 * gamma, label="L1"), LindbladChannel(upper, 4.0 * gamma, label="L2")]


def _b_squared(p: RabiPrescription, t):
    """Closed-form ``b(t)^2``; negative values mark times beyond the horizon."""
    t = np.asarray(t, dtype=float)
    c, om, g = p.contrast, p.omega, p.decay
    k = 2.0 * g
    w = 4.0 * om
    den = k * k + w * w
    decay = np.exp(-k * t)
    # e^{-kt} int_0^t e^{k s} sin(w s) ds, and the cos / constant analogues
    s_int = (k * np.sin(w * t) - w * np.cos(w * t) + w * decay) / den
    c_int = (k * np.cos(w * t) + w * np.sin(w * t) - k * decay) / den
    e_int = -np.expm1(-k * t) / k if k > 0 else t
    return p.b0 ** 2 * decay + c * c * (0.5 * om * s_int - 0.5 * g * (e_int + c_int))


def coherence_b(p: RabiPrescription, t):
    t = np.asarray(t, dtype=float)
    if p.signed_branch:
        return 0.5 * p.contrast * np.sin(2.0 * p.omega * t)
    y = _b_squared(p, t)
    return np.sqrt(np.where(y > 0, y, np.nan))


def coherence_a(p: RabiPrescription, t):
    return p.a0 * np.exp(-p.decay * np.asarray(t, dtype=float))


def validity_horizon(p: RabiPrescription, t_max: float | None = None, samples_per_period: int = 400) -> float:
    """First time at which ``b(t)^2`` turns negative (``inf`` if not before ``t_max``)."""
    if p.gamma == 0:
        return np.inf
    period = np.pi / p.omega
    if t_max is None:
        # with damping the constant -Gamma/2 term in the integrand wins after a few 1/Gamma
        t_max = max(50.0 * period, 20.0 / p.decay)
    n = int(np.ceil(t_max / period * samples_per_period))
    t = np.linspace(0.0, t_max, n + 1)
    y = _b_squared(p, t)
    neg = np.nonzero(y < 0)[0]
    if neg.size == 0:
        return np.inf
    i = neg[0]
    if i == 0:
        return 0.0
    return float(brentq(lambda s: float(_b_squared(p, s)), t[i - 1], t[i], xtol=1e-14, rtol=1e-14))


def control_function(p: RabiPrescription) -> Callable:
    """Analytic inverted control ``eps(t)``, valid before the horizon."""
    c, om, g = p.contrast, p.omega, p.decay
    if p.signed_branch:
        return lambda t: np.full_like(np.asarray(t, dtype=float), om)

    def eps(t):
        t = np.asarray(t, dtype=float)
        b = coherence_b(p, t)
        if np.any(b == 0):
            raise SingularControlError("b(t) vanishes; the prescribed trajectory needs an infinite field")
        return c * (om * np.sin(2 * om * t) - g * np.cos(2 * om * t)) / (2.0 * b)

    return eps


def e0_field(p: RabiPrescription, t):
    """Undamped inverted field in its textbook closed form, for comparison."""
    t = np.asarray(t, dtype=float)
    c, om = p.contrast, p.omega
    if p.signed_branch:
        return np.full_like(t, om)
    return om * np.sqrt(2.0) * c * np.sin(2 * om * t) / np.sqrt(8 * p.b0 ** 2 + c * c * (1 - np.cos(4 * om * t)))


@dataclass
class InversionResult:
    """Inverted control on the part of the grid that lies before the horizon."""

    prescription: RabiPrescription
    grid: TimeGrid
    times: np.ndarray
    eps: np.ndarray
    rho11: np.ndarray
    a: np.ndarray
    b: np.ndarray
    horizon: float
    control: Callable = field(repr=False)

    @property
    def complete(self) -> bool:
        return len(self.times) == self.grid.n_nodes

    @property
    def field(self):
        """Grid samples as a ``GridField`` on the valid sub-grid (or the analytic field)."""
        if self.complete:
            return GridField(self.grid, self.eps)
        n = len(self.times) - 1
        if n < 1:
            return FunctionField(self.control)
        sub = TimeGrid(self.grid.t0, self.times[-1], n)
        return GridField(sub, self.eps)


def invert_control(p: RabiPrescription, grid: TimeGrid) -> InversionResult:
    """Inverted field on ``grid`` up to the validity horizon."""
    horizon = validity_horizon(p)
    t = grid.times
    # the sub-grid must stay uniform, so keep the longest prefix before the horizon
    n_keep = int(np.searchsorted(t, horizon, side="left"))
    tt = t[:n_keep]
    eps_fn = control_function(p)
    eps = eps_fn(tt) if n_keep else np.zeros(0)
    return InversionResult(
        prescription=p, grid=grid, times=tt, eps=np.asarray(eps, dtype=float),
        rho11=rabi_trajectory(p, tt), a=coherence_a(p, tt), b=coherence_b(p, tt),
        horizon=horizon, control=eps_fn,
    )
