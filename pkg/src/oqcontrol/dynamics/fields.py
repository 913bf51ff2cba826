"""Real control fields: grid samples or closed-form parameterisations.

Every field is callable on scalar or array times and can be sampled on a
``TimeGrid``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import TimeGrid


class ControlField:
    """Base class; subclasses implement ``__call__``."""

    def __call__(self, t):
        raise NotImplementedError

    def samples(self, grid: TimeGrid) -> np.ndarray:
        return np.asarray(self(grid.times), dtype=float)


class ZeroField(ControlField):
    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


class ConstantField(ControlField):
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


class GridField(ControlField):
    """Samples on grid nodes, cubic-spline interpolated in between.

    ``kind="linear"`` gives piecewise-linear interpolation instead.
    """

    def __init__(self, grid: TimeGrid, values, kind: str = "cubic"):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_nodes,):
            raise ValueError(f"expected {grid.n_nodes} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid field samples must be finite")
        self.grid = grid
        self.values = values
        self.kind = kind
        if kind == "cubic":
            self._interp = CubicSpline(grid.times, values)
        elif kind == "linear":
            self._interp = lambda t: np.interp(t, grid.times, values)
        else:
            raise ValueError(f"unknown interpolation kind {kind!r}")

    def __call__(self, t):
        return np.asarray(self._interp(t), dtype=float)

    def samples(self, grid: TimeGrid) -> np.ndarray:
        if grid == self.grid:
            return self.values.copy()
        return super().samples(grid)


class FourierField(ControlField):
    """``eps(t) = sum_k a_k sin(k pi (t - t0) / T)``, zero at both ends of ``[t0, tf]``."""

    def __init__(self, coefficients, t0: float, tf: float):
        self.coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
        if self.coefficients.ndim != 1 or self.coefficients.size < 1:
            raise ValueError("need at least one Fourier coefficient")
        self.t0 = float(t0)
        self.tf = float(tf)

    @property
    def omegas(self) -> np.ndarray:
        k = np.arange(1, self.coefficients.size + 1)
        return k * np.pi / (self.tf - self.t0)

    def basis(self, t) -> np.ndarray:
        """Basis functions ``sin(omega_k (t - t0))``, shape ``t.shape + (F,)``."""
        t = np.asarray(t, dtype=float)
        return np.sin(np.multiply.outer(t - self.t0, self.omegas))

    def __call__(self, t):
        return self.basis(t) @ self.coefficients

    def samples(self, grid: TimeGrid) -> np.ndarray:
        out = super().samples(grid)
        # pin the boundary condition exactly; sin(k pi) is only ~1e-16
        if np.isclose(grid.t0, self.t0):
            out[0] = 0.0
        if np.isclose(grid.tf, self.tf):
            out[-1] = 0.0
        return out


def half_cosine_ramp(t, width: float):
    """``g(t)`` rising smoothly from 0 at ``t = 0`` to 1 at ``t = width``."""
    t = np.asarray(t, dtype=float)
    if width <= 0:
        return np.where(t > 0, 1.0, 0.0)
    x = np.clip(t / width, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * x))


@dataclass
class WindowedSineField(ControlField):
    """``g(t) E0 sin(omega t + phi0) exp(-gamma (t - t_c)^2)`` with a half-cosine ramp ``g``."""

    E0: float
    omega: float
    phi0: float
    gamma: float
    t_center: float
    ramp_width: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        envelope = np.exp(-self.gamma * (t - self.t_center) ** 2)
        return half_cosine_ramp(t, self.ramp_width) * self.E0 * np.sin(self.omega * t + self.phi0) * envelope


class FunctionField(ControlField):
    def __init__(self, fn: Callable):
        self.fn = fn

    def __call__(self, t):
        return np.asarray(np.vectorize(self.fn, otypes=[float])(t)) if np.ndim(t) else float(self.fn(float(t)))


def as_field(f) -> ControlField:
    if isinstance(f, ControlField):
        return f
    if f is None:
        return ZeroField()
    if np.isscalar(f):
        return ConstantField(f)
    if callable(f):
        return FunctionField(f)
    raise TypeError(f"cannot interpret {type(f).__name__} as a control field")
