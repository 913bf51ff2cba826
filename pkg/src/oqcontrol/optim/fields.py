"""Control parameterisations and their Jacobians with respect to the parameters."""

from __future__ import annotations

import numpy as np

from ..dynamics.fields import FourierField, WindowedSineField, half_cosine_ramp
from ..dynamics.grid import TimeGrid


def fourier_field(a, grid: TimeGrid) -> np.ndarray:
    """Grid samples of ``sum_k a_k sin(k pi t / tf)``; both endpoints are exactly zero."""
    return FourierField(a, grid.t0, grid.tf).samples(grid)


def windowed_sine_field(E0: float, omega: float, phi0: float, gamma: float, t0: float, grid: TimeGrid,
                        ramp_width: float | None = None) -> np.ndarray:
    """Grid samples of ``g(t) E0 sin(omega t + phi0) exp(-gamma (t - t0)^2)``.

    ``ramp_width`` defaults to a tenth of the grid duration.
    """
    width = grid.duration / 10.0 if ramp_width is None else ramp_width
    return WindowedSineField(E0, omega, phi0, gamma, t0, width)(grid.times)


class GridParameterization:
    """Parameters are the field samples themselves (one field per block)."""

    def __init__(self, grid: TimeGrid, n_fields: int = 1):
        self.grid = grid
        self.n_fields = n_fields

    @property
    def size(self) -> int:
        return self.grid.n_nodes * self.n_fields

    def samples(self, params) -> np.ndarray:
        return np.asarray(params, dtype=float).reshape(self.n_fields, self.grid.n_nodes)

    def pullback(self, params, grad_samples) -> np.ndarray:
        return np.asarray(grad_samples, dtype=float).reshape(-1)


class FourierParameterization:
    """``n_fields`` independent Fourier series with ``n_coeffs`` sine modes each."""

    def __init__(self, grid: TimeGrid, n_coeffs: int, n_fields: int = 1):
        self.grid = grid
        self.n_coeffs = int(n_coeffs)
        self.n_fields = int(n_fields)
        self.basis = FourierField(np.ones(n_coeffs), grid.t0, grid.tf).basis(grid.times)
        self.basis[0] = 0.0
        self.basis[-1] = 0.0

    @property
    def size(self) -> int:
        return self.n_coeffs * self.n_fields

    def coefficients(self, params) -> np.ndarray:
        return np.asarray(params, dtype=float).reshape(self.n_fields, self.n_coeffs)

    def fields(self, params):
        return [FourierField(c, self.grid.t0, self.grid.tf) for c in self.coefficients(params)]

    def samples(self, params) -> np.ndarray:
        return self.coefficients(params) @ self.basis.T

    def pullback(self, params, grad_samples) -> np.ndarray:
        g = np.asarray(grad_samples, dtype=float).reshape(self.n_fields, self.grid.n_nodes)
        return (g @ self.basis).reshape(-1)


class WindowedSineParameterization:
    """Five parameters ``(E0, omega, phi0, gamma, t0)`` of the ramped, windowed sine."""

    names = ("E0", "omega", "phi0", "gamma", "t0")

    def __init__(self, grid: TimeGrid, ramp_width: float | None = None):
        self.grid = grid
        self.ramp_width = grid.duration / 10.0 if ramp_width is None else ramp_width

    size = 5

    def field(self, params) -> WindowedSineField:
        E0, om, phi, gam, tc = [float(v) for v in params]
        return WindowedSineField(E0, om, phi, gam, tc, self.ramp_width)

    def samples(self, params) -> np.ndarray:
        return self.field(params)(self.grid.times)[None, :]

    def pullback(self, params, grad_samples) -> np.ndarray:
        E0, om, phi, gam, tc = [float(v) for v in params]
        t = self.grid.times
        g = half_cosine_ramp(t, self.ramp_width)
        env = np.exp(-gam * (t - tc) ** 2)
        s = np.sin(om * t + phi)
        c = np.cos(om * t + phi)
        jac = np.stack([
            g * s * env,
            g * E0 * t * c * env,
            g * E0 * c * env,
            -g * E0 * s * env * (t - tc) ** 2,
            g * E0 * s * env * 2 * gam * (t - tc),
        ], axis=1)
        return np.asarray(grad_samples, dtype=float).reshape(-1) @ jac
