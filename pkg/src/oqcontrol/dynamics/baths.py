"""Ohmic boson bath: correlation function, its antiderivatives and the bath phases.

Spectral density ``J(w) = eta w exp(-w / w_c)``; all quantities use hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

# Bernoulli-number coefficients of the trigamma asymptotic series, terms z^-(2k+1)
_TRIGAMMA_ASYMPTOTIC = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
_TRIGAMMA_SHIFT = 12.0


def trigamma(z):
    """Complex trigamma ``psi'(z)`` for ``Re z > 0``.

    Upward recurrence ``psi'(z) = psi'(z + 1) + 1/z^2`` until ``Re z >= 12``,
    then the asymptotic series.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise ValueError("trigamma is only implemented for Re z > 0")
    acc = np.zeros_like(z)
    w = z.copy()
    while True:
        small = w.real < _TRIGAMMA_SHIFT
        if not np.any(small):
            break
        acc = acc + np.where(small, 1.0 / (w * w), 0.0)
        w = np.where(small, w + 1.0, w)
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    power = inv2 * inv
    for c in _TRIGAMMA_ASYMPTOTIC:
        series = series + c * power
        power = power * inv2
    return acc + inv + 0.5 * inv2 + series


@dataclass(frozen=True)
class OhmicBath:
    eta: float
    omega_c: float
    beta: float

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"coupling eta must be >= 0, got {self.eta}")
        if self.omega_c <= 0:
            raise ValueError(f"cutoff omega_c must be > 0, got {self.omega_c}")
        if self.beta <= 0:
            raise ValueError(f"inverse temperature beta must be > 0, got {self.beta}")

    @property
    def kappa(self) -> float:
        return 1.0 / (self.beta * self.omega_c)

    def spectral_density(self, w):
        w = np.asarray(w, dtype=float)
        return self.eta * w * np.exp(-w / self.omega_c)

    def _args(self, tau):
        tau = np.asarray(tau, dtype=float)
        k = self.kappa
        z1 = k * (1.0 + 1j * self.omega_c * tau)
        z2 = 1.0 + k * (1.0 - 1j * self.omega_c * tau)
        return z1, z2


def ohmic_correlation(tau, bath: OhmicBath):
    """Equilibrium correlation ``<Gamma(tau) Gamma(0)>`` of the Ohmic bath.

    Equals ``int_0^inf J(w) [coth(beta w / 2) cos(w tau) - i sin(w tau)] dw``.
    """
    z1, z2 = bath._args(tau)
    return bath.eta / bath.beta ** 2 * (trigamma(z1) + trigamma(z2))


def _c1_primitive(tau, bath):
    z1, z2 = bath._args(tau)
    return 1j * bath.eta / bath.beta * (special.psi(z2) - special.psi(z1))


def ohmic_correlation_integral(tau, bath: OhmicBath):
    """``int_0^tau c(s) ds``."""
    return _c1_primitive(tau, bath) - _c1_primitive(0.0, bath)


def ohmic_correlation_double_integral(tau, bath: OhmicBath):
    """``int_0^tau (tau - s) c(s) ds``."""
    tau = np.asarray(tau, dtype=float)
    z1, z2 = bath._args(tau)
    y1, y2 = bath._args(0.0)
    p2 = -bath.eta * (special.loggamma(z1) + special.loggamma(z2))
    p2_0 = -bath.eta * (special.loggamma(y1) + special.loggamma(y2))
    return p2 - p2_0 - tau * _c1_primitive(0.0, bath)


def ohmic_correlation_quadrature(tau: float, bath: OhmicBath, epsabs=1e-13, epsrel=1e-11) -> complex:
    """Direct spectral integral of the correlation, used as an independent check."""
    def re(w):
        return bath.spectral_density(w) / np.tanh(0.5 * bath.beta * w) * np.cos(w * tau) if w > 0 else bath.eta * 2 / bath.beta
    def im(w):
        return -bath.spectral_density(w) * np.sin(w * tau)
    upper = 60.0 * bath.omega_c
    kw = dict(limit=2000, epsabs=epsabs, epsrel=epsrel)
    r = integrate.quad(re, 0.0, upper, **kw)[0]
    i = integrate.quad(im, 0.0, upper, **kw)[0]
    return complex(r, i)


def bath_phase_q1(tau, bath: OhmicBath):
    """Reactive phase ``Q1(tau) = -eta arctan(w_c tau)``.

    The magnitude is ``int J(w)/w^2 sin(w tau) dw``; the sign is fixed so that
    the control-free kinetic equation relaxes to ``z = tanh(beta eps0 / 2)``.
    """
    tau = np.asarray(tau, dtype=float)
    return -bath.eta * np.arctan(bath.omega_c * tau)


def bath_phase_q2(tau, bath: OhmicBath):
    """Damping phase ``Q2(tau) = int J(w)/w^2 (1 - cos w tau) coth(beta w / 2) dw`` in closed form."""
    tau = np.asarray(tau, dtype=float)
    k = bath.kappa
    vacuum = 0.5 * bath.eta * np.log1p((bath.omega_c * tau) ** 2)
    thermal = bath.eta * (2.0 * special.loggamma(1.0 + k).real
                          - 2.0 * special.loggamma(1.0 + k + 1j * tau / bath.beta).real)
    return vacuum + thermal


def bath_phase_q1_quadrature(tau: float, bath: OhmicBath) -> float:
    f = lambda w: bath.spectral_density(w) / w ** 2 * np.sin(w * tau) if w > 0 else bath.eta * tau
    upper = 80.0 * bath.omega_c
    return -integrate.quad(f, 0.0, upper, limit=2000, epsabs=1e-13, epsrel=1e-12)[0]


def bath_phase_q2_quadrature(tau: float, bath: OhmicBath) -> float:
    def f(w):
        if w == 0:
            return 0.0
        return bath.spectral_density(w) / w ** 2 * (1.0 - np.cos(w * tau)) / np.tanh(0.5 * bath.beta * w)
    upper = 80.0 * bath.omega_c
    return integrate.quad(f, 0.0, upper, limit=4000, epsabs=1e-13, epsrel=1e-12)[0]
