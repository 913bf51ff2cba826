"""Born-Markov (Redfield-type) master equation for two exchange-coupled spins.

Each spin couples through ``sigma_z`` to its own Ohmic bath. In the
interaction picture of the controlled system Hamiltonian the equation reads

    d rho~/dt = -sum_i ([A_i(t), B_i(t) rho~(t)] + h.c.),
    A_i(t) = U^dagger(t) sigma_z^(i) U(t),
    B_i(t) = int_0^t c(t - t') A_i(t') dt',

with ``c`` the bath correlation function. ``B_i`` is evaluated by product
integration (``A`` piecewise linear, ``c`` integrated exactly through its
closed-form antiderivatives) and the equation is stepped with classical RK4,
assembled as one linear step map per interval.

The generator is not of Lindblad form, so trace is kept but positivity is
not guaranteed: pure initial states can dip below zero by about ``eta``
during fast transients.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from ..core import dagger, kron, validate_density
from .baths import OhmicBath, ohmic_correlation_double_integral, ohmic_correlation_integral
from .fields import as_field
from .grid import TimeGrid, Trajectory
from .propagators import IntegrationError

# per-spin operators in the ordering (|0>, |1>) with sigma_z |1> = +|1> (spin up)
_SZ = np.diag([-1.0, 1.0]).astype(complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

SZ1 = kron(_SZ, _I2)
SZ2 = kron(_I2, _SZ)
HEISENBERG = kron(_SX, _SX) + kron(_SY, _SY) + kron(_SZ, _SZ)

PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
RHO_PSI_I = np.diag([0, 1, 0, 0]).astype(complex)


def double_dot_hamiltonian(bz1: float, bz2: float, j: float) -> np.ndarray:
    """``-Bz1 sz1 - Bz2 sz2 + J sigma1 . sigma2``."""
    return -bz1 * SZ1 - bz2 * SZ2 + j * HEISENBERG


@lru_cache(maxsize=32)
def _hat_weights(bath: OhmicBath, delta: float, m_max: int):
    """Product-trapezoid weights of ``int_0^{m delta} c(m delta - s) A(s) ds`` for piecewise-linear ``A``.

    Returns ``(alpha, omega, beta)``: ``alpha`` weights the newest node,
    ``omega[j]`` the interior node at lag ``j`` and ``beta[m]`` the oldest node.
    """
    lags = delta * np.arange(m_max + 2)
    P = ohmic_correlation_double_integral(lags, bath)
    C1 = ohmic_correlation_integral(lags, bath)
    alpha = P[1] / delta
    omega = np.zeros(m_max + 1, dtype=complex)
    omega[1:] = (P[2:m_max + 2] - 2 * P[1:m_max + 1] + P[0:m_max]) / delta
    beta = np.zeros(m_max + 1, dtype=complex)
    beta[1:] = C1[1:m_max + 1] - (P[1:m_max + 1] - P[0:m_max]) / delta
    return alpha, omega, beta


def memory_operators(A: np.ndarray, bath: OhmicBath, delta: float) -> np.ndarray:
    """``B_m = int_0^{t_m} c(t_m - s) A(s) ds`` on a uniform grid of spacing ``delta``.

    ``A`` has shape ``(n, N, N)``; the result has the same shape.
    """
    n = A.shape[0]
    alpha, omega, beta = _hat_weights(bath, delta, n - 1)
    flat = A.reshape(n, -1)
    conv = fftconvolve(omega[:, None], flat, axes=0)[:n]
    # conv already holds sum_{k<m} omega[m-k] A_k; fix the oldest node and add the newest
    B = conv + alpha * flat
    B[1:] += (beta[1:] - omega[1:])[:, None] * flat[0]
    B[0] = 0.0
    return B.reshape(A.shape)


def _double_dot_unitaries(bz1, bz2, j_field, grid: TimeGrid):
    """``U`` on the half-step grid using the fourth-order two-node Magnus scheme."""
    from .propagators import CF4_WEIGHTS, GAUSS_NODES
    half = grid.refined(2)
    dt = half.h
    ts = half.times[:-1]
    def ham(t):
        b1 = np.broadcast_to(np.asarray(bz1(t), dtype=float), t.shape)
        b2 = np.broadcast_to(np.asarray(bz2(t), dtype=float), t.shape)
        jj = np.broadcast_to(np.asarray(j_field(t), dtype=float), t.shape)
        return (-b1[:, None, None] * SZ1 - b2[:, None, None] * SZ2 + jj[:, None, None] * HEISENBERG)
    h1 = ham(ts + GAUSS_NODES[0] * dt)
    h2 = ham(ts + GAUSS_NODES[1] * dt)
    a1, a2 = CF4_WEIGHTS
    w1, v1 = np.linalg.eigh(a1 * h1 + a2 * h2)
    w2, v2 = np.linalg.eigh(a2 * h1 + a1 * h2)
    e1 = np.einsum("kij,kj,klj->kil", v1, np.exp(-1j * dt * w1), v1.conj())
    e2 = np.einsum("kij,kj,klj->kil", v2, np.exp(-1j * dt * w2), v2.conj())
    steps = e1 @ e2
    out = np.empty((half.n_nodes, 4, 4), dtype=complex)
    out[0] = np.eye(4)
    for k in range(half.n_steps):
        out[k + 1] = steps[k] @ out[k]
    return out


def _bkron(x, y):
    """Batched Kronecker product over the leading axis."""
    n, d = x.shape[0], x.shape[1]
    return (x[:, :, None, :, None] * y[:, None, :, None, :]).reshape(n, d * d, d * d)


def redfield_generators(A_list, B_list) -> np.ndarray:
    """Batched matrices of ``rho -> -sum_i ([A_i, B_i rho] + h.c.)`` (row-major vec)."""
    eye = np.broadcast_to(np.eye(A_list[0].shape[-1]), A_list[0].shape)
    gen = 0.0
    for A, B in zip(A_list, B_list):
        Bd = dagger(B)
        At = np.swapaxes(A, 1, 2)
        gen = gen - (_bkron(A @ B, eye) - _bkron(B, At) + _bkron(eye, np.swapaxes(Bd @ A, 1, 2))
                     - _bkron(A, np.swapaxes(Bd, 1, 2)))
    return gen


def rk4_step_maps(L0, Lh, L1, h):
    """RK4 step matrices for ``dy/dt = L(t) y`` from generators at ``t, t + h/2, t + h``."""
    eye = np.eye(L0.shape[-1])
    k1 = L0
    k2 = Lh @ (eye + 0.5 * h * k1)
    k3 = Lh @ (eye + 0.5 * h * k2)
    k4 = L1 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_redfield_doubledot(rho0, bz1, bz2, j_field, bath: OhmicBath, grid: TimeGrid,
                                 bath2: OhmicBath | None = None, final_only: bool = False) -> Trajectory:
    """Schroedinger-picture density matrix of the double dot on every grid node.

    ``bz1``, ``bz2`` and ``j_field`` are control fields (or constants);
    ``bath2`` defaults to an identical copy of ``bath``. With ``final_only``
    the trajectory holds only the initial and final states.
    """
    rho0 = validate_density(rho0, atol=1e-10)
    if rho0.shape != (4, 4):
        raise ValueError("the double dot is a 4-level system")
    bz1, bz2, j_field = as_field(bz1), as_field(bz2), as_field(j_field)
    baths = (bath, bath if bath2 is None else bath2)
    U = _double_dot_unitaries(bz1, bz2, j_field, grid)  # half-step grid
    Ud = dagger(U)
    delta = 0.5 * grid.h
    A_list, B_list = [], []
    for sz, b in zip((SZ1, SZ2), baths):
        A = Ud @ sz @ U
        A_list.append(A)
        B_list.append(memory_operators(A, b, delta) if b.eta > 0 else np.zeros_like(A))
    L = redfield_generators(A_list, B_list)
    steps = rk4_step_maps(L[0:-1:2], L[1::2], L[2::2], grid.h)
    x = rho0.reshape(-1)
    if final_only:
        for s in steps:
            x = s @ x
        tilde_final = x.reshape(4, 4)
        final = U[-1] @ tilde_final @ Ud[-1]
        states = np.array([rho0, final])
        traj_grid = TimeGrid(grid.t0, grid.tf, 1)
    else:
        vecs = np.empty((grid.n_nodes, 16), dtype=complex)
        vecs[0] = x
        for k, s in enumerate(steps):
            vecs[k + 1] = s @ vecs[k]
        tilde = vecs.reshape(grid.n_nodes, 4, 4)
        states = U[::2] @ tilde @ Ud[::2]
        traj_grid = grid
    drift = np.abs(np.einsum("kii->k", states) - 1.0).max()
    if not np.all(np.isfinite(states)) or drift > 1e-8:
        raise IntegrationError(f"Redfield trace drifted by {drift:.2e}")
    # the time-local Born-Markov generator is not completely positive
    return Trajectory(traj_grid, states, info={"completely_positive": False})
