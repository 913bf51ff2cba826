"""Fixed-step propagators for the von Neumann, Lindblad and superoperator equations.

All three use the commutator-free fourth-order Magnus scheme
``Y_{n+1} = exp(h(a1 G1 + a2 G2)) exp(h(a2 G1 + a1 G2)) Y_n`` with ``G1, G2``
the generator at the two Gauss nodes of each step. Products of exponentials
keep unitarity and trace exactly, and the same scheme is shared by the
state and superoperator propagators so that they agree to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from ..core import DimensionError, Superoperator, dagger, is_hermitian, validate_density
from .grid import TimeGrid, Trajectory

SQ3_6 = np.sqrt(3.0) / 6.0
GAUSS_NODES = (0.5 - SQ3_6, 0.5 + SQ3_6)
CF4_WEIGHTS = (0.25 - SQ3_6, 0.25 + SQ3_6)

TRACE_DRIFT_LIMIT = 1e-6


class IntegrationError(RuntimeError):
    """A propagator detected a numerical failure (trace drift, non-finite state)."""


class ControlledHamiltonian:
    """``H(t) = H0 + sum_k c_k(t) H_k`` with real coefficient functions ``c_k``.

    Keeping the operators separate lets propagators and gradients reuse the
    generator pieces; a plain callable ``t -> H`` is accepted everywhere too.
    """

    def __init__(self, h0, terms: Sequence[tuple[np.ndarray, Callable]] = ()):
        self.h0 = np.asarray(h0, dtype=complex)
        self.operators = [np.asarray(op, dtype=complex) for op, _ in terms]
        self.coefficients = [c for _, c in terms]
        n = self.h0.shape[0]
        for op in [self.h0, *self.operators]:
            if op.shape != (n, n):
                raise DimensionError("all Hamiltonian terms must share one square shape")
            if not is_hermitian(op):
                raise ValueError("Hamiltonian terms must be Hermitian")

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    def coefficient_values(self, t) -> np.ndarray:
        """Array of shape ``(n_terms,) + t.shape``."""
        t = np.asarray(t, dtype=float)
        if not self.coefficients:
            return np.zeros((0,) + t.shape)
        return np.array([np.broadcast_to(np.asarray(c(t), dtype=float), t.shape) for c in self.coefficients])

    def __call__(self, t):
        c = self.coefficient_values(t)
        h = np.array(self.h0)
        if np.ndim(t) == 0:
            for ck, op in zip(c, self.operators):
                h = h + ck * op
            return h
        t = np.asarray(t)
        out = np.broadcast_to(self.h0, t.shape + self.h0.shape).copy()
        for ck, op in zip(c, self.operators):
            out += ck[..., None, None] * op
        return out


def _hamiltonian_at(h_of_t, t) -> np.ndarray:
    if isinstance(h_of_t, ControlledHamiltonian):
        return h_of_t(t)
    return np.asarray(h_of_t(t), dtype=complex)


@dataclass
class LindbladChannel:
    """Channel ``L`` with rate ``gamma`` (a constant or a function of time)."""

    L: np.ndarray
    rate: float | Callable = 1.0
    label: str = ""
    _rate_fn: Callable = field(init=False, repr=False)

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=complex)
        if self.L.ndim != 2 or self.L.shape[0] != self.L.shape[1]:
            raise DimensionError(f"Lindblad operator must be square, got {self.L.shape}")
        if callable(self.rate):
            self._rate_fn = self.rate
        else:
            r = float(self.rate)
            if r < 0:
                raise ValueError(f"Lindblad rate must be non-negative, got {r}")
            self._rate_fn = lambda t, r=r: np.full_like(np.asarray(t, dtype=float), r)

    def rate_at(self, t):
        return np.asarray(self._rate_fn(t), dtype=float)

    @property
    def constant(self) -> bool:
        return not callable(self.rate)


def _check_channels(channels, n):
    for ch in channels:
        if ch.L.shape != (n, n):
            raise DimensionError(f"channel operator shape {ch.L.shape} does not match system dim {n}")


def dissipator(rho, channels: Sequence[LindbladChannel], t: float = 0.0) -> np.ndarray:
    """``sum_mu gamma_mu (L rho L^dagger - {L^dagger L, rho} / 2)``."""
    rho = np.asarray(rho, dtype=complex)
    _check_channels(channels, rho.shape[0])
    out = np.zeros_like(rho)
    for ch in channels:
        g = float(ch.rate_at(t))
        ld = dagger(ch.L)
        ldl = ld @ ch.L
        out += g * (ch.L @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl))
    return out


def lindblad_apply(rho, channels: Sequence[LindbladChannel], t: float = 0.0) -> np.ndarray:
    """Dissipator in the ``i d(rho)/dt = [H, rho] + D[rho]`` convention (carries the factor ``i``)."""
    validate_density(rho, atol=1e-10)
    return 1j * dissipator(rho, channels, t)


# superoperator matrices in the row-major vectorisation vec(A rho B) = (A kron B^T) vec(rho)


def liouvillian_matrix(h) -> np.ndarray:
    """Matrix of ``rho -> -i [H, rho]``."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def dissipator_matrix(L) -> np.ndarray:
    """Matrix of ``rho -> L rho L^dagger - {L^dagger L, rho} / 2`` (unit rate)."""
    L = np.asarray(L, dtype=complex)
    eye = np.eye(L.shape[0])
    ldl = dagger(L) @ L
    return np.kron(L, L.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)


class LindbladGenerator:
    """Time-dependent generator ``G(t)`` of ``d vec(rho)/dt = G(t) vec(rho)``."""

    def __init__(self, h_of_t, channels: Sequence[LindbladChannel] = ()):
        self.h_of_t = h_of_t
        self.channels = list(channels)
        if isinstance(h_of_t, ControlledHamiltonian):
            self.dim = h_of_t.dim
            self._g0 = liouvillian_matrix(h_of_t.h0)
            self._gk = [liouvillian_matrix(op) for op in h_of_t.operators]
        else:
            self.dim = np.asarray(h_of_t(0.0)).shape[0]
            self._g0 = None
        _check_channels(self.channels, self.dim)
        self._dk = [dissipator_matrix(ch.L) for ch in self.channels]

    def __call__(self, t: float) -> np.ndarray:
        if self._g0 is not None:
            c = self.h_of_t.coefficient_values(t)
            g = self._g0.copy()
            for ck, gk in zip(c, self._gk):
                g += ck * gk
        else:
            g = liouvillian_matrix(_hamiltonian_at(self.h_of_t, t))
        for ch, dk in zip(self.channels, self._dk):
            g += float(ch.rate_at(t)) * dk
        return g


def _cf4_step_generators(gen, t, h):
    g1 = gen(t + GAUSS_NODES[0] * h)
    g2 = gen(t + GAUSS_NODES[1] * h)
    a1, a2 = CF4_WEIGHTS
    return a1 * g1 + a2 * g2, a2 * g1 + a1 * g2


def lindblad_step_maps(h_of_t, channels, grid: TimeGrid) -> np.ndarray:
    """One-step propagators ``P_n`` (shape ``(n_steps, N^2, N^2)``) with ``vec rho_{n+1} = P_n vec rho_n``."""
    gen = LindbladGenerator(h_of_t, channels)
    h = grid.h
    out = np.empty((grid.n_steps, gen.dim ** 2, gen.dim ** 2), dtype=complex)
    for n, t in enumerate(grid.times[:-1]):
        late, early = _cf4_step_generators(gen, t, h)
        out[n] = expm(h * late) @ expm(h * early)
    return out


def _expm_hermitian(k, h):
    """``exp(-i h K)`` for Hermitian ``K``; exactly unitary up to rounding."""
    w, v = np.linalg.eigh(k)
    return (v * np.exp(-1j * h * w)) @ dagger(v)


def unitary_step_maps(h_of_t, grid: TimeGrid) -> np.ndarray:
    """One-step unitaries ``V_n`` with ``U(t_{n+1}) = V_n U(t_n)``."""
    h = grid.h
    ts = grid.times[:-1]
    h1 = _hamiltonian_at(h_of_t, ts + GAUSS_NODES[0] * h)
    h2 = _hamiltonian_at(h_of_t, ts + GAUSS_NODES[1] * h)
    if h1.ndim == 2:  # callable returned a single matrix; evaluate node by node
        h1 = np.array([_hamiltonian_at(h_of_t, t + GAUSS_NODES[0] * h) for t in ts])
        h2 = np.array([_hamiltonian_at(h_of_t, t + GAUSS_NODES[1] * h) for t in ts])
    a1, a2 = CF4_WEIGHTS
    out = np.empty_like(h1)
    for n in range(grid.n_steps):
        out[n] = _expm_hermitian(a1 * h1[n] + a2 * h2[n], h) @ _expm_hermitian(a2 * h1[n] + a1 * h2[n], h)
    return out


def _check_hamiltonian_nodes(h_of_t, grid):
    hs = _hamiltonian_at(h_of_t, grid.times)
    if hs.ndim == 2:
        hs = np.array([_hamiltonian_at(h_of_t, t) for t in grid.times])
    if not np.allclose(hs, np.conj(np.swapaxes(hs, 1, 2)), atol=1e-12, rtol=0):
        raise ValueError("Hamiltonian is not Hermitian on the grid")


def propagate_unitary(h_of_t, grid: TimeGrid) -> np.ndarray:
    """``U(t_k, t0)`` on every node, shape ``(n_nodes, N, N)``; ``U[0]`` is the identity."""
    _check_hamiltonian_nodes(h_of_t, grid)
    steps = unitary_step_maps(h_of_t, grid)
    n = steps.shape[1]
    out = np.empty((grid.n_nodes, n, n), dtype=complex)
    out[0] = np.eye(n)
    for k in range(grid.n_steps):
        out[k + 1] = steps[k] @ out[k]
    return out


def propagate_lindblad(rho0, h_of_t, channels: Sequence[LindbladChannel], grid: TimeGrid) -> Trajectory:
    """Density operator on every node of ``grid`` under the Lindblad equation."""
    rho0 = validate_density(rho0, atol=1e-10)
    _check_hamiltonian_nodes(h_of_t, grid)
    n = rho0.shape[0]
    steps = lindblad_step_maps(h_of_t, channels, grid)
    vecs = np.empty((grid.n_nodes, n * n), dtype=complex)
    vecs[0] = rho0.reshape(-1)
    for k in range(grid.n_steps):
        vecs[k + 1] = steps[k] @ vecs[k]
    states = vecs.reshape(grid.n_nodes, n, n)
    drift = np.abs(np.einsum("kii->k", states) - 1.0).max()
    if not np.all(np.isfinite(states)) or drift > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"trace drifted by {drift:.2e}; reduce the step size")
    return Trajectory(grid, states)


def propagate_superop(h_of_t, channels: Sequence[LindbladChannel], grid: TimeGrid, final_only: bool = False):
    """Evolution superoperators ``X(t_k)`` with ``X(t0)`` the identity.

    Returns a list of ``Superoperator`` (one per node), or only ``X(tf)`` when
    ``final_only`` is set.
    """
    _check_hamiltonian_nodes(h_of_t, grid)
    if channels:
        steps = lindblad_step_maps(h_of_t, channels, grid)
    else:
        u = unitary_step_maps(h_of_t, grid)
        steps = np.array([np.kron(v, v.conj()) for v in u])
    m = steps.shape[1]
    x = np.eye(m, dtype=complex)
    out = [Superoperator(x)]
    for k in range(grid.n_steps):
        x = steps[k] @ x
        if not final_only:
            out.append(Superoperator(x))
    if not np.all(np.isfinite(x)):
        raise IntegrationError("superoperator propagation produced non-finite entries")
    return Superoperator(x) if final_only else out
