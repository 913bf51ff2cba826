"""Cost functionals for state transfer, gate synthesis and process matching.

Norms are Frobenius, ``||A||^2 = Tr(A A^dagger)``. For Bloch-vector states
``||rho - rho'||^2 = |R - R'|^2 / 2``. Time integrals use the composite
trapezoid on the propagation grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    ChiMatrix,
    ContractError,
    DimensionError,
    Superoperator,
    dagger,
    frobenius_norm_sq,
    random_pure_density,
)
from .dynamics.grid import TimeGrid, Trajectory
from .dynamics.propagators import LindbladChannel, dissipator_matrix

COST_KINDS = (
    "state_transfer",
    "trajectory_tracking",
    "gate_JO",
    "gate_JO_phase",
    "dissipation_JD",
    "superop_Jn",
    "test_JZ",
    "chi_distance",
    "control_penalty",
    "composite",
)


def _state_distance_sq(a, b, bloch: bool) -> np.ndarray:
    """Squared Frobenius distance, batched over a leading axis; Bloch vectors use ``|dR|^2 / 2``."""
    d = np.asarray(a) - np.asarray(b)
    if bloch:
        return 0.5 * np.sum(d * d, axis=-1)
    return np.sum(np.abs(d) ** 2, axis=(-2, -1))


def _as_path(desired_path, grid: TimeGrid, like):
    if callable(desired_path):
        return np.array([desired_path(t) for t in grid.times])
    path = np.asarray(desired_path)
    if path.shape == np.shape(like):  # a single state held fixed
        return np.broadcast_to(path, (grid.n_nodes,) + path.shape)
    if path.shape[0] != grid.n_nodes:
        raise DimensionError("desired path must have one state per grid node")
    return path


def cost_control_penalty(field_samples, alpha, grid: TimeGrid) -> float:
    """``int s(t) |eps(t)|^2 dt`` by trapezoid; ``alpha`` is a scalar or a per-node series."""
    eps = np.asarray(field_samples, dtype=float)
    if eps.ndim == 1:
        eps = eps[None, :]
    if eps.shape[-1] != grid.n_nodes:
        raise DimensionError("field samples do not match the grid")
    s = np.broadcast_to(np.asarray(alpha, dtype=float), (grid.n_nodes,))
    if np.any(s < 0):
        raise ContractError("penalty weights must be non-negative")
    w = grid.trapezoid_weights()
    return float(np.sum(w * s * np.sum(eps * eps, axis=0)))


def cost_state_transfer(traj: Trajectory, target, w1: float = 1.0, w2: float = 0.0, desired_path=None,
                        alpha=0.0, field_samples=None) -> float:
    """Driving / trapping cost with an intensity penalty.

    ``J = w1/2 ||rho(tf) - target||^2 + w2/(2 T) int ||rho - rho_D||^2 + 1/2 int alpha eps^2``.
    """
    target = np.asarray(target)
    if np.shape(traj.final) != target.shape:
        raise DimensionError(f"target shape {target.shape} does not match state shape {np.shape(traj.final)}")
    j = 0.5 * w1 * float(_state_distance_sq(traj.final, target, traj.is_bloch))
    if w2 != 0:
        if desired_path is None:
            raise ContractError("a desired path is required when w2 > 0")
        path = _as_path(desired_path, traj.grid, target)
        d = _state_distance_sq(traj.states, path, traj.is_bloch)
        j += 0.5 * w2 / traj.grid.duration * float(np.dot(traj.grid.trapezoid_weights(), d))
    if field_samples is not None and np.any(np.asarray(alpha) != 0):
        j += 0.5 * cost_control_penalty(field_samples, alpha, traj.grid)
    return j


def cost_trajectory_tracking(traj: Trajectory, desired_path) -> float:
    """``1/(2T) int ||rho(t) - rho_D(t)||^2 dt``."""
    path = _as_path(desired_path, traj.grid, traj.final)
    d = _state_distance_sq(traj.states, path, traj.is_bloch)
    return 0.5 / traj.grid.duration * float(np.dot(traj.grid.trapezoid_weights(), d))


def _check_square_pair(u, o):
    u = np.asarray(u, dtype=complex)
    o = np.asarray(o, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape != o.shape:
        raise DimensionError(f"need square matrices of equal size, got {u.shape} and {o.shape}")
    return u, o


def cost_gate_JO(u_tf, target) -> float:
    """``N^2 - |Tr(O^dagger U)|^2``, blind to a global phase of ``U``."""
    u, o = _check_square_pair(u_tf, target)
    n = u.shape[0]
    return float(n * n - abs(np.vdot(o, u)) ** 2)


def cost_gate_JO_phase(u_tf, target) -> float:
    """``|Tr(O^dagger U - 1)|^2``, sensitive to the global phase."""
    u, o = _check_square_pair(u_tf, target)
    n = u.shape[0]
    return float(abs(np.vdot(o, u) - n) ** 2)


def cost_superop_Jn(x_tf: Superoperator, target) -> float:
    """``sum |X_pqmj(tf) - O_pm conj(O_qj)|^2``."""
    o = np.asarray(target, dtype=complex)
    x = x_tf if isinstance(x_tf, Superoperator) else Superoperator(x_tf)
    if o.shape != (x.dim, x.dim):
        raise DimensionError(f"target shape {o.shape} does not match superoperator dim {x.dim}")
    return frobenius_norm_sq(x.matrix - np.kron(o, o.conj()))


# ensembles of initial states

def haar_pure_ensemble(dim: int, size: int = 128, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([random_pure_density(dim, rng) for _ in range(size)])


def bloch_ball_ensemble(size: int = 128, seed: int = 0) -> np.ndarray:
    """Qubit states uniform in the Bloch ball."""
    from .core import density_from_bloch
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((size, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.random(size) ** (1.0 / 3.0)
    return np.array([density_from_bloch(x * s) for x, s in zip(v, r)])


def first_order_dissipation_map(u_series, channels: Sequence[LindbladChannel], grid: TimeGrid) -> np.ndarray:
    """Matrix ``S`` with ``vec(rho~(tf) - rho0) = S vec(rho0)`` to first order in the dissipator.

    ``S = int_0^tf U^dagger D[U . U^dagger] U dt`` by trapezoid on the grid.
    """
    u = np.asarray(u_series, dtype=complex)
    if u.shape[0] != grid.n_nodes:
        raise DimensionError("need one propagator per grid node")
    n = u.shape[1]
    if not channels:
        return np.zeros((n * n, n * n), dtype=complex)
    d_mats = [dissipator_matrix(ch.L) for ch in channels]
    rates = np.array([ch.rate_at(grid.times) for ch in channels])  # (n_ch, n_nodes)
    w = grid.trapezoid_weights()
    out = np.zeros((n * n, n * n), dtype=complex)
    for k in range(grid.n_nodes):
        dk = sum(r * d for r, d in zip(rates[:, k], d_mats))
        fwd = np.kron(u[k], u[k].conj())
        back = np.kron(dagger(u[k]), u[k].T)
        out += w[k] * back @ dk @ fwd
    return out


def cost_dissipation_JD(u_series, channels: Sequence[LindbladChannel], ensemble, s_D: float, grid: TimeGrid) -> float:
    """Ensemble-averaged first-order dissipation cost ``s_D <<Tr[(rho~(tf) - rho0)^2]>>``."""
    ensemble = np.asarray(ensemble, dtype=complex)
    if ensemble.ndim != 3 or ensemble.shape[0] == 0:
        raise ContractError("the state ensemble must be a non-empty stack of density matrices")
    s = first_order_dissipation_map(u_series, channels, grid)
    n = ensemble.shape[1]
    deltas = (ensemble.reshape(len(ensemble), -1) @ s.T).reshape(-1, n, n)
    vals = np.einsum("kij,kji->k", deltas, deltas).real  # Tr(Delta^2); Delta is Hermitian
    return float(s_D * vals.mean())


def cost_test_JZ(propagate: Callable, field, target, Z: int, state_sampler: Callable | None = None,
                 seed: int = 0, dim: int | None = None) -> float:
    """``(1/Z) sum_j Tr[(rho_j(tf) - O rho_j O^dagger)^2]`` with the full kinetic solver.

    ``propagate(field, rho0)`` must return ``rho(tf)``. States come from
    ``state_sampler(rng)`` or, by default, Haar-random pure states.
    """
    if Z < 1:
        raise ContractError("need at least one test state")
    o = np.asarray(target, dtype=complex)
    rng = np.random.default_rng(seed)
    d = o.shape[0] if dim is None else dim
    total = 0.0
    for _ in range(Z):
        rho0 = state_sampler(rng) if state_sampler is not None else random_pure_density(d, rng)
        rho_f = np.asarray(propagate(field, rho0))
        diff = rho_f - o @ rho0 @ dagger(o)
        total += float(np.trace(diff @ diff).real)
    return total / Z


def computational_projector(m: int, indices: Sequence[int]) -> np.ndarray:
    p = np.zeros((m, m), dtype=complex)
    for i in indices:
        p[i, i] = 1.0
    return p


def chi_target_lifted(target, m: int, indices: Sequence[int]) -> np.ndarray:
    """Lifted operator ``conj(O) kron O`` of a gate acting on the computational subspace."""
    o = np.asarray(target, dtype=complex)
    full = np.zeros((m, m), dtype=complex)
    idx = list(indices)
    if o.shape != (len(idx), len(idx)):
        raise DimensionError("target size does not match the computational subspace")
    full[np.ix_(idx, idx)] = o
    return np.kron(full.conj(), full)


def cost_chi_distance(chi: ChiMatrix, chi_target, projector) -> float:
    """``||P chi_hat P - chi_hat_O||^2`` with ``P`` lifted to ``P kron P``.

    ``chi_target`` may be a ``ChiMatrix`` or an already-lifted matrix. The
    value lies in ``[0, 2 M_C^2]`` for completely positive trace-preserving
    maps, ``M_C = rank P``.
    """
    lifted = chi.lifted()
    target = chi_target.lifted() if isinstance(chi_target, ChiMatrix) else np.asarray(chi_target, dtype=complex)
    p = np.asarray(projector, dtype=complex)
    if lifted.shape != target.shape or p.shape[0] ** 2 != lifted.shape[0]:
        raise DimensionError("process matrices and projector live on different spaces")
    pp = np.kron(p, p)
    return frobenius_norm_sq(pp @ lifted @ pp - target)


@dataclass
class CostSpec:
    """Declarative cost description used by scenarios."""

    kind: str
    w1: float = 1.0
    w2: float = 0.0
    s_D: float = 1.0
    alpha: float | np.ndarray = 0.0
    target: object = None
    parts: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}; expected one of {COST_KINDS}")
        if self.kind == "state_transfer" and not np.isclose(self.w1 + self.w2, 1.0):
            raise ValueError("driving and trapping weights must satisfy w1 + w2 = 1")
        if np.any(np.asarray(self.alpha) < 0):
            raise ValueError("penalty weight alpha must be non-negative")


def cost_breakdown(terms: dict, seed: int | None = None) -> dict:
    """Composite cost report ``{total, terms, seed}``; the total is the plain sum of the terms."""
    clean = {k: float(v) for k, v in terms.items()}
    return {"total": float(sum(clean.values())), "terms": clean, "seed": seed}
