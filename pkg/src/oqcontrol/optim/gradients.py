"""Finite-difference gradients and first-variation propagator derivatives."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.linalg import expm, expm_frechet



def default_fd_step(params) -> np.ndarray:
    """``sqrt(machine eps) * max(1, |p|)`` per component."""
    p = np.asarray(params, dtype=float)
    return np.sqrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(p))


def finite_difference_gradient(cost: Callable, params, delta=None, scheme: str = "central") -> np.ndarray:
    """Gradient of ``cost`` by central (default) or one-sided forward differences."""
    p = np.asarray(params, dtype=float)
    step = default_fd_step(p) if delta is None else np.broadcast_to(np.asarray(delta, dtype=float), p.shape)
    if np.any(step <= 0):
        raise ValueError("finite-difference step must be positive")
    grad = np.empty_like(p)
    base = None
    if scheme == "forward":
        base = float(cost(p))
        if not np.isfinite(base):
            raise FloatingPointError("cost is not finite at the base point")
    elif scheme != "central":
        raise ValueError(f"unknown finite-difference scheme {scheme!r}")
    for i in range(p.size):
        e = np.zeros_like(p)
        e.flat[i] = step.flat[i]
        fp = float(cost(p + e))
        if scheme == "central":
            fm = float(cost(p - e))
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise FloatingPointError(f"cost is not finite near component {i}")
            grad.flat[i] = (fp - fm) / (2 * step.flat[i])
        else:
            if not np.isfinite(fp):
                raise FloatingPointError(f"cost is not finite near component {i}")
            grad.flat[i] = (fp - base) / step.flat[i]
    return grad


def directional_derivative(cost: Callable, params, direction, delta: float | None = None) -> float:
    """Central difference of ``cost`` along a unit-normalised direction."""
    p = np.asarray(params, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    h = np.sqrt(np.finfo(float).eps) * max(1.0, np.linalg.norm(p)) if delta is None else delta
    return (float(cost(p + h * d)) - float(cost(p - h * d))) / (2 * h)


def directional_check(cost: Callable, grad, params, n_dirs: int = 16, seed: int = 0, delta: float | None = None):
    """Compare ``grad . d`` with central differences on random unit directions.

    Returns ``(relative_l2_error, adjoint_values, fd_values)``.
    """
    rng = np.random.default_rng(seed)
    p = np.asarray(params, dtype=float)
    g = np.asarray(grad, dtype=float)
    adj, fd = [], []
    for _ in range(n_dirs):
        d = rng.standard_normal(p.shape)
        d /= np.linalg.norm(d)
        adj.append(float(g.reshape(-1) @ d.reshape(-1)))
        fd.append(directional_derivative(cost, p, d, delta))
    adj, fd = np.array(adj), np.array(fd)
    return float(np.linalg.norm(adj - fd) / np.linalg.norm(fd)), adj, fd


def piecewise_constant_segments(hamiltonians, dt: float) -> np.ndarray:
    """``V_k = exp(-i dt H(t_k))`` for a stack of node Hamiltonians."""
    return np.array([expm(-1j * dt * h) for h in np.asarray(hamiltonians, dtype=complex)])


def _product(segments, start: int, stop: int, n: int) -> np.ndarray:
    """``V_{stop-1} ... V_start`` (identity when empty)."""
    out = np.eye(n, dtype=complex)
    for k in range(start, stop):
        out = segments[k] @ out
    return out


def propagator_derivative(u_segments, hamiltonians, k: int, dh_deps, dt: float, n: int | None = None,
                          exact: bool = False) -> np.ndarray:
    """Derivative of ``U(t_n, 0)`` with respect to the control on segment ``k``.

    Segment ``j`` propagates ``[t_j, t_{j+1}]`` with ``H(t_j)``. The first-order form is
    ``U(t_n, t_{k+1}) (-i dt dH/deps) U(t_k, 0)``; ``exact=True`` replaces the
    middle factor by the Frechet derivative of the segment exponential.
    ``n`` defaults to the final node.
    """
    segs = np.asarray(u_segments, dtype=complex)
    n_seg = segs.shape[0]
    n = n_seg if n is None else n
    if not 0 <= k < n_seg:
        raise IndexError(f"control index {k} is outside the {n_seg} grid segments")
    dim = segs.shape[1]
    dh = np.asarray(dh_deps, dtype=complex)
    if k >= n:
        return np.zeros((dim, dim), dtype=complex)
    after = _product(segs, k + 1, n, dim)
    before = _product(segs, 0, k, dim)
    if exact:
        hk = np.asarray(hamiltonians, dtype=complex)[k]
        mid = expm_frechet(-1j * dt * hk, -1j * dt * dh, compute_expm=False)
    else:
        mid = -1j * dt * dh
    return after @ mid @ before
