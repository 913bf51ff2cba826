"""Discrete adjoint gradients.

Each problem owns one forward discretisation and differentiates exactly that
discretisation, so the adjoint gradient agrees with finite differences of the
same cost to rounding and truncation of the difference quotient.

* ``LindbladStateProblem``: Crank-Nicolson on ``vec(rho)``, controls on nodes.
* ``SpinBosonStateProblem``: the implicit-trapezoid Volterra solver of the
  spin-boson Bloch equations, controls on nodes.
* ``ExponentialGateProblem``: fourth-order commutator-free exponential stepping
  of ``dY/dt = G(t) Y`` (unitaries or superoperators) with the gradient taken
  through Frechet derivatives of the step exponentials.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm, expm_frechet

from ..core import ContractError, DimensionError
from ..dynamics.grid import TimeGrid
from ..dynamics.propagators import (
    CF4_WEIGHTS,
    GAUSS_NODES,
    IntegrationError,
    LindbladChannel,
    dissipator_matrix,
    liouvillian_matrix,
)
from ..dynamics.spin_boson import DiscreteBlochModel, SpinBosonModel, cumulative_field


def _desired(path, grid: TimeGrid, shape):
    if path is None:
        return None
    if callable(path):
        return np.array([path(t) for t in grid.times])
    p = np.asarray(path)
    if p.shape == shape:
        return np.broadcast_to(p, (grid.n_nodes,) + shape)
    if p.shape != (grid.n_nodes,) + shape:
        raise DimensionError("desired path must hold one state per grid node")
    return p


def _check_weights(w1, w2, path):
    if w2 != 0 and path is None:
        raise ContractError("a desired path is required when w2 > 0")


class LindbladStateProblem:
    """State transfer ``rho0 -> target`` under ``H0 + sum_c eps_c H_c`` plus constant-rate channels.

    Cost, with trapezoid weights ``w_n``:
    ``w1/2 ||rho_N - target||^2 + w2/(2T) sum w_n ||rho_n - rho_D||^2 + 1/2 sum w_n alpha eps_n^2``.
    """

    def __init__(self, h0, control_ops: Sequence, channels: Sequence[LindbladChannel], grid: TimeGrid,
                 rho0, target, w1: float = 1.0, w2: float = 0.0, desired_path=None, alpha=0.0):
        _check_weights(w1, w2, desired_path)
        self.h0 = np.asarray(h0, dtype=complex)
        self.dim = self.h0.shape[0]
        self.control_ops = [np.asarray(o, dtype=complex) for o in control_ops]
        if not self.control_ops:
            raise ContractError("need at least one control operator")
        for ch in channels:
            if not ch.constant:
                raise ContractError("the Crank-Nicolson adjoint supports constant rates only")
        self.grid = grid
        self.rho0 = np.asarray(rho0, dtype=complex)
        self.target = np.asarray(target, dtype=complex)
        self.w1, self.w2 = float(w1), float(w2)
        self.alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (grid.n_nodes,)).copy()
        self.path = _desired(desired_path, grid, self.rho0.shape)
        self.a0 = liouvillian_matrix(self.h0) + sum(
            (ch.rate * dissipator_matrix(ch.L) for ch in channels), np.zeros((self.dim ** 2,) * 2, complex))
        self.a_ctrl = [liouvillian_matrix(o) for o in self.control_ops]
        self.tw = grid.trapezoid_weights()

    @property
    def n_controls(self) -> int:
        return len(self.control_ops)

    def _eps(self, eps):
        e = np.asarray(eps, dtype=float).reshape(self.n_controls, self.grid.n_nodes)
        return e

    def _generator(self, e, n):
        a = self.a0.copy()
        for c, ac in enumerate(self.a_ctrl):
            a += e[c, n] * ac
        return a

    def _step_generators(self, e):
        """Generator of every step at the step-averaged control, ``abar_n`` for ``n -> n + 1``."""
        ebar = 0.5 * (e[:, 1:] + e[:, :-1])
        return [self._generator(ebar, n) for n in range(self.grid.n_steps)]

    def forward(self, eps) -> np.ndarray:
        """Vectorised states on every node, shape ``(n_nodes, dim^2)``.

        Crank-Nicolson with the step-averaged generator,
        ``(1 - h/2 abar_n) x_{n+1} = (1 + h/2 abar_n) x_n``.
        """
        e = self._eps(eps)
        h = self.grid.h
        eye = np.eye(self.dim ** 2)
        x = np.zeros((self.grid.n_nodes, self.dim ** 2), dtype=complex)
        x[0] = self.rho0.reshape(-1)
        for n, a in enumerate(self._step_generators(e)):
            x[n + 1] = np.linalg.solve(eye - 0.5 * h * a, (eye + 0.5 * h * a) @ x[n])
        return x

    def states(self, eps) -> np.ndarray:
        return self.forward(eps).reshape(-1, self.dim, self.dim)

    def _state_terms(self, x):
        """Cost from the states and ``g_n = 2 dJ/d conj(x_n)``."""
        n_nodes = self.grid.n_nodes
        g = np.zeros_like(x)
        d = x[-1] - self.target.reshape(-1)
        j = 0.5 * self.w1 * float(np.vdot(d, d).real)
        g[-1] += self.w1 * d
        if self.w2 != 0:
            dp = x - self.path.reshape(n_nodes, -1)
            c = self.w2 / self.grid.duration
            j += 0.5 * c * float(np.dot(self.tw, np.sum(np.abs(dp) ** 2, axis=1)))
            g += c * self.tw[:, None] * dp
        return j, g

    def cost(self, eps) -> float:
        e = self._eps(eps)
        j, _ = self._state_terms(self.forward(e))
        return j + 0.5 * float(np.sum(self.tw * self.alpha * np.sum(e * e, axis=0)))

    def _backward(self, e, x, g):
        h = self.grid.h
        eye = np.eye(self.dim ** 2)
        abar = self._step_generators(e)
        mu = np.zeros_like(x)  # mu[n] multiplies the constraint that produces x[n]
        nxt = np.zeros(self.dim ** 2, dtype=complex)
        for m in range(self.grid.n_nodes - 1, 0, -1):
            rhs = -g[m]
            if m < self.grid.n_nodes - 1:
                rhs = rhs + (eye + 0.5 * h * abar[m]).conj().T @ nxt
            mu[m] = np.linalg.solve((eye - 0.5 * h * abar[m - 1]).conj().T, rhs)
            nxt = mu[m]
        if not np.all(np.isfinite(mu)):
            raise IntegrationError("co-state diverged during backward integration")
        return mu

    def gradient(self, eps) -> np.ndarray:
        e = self._eps(eps)
        x = self.forward(e)
        _, g = self._state_terms(x)
        mu = self._backward(e, x, g)
        h = self.grid.h
        grad = (self.tw * self.alpha * e).copy()
        for c, ac in enumerate(self.a_ctrl):
            # step n depends on eps_n and eps_{n+1} with weight 1/2 each
            t = np.einsum("ki,ki->k", mu[1:].conj(), (x[1:] + x[:-1]) @ ac.T).real
            grad[c, :-1] -= 0.25 * h * t
            grad[c, 1:] -= 0.25 * h * t
        return grad

    def costate(self, eps) -> np.ndarray:
        """Multipliers ``mu_n`` reshaped to matrices (``mu_0`` is zero by construction)."""
        e = self._eps(eps)
        x = self.forward(e)
        _, g = self._state_terms(x)
        return self._backward(e, x, g).reshape(-1, self.dim, self.dim)


class SpinBosonStateProblem:
    """Bloch-vector state transfer for the driven spin-boson model.

    Cost: ``w1/2 * |R_N - R_T|^2 / 2 + w2/(2T) sum w_n |R_n - R_D|^2 / 2 + 1/2 sum w_n alpha eps_n^2``,
    i.e. the Frobenius form of the density-matrix cost.
    """

    def __init__(self, model: SpinBosonModel, grid: TimeGrid, R0, target, w1: float = 1.0, w2: float = 0.0,
                 desired_path=None, alpha=0.0):
        _check_weights(w1, w2, desired_path)
        self.model = model
        self.grid = grid
        self.disc = DiscreteBlochModel(model, grid)
        self.R0 = np.asarray(R0, dtype=float)
        self.target = np.asarray(target, dtype=float)
        self.w1, self.w2 = float(w1), float(w2)
        self.alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (grid.n_nodes,)).copy()
        self.path = _desired(desired_path, grid, (3,))
        self.tw = grid.trapezoid_weights()

    def forward(self, eps):
        return self.disc.solve(self.R0, np.asarray(eps, dtype=float).reshape(-1))

    def _state_terms(self, R):
        g = np.zeros_like(R)
        d = R[-1] - self.target
        j = 0.25 * self.w1 * float(d @ d)
        g[-1] += 0.5 * self.w1 * d
        if self.w2 != 0:
            dp = R - self.path
            c = self.w2 / self.grid.duration
            j += 0.25 * c * float(np.dot(self.tw, np.sum(dp * dp, axis=1)))
            g += 0.5 * c * self.tw[:, None] * dp
        return j, g

    def cost(self, eps) -> float:
        e = np.asarray(eps, dtype=float).reshape(-1)
        R, _, _ = self.forward(e)
        j, _ = self._state_terms(R)
        return j + 0.5 * float(np.sum(self.tw * self.alpha * e * e))

    def gradient(self, eps) -> np.ndarray:
        e = np.asarray(eps, dtype=float).reshape(-1)
        disc = self.disc
        h = disc.h
        n_nodes = self.grid.n_nodes
        N = n_nodes - 1
        R, _, _ = disc.solve(self.R0, e)
        _, dJdR = self._state_terms(R)
        eps0 = self.model.eps0
        kc, ks = disc.kc, disc.ks
        E = cumulative_field(e, h)
        idx = np.arange(n_nodes)
        f = eps0 * disc.dt + np.subtract.outer(E, E)  # f[n, j] = f(t_n, t_j)
        lower = disc.lag >= 0
        wmat = np.where(lower, h, 0.0)
        wmat[:, 0] = 0.5 * h
        wmat[idx, idx] = 0.5 * h
        wmat[0, 0] = 0.0
        kc_mat = np.where(lower, kc[np.clip(disc.lag, 0, None)], 0.0)
        ks_mat = np.where(lower, ks[np.clip(disc.lag, 0, None)], 0.0)
        rot1 = disc.rotation(1.0)
        kd = -kc[0] * 0.5 * h * np.diag([0.0, 1.0, 1.0])  # diagonal end of the history trapezoid
        ebar = eps0 + 0.5 * (e[1:] + e[:-1])  # step-averaged rotation frequency, step n -> n + 1
        eye = np.eye(3)
        mu = np.zeros((n_nodes + 1, 3))  # mu[0] and mu[N+1] stay zero
        nu = np.zeros((n_nodes, 3))
        for m in range(N, 0, -1):
            hist = np.zeros(3)
            rhs = mu[m + 1] - dJdR[m] + 0.5 * h * kd.T @ mu[m + 1]
            if m < N:
                rhs += 0.5 * h * disc.rotation(ebar[m]).T @ mu[m + 1]
                w_col = wmat[m + 1:, m]
                kk = kc_mat[m + 1:, m]
                hist[1] = -np.dot(w_col * kk, nu[m + 1:, 1])
                hist[2] = -np.dot(w_col * kk * np.cos(f[m + 1:, m]), nu[m + 1:, 2])
            lhs = eye - 0.5 * h * (disc.rotation(ebar[m - 1]) + kd).T
            mu[m] = np.linalg.solve(lhs, rhs + hist)
            nu[m] = 0.5 * h * (mu[m] + mu[m + 1])
        nu[0] = 0.5 * h * mu[1]
        if not np.all(np.isfinite(mu)):
            raise IntegrationError("co-state diverged during backward integration")
        grad = self.tw * self.alpha * e
        # rotation with the averaged field: d r_n / d eps_k = -(h/4) rot(1) (R_n + R_{n-1}), k = n-1, n
        s_rot = np.zeros(n_nodes + 1)
        s_rot[1:N + 1] = np.einsum("ni,ij,nj->n", mu[1:N + 1], rot1, R[1:] + R[:-1])
        grad -= 0.25 * h * (s_rot[:-1] + s_rot[1:])
        # phase dependence: dF_nz/df_nj = w (kc sin f R_jz - ks cos f), strictly below the diagonal
        s = wmat * (kc_mat * np.sin(f) * R[None, :, 2] - ks_mat * np.cos(f))
        a = np.tril(nu[:, 2:3] * s, k=-1)
        # d(E_n - E_j)/d eps_k = h for j < k < n, h/2 at k = j and at k = n
        strict_prefix = np.zeros_like(a)
        strict_prefix[:, 1:] = np.cumsum(a, axis=1)[:, :-1]  # sum_{j < k} a[n, j]
        col_tail = np.cumsum(strict_prefix[::-1], axis=0)[::-1]  # sum over rows n >= r
        interior = np.zeros(n_nodes)
        interior[:-1] = np.diagonal(col_tail, offset=-1)  # sum_{n > k} sum_{j < k} a[n, j]
        at_j = np.sum(np.tril(a, k=-1), axis=0)  # sum_{n > k} a[n, k]
        at_n = np.sum(a, axis=1)  # sum_{j < k} a[k, j]
        dphase = h * interior + 0.5 * h * (at_j + at_n)
        grad -= dphase
        return grad


def _cf4_exponents(drift, generators, coeffs_a, coeffs_b, h):
    """Step exponents ``h (a1 G(t1) + a2 G(t2))`` and its swap for every step."""
    a1, a2 = CF4_WEIGHTS
    g1 = drift[None] + np.tensordot(coeffs_a, generators, axes=(1, 0))
    g2 = drift[None] + np.tensordot(coeffs_b, generators, axes=(1, 0))
    return h * (a1 * g1 + a2 * g2), h * (a2 * g1 + a1 * g2)


class ExponentialGateProblem:
    """``dY/dt = (G0 + sum_m c_m(t; p) G_m) Y`` with ``Y(t0) = I``.

    ``coefficients(p, t)`` returns the ``(len(t), M)`` coefficient array and
    ``coefficient_jacobian(p, t)`` its ``(len(t), M, P)`` derivative. The
    terminal cost ``terminal(Y)`` returns ``(J, Lambda)`` with
    ``dJ = Re <Lambda, dY>``.
    """

    def __init__(self, drift, generators, grid: TimeGrid, coefficients: Callable, coefficient_jacobian: Callable,
                 terminal: Callable):
        self.drift = np.asarray(drift, dtype=complex)
        self.generators = np.asarray(generators, dtype=complex)
        self.grid = grid
        self.coefficients = coefficients
        self.coefficient_jacobian = coefficient_jacobian
        self.terminal = terminal
        h = grid.h
        starts = grid.times[:-1]
        self.t_a = starts + GAUSS_NODES[0] * h
        self.t_b = starts + GAUSS_NODES[1] * h

    def _exponents(self, p):
        return _cf4_exponents(self.drift, self.generators, self.coefficients(p, self.t_a),
                              self.coefficients(p, self.t_b), self.grid.h)

    def propagate(self, p, final_only: bool = True):
        xa, xb = self._exponents(p)
        y = np.eye(self.drift.shape[0], dtype=complex)
        out = [y]
        for k in range(len(xa)):
            y = expm(xa[k]) @ (expm(xb[k]) @ y)
            out.append(y)
        return out[-1] if final_only else np.array(out)

    def cost(self, p) -> float:
        return float(self.terminal(self.propagate(p))[0])

    def value_and_gradient(self, p):
        p = np.asarray(p, dtype=float)
        xa, xb = self._exponents(p)
        n = len(xa)
        ea = np.array([expm(x) for x in xa])
        eb = np.array([expm(x) for x in xb])
        ys = [np.eye(self.drift.shape[0], dtype=complex)]
        for k in range(n):
            ys.append(ea[k] @ (eb[k] @ ys[k]))
        j, lam = self.terminal(ys[-1])
        a1, a2 = CF4_WEIGHTS
        h = self.grid.h
        n_gen = len(self.generators)
        # sensitivities of J to the coefficients at both Gauss nodes of every step
        sa = np.zeros((n, n_gen))
        sb = np.zeros((n, n_gen))
        for k in range(n - 1, -1, -1):
            mid = eb[k] @ ys[k]
            ma = expm_frechet(xa[k].conj().T, lam @ mid.conj().T, compute_expm=False)
            mb = expm_frechet(xb[k].conj().T, ea[k].conj().T @ lam @ ys[k].conj().T, compute_expm=False)
            ra = np.einsum("ij,mij->m", ma.conj(), self.generators).real
            rb = np.einsum("ij,mij->m", mb.conj(), self.generators).real
            sa[k] = h * (a1 * ra + a2 * rb)
            sb[k] = h * (a2 * ra + a1 * rb)
            lam = eb[k].conj().T @ (ea[k].conj().T @ lam)
        ja = self.coefficient_jacobian(p, self.t_a)
        jb = self.coefficient_jacobian(p, self.t_b)
        grad = np.einsum("km,kmp->p", sa, ja) + np.einsum("km,kmp->p", sb, jb)
        return float(j), grad

    def gradient(self, p) -> np.ndarray:
        return self.value_and_gradient(p)[1]


def adjoint_gradient_markovian(problem: LindbladStateProblem, eps) -> np.ndarray:
    """Gradient of the Crank-Nicolson state-transfer cost with respect to node controls."""
    return problem.gradient(eps)


def adjoint_gradient_nonmarkovian_linear(problem: SpinBosonStateProblem, eps) -> np.ndarray:
    """Gradient of the spin-boson cost with respect to node controls."""
    return problem.gradient(eps)
