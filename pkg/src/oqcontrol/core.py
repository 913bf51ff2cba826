"""Dense linear algebra for states, channels and process matrices.

Single-qubit matrices use the ordering ``{|1>, |0>}`` (index 0 is "up"), so
``sigma_z`` is ``diag(1, -1)`` and a Bloch vector with ``z = +1`` is the up
state. Superoperators are stored as rank-4 tensors ``X[i, j, r, s]`` acting as
``rho'_ij = X_ijrs rho_rs``; their matrix form is the row-major vectorisation
``vec(rho)[i * N + j] = rho[i, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = [
    "DimensionError",
    "ContractError",
    "IDENTITY2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULIS",
    "dagger",
    "is_hermitian",
    "is_unitary",
    "validate_density",
    "bloch_from_density",
    "density_from_bloch",
    "frobenius_inner",
    "frobenius_norm_sq",
    "kron",
    "partial_trace",
    "Superoperator",
    "superop_from_unitary",
    "KrausSet",
    "kraus_from_composite",
    "ChiMatrix",
    "matrix_unit_basis",
    "pauli_basis",
    "chi_from_map",
    "random_density",
    "random_pure_density",
    "random_unitary",
    "random_kraus",
]


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ContractError(ValueError):
    """An input violates a documented precondition."""


IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, atol=1e-12) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, dagger(a), atol=atol, rtol=0)


def is_unitary(u, atol=1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=atol, rtol=0)


def validate_density(rho, atol=1e-12, eig_tol=1e-10) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a density operator."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density operator must be square, got shape {rho.shape}")
    if not is_hermitian(rho, atol=atol):
        raise ContractError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ContractError(f"density operator trace is {np.trace(rho).real:.3e}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ContractError("density operator has a negative eigenvalue")
    return rho


def bloch_from_density(rho) -> np.ndarray:
    """Bloch vector ``(x, y, z)`` with ``rho = (1 + R.sigma) / 2``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(f"Bloch representation needs a 2x2 matrix, got {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def density_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise DimensionError(f"Bloch vector must have 3 components, got {r.shape}")
    if np.linalg.norm(r) > 1 + 1e-10:
        raise ContractError(f"Bloch vector length {np.linalg.norm(r):.6f} exceeds 1")
    return 0.5 * (IDENTITY2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def frobenius_inner(a, b) -> complex:
    """``Tr(A^dagger B)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    return complex(np.vdot(a, b))


def frobenius_norm_sq(a) -> float:
    """``Tr(A A^dagger)``, i.e. the sum of squared moduli."""
    a = np.asarray(a)
    return float(np.vdot(a, a).real)


def kron(*ops) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int] | int) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor-product order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(f"dims {dims} do not factorise a matrix of shape {m.shape}")
    keep = sorted({keep} if isinstance(keep, int) else set(keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    # trace from the highest index down so axis numbers stay valid
    for ax in reversed(range(n)):
        if ax in keep:
            continue
        cur = t.ndim // 2
        t = np.trace(t, axis1=ax, axis2=ax + cur)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


@dataclass(frozen=True)
class Superoperator:
    """Linear map ``rho_ij -> X_ijrs rho_rs`` on ``N x N`` matrices."""

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=complex)
        if t.ndim == 2:
            n = int(round(np.sqrt(t.shape[0])))
            t = t.reshape(n, n, n, n)
        if t.ndim != 4 or len(set(t.shape)) != 1:
            raise DimensionError(f"superoperator tensor must be N x N x N x N, got {t.shape}")
        object.__setattr__(self, "tensor", t)

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        n = self.dim
        return self.tensor.reshape(n * n, n * n)

    @classmethod
    def identity(cls, n: int) -> "Superoperator":
        return cls(np.eye(n * n, dtype=complex))

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.dim, self.dim):
            raise DimensionError(f"state shape {rho.shape} does not match superoperator dim {self.dim}")
        return np.einsum("ijrs,rs->ij", self.tensor, rho)

    def compose(self, other: "Superoperator") -> "Superoperator":
        """``self`` after ``other``."""
        return Superoperator(self.matrix @ other.matrix)

    def norm_sq(self) -> float:
        return frobenius_norm_sq(self.tensor)


def superop_from_unitary(u, atol=1e-10) -> Superoperator:
    """``X_ijrs = U_ir conj(U_js)``, so that ``X(rho) = U rho U^dagger``."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, atol=atol):
        raise ContractError("superop_from_unitary needs a unitary matrix")
    return Superoperator(np.kron(u, u.conj()))


class KrausSet:
    """Completely positive map ``rho -> sum_m K_m rho K_m^dagger``."""

    def __init__(self, operators, check=True, atol=1e-10):
        ops = [np.asarray(k, dtype=complex) for k in operators]
        if not ops:
            raise ContractError("a Kraus set needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(k.shape != shape for k in ops):
            raise DimensionError("Kraus operators must be square and share one shape")
        self.operators = ops
        if check and not self.is_trace_preserving(atol):
            raise ContractError("Kraus operators violate sum K^dagger K = identity")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness(self) -> np.ndarray:
        return sum(dagger(k) @ k for k in self.operators)

    def is_trace_preserving(self, atol=1e-10) -> bool:
        return np.allclose(self.completeness(), np.eye(self.dim), atol=atol, rtol=0)

    def apply(self, rho):
        rho = np.asarray(rho)
        return sum(k @ rho @ dagger(k) for k in self.operators)

    def __len__(self):
        return len(self.operators)

    def superoperator(self) -> Superoperator:
        return Superoperator(sum(np.kron(k, k.conj()) for k in self.operators))


def kraus_from_composite(u_total, rho_b, dim_s: int, dim_b: int, atol=1e-12) -> KrausSet:
    """Kraus operators ``K_mn = sqrt(p_n) <m|U|n>`` of the reduced system map.

    ``u_total`` acts on system (first factor) tensor bath; ``rho_b`` must be
    diagonal in the bath basis used to label ``|n>``.
    """
    u = np.asarray(u_total, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    if u.shape != (dim_s * dim_b, dim_s * dim_b):
        raise DimensionError(f"U_total shape {u.shape} != ({dim_s}*{dim_b})^2")
    if rho_b.shape != (dim_b, dim_b):
        raise DimensionError(f"rho_B shape {rho_b.shape} != ({dim_b}, {dim_b})")
    off = rho_b - np.diag(np.diag(rho_b))
    if np.abs(off).max(initial=0.0) > atol:
        raise ContractError("rho_B must be diagonal in the supplied bath basis")
    p = np.diag(rho_b).real
    if p.min() < -atol or abs(p.sum() - 1) > 1e-10:
        raise ContractError("rho_B diagonal is not a probability vector")
    blocks = u.reshape(dim_s, dim_b, dim_s, dim_b)  # [i, m, k, n] = <i m|U|k n>
    ops = [np.sqrt(max(p[n], 0.0)) * blocks[:, m, :, n] for m in range(dim_b) for n in range(dim_b)]
    return KrausSet(ops)


def matrix_unit_basis(m: int) -> list[np.ndarray]:
    """Orthonormal matrix units ``E_ij`` in row-major order."""
    basis = []
    for i in range(m):
        for j in range(m):
            e = np.zeros((m, m), dtype=complex)
            e[i, j] = 1.0
            basis.append(e)
    return basis


def pauli_basis() -> list[np.ndarray]:
    """``{1, sigma_x, sigma_y, sigma_z}`` (unnormalised)."""
    return [IDENTITY2.copy(), SIGMA_X.copy(), SIGMA_Y.copy(), SIGMA_Z.copy()]


def _lift(a, b):
    """Column-stacking superoperator of ``rho -> a rho b^dagger``."""
    return np.kron(b.conj(), a)


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix with ``E(rho) = sum_mn chi_mn A_m rho A_n^dagger``."""

    chi: np.ndarray
    basis: tuple

    def apply(self, rho):
        rho = np.asarray(rho)
        out = np.zeros_like(rho, dtype=complex)
        for m, am in enumerate(self.basis):
            for n, an in enumerate(self.basis):
                c = self.chi[m, n]
                if c != 0:
                    out += c * am @ rho @ dagger(an)
        return out

    def lifted(self) -> np.ndarray:
        """``chi_hat = sum_mn (A_n^* kron A_m) chi_mn`` (column-stacking superoperator)."""
        b = np.asarray(self.basis)
        d = b.shape[1]
        return np.einsum("mn,npq,mij->piqj", self.chi, b.conj(), b).reshape(d * d, d * d)


@lru_cache(maxsize=16)
def _chi_solver(key: bytes, m: int):
    basis = np.frombuffer(key, dtype=complex).reshape(m * m, m, m)
    # column (a, b) of the design is vec(A_b^* kron A_a)
    design = np.einsum("bpq,aij->piqjab", basis.conj(), basis).reshape(m ** 4, m ** 4)
    if np.linalg.matrix_rank(design) < m ** 4:
        raise ContractError("operator basis is not complete (rank deficient)")
    return lu_factor(design)


def chi_from_map(apply_map: Callable[[np.ndarray], np.ndarray], basis=None, dim: int | None = None) -> ChiMatrix:
    """Process matrix of a linear map in a complete operator basis.

    The map is probed on the matrix units, giving its superoperator, which is
    then expanded on the lifted basis ``A_n^* kron A_m``.
    """
    if basis is None:
        if dim is None:
            raise ContractError("need either an operator basis or the dimension")
        basis = matrix_unit_basis(dim)
    basis = tuple(np.asarray(b, dtype=complex) for b in basis)
    m = basis[0].shape[0]
    if len(basis) != m * m:
        raise ContractError(f"operator basis has {len(basis)} elements, a complete basis needs {m * m}")

    # column-stacking superoperator: column (r + s*m) holds vec_col(E(|r><s|))
    sup = np.zeros((m * m, m * m), dtype=complex)
    for r in range(m):
        for s in range(m):
            e = np.zeros((m, m), dtype=complex)
            e[r, s] = 1.0
            sup[:, r + s * m] = np.asarray(apply_map(e)).reshape(-1, order="F")

    key = np.ascontiguousarray(np.asarray(basis)).tobytes()
    coeffs = lu_solve(_chi_solver(key, m), sup.reshape(-1))
    return ChiMatrix(coeffs.reshape(m * m, m * m), basis)


# random states and maps, mostly for tests and ensembles


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_density(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a Ginibre matrix (Hilbert-Schmidt measure for full rank)."""
    k = n if rank is None else rank
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_kraus(n: int, n_ops: int, rng: np.random.Generator) -> KrausSet:
    """Random CPTP map from a Haar isometry ``C^n -> C^n kron C^n_ops``."""
    u = random_unitary(n * n_ops, rng)
    v = u[:, :n]
    ops = [v[k * n:(k + 1) * n, :] for k in range(n_ops)]
    return KrausSet(ops)
