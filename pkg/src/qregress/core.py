"""Dense complex linear algebra and quantum-state primitives.

Qubit ordering is big-endian throughout: qubit 0 is the most significant bit
of a computational-basis index, and the first Kronecker factor acts on the
lowest-numbered qubits.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np
from scipy.stats import unitary_group

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
PURE_NORM_TOL = 1e-12

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)


class InvalidStateError(ValueError):
    """A matrix or vector violates the density-operator or pure-state invariants."""


def n_qubits_for_dim(dim: int) -> int:
    """Number of qubits of a register with Hilbert-space dimension ``dim``."""
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def tensor_product(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of the arguments, first factor most significant."""
    if not ops:
        raise ValueError("tensor_product needs at least one operand")
    for op in ops:
        if not np.all(np.isfinite(op)):
            raise ValueError("tensor_product operands must be finite")
    return reduce(np.kron, ops)


def tensor_power(op: np.ndarray, copies: int) -> np.ndarray:
    if copies < 1:
        raise ValueError("copies must be >= 1")
    return tensor_product(*([op] * copies))


def ket_to_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def check_pure(psi: np.ndarray) -> np.ndarray:
    """Validate a pure state vector and return it as a complex array."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n_qubits_for_dim(psi.size)
    if not np.all(np.isfinite(psi)):
        raise InvalidStateError("amplitudes must be finite")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > PURE_NORM_TOL:
        raise InvalidStateError(f"squared norm {norm2!r} differs from 1")
    return psi


def check_density(rho: np.ndarray) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises
    ------
    InvalidStateError
        If the matrix is not square with power-of-two dimension, not Hermitian
        to 1e-10 entrywise, not of unit trace to 1e-10, or has an eigenvalue
        below -1e-9.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    try:
        n_qubits_for_dim(rho.shape[0])
    except ValueError as exc:
        raise InvalidStateError(str(exc)) from None
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix entries must be finite")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr!r} differs from 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -PSD_TOL:
        raise InvalidStateError(f"minimum eigenvalue {lam_min!r} is negative")
    return rho


def is_density(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except InvalidStateError:
        return False
    return True


@dataclass(frozen=True)
class HermitianEigen:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(a: np.ndarray) -> HermitianEigen:
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianEigen(w, v)


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced state on the qubits listed in ``keep`` (kept in ascending order)."""
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_for_dim(rho.shape[0])
    keep = sorted(set(int(q) for q in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid qubit set {keep} for {n} qubits")
    t = rho.reshape([2] * (2 * n))
    current = n
    for q in reversed(range(n)):
        if q in keep:
            continue
        t = np.trace(t, axis1=q, axis2=q + current)
        current -= 1
    d = 2 ** len(keep)
    return t.reshape(d, d)


_PARTY_INDEX = {"first_qubit": 0, "second_qubit": 1}


def partial_transpose(rho: np.ndarray, party: str = "second_qubit") -> np.ndarray:
    """Partial transpose of a two-qubit operator on one party."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("partial_transpose is defined for two-qubit operators")
    if party not in _PARTY_INDEX:
        raise ValueError(f"party must be one of {sorted(_PARTY_INDEX)}")
    t = rho.reshape(2, 2, 2, 2)
    if _PARTY_INDEX[party] == 1:
        t = t.transpose(0, 3, 2, 1)
    else:
        t = t.transpose(2, 1, 0, 3)
    return t.reshape(4, 4)


def negativity(rho: np.ndarray) -> float:
    """Negativity ``||rho^{T_B}||_1 - 1``, which equals 1 for a Bell state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("negativity is defined for two-qubit states")
    lam_min = np.linalg.eigvalsh(partial_transpose(rho))[0]
    return float(2.0 * max(-lam_min, 0.0))


# eigenvalues below this are treated as exact zeros inside square roots
_SQRT_CLAMP = 1e-14
_SUPPORT_TOL = 1e-12


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.where(w > _SQRT_CLAMP, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, tau: np.ndarray) -> float:
    """Root fidelity Tr sqrt(sqrt(rho) tau sqrt(rho))."""
    rho = np.asarray(rho, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    if rho.shape != tau.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {tau.shape}")
    wr, vr = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    wt, vt = np.linalg.eigh(0.5 * (tau + tau.conj().T))
    keep_r = wr > _SUPPORT_TOL * wr[-1]
    keep_t = wt > _SUPPORT_TOL * wt[-1]
    # work in the support of the lower-rank state: round-off eigenvalues outside
    # it would otherwise add ~1e-8 each after the square root
    if keep_t.sum() < keep_r.sum():
        wr, vr, keep_r, tau = wt, vt, keep_t, rho
    v = vr[:, keep_r] * np.sqrt(wr[keep_r])
    m = v.conj().T @ tau @ v
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    w = np.where(w > _SQRT_CLAMP**2, w, 0.0)
    return float(min(np.sum(np.sqrt(w)), 1.0))


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.vdot(rho, rho)))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Real Bloch vector (r_x, r_y, r_z) of a single-qubit operator."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("Bloch vectors are defined for single qubits")
    return np.array([np.trace(rho @ p).real for p in PAULIS[1:]])


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def haar_random_pure(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed pure state from a normalized complex Gaussian vector."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    dim = 2**n_qubits
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_mixed_two_qubit(rng: np.random.Generator) -> np.ndarray:
    """Ginibre (Hilbert-Schmidt) random two-qubit state G G^dag / Tr(G G^dag)."""
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)
