"""Trainable observables H(x, theta) realized by a circuit and a partial measurement.

The input state (optionally extended by ancillas in |0>) is propagated by
U(theta) and the last ``measured + ancillas`` qubits are read out in the
computational basis.  Outcome i carries the eigenvalue ``x[i]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import AnsatzSpec, apply_circuit, build_unitary, param_count

PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class ObservableSpec:
    """Measurement layout of a trainable observable.

    Parameters
    ----------
    n_qubits : int
        Qubits of the input state, counting all copies.
    measured : int
        Number of trailing input qubits that are read out.
    ancillas : int
        Ancilla qubits appended in |0> (Naimark extension); all are read out.
    ansatz : AnsatzSpec
        Circuit acting on ``n_qubits + ancillas`` qubits.
    """

    n_qubits: int
    measured: int
    ancillas: int = 0
    ansatz: AnsatzSpec = field(default=None)

    def __post_init__(self):
        if self.ansatz is None:
            object.__setattr__(self, "ansatz", AnsatzSpec(self.n_qubits + self.ancillas, 0, "hea"))
        if self.n_qubits < 1 or self.ancillas < 0:
            raise ValueError("n_qubits must be >= 1 and ancillas >= 0")
        if not 0 <= self.measured <= self.n_qubits:
            raise ValueError(f"measured must lie in [0, {self.n_qubits}]")
        if self.measured + self.ancillas < 1:
            raise ValueError("at least one qubit must be measured")
        if self.ansatz.n_qubits != self.total_qubits:
            raise ValueError(
                f"ansatz acts on {self.ansatz.n_qubits} qubits, expected {self.total_qubits}")

    @property
    def total_qubits(self) -> int:
        return self.n_qubits + self.ancillas

    @property
    def readout_qubits(self) -> int:
        return self.measured + self.ancillas

    @property
    def n_outcomes(self) -> int:
        return 2**self.readout_qubits

    @property
    def n_params(self) -> int:
        return param_count(self.ansatz)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "measured": self.measured,
                "ancillas": self.ancillas, "ansatz": self.ansatz.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ObservableSpec":
        return cls(n_qubits=int(data["n_qubits"]), measured=int(data["measured"]),
                   ancillas=int(data.get("ancillas", 0)), ansatz=AnsatzSpec.from_dict(data["ansatz"]))


def state_factor(state: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Columns A with ``rho = A A^dag``; a 1-d input is treated as a pure state."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return state.reshape(-1, 1)
    w, v = np.linalg.eigh(0.5 * (state + state.conj().T))
    keep = w > tol
    if not np.any(keep):
        raise ValueError("state has no positive eigenvalue")
    return v[:, keep] * np.sqrt(w[keep])


def with_ancillas(columns: np.ndarray, ancillas: int) -> np.ndarray:
    """Append ancillas in |0> to every column (ancillas become the last qubits)."""
    if ancillas == 0:
        return columns
    dim, cols = columns.shape
    out = np.zeros((dim, 2**ancillas, cols), dtype=complex)
    out[:, 0, :] = columns
    return out.reshape(dim * 2**ancillas, cols)


@dataclass
class StateBatch:
    """Concatenated square-root factors of several states.

    ``columns[:, starts[j]:starts[j+1]]`` belongs to state j.
    """

    columns: np.ndarray
    starts: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.starts)

    @classmethod
    def from_states(cls, states: Sequence[np.ndarray], ancillas: int = 0) -> "StateBatch":
        factors = [state_factor(s) for s in states]
        sizes = [f.shape[1] for f in factors]
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)
        columns = with_ancillas(np.concatenate(factors, axis=1), ancillas)
        return cls(columns=columns, starts=starts)


def readout_marginals(spec: ObservableSpec, propagated: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Outcome probabilities (n_states x n_outcomes) from propagated columns."""
    k = spec.n_outcomes
    weights = np.abs(propagated.reshape(-1, k, propagated.shape[1])) ** 2
    per_column = weights.sum(axis=0)
    return np.add.reduceat(per_column, starts, axis=1).T


def batch_probabilities(spec: ObservableSpec, theta, batch: StateBatch) -> np.ndarray:
    propagated = apply_circuit(spec.ansatz, theta, batch.columns)
    return readout_marginals(spec, propagated, batch.starts)


def _input_dim_check(spec: ObservableSpec, rho: np.ndarray) -> None:
    if rho.shape[0] != 2**spec.n_qubits:
        raise ValueError(f"state dimension {rho.shape[0]} does not match {spec.n_qubits} qubits")


def clean_distribution(p: np.ndarray) -> np.ndarray:
    """Clamp round-off negatives and renormalize along the last axis."""
    p = np.where(p < 0, 0.0, p)
    return p / p.sum(axis=-1, keepdims=True)


def outcome_probabilities(spec: ObservableSpec, theta, rho: np.ndarray) -> np.ndarray:
    """Distribution of the readout for one input state (matrix or ket)."""
    rho = np.asarray(rho, dtype=complex)
    _input_dim_check(spec, rho)
    p = batch_probabilities(spec, theta, StateBatch.from_states([rho], spec.ancillas))[0]
    if np.min(p) < -PROB_CLAMP:
        raise ValueError("negative probability beyond round-off")
    return clean_distribution(p)


def _check_x(spec: ObservableSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != spec.n_outcomes:
        raise ValueError(f"expected {spec.n_outcomes} eigenvalues, got {x.size}")
    return x


def expectation(spec: ObservableSpec, x, theta, rho) -> float:
    x = _check_x(spec, x)
    return float(x @ outcome_probabilities(spec, theta, rho))


def variance(spec: ObservableSpec, x, theta, rho) -> float:
    x = _check_x(spec, x)
    p = outcome_probabilities(spec, theta, rho)
    mean = x @ p
    return float(max((x**2) @ p - mean**2, 0.0))


def readout_projector(spec: ObservableSpec, outcome: int) -> np.ndarray:
    """Diagonal projector I (x) |i><i| on the full register (as a 0/1 vector)."""
    k = spec.n_outcomes
    diag = np.zeros((2**spec.total_qubits // k, k))
    diag[:, outcome] = 1.0
    return diag.reshape(-1)


def observable_matrix(spec: ObservableSpec, x, theta) -> np.ndarray:
    """Hermitian ``sum_i x_i U^dag (I (x) |i><i|) U`` on the extended register."""
    x = _check_x(spec, x)
    u = build_unitary(spec.ansatz, theta)
    diag = np.tile(x, 2**spec.total_qubits // spec.n_outcomes)
    h = (u.conj().T * diag) @ u
    return 0.5 * (h + h.conj().T)


def induced_povm(spec: ObservableSpec, theta) -> np.ndarray:
    """POVM elements on the input space, shape (n_outcomes, d, d).

    The projectors ``U^dag (I (x) |i><i|) U`` are compressed onto the block
    where the ancillas are in |0>.
    """
    u = build_unitary(spec.ansatz, theta)
    d = 2**spec.n_qubits
    # columns of U restricted to ancilla |0>: isometry from the input space
    iso = u.reshape(u.shape[0], d, 2**spec.ancillas)[:, :, 0]
    k = spec.n_outcomes
    rows = iso.reshape(-1, k, d)
    return np.einsum("aki,akj->kij", rows.conj(), rows)


def povm_observable(povm: np.ndarray, x) -> np.ndarray:
    """First moment operator ``sum_i x_i E_i`` of a POVM."""
    return np.einsum("k,kij->ij", np.asarray(x, dtype=float), povm)


# --- shot sampling ----------------------------------------------------------

@dataclass(frozen=True)
class ShotEstimate:
    estimate: float
    counts: np.ndarray
    variance: float


def counts_from_uniforms(p: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Multinomial counts by inverse-CDF lookup on a cumulative table.

    ``p`` has shape (n_dist, K) and ``uniforms`` shape (n_dist, mu); row j of
    the result counts how many of the uniforms of row j fall in each bin.
    Reusing the same uniforms for nearby ``p`` gives common random numbers.
    """
    p = clean_distribution(np.atleast_2d(p))
    n_dist, k = p.shape
    cdf = np.cumsum(p, axis=1)
    cdf[:, -1] = 1.0
    offsets = np.arange(n_dist)[:, None]
    # rows are stacked on disjoint unit intervals so one searchsorted serves all
    idx = np.searchsorted((cdf + offsets).ravel(), (uniforms + offsets).ravel(), side="right")
    idx = np.minimum(idx, n_dist * k - 1)
    return np.bincount(idx, minlength=n_dist * k).reshape(n_dist, k)


def sample_shots(p: np.ndarray, x, mu: int, rng: np.random.Generator) -> ShotEstimate:
    """Estimate ``sum_i x_i p_i`` from ``mu`` simulated measurement outcomes."""
    if mu < 1:
        raise ValueError("mu must be >= 1")
    x = np.asarray(x, dtype=float)
    counts = counts_from_uniforms(np.asarray(p, dtype=float), rng.random((1, mu)))[0]
    freq = counts / mu
    est = float(x @ freq)
    return ShotEstimate(estimate=est, counts=counts, variance=float((x**2) @ freq - est**2))


# --- measurement objects -----------------------------------------------------

class Measurement:
    """A readout with real outcome values; subclasses supply ``probabilities``."""

    outcomes: np.ndarray

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean(self, rho) -> float:
        return float(self.outcomes @ self.probabilities(rho))

    def variance(self, rho) -> float:
        p = self.probabilities(rho)
        m = self.outcomes @ p
        return float(max((self.outcomes**2) @ p - m * m, 0.0))


class CircuitMeasurement(Measurement):
    def __init__(self, spec: ObservableSpec, x, theta):
        self.spec = spec
        self.outcomes = _check_x(spec, x)
        self.theta = np.asarray(theta, dtype=float)

    def probabilities(self, rho):
        return outcome_probabilities(self.spec, self.theta, rho)


class PovmMeasurement(Measurement):
    def __init__(self, elements: np.ndarray, x):
        self.elements = np.asarray(elements, dtype=complex)
        self.outcomes = np.asarray(x, dtype=float)

    def probabilities(self, rho):
        p = np.einsum("kij,ji->k", self.elements, np.asarray(rho, dtype=complex)).real
        return clean_distribution(p)


class SpectralMeasurement(PovmMeasurement):
    """Projective measurement of a Hermitian matrix onto its eigenspaces.

    Eigenvalues closer than ``tol`` are merged into one outcome.
    """

    def __init__(self, matrix: np.ndarray, tol: float = 1e-9):
        w, v = np.linalg.eigh(0.5 * (matrix + np.conj(matrix).T))
        groups, values = [], []
        for i, lam in enumerate(w):
            if values and abs(lam - values[-1]) < tol:
                groups[-1].append(i)
            else:
                groups.append([i])
                values.append(lam)
        elements = np.array([v[:, g] @ v[:, g].conj().T for g in groups])
        super().__init__(elements, [np.mean(w[g]) for g in groups])
