"""Labeled quantum-state families and training-set construction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (IDENTITY_2, check_density, haar_random_unitary,
                   ket_to_density, negativity, random_mixed_two_qubit, tensor_power)

PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
PLUS_DM = ket_to_density(PLUS)
BELL_PHI = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
RANGE_SLACK = 1e-12
MIN_ISING_FIELD = 0.05
ISING_GAP_TOL = 1e-10
_MASK64 = (1 << 64) - 1


class DegenerateGroundStateError(RuntimeError):
    pass


class SamplingExhaustedError(RuntimeError):
    pass


def derive_seed(seed: int, index: int) -> int:
    """SplitMix64 output for stream position ``index`` of base ``seed``."""
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _check_range(value: float, lo: float, hi: float, name: str) -> float:
    if not (lo - RANGE_SLACK <= value <= hi + RANGE_SLACK):
        raise ValueError(f"{name}={value!r} outside [{lo}, {hi}]")
    return float(min(max(value, lo), hi))


def _single_qubit(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("channel acts on single-qubit states")
    return rho


# --- channels ---------------------------------------------------------------

def ad_channel(rho: np.ndarray, alpha: float) -> np.ndarray:
    """Amplitude damping with decay probability ``alpha``."""
    rho = _single_qubit(rho)
    alpha = _check_range(alpha, 0.0, 1.0, "alpha")
    k1 = np.sqrt(alpha) * np.array([[0, 1], [0, 0]], dtype=complex)
    k2 = np.diag([1.0, np.sqrt(1.0 - alpha)]).astype(complex)
    return k1 @ rho @ k1.conj().T + k2 @ rho @ k2.conj().T


def depolarizing_channel(rho: np.ndarray, alpha: float) -> np.ndarray:
    rho = _single_qubit(rho)
    alpha = _check_range(alpha, 0.0, 4.0 / 3.0, "alpha")
    return (1.0 - alpha) * rho + 0.5 * alpha * IDENTITY_2


def z_rotation_channel(rho: np.ndarray, alpha: float) -> np.ndarray:
    """Conjugation by exp(-i alpha sigma_z / 2)."""
    rho = _single_qubit(rho)
    alpha = _check_range(alpha, 0.0, np.pi, "alpha")
    u = np.diag([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)])
    return u @ rho @ u.conj().T


# --- two-qubit states ---------------------------------------------------------

def bell_state(p: float) -> np.ndarray:
    """sqrt(p)|00> + sqrt(1-p)|11>."""
    p = _check_range(p, 0.0, 1.0, "p")
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = np.sqrt(p), np.sqrt(1.0 - p)
    return psi


def bell_state_from_negativity(n: float) -> np.ndarray:
    """The Bell-type state with negativity ``n`` and the larger weight on |00>."""
    n = _check_range(n, 0.0, 1.0, "negativity")
    return bell_state(0.5 * (1.0 + np.sqrt(1.0 - n * n)))


def isotropic_state(q: float) -> np.ndarray:
    q = _check_range(q, 0.0, 1.0, "q")
    return q * ket_to_density(BELL_PHI) + (1.0 - q) * np.eye(4) / 4.0


def isotropic_from_negativity(n: float) -> np.ndarray:
    n = _check_range(n, 0.0, 1.0, "negativity")
    return isotropic_state((2.0 * n + 1.0) / 3.0)


# --- transverse-field Ising -------------------------------------------------------

def ising_hamiltonian(n: int, h: float, coupling: float = 1.0) -> np.ndarray:
    """-J sum_i (Z_i Z_{i+1} + h X_i) on a ring of ``n`` spins."""
    dim = 2**n
    bits = (np.arange(dim)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    spins = 1 - 2 * bits
    zz = np.sum(spins * np.roll(spins, -1, axis=1), axis=1)
    ham = np.diag(-coupling * zz.astype(float)).astype(complex)
    idx = np.arange(dim)
    for q in range(n):
        ham[idx ^ (1 << (n - 1 - q)), idx] += -coupling * h
    return ham


def _even_parity_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the +1 eigenspace of the global spin flip prod_i X_i."""
    dim = 2**n
    full = dim - 1
    reps = [b for b in range(dim) if b < (b ^ full)]
    basis = np.zeros((dim, len(reps)))
    for col, b in enumerate(reps):
        basis[b, col] = basis[b ^ full, col] = 1.0 / np.sqrt(2.0)
    return basis


def ising_ground_state(n: int, h: float, coupling: float = 1.0) -> np.ndarray:
    """Ground state of the periodic transverse-field Ising ring.

    The Hamiltonian commutes with the global spin flip and, for h > 0, its
    ground state lies in the even-flip sector, so the diagonalization is
    done there.  This avoids the exponentially small tunnelling splitting of
    the full spectrum at weak field.
    """
    if not 2 <= n <= 8:
        raise ValueError("n must lie in [2, 8]")
    if h <= 0:
        raise ValueError("h must be positive")
    ham = ising_hamiltonian(n, h, coupling)
    basis = _even_parity_basis(n)
    w, v = np.linalg.eigh(basis.T @ ham @ basis)
    if w[1] - w[0] < ISING_GAP_TOL:
        raise DegenerateGroundStateError(f"ground space degenerate at n={n}, h={h}")
    psi = basis @ v[:, 0]
    # fix the global sign so the family is smooth in h
    psi = psi * np.sign(psi[np.argmax(np.abs(psi))].real)
    resid = np.linalg.norm(ham @ psi - w[0] * psi)
    if resid > 1e-9:
        raise RuntimeError(f"eigen-residual {resid:.2e} exceeds tolerance")
    return psi.astype(complex)


# --- families -------------------------------------------------------------------

@dataclass(frozen=True)
class StateFamily:
    """A label-to-state map on ``[a, b]`` with a finite-difference step."""

    name: str
    evaluator: Callable[[float], np.ndarray]
    a: float
    b: float
    dalpha: float = 1e-6
    copies: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("family range needs b > a")
        if self.dalpha <= 0:
            raise ValueError("dalpha must be positive")

    @property
    def length(self) -> float:
        return self.b - self.a

    def state(self, alpha: float) -> np.ndarray:
        if not (self.a - RANGE_SLACK <= alpha <= self.b + RANGE_SLACK):
            raise ValueError(f"label {alpha!r} outside [{self.a}, {self.b}]")
        alpha = min(max(alpha, self.a), self.b)
        rho = np.asarray(self.evaluator(alpha), dtype=complex)
        if rho.ndim == 1:
            rho = ket_to_density(rho)
        return tensor_power(rho, self.copies) if self.copies > 1 else rho

    def differentiate(self, fn: Callable[[float], np.ndarray], alpha: float, step: float | None = None):
        """Derivative of ``fn(alpha)`` by central differences (one-sided at the range ends)."""
        h = self.dalpha if step is None else step
        if alpha - h >= self.a and alpha + h <= self.b:
            return (fn(alpha + h) - fn(alpha - h)) / (2 * h)
        if alpha + 2 * h <= self.b:
            return (-3 * fn(alpha) + 4 * fn(alpha + h) - fn(alpha + 2 * h)) / (2 * h)
        return (3 * fn(alpha) - 4 * fn(alpha - h) + fn(alpha - 2 * h)) / (2 * h)

    def derivative(self, alpha: float) -> np.ndarray:
        return self.differentiate(self.state, alpha)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.state(self.a).shape[0]))


def _ising_evaluator(n: int, coupling: float):
    return lambda h: ising_ground_state(n, h, coupling)


FAMILY_NAMES = ("ad", "ad-mixed", "depolarizing", "zrot", "bell", "isotropic", "ising")


def make_family(name: str, copies: int = 1, dalpha: float = 1e-6, **params) -> StateFamily:
    """Build one of the named label-to-state families.

    ``ad`` and ``depolarizing`` act on |+>, ``ad-mixed`` on I/2, ``zrot``
    rotates |+> about z; ``bell`` and ``isotropic`` are labelled by their
    negativity; ``ising`` is labelled by the field h and accepts ``n``,
    ``coupling``, ``h_min`` and ``h_max``.
    """
    if name == "ad":
        return StateFamily(name, lambda t: ad_channel(PLUS_DM, t), 0.0, 1.0, dalpha, copies)
    if name == "ad-mixed":
        return StateFamily(name, lambda t: ad_channel(IDENTITY_2 / 2, t), 0.0, 1.0, dalpha, copies)
    if name == "depolarizing":
        return StateFamily(name, lambda t: depolarizing_channel(PLUS_DM, t), 0.0, 4.0 / 3.0, dalpha, copies)
    if name == "zrot":
        return StateFamily(name, lambda t: z_rotation_channel(PLUS_DM, t), 0.0, np.pi, dalpha, copies)
    if name == "bell":
        return StateFamily(name, bell_state_from_negativity, 0.0, 1.0, dalpha, copies)
    if name == "isotropic":
        return StateFamily(name, isotropic_from_negativity, 0.0, 1.0, dalpha, copies)
    if name == "ising":
        n = int(params.get("n", 8))
        coupling = float(params.get("coupling", 1.0))
        h_min = float(params.get("h_min", MIN_ISING_FIELD))
        h_max = float(params.get("h_max", 2.0))
        if h_min < MIN_ISING_FIELD:
            raise ValueError(f"h_min must be >= {MIN_ISING_FIELD}")
        return StateFamily(name, _ising_evaluator(n, coupling), h_min, h_max, dalpha, copies,
                           {"n": n, "coupling": coupling, "h_min": h_min, "h_max": h_max})
    raise ValueError(f"unknown family {name!r}; expected one of {FAMILY_NAMES}")


# --- training sets ----------------------------------------------------------------

@dataclass(frozen=True)
class LabeledState:
    state: np.ndarray
    label: float
    family_tag: str


@dataclass
class TrainingSet:
    """Ordered labelled states; with ``copies > 1`` the states are tensor powers."""

    entries: list
    copies: int
    label_range: tuple
    seed: int | None
    family: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("a training set needs at least one entry")
        dims = {e.state.shape[0] for e in self.entries}
        if len(dims) != 1:
            raise ValueError(f"inconsistent state dimensions {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> np.ndarray:
        return np.array([e.label for e in self.entries], dtype=float)

    @property
    def states(self) -> list:
        return [e.state for e in self.entries]

    @property
    def n_qubits(self) -> int:
        return int(np.log2(self.entries[0].state.shape[0]))

    def subset(self, index) -> "TrainingSet":
        return TrainingSet([self.entries[i] for i in index], self.copies, self.label_range,
                           self.seed, self.family, dict(self.metadata))


def midpoint_labels(a: float, b: float, count: int) -> np.ndarray:
    """Equidistant labels at the centres of ``count`` equal cells of [a, b]."""
    return a + (b - a) * (np.arange(count) + 0.5) / count


def random_labels(a: float, b: float, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(a, b, size=count)


def build_training_set(family: StateFamily, labels: Sequence[float], seed: int | None = None,
                       label_map: Callable[[float], float] | None = None) -> TrainingSet:
    """Evaluate ``family`` at ``labels``; ``label_map`` transforms the stored labels."""
    entries = []
    for alpha in labels:
        rho = family.state(float(alpha))
        target = float(alpha) if label_map is None else float(label_map(alpha))
        entries.append(LabeledState(rho, target, family.name))
    lo, hi = (family.a, family.b)
    if label_map is not None:
        lo, hi = sorted((float(label_map(lo)), float(label_map(hi))))
    return TrainingSet(entries, family.copies, (lo, hi), seed, family.name, dict(family.params))


def samples_to_set(states: Sequence[np.ndarray], labels: Sequence[float], family: str, copies: int = 1,
                   seed: int | None = None, label_range=(0.0, 1.0), metadata: dict | None = None) -> TrainingSet:
    """Wrap sampled single-copy states as a (multi-copy) training set."""
    entries = [LabeledState(tensor_power(np.asarray(s, dtype=complex), copies), float(l), family)
               for s, l in zip(states, labels)]
    return TrainingSet(entries, copies, tuple(label_range), seed, family, dict(metadata or {}))


def _bin_quotas(count: int, bins: int) -> np.ndarray:
    if not count >= bins >= 1:
        raise ValueError("need count >= bins >= 1")
    quotas = np.full(bins, count // bins)
    quotas[: count % bins] += 1
    return quotas


def _local_rotation(rng: np.random.Generator) -> np.ndarray:
    return np.kron(haar_random_unitary(2, rng), haar_random_unitary(2, rng))


def sample_pure_by_negativity(count: int, bins: int, rng: np.random.Generator,
                              squared: bool = False) -> tuple[list, np.ndarray]:
    """Random two-qubit pure states whose negativity (or its square) fills ``bins`` evenly.

    Each state is a Bell-type state with the drawn negativity followed by
    Haar-random local unitaries.  Returns state vectors and negativities.
    """
    states, negs = [], []
    for b, quota in enumerate(_bin_quotas(count, bins)):
        for _ in range(quota):
            target = rng.uniform(b / bins, (b + 1) / bins)
            n = np.sqrt(target) if squared else target
            psi = _local_rotation(rng) @ bell_state_from_negativity(n)
            states.append(psi)
            negs.append(negativity(ket_to_density(psi)))
    order = rng.permutation(count)
    return [states[i] for i in order], np.array(negs)[order]


def _noisy_entangled(target: float, rng: np.random.Generator) -> np.ndarray:
    """Pure state of negativity N0 >= target mixed with white noise down to ``target``.

    For (1-t)|psi><psi| + t I/4 the negativity is (1-t) N0 - t/2, which fixes t.
    """
    n0 = rng.uniform(target, 1.0)
    t = (n0 - target) / (n0 + 0.5)
    psi = _local_rotation(rng) @ bell_state_from_negativity(n0)
    return (1.0 - t) * ket_to_density(psi) + t * np.eye(4) / 4.0


def sample_mixed_by_negativity(count: int, bins: int, rng: np.random.Generator,
                               max_draws: int = 20000, fallback: bool = True) -> tuple[list, np.ndarray]:
    """Random mixed two-qubit states with negativities spread evenly over ``bins``.

    Ginibre states are drawn and kept while their negativity bin has room.
    After ``max_draws`` draws any bin still short is topped up with noisy
    entangled states of a uniformly drawn in-bin negativity, unless
    ``fallback`` is False, in which case ``SamplingExhaustedError`` is raised.
    """
    quotas = _bin_quotas(count, bins)
    filled = [[] for _ in range(bins)]
    draws = 0
    while draws < max_draws and any(len(f) < q for f, q in zip(filled, quotas)):
        rho = random_mixed_two_qubit(rng)
        draws += 1
        b = min(int(negativity(rho) * bins), bins - 1)
        if len(filled[b]) < quotas[b]:
            filled[b].append(rho)
    short = [b for b in range(bins) if len(filled[b]) < quotas[b]]
    if short and not fallback:
        raise SamplingExhaustedError(f"bins {short} unfilled after {max_draws} draws")
    for b in short:
        while len(filled[b]) < quotas[b]:
            lo, hi = b / bins, (b + 1) / bins
            rho = _noisy_entangled(rng.uniform(lo, hi), rng)
            if lo <= negativity(rho) < hi or (b == bins - 1 and negativity(rho) <= hi):
                filled[b].append(rho)
    states = [check_density(r) for f in filled for r in f]
    order = rng.permutation(count)
    states = [states[i] for i in order]
    return states, np.array([negativity(r) for r in states])
