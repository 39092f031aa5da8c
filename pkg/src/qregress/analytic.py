"""Optimal observables from the variance-weighted operator equation, closed forms and identities.

For a family rho_alpha on [a, b] (length L) and weight ratio k = w_ls / w_var
the optimal observable H0 solves

    (rho~ H0 + H0 rho~) / 2 + (k - 1) <Tr(H0 rho) rho> - k <alpha rho> = 0,

where <.> is the flat average over [a, b] and rho~ = <rho>.  The equation
is linear in H0 and is solved in an orthonormal Hermitian operator basis.
For k = inf it reduces to the normal equation <(Tr(H0 rho) - alpha) rho> = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, tensor_product
from .datagen import StateFamily, TrainingSet
from .quadrature import Quadrature

SOLVER_RESIDUAL_TOL = 1e-8
RANK_TOL = 1e-11


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message: str, null_dim: int):
        super().__init__(message)
        self.null_dim = null_dim


@lru_cache(maxsize=8)
def hermitian_basis(dim: int) -> np.ndarray:
    """Generalized Gell-Mann matrices plus I/sqrt(d), orthonormal under Tr(AB)."""
    mats = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[j, k], anti[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            mats += [sym, anti]
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    basis = np.array(mats)
    basis.setflags(write=False)
    return basis


def _coords(basis, op):
    return np.einsum("aij,ji->a", basis, op).real


def _from_coords(basis, h):
    out = np.einsum("a,aij->ij", h, basis)
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class OperatorEquationProblem:
    """Family, range and weight ratio k (``math.inf`` for vanishing variance weight)."""

    family: StateFamily
    k: float = 1.0
    a: float | None = None
    b: float | None = None
    quadrature: Quadrature = field(default_factory=Quadrature)

    def __post_init__(self):
        if self.a is None:
            object.__setattr__(self, "a", self.family.a)
        if self.b is None:
            object.__setattr__(self, "b", self.family.b)
        if not self.b > self.a:
            raise ValueError("need b > a")
        if not self.k > 0:
            raise ValueError("k must be positive")

    @property
    def length(self) -> float:
        return self.b - self.a

    def samples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Labels, normalized weights (summing to 1) and states at the quadrature nodes."""
        nodes, weights = self.quadrature.nodes_weights(self.a, self.b)
        states = np.array([self.family.state(t) for t in nodes])
        return nodes, weights / self.length, states


def _solve_weighted(labels, weights, states, k) -> np.ndarray:
    """Solve the operator equation with averages given by (labels, weights, states)."""
    dim = states.shape[1]
    basis = hermitian_basis(dim)
    coords = np.einsum("aij,tji->ta", basis, states).real
    rho_avg = np.einsum("t,tij->ij", weights, states)
    gram = np.einsum("t,ta,tb->ab", weights, coords, coords)
    target = np.einsum("t,t,ta->a", weights, labels, coords)
    if math.isinf(k):
        system, rhs = gram, target
    else:
        left = np.einsum("ij,ajk->aik", rho_avg, basis)
        anti = np.einsum("aik,bki->ab", left, basis).real
        system = 0.5 * (anti + anti.T) + (k - 1.0) * gram
        rhs = k * target
    u, s, vt = np.linalg.svd(system)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    h = vt[:rank].T @ ((u[:, :rank].T @ rhs) / s[:rank])
    null_dim = system.shape[0] - rank
    resid = np.linalg.norm(system @ h - rhs)
    if resid > SOLVER_RESIDUAL_TOL * max(1.0, np.linalg.norm(rhs)):
        raise SingularSystemError(f"inconsistent system (null-space dimension {null_dim})", null_dim)
    return _from_coords(basis, h)


def operator_equation_residual(labels, weights, states, k, h0) -> float:
    """Frobenius norm of the operator-equation left-hand side at ``h0``."""
    expect = np.einsum("tij,ji->t", states, h0).real
    if math.isinf(k):
        lhs = np.einsum("t,tij->ij", weights * (expect - labels), states)
    else:
        rho_avg = np.einsum("t,tij->ij", weights, states)
        lhs = (0.5 * (rho_avg @ h0 + h0 @ rho_avg)
               + (k - 1.0) * np.einsum("t,tij->ij", weights * expect, states)
               - k * np.einsum("t,tij->ij", weights * labels, states))
    return float(np.linalg.norm(lhs))


def solve_optimal_observable(problem: OperatorEquationProblem) -> np.ndarray:
    """Optimal observable for a continuous flat label distribution.

    Free directions of a singular but consistent system (e.g. operators
    supported where no family state lives) are set to zero; an inconsistent
    system raises ``SingularSystemError`` carrying the null-space dimension.
    """
    labels, weights, states = problem.samples()
    return _solve_weighted(labels, weights, states, problem.k)


def solve_optimal_observable_finite_T(training: TrainingSet, k: float) -> np.ndarray:
    """Optimal observable for the empirical label distribution of a training set."""
    states = np.array(training.states)
    t = len(training)
    return _solve_weighted(training.labels, np.full(t, 1.0 / t), states, k)


# --- closed forms -------------------------------------------------------------

def ad_optimal(a: float, b: float, k: float) -> np.ndarray:
    """Closed-form optimum for amplitude damping of |+> on [a, b]."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("need 0 <= a < b <= 1")
    length = b - a
    c1 = 2.0 / 3.0 * ((1 - a) ** 1.5 - (1 - b) ** 1.5)
    c3 = 2.0 / 5.0 * ((1 - b) ** 2.5 - (1 - a) ** 2.5)
    c2 = (b * b - a * a) / 2.0
    c4 = (b**3 - a**3) / 3.0
    system = np.array([
        [length, c1, c2],
        [k * c1, length + (k - 1) * (length - c2), (k - 1) * (c1 + c3)],
        [k * c2, (k - 1) * (c1 + c3), length + (k - 1) * c4],
    ])
    rhs = np.array([2 * c2, 2 * k * (c1 + c3), 2 * k * c4])
    h0, h1, h3 = np.linalg.solve(system, rhs)
    return 0.5 * (h0 * IDENTITY_2 + h1 * SIGMA_X + h3 * SIGMA_Z)


def depolarizing_optimal(k: float) -> np.ndarray:
    """Closed-form optimum for depolarized |+> with labels on [0, 4/3]."""
    return (3 * k + 10) / (3 * k + 15) * IDENTITY_2 - k / (k + 5) * SIGMA_X


def iso_optimal(k: float) -> np.ndarray:
    """Closed-form optimum for isotropic states labelled by negativity on [0, 1]."""
    h = np.array([[4, 0, 0, k], [0, 4 - k, 0, 0], [0, 0, 4 - k, 0], [k, 0, 0, 4]], dtype=complex)
    return h / (8 + k)


def bell_optimal(k: float) -> np.ndarray:
    """Closed-form optimum for Bell-type states labelled by negativity.

    Only the block on span{|00>, |11>} is fixed by the operator equation; the
    block on span{|01>, |10>} is one admissible choice of the free entries.
    """
    if math.isinf(k):
        t1, t2, t3, t4 = 1.0, 1.0, 0.0, 0.0
    else:
        pi = math.pi
        t1 = 3 * k * k * pi * pi + 6 * k * pi * pi - 12 * k * k * pi + 12 * k * pi + 8 * k * k - 100 * k - 16
        t2 = 3 * k * k * pi * pi - 12 * k * k * pi + 6 * k * pi + 8 * k * k - 20 * k
        t3 = 24 * k * pi - 76 * k - 8
        t4 = 4 * k + 8
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0], h[3, 3] = t3 / t1, -t4 / t1
    h[0, 3] = h[3, 0] = t2 / t1
    h[1, 1], h[2, 2] = t4 / t1, -t3 / t1
    h[1, 2] = h[2, 1] = -t2 / t1
    return h


def unitary_optimal(copies: int, k: float) -> np.ndarray:
    """Closed-form optimum for z-rotated |+> on [0, pi] with one or two copies (t = 0)."""
    pi = math.pi
    if copies == 1:
        return pi / 2 * IDENTITY_2 - 4 * k / (pi * (1 + k)) * SIGMA_X
    if copies == 2:
        r = -32 - 64 * k + 27 * pi**2 + 9 * k * pi**2
        return (pi / 2 * np.eye(4)
                - 12 * k * pi * (k + 8) / (r * (1 + 2 * k)) * (np.kron(IDENTITY_2, SIGMA_X) + np.kron(SIGMA_X, IDENTITY_2))
                - 3 * k * (3 * pi**2 - 32) / r * (np.kron(SIGMA_X, SIGMA_Y) + np.kron(SIGMA_Y, SIGMA_X)))
    raise ValueError("copies must be 1 or 2")


def support_block(op: np.ndarray, indices) -> np.ndarray:
    """Sub-matrix of ``op`` on the computational basis states ``indices``."""
    idx = np.asarray(indices)
    return op[np.ix_(idx, idx)]


def fourier_observable(copies: int) -> np.ndarray:
    """Observable whose expectation on c copies of a z-rotated |+> is the c-term sine series of alpha."""
    if copies < 1:
        raise ValueError("copies must be >= 1")
    raise_ = np.array([[0, 1], [0, 0]], dtype=complex)
    lower = raise_.T.copy()
    out = np.zeros((2**copies, 2**copies), dtype=complex)
    for m in range(1, copies + 1):
        rest = [IDENTITY_2] * (copies - m)
        term = tensor_product(*([raise_] * m + rest)) - tensor_product(*([lower] * m + rest))
        out += 1j * (-2.0) ** m / m * term
    return out


def fourier_partial_sum(alpha: float, terms: int) -> float:
    """sum_{m<=terms} 2 (-1)^(m+1) sin(m alpha) / m."""
    m = np.arange(1, terms + 1)
    return float(np.sum(2.0 * (-1.0) ** (m + 1) * np.sin(m * alpha) / m))


# --- identities -------------------------------------------------------------------

@dataclass(frozen=True)
class TotalVarianceChecks:
    total_variance: float
    identity_rhs: float
    identity_residual: float
    area: float
    area_target: float
    upper_bound: float | None
    bound_holds: bool | None
    average_bound: float | None
    average_holds: bool | None
    max_abs_bias: float


def total_variance_checks(problem: OperatorEquationProblem, h0: np.ndarray) -> TotalVarianceChecks:
    """Integral identities of the optimal observable.

    The total variance equals k times the integral of alpha<H0> - <H0>^2, the
    area under the prediction curve is (b^2 - a^2)/2, and for k <= 1 the total
    variance is bounded by k((b^3 - a^3)/3 - (b^2 - a^2)^2/(4L)), whose
    average over [0, L] is at most k L^2 / 12.
    """
    nodes, weights = problem.quadrature.nodes_weights(problem.a, problem.b)
    states = np.array([problem.family.state(t) for t in nodes])
    mean = np.einsum("tij,ji->t", states, h0).real
    second = np.einsum("tij,ji->t", states, h0 @ h0).real
    var = second - mean**2
    k, a, b, length = problem.k, problem.a, problem.b, problem.length
    total = float(weights @ var)
    rhs = float(k * (weights @ (nodes * mean - mean**2))) if not math.isinf(k) else float("nan")
    area = float(weights @ mean)
    bound = bound_ok = avg = avg_ok = None
    if k <= 1:
        bound = k * ((b**3 - a**3) / 3 - (b * b - a * a) ** 2 / (4 * length))
        bound_ok = total <= bound + 1e-12
        if a == 0:
            avg = k * length**2 / 12
            avg_ok = total / length <= avg + 1e-12
    return TotalVarianceChecks(total, rhs, abs(total - rhs), area, (b * b - a * a) / 2, bound, bound_ok,
                               avg, avg_ok, float(np.max(np.abs(mean - nodes))))


def bayesian_equation_residual(problem: OperatorEquationProblem, m0: np.ndarray) -> float:
    """Residual of (rho_bar M0 + M0 rho_bar)/2 = <alpha rho>."""
    labels, weights, states = problem.samples()
    rho_bar = np.einsum("t,tij->ij", weights, states)
    target = np.einsum("t,tij->ij", weights * labels, states)
    return float(np.linalg.norm(0.5 * (rho_bar @ m0 + m0 @ rho_bar) - target))


# --- two-copy operators and the Haar witness ---------------------------------------------

def _swap(dim_local: int) -> np.ndarray:
    d = dim_local
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def _projectors(dim_local: int):
    s = _swap(dim_local)
    eye = np.eye(dim_local**2)
    return 0.5 * (eye - s), 0.5 * (eye + s)


def _grouped_to_wires(op_grouped: np.ndarray) -> np.ndarray:
    """Reorder an operator on (A1 A2)(B1 B2) to wire order A1 B1 A2 B2 (qubits)."""
    t = op_grouped.reshape([2] * 8)
    # grouped axes: A1 A2 B1 B2 -> wires A1 B1 A2 B2
    perm = [0, 2, 1, 3]
    t = t.transpose(perm + [4 + p for p in perm])
    return t.reshape(16, 16)


def two_copy_bound_operators() -> dict:
    """Operators bounding the squared negativity from two copies of a two-qubit state.

    Wires are ordered A1 B1 A2 B2 (copy 1 then copy 2); the antisymmetric and
    symmetric projectors act on the pair (A1, A2) or (B1, B2).
    """
    minus, plus = _projectors(2)
    eye = np.eye(4)
    grouped = {
        "M1": 4 * np.kron(minus, eye),
        "M2": 4 * np.kron(eye, minus),
        "V1": 4 * np.kron(minus - plus, minus),
        "V2": 4 * np.kron(minus, minus - plus),
    }
    return {name: _grouped_to_wires(op).astype(complex) for name, op in grouped.items()}


def witness_closed_form(s: int) -> float:
    d = 2**s
    return -((d - 1) ** 2) / (2.0 * (d * d + 1))


def witness_haar_average(s: int, samples: int, rng: np.random.Generator, chunk: int = 10000) -> float:
    """Monte-Carlo mean of <W> on two copies of Haar-random pure states.

    W = (I - 2 P-_A) (x) P-_B acts on (A1 A2)(B1 B2) with local dimension 2^s.
    The operator is applied to the two-copy tensor directly, so the cost per
    sample is linear in the two-copy dimension.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    d = 2**s
    total = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        c = rng.standard_normal((m, d, d)) + 1j * rng.standard_normal((m, d, d))
        c /= np.linalg.norm(c.reshape(m, -1), axis=1)[:, None, None]
        # psi (x) psi as a tensor over (a1, b1, a2, b2)
        t = np.einsum("nij,nkl->nijkl", c, c)
        swap_b = t.transpose(0, 1, 4, 3, 2)
        pb = 0.5 * (t - swap_b)
        swap_a = pb.transpose(0, 3, 2, 1, 4)
        w_t = pb - (pb - swap_a)
        total += float(np.einsum("nijkl,nijkl->", t.conj(), w_t).real)
        done += m
    return total / samples
