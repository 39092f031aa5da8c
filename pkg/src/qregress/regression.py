"""Training of variational observables: variance-weighted least squares and Bayesian MSE.

Parameters are packed as ``[x, theta]``.  In exact mode the cost and its
gradient are computed from outcome probabilities; the x-gradient is
analytic and the theta-gradient comes from one adjoint sweep (or central
finite differences if requested).  With ``shots`` set, every cost call
draws fresh multinomial outcomes; both sides of each finite difference
reuse the same uniforms.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ansatz import adjoint_gradient, apply_circuit
from .core import tensor_power
from .datagen import StateFamily, TrainingSet, build_training_set, derive_seed, midpoint_labels
from .observable import (CircuitMeasurement, ObservableSpec, StateBatch, counts_from_uniforms,
                         readout_marginals)
from .optimize import DivergenceError, bfgs
from .quadrature import Quadrature

GRADIENT_MODES = ("adjoint", "fd")
THREADS_ENV = "QREGRESS_THREADS"


class DegenerateFitError(ValueError):
    """All predictions coincide, so a bias polynomial is not identifiable."""


@dataclass(frozen=True)
class CostWeights:
    w_ls: float = 1.0
    w_var: float = 1e-4

    def __post_init__(self):
        if not (math.isfinite(self.w_ls) and math.isfinite(self.w_var)):
            raise ValueError("weights must be finite")
        if self.w_ls <= 0 or self.w_var < 0:
            raise ValueError("need w_ls > 0 and w_var >= 0")

    def scaled(self, factor: float) -> "CostWeights":
        return CostWeights(self.w_ls * factor, self.w_var * factor)


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings.

    ``shots=None`` means exact expectations.  ``h_fd`` is the finite-difference
    step for exact-mode ``fd`` gradients; ``shots_fd_step`` is the wider step
    used with shot noise, where a tiny step would see identical counts.
    """

    max_iter: int = 2000
    h_fd: float = 1e-7
    gtol: float = 1e-8
    shots: int | None = None
    seed: int = 0
    restarts: int = 1
    gradient: str = "adjoint"
    shots_fd_step: float = 0.05
    threads: int = field(default_factory=default_threads)

    def __post_init__(self):
        if self.max_iter < 1 or self.h_fd <= 0 or self.gtol <= 0 or self.restarts < 1:
            raise ValueError("numeric settings must be positive")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be a positive integer or None")
        if self.shots_fd_step <= 0 or self.threads < 1:
            raise ValueError("shots_fd_step and threads must be positive")
        if self.gradient not in GRADIENT_MODES:
            raise ValueError(f"gradient must be one of {GRADIENT_MODES}")


@dataclass(frozen=True)
class TrainedModel:
    spec: ObservableSpec
    x_star: np.ndarray
    theta_star: np.ndarray
    weights: CostWeights
    history_cost: tuple = ()
    history_evals: tuple = ()
    bias_poly: np.ndarray | None = None
    copies: int = 1
    final_cost: float = float("nan")
    converged: bool = False
    message: str = ""

    def __post_init__(self):
        if len(self.x_star) != self.spec.n_outcomes:
            raise ValueError("x_star length does not match the readout")
        if len(self.theta_star) != self.spec.n_params:
            raise ValueError("theta_star length does not match the ansatz")
        if self.spec.n_qubits % self.copies:
            raise ValueError("qubit count is not a multiple of copies")

    def measurement(self) -> CircuitMeasurement:
        return CircuitMeasurement(self.spec, self.x_star, self.theta_star)


# --- objective ---------------------------------------------------------------

def _map_columns(fn, columns: np.ndarray, threads: int) -> np.ndarray:
    """Apply a column-wise map, splitting the columns across threads."""
    cols = columns.shape[1]
    if threads <= 1 or cols < 2 * threads:
        return fn(columns)
    bounds = np.linspace(0, cols, threads + 1).astype(int)
    with ThreadPoolExecutor(threads) as pool:
        parts = pool.map(lambda i: fn(columns[:, bounds[i]:bounds[i + 1]]), range(threads))
        return np.concatenate(list(parts), axis=1)


class RegressionObjective:
    """Cost ``w_ls sum (alpha - a)^2 + w_var sum Var`` over a training set."""

    def __init__(self, training: TrainingSet, spec: ObservableSpec, weights: CostWeights,
                 config: TrainConfig = TrainConfig()):
        if training.n_qubits != spec.n_qubits:
            raise ValueError(f"training states have {training.n_qubits} qubits, spec expects {spec.n_qubits}")
        self.spec = spec
        self.weights = weights
        self.config = config
        self.labels = training.labels
        self.batch = StateBatch.from_states(training.states, spec.ancillas)
        sizes = np.diff(np.append(self.batch.starts, self.batch.columns.shape[1]))
        self.column_owner = np.repeat(np.arange(len(self.labels)), sizes)
        self.n_x = spec.n_outcomes
        self.calls = 0

    def split(self, params) -> tuple[np.ndarray, np.ndarray]:
        params = np.asarray(params, dtype=float)
        return params[: self.n_x], params[self.n_x:]

    def _propagate(self, theta):
        return _map_columns(lambda c: apply_circuit(self.spec.ansatz, theta, c),
                            self.batch.columns, self.config.threads)

    def probabilities(self, theta) -> np.ndarray:
        return readout_marginals(self.spec, self._propagate(theta), self.batch.starts)

    def _terms(self, x, freq):
        a = freq @ x
        second = freq @ (x * x)
        resid = self.labels - a
        w = self.weights
        cost = w.w_ls * float(resid @ resid) + w.w_var * float(np.sum(second - a * a))
        return cost, a, resid

    def _x_grad(self, x, freq, a, resid):
        w = self.weights
        return (-2.0 * w.w_ls * resid @ freq
                + w.w_var * (2.0 * x * freq.sum(axis=0) - 2.0 * a @ freq))

    def _prob_weights(self, x, a, resid):
        w = self.weights
        return (-2.0 * w.w_ls * resid[:, None] * x[None, :]
                + w.w_var * (x[None, :] ** 2 - 2.0 * a[:, None] * x[None, :]))

    def _frequencies(self, theta, uniforms):
        p = self.probabilities(theta)
        if uniforms is None:
            return p
        return counts_from_uniforms(p, uniforms) / uniforms.shape[1]

    def _uniforms(self):
        if self.config.shots is None:
            return None
        rng = np.random.default_rng(derive_seed(self.config.seed, self.calls))
        return rng.random((len(self.labels), self.config.shots))

    def value(self, params) -> float:
        """Cost at ``params``; each call draws fresh shots in shot mode."""
        self.calls += 1
        x, theta = self.split(params)
        return self._terms(x, self._frequencies(theta, self._uniforms()))[0]

    def exact_value(self, params) -> float:
        x, theta = self.split(params)
        return self._terms(x, self.probabilities(theta))[0]

    def value_and_grad(self, params) -> tuple[float, np.ndarray]:
        self.calls += 1
        x, theta = self.split(params)
        uniforms = self._uniforms()
        if uniforms is None and self.config.gradient == "adjoint":
            propagated = self._propagate(theta)
            freq = readout_marginals(self.spec, propagated, self.batch.starts)
            cost, a, resid = self._terms(x, freq)
            g_p = self._prob_weights(x, a, resid)
            k = self.n_x
            weighted = (propagated.reshape(-1, k, propagated.shape[1])
                        * g_p[self.column_owner].T[None, :, :]).reshape(propagated.shape)
            g_theta = adjoint_gradient(self.spec.ansatz, theta, propagated, weighted)
            return cost, np.concatenate([self._x_grad(x, freq, a, resid), g_theta])
        freq = self._frequencies(theta, uniforms)
        cost, a, resid = self._terms(x, freq)
        step = self.config.h_fd if uniforms is None else self.config.shots_fd_step
        g_theta = np.empty_like(theta)
        for i in range(theta.size):
            shift = np.zeros_like(theta)
            shift[i] = step
            up = self._terms(x, self._frequencies(theta + shift, uniforms))[0]
            down = self._terms(x, self._frequencies(theta - shift, uniforms))[0]
            g_theta[i] = (up - down) / (2 * step)
        return cost, np.concatenate([self._x_grad(x, freq, a, resid), g_theta])


def cost(x, theta, training: TrainingSet, spec: ObservableSpec, weights: CostWeights = CostWeights(),
         shots: int | None = None, seed: int = 0) -> float:
    """Variance-weighted least-squares cost (exact, or from ``shots`` outcomes per state)."""
    objective = RegressionObjective(training, spec, weights, TrainConfig(shots=shots, seed=seed))
    return objective.value(np.concatenate([np.asarray(x, float), np.asarray(theta, float)]))


# --- training ------------------------------------------------------------------

def initial_point(spec: ObservableSpec, label_range, rng: np.random.Generator) -> np.ndarray:
    a, b = label_range
    half = 0.5 * (b - a)
    x0 = rng.uniform(a - half, b + half, size=spec.n_outcomes)
    theta0 = rng.uniform(0.0, 2.0 * np.pi, size=spec.n_params)
    return np.concatenate([x0, theta0])


def _optimize(objective: RegressionObjective, label_range, config: TrainConfig, weights: CostWeights,
              copies: int, scale: float = 1.0, start: np.ndarray | None = None) -> TrainedModel:
    rng = np.random.default_rng(config.seed)
    history, evals = [], []
    best = None
    offset = 0
    for r in range(config.restarts):
        x0 = initial_point(objective.spec, label_range, rng)
        if r == 0 and start is not None:
            x0 = np.array(start, dtype=float)
        try:
            result = bfgs(objective.value_and_grad, x0, max_iter=config.max_iter, gtol=config.gtol)
        except DivergenceError as err:
            raise DivergenceError(str(err), x0 if best is None else best.x) from err
        running = result.history_cost if best is None else [min(best.fun, c) for c in result.history_cost]
        history += [c * scale for c in running]
        evals += [offset + e for e in result.history_evals]
        offset += result.n_eval
        if best is None or result.fun < best.fun:
            best = result
    x_star, theta_star = objective.split(best.x)
    return TrainedModel(objective.spec, x_star.copy(), theta_star.copy(), weights,
                        tuple(history), tuple(evals), None, copies,
                        best.fun * scale, best.converged, best.message)


def train(training: TrainingSet, spec: ObservableSpec, weights: CostWeights = CostWeights(),
          config: TrainConfig = TrainConfig(), warm_start: TrainedModel | None = None) -> TrainedModel:
    """Minimize the variance-weighted least-squares cost with BFGS.

    The first run starts from ``warm_start`` when given, later restarts from
    random points.  Returns the best point over all restarts.  ``history_cost`` is the
    best-so-far cost per iteration and ``history_evals`` the cumulative
    number of cost evaluations.
    """
    objective = RegressionObjective(training, spec, weights, config)
    start = None
    if warm_start is not None:
        if warm_start.spec != spec:
            raise ValueError("warm start model has a different observable spec")
        start = np.concatenate([warm_start.x_star, warm_start.theta_star])
    return _optimize(objective, training.label_range, config, weights, training.copies, start=start)


def bayes_training_set(family: StateFamily, count: int) -> TrainingSet:
    """Midpoint grid over the family range; its average approximates the flat-prior integral."""
    return build_training_set(family, midpoint_labels(family.a, family.b, count))


def train_bayes(training: TrainingSet, spec: ObservableSpec, config: TrainConfig = TrainConfig()) -> TrainedModel:
    """Minimize the discrete flat-prior Bayesian MSE (1/T) sum_j Tr rho_j (H - alpha_j)^2.

    This equals the least-squares cost with equal unit weights divided by T.
    """
    weights = CostWeights(1.0, 1.0)
    t = len(training)
    objective = RegressionObjective(training, spec, weights.scaled(1.0 / t), config)
    model = _optimize(objective, training.label_range, config, weights, training.copies)
    return model


def bayes_mse(model: TrainedModel, training: TrainingSet) -> float:
    """Discrete Bayesian MSE (1/T) sum_j [Var_j + (<H>_j - alpha_j)^2]."""
    result = evaluate(model, training, use_bias=False)
    return float(np.mean(result.variances + (result.predictions - result.labels) ** 2))


def bayes_mse_integral(model: TrainedModel, family: StateFamily, quadrature: Quadrature = Quadrature()) -> float:
    """Flat-prior Bayesian MSE of the model over the family range."""
    nodes, weights = quadrature.nodes_weights(family.a, family.b)
    m = model.measurement()
    values = []
    for t in nodes:
        rho = family.state(t)
        values.append(m.variance(rho) + (m.mean(rho) - t) ** 2)
    return float(weights @ np.array(values) / family.length)


# --- prediction and evaluation -------------------------------------------------------

def _prepare(model: TrainedModel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    full = 2**model.spec.n_qubits
    if rho.shape[0] != full and model.copies > 1 and rho.shape[0] ** model.copies == full:
        rho = tensor_power(rho, model.copies)
    if rho.shape != (full, full):
        raise ValueError(f"state of dimension {rho.shape[0]} does not fit the model ({full})")
    return rho


def raw_prediction(model: TrainedModel, rho) -> float:
    return model.measurement().mean(_prepare(model, rho))


def predict(model: TrainedModel, rho, use_bias: bool = True) -> float:
    """Expectation of the trained observable, minus the fitted bias if present."""
    a = raw_prediction(model, rho)
    if use_bias and model.bias_poly is not None:
        a -= float(np.polyval(model.bias_poly, a))
    return a


def fit_bias(model: TrainedModel, training: TrainingSet, degree: int) -> TrainedModel:
    """Least-squares polynomial fit of the bias a_j - alpha_j as a function of a_j."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    a = np.array([raw_prediction(model, s) for s in training.states])
    if np.ptp(a) < 1e-12:
        raise DegenerateFitError("all predictions are equal")
    coeffs = np.polyfit(a, a - training.labels, degree)
    return replace(model, bias_poly=coeffs)


@dataclass(frozen=True)
class EvaluationResult:
    mse: float
    labels: np.ndarray
    predictions: np.ndarray
    variances: np.ndarray


def evaluate(model: TrainedModel, test: TrainingSet | Sequence, use_bias: bool = True) -> EvaluationResult:
    """Test MSE, per-point predictions and per-point variances."""
    entries = test.entries if isinstance(test, TrainingSet) else list(test)
    if not entries:
        raise ValueError("test set is empty")
    m = model.measurement()
    labels, preds, variances = [], [], []
    for e in entries:
        rho = _prepare(model, e.state)
        p = m.probabilities(rho)
        raw = float(m.outcomes @ p)
        pred = raw - float(np.polyval(model.bias_poly, raw)) if use_bias and model.bias_poly is not None else raw
        labels.append(e.label)
        preds.append(pred)
        variances.append(max(float((m.outcomes**2) @ p) - raw * raw, 0.0))
    labels, preds = np.array(labels), np.array(preds)
    return EvaluationResult(float(np.mean((labels - preds) ** 2)), labels, preds, np.array(variances))
