"""Fisher information, symmetric logarithmic derivatives and estimation bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PAULIS, SIGMA_Y, bloch_vector, fidelity, purity
from .datagen import StateFamily
from .observable import Measurement, counts_from_uniforms
from .quadrature import Quadrature

SLD_PAIR_TOL = 1e-10
FIDELITY_STEP = 1e-4
FIDELITY_GAP_MIN = 1e-9
PURE_TOL = 1e-9
CFI_PROB_TOL = 1e-12
CFI_SLOPE_TOL = 1e-9
SLD_METHODS = ("eigenbasis", "pure", "bloch", "mixed_qubit")
QFI_METHODS = ("sld", "fidelity", "fullrank", "pure")


class FisherSingularityError(ArithmeticError):
    """A probability vanishes while its derivative does not."""


def _sld_eigenbasis(rho, drho):
    w, v = np.linalg.eigh(rho)
    d = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    mask = denom > SLD_PAIR_TOL
    l_eig = np.zeros_like(d)
    l_eig[mask] = 2.0 * d[mask] / denom[mask]
    return v @ l_eig @ v.conj().T


def _require_qubit(rho, method):
    if rho.shape != (2, 2):
        raise ValueError(f"SLD method {method!r} needs a single-qubit family")


def _sld_bloch(rho, drho):
    r, dr = bloch_vector(rho), bloch_vector(drho)
    sigma_r = sum(c * p for c, p in zip(r, PAULIS[1:]))
    out = sum(c * p for c, p in zip(dr, PAULIS[1:]))
    deficit = 1.0 - r @ r
    if deficit > PURE_TOL:
        out = out + (r @ dr) / deficit * (sigma_r - PAULIS[0])
    return out


def _sld_mixed_qubit(rho, drho):
    p = purity(rho)
    if 1.0 - p < PURE_TOL:
        raise ValueError("mixed-qubit SLD formula needs a mixed state")
    inverse = 2.0 / (1.0 - p) * SIGMA_Y @ rho.T @ SIGMA_Y
    dpurity = 2.0 * np.trace(rho @ drho).real
    return 2.0 * drho - 0.5 * dpurity * inverse


def sld_from_derivative(rho: np.ndarray, drho: np.ndarray, method: str = "eigenbasis") -> np.ndarray:
    """SLD operator L solving d(rho) = (rho L + L rho) / 2."""
    if method == "eigenbasis":
        out = _sld_eigenbasis(rho, drho)
    elif method == "pure":
        if abs(purity(rho) - 1.0) > PURE_TOL:
            raise ValueError("pure-state SLD formula needs a pure state")
        out = 2.0 * drho
    elif method == "bloch":
        _require_qubit(rho, method)
        out = _sld_bloch(rho, drho)
    elif method == "mixed_qubit":
        _require_qubit(rho, method)
        out = _sld_mixed_qubit(rho, drho)
    else:
        raise ValueError(f"unknown SLD method {method!r}; expected one of {SLD_METHODS}")
    return 0.5 * (out + out.conj().T)


def sld(family: StateFamily, alpha: float, method: str = "eigenbasis") -> np.ndarray:
    return sld_from_derivative(family.state(alpha), family.derivative(alpha), method)


def sld_residual(rho, drho, l_op) -> float:
    return float(np.linalg.norm(drho - 0.5 * (rho @ l_op + l_op @ rho)))


def _fidelity_gap(family: StateFamily, alpha: float, h: float) -> float:
    """1 - F between states a step h apart, centred on alpha when the range allows."""
    lo, hi = alpha - 0.5 * h, alpha + 0.5 * h
    if lo < family.a:
        lo, hi = family.a, family.a + h
    elif hi > family.b:
        lo, hi = family.b - h, family.b
    return 1.0 - fidelity(family.state(lo), family.state(hi))


def qfi(family: StateFamily, alpha: float, method: str = "sld") -> float:
    """Quantum Fisher information of ``family`` at ``alpha``.

    ``sld`` uses Tr(L^2 rho) with the eigenbasis SLD; ``fidelity`` uses
    8 (1 - F) / d^2 between states a step d = 1e-4 apart, centred on alpha
    (d is widened once when 1 - F falls below 1e-9);
    ``fullrank`` uses the single-qubit expression
    Tr(d rho)^2 + Tr[(rho d rho)^2] / det(rho); ``pure`` uses
    4 (<d psi|d psi> - |<psi|d psi>|^2), evaluated as the gauge-free 2 Tr(d rho)^2.
    """
    if method == "sld":
        rho = family.state(alpha)
        l_op = _sld_eigenbasis(rho, family.derivative(alpha))
        return float(max(np.trace(l_op @ l_op @ rho).real, 0.0))
    if method == "fidelity":
        h = FIDELITY_STEP
        gap = _fidelity_gap(family, alpha, h)
        if 0.0 < gap < FIDELITY_GAP_MIN:
            # widen the step so 1 - F stays far above round-off
            h = min(h * math.sqrt(FIDELITY_GAP_MIN / gap), 0.1 * family.length)
            gap = _fidelity_gap(family, alpha, h)
        return float(max(8.0 * gap / h**2, 0.0))
    if method == "fullrank":
        rho = family.state(alpha)
        _require_qubit(rho, method)
        det = np.linalg.det(rho).real
        if det <= PURE_TOL:
            raise ValueError("full-rank formula needs a full-rank state")
        drho = family.derivative(alpha)
        prod = rho @ drho
        return float(np.trace(drho @ drho).real + np.trace(prod @ prod).real / det)
    if method == "pure":
        rho = family.state(alpha)
        if abs(purity(rho) - 1.0) > PURE_TOL:
            raise ValueError("pure-state formula needs a pure state")
        drho = family.derivative(alpha)
        return float(2.0 * np.trace(drho @ drho).real)
    raise ValueError(f"unknown qfi method {method!r}; expected one of {QFI_METHODS}")


def cfi(measurement: Measurement, family: StateFamily, alpha: float) -> float:
    """Classical Fisher information of the outcome distribution at ``alpha``."""
    p = measurement.probabilities(family.state(alpha))
    dp = family.differentiate(lambda t: measurement.probabilities(family.state(t)), alpha)
    small = p < CFI_PROB_TOL
    if np.any(small & (np.abs(dp) >= CFI_SLOPE_TOL)):
        raise FisherSingularityError(f"vanishing probability with nonzero slope at alpha={alpha}")
    keep = ~small
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def local_optimal_observable(family: StateFamily, alpha: float) -> np.ndarray:
    """alpha I + L / qFI: unbiased with unit slope and variance 1/qFI at ``alpha``."""
    rho = family.state(alpha)
    l_op = _sld_eigenbasis(rho, family.derivative(alpha))
    info = np.trace(l_op @ l_op @ rho).real
    if info <= 1e-12:
        raise ValueError("quantum Fisher information vanishes")
    return alpha * np.eye(rho.shape[0]) + l_op / info


def error_propagation(variance: float, slope: float, mu: int = 1) -> float:
    """Delta^2 H / (mu |d<H>/d alpha|^2); infinite for a flat response."""
    if abs(slope) == 0.0:
        return float("inf")
    return float(variance / (mu * slope**2))


@dataclass(frozen=True)
class FisherReport:
    alpha: float
    prediction: float
    d_pred: float
    variance: float
    cfi: float
    qfi: float
    ccrb: float
    qcrb: float
    mu: int = 1

    def row(self) -> list:
        return [self.alpha, self.prediction, self.d_pred, self.variance,
                self.cfi, self.qfi, self.ccrb, self.qcrb]


REPORT_COLUMNS = ("alpha", "pred", "dpred", "var", "cfi", "qfi", "ccrb", "qcrb")


def _bound(info: float, mu: int) -> float:
    return float("inf") if info <= 0 else 1.0 / (mu * info)


def fisher_report(measurement: Measurement, family: StateFamily, alphas, mu: int = 1,
                  qfi_method: str = "sld") -> list[FisherReport]:
    alphas = np.asarray(alphas, dtype=float).reshape(-1)
    if alphas.size == 0:
        raise ValueError("report grid is empty")
    rows = []
    for alpha in alphas:
        rho = family.state(alpha)
        pred = measurement.mean(rho)
        slope = family.differentiate(lambda t: measurement.mean(family.state(t)), alpha)
        try:
            c_info = cfi(measurement, family, alpha)
        except FisherSingularityError:
            c_info = float("nan")
        q_info = qfi(family, alpha, qfi_method)
        rows.append(FisherReport(float(alpha), pred, float(slope), measurement.variance(rho),
                                 c_info, q_info, _bound(c_info, mu), _bound(q_info, mu), mu))
    return rows


@dataclass(frozen=True)
class BiasedCheck:
    alpha: float
    mse_mc: float
    std_error: float
    predicted: float
    ccrb_biased: float
    bias: float
    slope: float
    bias_slope: float
    equality_holds: bool
    inequality_holds: bool

    @property
    def slope_residual(self) -> float:
        return abs(self.slope - (1.0 + self.bias_slope))


def biased_identities(measurement: Measurement, family: StateFamily, alpha: float, mu: int,
                      repeats: int, rng: np.random.Generator, qfi_method: str = "sld") -> BiasedCheck:
    """Monte-Carlo check of the biased error-propagation and Cramer-Rao relations.

    The mean squared error of the mu-shot estimate over ``repeats`` runs is
    compared with Delta^2 H / mu + b^2 (within three standard errors) and
    with the lower bound |d<H>|^2 / (mu qFI) + b^2.
    """
    rho = family.state(alpha)
    p = measurement.probabilities(rho)
    x = measurement.outcomes
    counts = counts_from_uniforms(np.tile(p, (repeats, 1)), rng.random((repeats, mu)))
    estimates = counts @ x / mu
    sq = (estimates - alpha) ** 2
    mse = float(sq.mean())
    se = float(sq.std(ddof=1) / np.sqrt(repeats))
    mean = float(x @ p)
    var = float(max((x**2) @ p - mean**2, 0.0))
    bias = mean - alpha
    slope = float(family.differentiate(lambda t: measurement.mean(family.state(t)), alpha))
    bias_slope = float(family.differentiate(lambda t: measurement.mean(family.state(t)) - t, alpha))
    predicted = var / mu + bias**2
    lower = slope**2 / (mu * qfi(family, alpha, qfi_method)) + bias**2
    return BiasedCheck(float(alpha), mse, se, predicted, lower, bias, slope, bias_slope,
                       abs(mse - predicted) <= 3.0 * se, mse >= lower - 3.0 * se)


@dataclass(frozen=True)
class BayesBound:
    delta2_p: float
    info: float
    bound: float


def bayes_bound(family: StateFamily, m0: np.ndarray, quadrature: Quadrature = Quadrature(),
                a: float | None = None, b: float | None = None) -> BayesBound:
    """Flat-prior Bayesian bound: prior second moment minus Tr(rho_bar M0^2)."""
    a = family.a if a is None else a
    b = family.b if b is None else b
    nodes, weights = quadrature.nodes_weights(a, b)
    length = b - a
    rho_bar = sum(w * family.state(t) for t, w in zip(nodes, weights)) / length
    delta2_p = (b**3 - a**3) / (3.0 * length)
    info = float(np.trace(rho_bar @ m0 @ m0).real)
    return BayesBound(float(delta2_p), info, float(delta2_p - info))
