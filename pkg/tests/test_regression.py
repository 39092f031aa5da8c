import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qregress.ansatz import AnsatzSpec
from qregress.datagen import build_training_set, make_family, midpoint_labels
from qregress.observable import ObservableSpec, expectation, observable_matrix, variance
from qregress.regression import (CostWeights, DegenerateFitError, RegressionObjective, TrainConfig, TrainedModel,
                                 cost, evaluate, fit_bias, predict, train)

SPEC = ObservableSpec(1, 1, 0, AnsatzSpec(1, 1))


def ad_set(count=5):
    return build_training_set(make_family("ad"), midpoint_labels(0.0, 1.0, count))


def brute_cost(x, theta, training, spec, w):
    total = 0.0
    for e in training.entries:
        a = expectation(spec, x, theta, e.state)
        total += w.w_ls * (e.label - a) ** 2 + w.w_var * variance(spec, x, theta, e.state)
    return total


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 3.0), st.floats(0.0, 2.0))
@settings(max_examples=25, deadline=None)
def test_cost_matches_direct_sum(seed, w_ls, w_var):
    rng = np.random.default_rng(seed)
    x, theta = rng.normal(size=2), rng.uniform(0, 6, SPEC.n_params)
    w = CostWeights(w_ls, w_var)
    ts = ad_set()
    assert cost(x, theta, ts, SPEC, w) == pytest.approx(brute_cost(x, theta, ts, SPEC, w), rel=1e-12)


def test_cost_trivial_cases():
    ts = build_training_set(make_family("ad"), [0.3, 0.3])
    theta = np.zeros(SPEC.n_params)
    assert cost([0.3, 0.3], theta, ts, SPEC) == pytest.approx(0.0, abs=1e-15)
    assert cost([1.3, 1.3], theta, ts, SPEC, CostWeights(1.0, 0.0)) == pytest.approx(2.0)


def test_cost_is_linear_in_weights():
    rng = np.random.default_rng(0)
    x, theta = rng.normal(size=2), rng.uniform(0, 6, SPEC.n_params)
    ts = ad_set()
    ls = cost(x, theta, ts, SPEC, CostWeights(1.0, 0.0))
    var = cost(x, theta, ts, SPEC, CostWeights(1.0, 1.0)) - ls
    assert cost(x, theta, ts, SPEC, CostWeights(2.5, 0.7)) == pytest.approx(2.5 * ls + 0.7 * var, rel=1e-12)


def test_equal_weights_give_operator_mse():
    rng = np.random.default_rng(1)
    x, theta = rng.normal(size=2), rng.uniform(0, 6, SPEC.n_params)
    ts = ad_set()
    h = observable_matrix(SPEC, x, theta)
    mse = sum(np.trace(e.state @ (h - e.label * np.eye(2)) @ (h - e.label * np.eye(2))).real for e in ts.entries)
    assert cost(x, theta, ts, SPEC, CostWeights(1.0, 1.0)) == pytest.approx(mse, rel=1e-12)


@pytest.mark.parametrize("spec", [SPEC, ObservableSpec(2, 1, 0, AnsatzSpec(2, 2)),
                                  ObservableSpec(2, 0, 1, AnsatzSpec(3, 1))])
def test_gradient_matches_richardson_oracle(spec):
    fam = make_family("isotropic" if spec.n_qubits == 2 else "ad")
    ts = build_training_set(fam, midpoint_labels(fam.a, fam.b, 4))
    obj = RegressionObjective(ts, spec, CostWeights(1.0, 0.3))
    rng = np.random.default_rng(2)
    p = np.concatenate([rng.normal(size=spec.n_outcomes), rng.uniform(0, 6, spec.n_params)])
    _, grad = obj.value_and_grad(p)

    def d(i, h):
        e = np.zeros_like(p)
        e[i] = h
        return (obj.exact_value(p + e) - obj.exact_value(p - e)) / (2 * h)

    oracle = np.array([(4 * d(i, 1e-4) - d(i, 2e-4)) / 3 for i in range(p.size)])
    assert np.allclose(grad, oracle, atol=1e-7)


def test_training_is_deterministic_and_accurate():
    ts = ad_set(5)
    config = TrainConfig(seed=3, restarts=2, threads=1)
    a = train(ts, SPEC, config=config)
    b = train(ts, SPEC, config=config)
    assert np.array_equal(a.x_star, b.x_star) and np.array_equal(a.theta_star, b.theta_star)
    assert evaluate(a, ts).mse < 1e-3
    assert np.all(np.diff(a.history_cost) <= 0)


def test_shot_training_is_reproducible():
    ts = ad_set(4)
    config = TrainConfig(seed=5, shots=200, max_iter=30, threads=1)
    a, b = train(ts, SPEC, config=config), train(ts, SPEC, config=config)
    assert np.array_equal(a.x_star, b.x_star)


def test_shot_cost_is_unbiased_for_least_squares():
    ts = ad_set(3)
    rng = np.random.default_rng(4)
    x, theta = rng.normal(size=2), rng.uniform(0, 6, SPEC.n_params)
    w = CostWeights(1.0, 0.0)
    exact = cost(x, theta, ts, SPEC, w)
    shots = 50
    values = [cost(x, theta, ts, SPEC, w, shots=shots, seed=s) for s in range(3000)]
    # the squared residual of a shot mean is biased upward by Var/shots
    correction = sum(variance(SPEC, x, theta, e.state) for e in ts.entries) / shots
    assert np.mean(values) == pytest.approx(exact + correction, abs=4 * np.std(values) / np.sqrt(3000))


def offset_model(offset):
    # theta = 0 measures sigma_z on |+>-family states, x shifted by a constant
    x = np.array([1.0, -1.0]) + offset
    return TrainedModel(SPEC, x, np.zeros(SPEC.n_params), CostWeights())


def test_fit_bias_removes_constant_offset():
    ts = ad_set(6)
    model = fit_bias(offset_model(0.3), ts, 1)
    exact = fit_bias(offset_model(0.0), ts, 1)
    shifted = [predict(model, e.state) for e in ts.entries]
    plain = [predict(exact, e.state) for e in ts.entries]
    assert np.allclose(shifted, plain, atol=1e-12)


def test_fit_bias_of_exact_predictor_is_zero():
    fam = make_family("ad-mixed")
    ts = build_training_set(fam, midpoint_labels(0.0, 1.0, 5))
    # on I/2 damped by alpha, <sigma_z> = alpha
    model = TrainedModel(SPEC, np.array([1.0, -1.0]), np.zeros(SPEC.n_params), CostWeights())
    fitted = fit_bias(model, ts, 2)
    assert np.allclose(fitted.bias_poly, 0.0, atol=1e-12)
    assert evaluate(fitted, ts).mse < 1e-24


def test_fit_bias_rejects_constant_predictor():
    model = TrainedModel(SPEC, np.array([0.5, 0.5]), np.zeros(SPEC.n_params), CostWeights())
    with pytest.raises(DegenerateFitError):
        fit_bias(model, ad_set(), 1)


def test_evaluate_constant_predictor():
    ts = ad_set(4)
    model = TrainedModel(SPEC, np.array([0.5, 0.5]), np.zeros(SPEC.n_params), CostWeights())
    result = evaluate(model, ts)
    assert result.mse == pytest.approx(np.mean((ts.labels - 0.5) ** 2))
    assert np.allclose(result.variances, 0.0)


def test_predict_expands_copies():
    spec = ObservableSpec(2, 2, 0, AnsatzSpec(2, 0))
    model = TrainedModel(spec, np.arange(4.0), np.zeros(spec.n_params), CostWeights(), copies=2)
    rho = make_family("ad").state(0.4)
    assert predict(model, rho) == pytest.approx(predict(model, np.kron(rho, rho)))
    with pytest.raises(ValueError):
        predict(model, np.eye(8) / 8)


@pytest.mark.parametrize("kwargs", [{"w_ls": 0.0}, {"w_var": -1.0}, {"w_ls": float("inf")}])
def test_weight_validation(kwargs):
    with pytest.raises(ValueError):
        CostWeights(**kwargs)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(shots=0)
    with pytest.raises(ValueError):
        TrainConfig(gradient="spsa")
