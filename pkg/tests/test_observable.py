import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qregress.ansatz import AnsatzSpec
from qregress.core import random_mixed_two_qubit
from qregress.observable import (CircuitMeasurement, ObservableSpec, PovmMeasurement, SpectralMeasurement,
                                 counts_from_uniforms, expectation, induced_povm, observable_matrix,
                                 outcome_probabilities, povm_observable, readout_projector, sample_shots,
                                 variance)

LAYOUTS = [(2, 2, 0, 1), (2, 1, 0, 2), (2, 0, 1, 2), (1, 1, 1, 1), (2, 1, 1, 1)]


def make(n, m, anc, layers, seed=0):
    spec = ObservableSpec(n, m, anc, AnsatzSpec(n + anc, layers))
    rng = np.random.default_rng(seed)
    return spec, rng.normal(size=spec.n_outcomes), rng.uniform(0, 2 * np.pi, spec.n_params)


def random_state(n, rng):
    if n == 2:
        return random_mixed_two_qubit(rng)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("layout", LAYOUTS)
def test_operator_and_circuit_agree(layout):
    spec, x, theta = make(*layout)
    rng = np.random.default_rng(1)
    rho = random_state(spec.n_qubits, rng)
    povm = induced_povm(spec, theta)
    h = povm_observable(povm, x)
    assert np.allclose(h, h.conj().T)
    if spec.ancillas == 0:
        assert np.allclose(h, observable_matrix(spec, x, theta), atol=1e-12)
    mean = expectation(spec, x, theta, rho)
    assert mean == pytest.approx(np.trace(rho @ h).real, abs=1e-12)
    second = np.trace(rho @ povm_observable(povm, x**2)).real
    assert variance(spec, x, theta, rho) == pytest.approx(second - mean**2, abs=1e-12)


@pytest.mark.parametrize("layout", LAYOUTS)
def test_induced_povm_is_valid(layout):
    spec, _, theta = make(*layout)
    povm = induced_povm(spec, theta)
    assert povm.shape[0] == spec.n_outcomes
    assert np.allclose(povm.sum(axis=0), np.eye(2**spec.n_qubits), atol=1e-12)
    for e in povm:
        assert np.linalg.eigvalsh(e).min() > -1e-12


@pytest.mark.parametrize("layout", [(2, 2, 0, 1), (2, 1, 0, 0)])
def test_readout_projectors_are_orthogonal_and_complete(layout):
    spec, _, _ = make(*layout)
    projectors = [np.diag(readout_projector(spec, k)) for k in range(spec.n_outcomes)]
    assert np.allclose(sum(projectors), np.eye(2**spec.total_qubits))
    for i, p in enumerate(projectors):
        assert np.allclose(p @ p, p)
        for q in projectors[i + 1:]:
            assert np.allclose(p @ q, 0)


def test_probabilities_of_pure_ket_and_density_agree():
    spec, _, theta = make(2, 1, 0, 2)
    psi = np.array([0.6, 0.0, 0.0, 0.8j])
    a = outcome_probabilities(spec, theta, psi)
    b = outcome_probabilities(spec, theta, np.outer(psi, psi.conj()))
    assert np.allclose(a, b) and a.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("args", [(2, 3, 0), (2, 0, 0), (1, 1, -1)])
def test_spec_validation(args):
    with pytest.raises(ValueError):
        ObservableSpec(*args)


def test_spec_round_trip_and_ansatz_mismatch():
    spec = ObservableSpec(2, 1, 1, AnsatzSpec(3, 2))
    assert ObservableSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        ObservableSpec(2, 1, 1, AnsatzSpec(2, 1))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_counts_from_uniforms_matches_cdf_lookup(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(4), size=3)
    u = rng.random((3, 50))
    counts = counts_from_uniforms(p, u)
    assert np.all(counts.sum(axis=1) == 50)
    for j in range(3):
        idx = np.searchsorted(np.cumsum(p[j]), u[j], side="right")
        assert np.array_equal(counts[j], np.bincount(np.minimum(idx, 3), minlength=4))


def test_sample_shots_is_unbiased():
    p = np.array([0.1, 0.2, 0.3, 0.4])
    x = np.array([-1.0, 0.5, 2.0, 3.0])
    rng = np.random.default_rng(0)
    est = np.mean([sample_shots(p, x, 100, rng).estimate for _ in range(4000)])
    var = p @ x**2 - (p @ x) ** 2
    assert abs(est - p @ x) < 4 * np.sqrt(var / 400000)


def test_spectral_measurement_merges_degenerate_eigenvalues():
    m = SpectralMeasurement(np.diag([1.0, 1.0, -1.0, 2.0]))
    assert len(m.outcomes) == 3
    rho = np.eye(4) / 4
    assert m.mean(rho) == pytest.approx(0.75)
    assert m.variance(rho) == pytest.approx(np.mean(np.array([1, 1, 1, 4])) - 0.75**2)


def test_measurement_objects_agree():
    spec, x, theta = make(2, 2, 0, 1)
    rho = random_mixed_two_qubit(np.random.default_rng(4))
    circ = CircuitMeasurement(spec, x, theta)
    povm = PovmMeasurement(induced_povm(spec, theta), x)
    assert np.allclose(circ.probabilities(rho), povm.probabilities(rho))
    assert circ.variance(rho) == pytest.approx(povm.variance(rho))
