import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qregress.ansatz import (AnsatzSpec, adjoint_gradient, apply_circuit, build_unitary, circuit_gates,
                             param_count)

SPECS = [AnsatzSpec(1, 0), AnsatzSpec(1, 2), AnsatzSpec(2, 1), AnsatzSpec(3, 2),
         AnsatzSpec(2, kind="qcnn"), AnsatzSpec(4, kind="qcnn")]


@pytest.mark.parametrize("spec", SPECS)
def test_unitarity(spec):
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, param_count(spec))
    u = build_unitary(spec, theta)
    assert np.allclose(u.conj().T @ u, np.eye(2**spec.n_qubits), atol=1e-12)


@pytest.mark.parametrize("n, layers", [(1, 0), (1, 3), (2, 2), (4, 5), (8, 1)])
def test_hea_param_count(n, layers):
    spec = AnsatzSpec(n, layers)
    assert param_count(spec) == 3 * layers * n - layers + 2 * n
    used = {g.param for g in circuit_gates(spec)}
    assert used == set(range(param_count(spec)))


@pytest.mark.parametrize("n, expected", [(2, 9), (4, 36), (8, 90)])
def test_qcnn_param_count(n, expected):
    spec = AnsatzSpec(n, kind="qcnn")
    assert param_count(spec) == expected
    assert {g.param for g in circuit_gates(spec)} == set(range(expected))


@pytest.mark.parametrize("spec", SPECS)
def test_circuit_application_matches_dense_unitary(spec):
    rng = np.random.default_rng(1)
    theta = rng.uniform(0, 2 * np.pi, param_count(spec))
    cols = rng.standard_normal((2**spec.n_qubits, 3)) + 1j * rng.standard_normal((2**spec.n_qubits, 3))
    assert np.allclose(apply_circuit(spec, theta, cols), build_unitary(spec, theta) @ cols, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_continuity_bound(seed):
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(2, 2)
    t1 = rng.uniform(0, 2 * np.pi, param_count(spec))
    t2 = t1 + rng.normal(0, 0.1, t1.size)
    gap = np.linalg.norm(build_unitary(spec, t1) - build_unitary(spec, t2), 2)
    assert gap <= np.sum(np.abs(t1 - t2)) + 1e-12


def test_single_qubit_layer_reaches_sigma_x():
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    u = build_unitary(AnsatzSpec(1, 1), np.array([0.0, np.pi / 4, np.pi / 4, 0.0]))
    assert np.allclose(u.conj().T @ z @ u, x, atol=1e-12) or np.allclose(u.conj().T @ z @ u, -x, atol=1e-12)


@pytest.mark.parametrize("spec", [AnsatzSpec(2, 1), AnsatzSpec(3, 2), AnsatzSpec(4, kind="qcnn")])
def test_adjoint_gradient_matches_central_differences(spec):
    rng = np.random.default_rng(2)
    dim = 2**spec.n_qubits
    theta = rng.uniform(0, 2 * np.pi, param_count(spec))
    cols = rng.standard_normal((dim, 2)) + 1j * rng.standard_normal((dim, 2))
    obs = np.diag(rng.standard_normal(dim))

    def f(t):
        out = apply_circuit(spec, t, cols)
        return float(np.real(np.sum(out.conj() * (obs @ out))))

    final = apply_circuit(spec, theta, cols)
    grad = adjoint_gradient(spec, theta, final, obs @ final)
    h = 1e-6
    fd = np.array([(f(theta + h * e) - f(theta - h * e)) / (2 * h) for e in np.eye(theta.size)])
    assert np.allclose(grad, fd, atol=1e-6)


@pytest.mark.parametrize("spec", SPECS)
def test_spec_round_trip(spec):
    assert AnsatzSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("kwargs", [{"n_qubits": 0}, {"n_qubits": 2, "layers": -1},
                                    {"n_qubits": 3, "kind": "qcnn"}, {"n_qubits": 2, "kind": "mps"}])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        AnsatzSpec(**kwargs)


def test_wrong_theta_length_rejected():
    with pytest.raises(ValueError):
        build_unitary(AnsatzSpec(2, 1), np.zeros(3))
