import math

import numpy as np
import pytest

from qregress.analytic import (OperatorEquationProblem, ad_optimal, bayesian_equation_residual,
                               bell_optimal, depolarizing_optimal, fourier_observable, fourier_partial_sum,
                               hermitian_basis, iso_optimal, operator_equation_residual, solve_optimal_observable,
                               solve_optimal_observable_finite_T, support_block, total_variance_checks,
                               two_copy_bound_operators, unitary_optimal, witness_closed_form, witness_haar_average)
from qregress.core import haar_random_pure, negativity, random_mixed_two_qubit, tensor_power
from qregress.datagen import build_training_set, make_family, midpoint_labels
from qregress.metrology import bayes_bound

KS = [0.1, 1.0, 4.0]


def solve(name, k, **kw):
    return solve_optimal_observable(OperatorEquationProblem(make_family(name, **kw), k))


@pytest.mark.parametrize("dim", [2, 4])
def test_hermitian_basis_is_orthonormal(dim):
    basis = hermitian_basis(dim)
    assert basis.shape == (dim * dim, dim, dim)
    gram = np.einsum("aij,bji->ab", basis, basis).real
    assert np.allclose(gram, np.eye(dim * dim))
    assert all(np.allclose(b, b.conj().T) for b in basis)


@pytest.mark.parametrize("k", KS)
def test_ad_closed_form(k):
    assert np.allclose(solve("ad", k), ad_optimal(0.0, 1.0, k), atol=1e-6)


@pytest.mark.parametrize("k", KS)
def test_depolarizing_closed_form(k):
    assert np.allclose(solve("depolarizing", k), depolarizing_optimal(k), atol=1e-10)


@pytest.mark.parametrize("k", KS)
def test_isotropic_closed_form(k):
    assert np.allclose(solve("isotropic", k), iso_optimal(k), atol=1e-10)


@pytest.mark.parametrize("k", KS + [math.inf])
def test_bell_closed_form_on_support(k):
    h = solve("bell", k)
    assert np.allclose(support_block(h, [0, 3]), support_block(bell_optimal(k), [0, 3]), atol=1e-6)
    fam = make_family("bell")
    labels, weights, states = OperatorEquationProblem(fam, k).samples()
    assert operator_equation_residual(labels, weights, states, k, bell_optimal(k)) < 1e-6


@pytest.mark.parametrize("n", [0.1, 0.5, 0.9])
def test_bell_limit_is_unbiased_with_known_variance(n):
    h = bell_optimal(math.inf)
    rho = make_family("bell").state(n)
    mean = np.trace(rho @ h).real
    assert mean == pytest.approx(n, abs=1e-12)
    assert np.trace(rho @ h @ h).real - mean**2 == pytest.approx(1 - n * n, abs=1e-12)


@pytest.mark.parametrize("k", [0.5, 2.0])
@pytest.mark.parametrize("n", [0.2, 0.7])
def test_isotropic_variance(k, n):
    h = iso_optimal(k)
    rho = make_family("isotropic").state(n)
    mean = np.trace(rho @ h).real
    assert np.trace(rho @ h @ h).real - mean**2 == pytest.approx((1 - n * n) * k * k / (8 + k) ** 2, rel=1e-10)


SWAP = np.eye(4)[[0, 2, 1, 3]]


@pytest.mark.parametrize("copies", [1, 2])
@pytest.mark.parametrize("k", [0.5, 1.0])
def test_unitary_closed_forms(copies, k):
    # two copies live in the symmetric subspace; the singlet block is free
    p = np.eye(2) if copies == 1 else 0.5 * (np.eye(4) + SWAP)
    h = solve("zrot", k, copies=copies)
    assert np.allclose(p @ h @ p, p @ unitary_optimal(copies, k) @ p, atol=1e-8)


def test_conflicting_labels_give_least_squares_mean():
    fam = make_family("ad")
    ts = build_training_set(fam, [0.5, 0.5])
    object.__setattr__(ts.entries[1], "label", 0.9)
    h = solve_optimal_observable_finite_T(ts, math.inf)
    assert np.trace(fam.state(0.5) @ h).real == pytest.approx(0.7, abs=1e-10)


@pytest.mark.parametrize("name", ["ad", "isotropic"])
def test_finite_training_set_converges(name):
    fam = make_family(name)
    ts = build_training_set(fam, midpoint_labels(fam.a, fam.b, 500))
    h_t = solve_optimal_observable_finite_T(ts, 1.0)
    assert np.linalg.norm(h_t - solve(name, 1.0)) < 1e-3


@pytest.mark.parametrize("name", ["ad", "depolarizing", "isotropic"])
def test_bayesian_equation_and_bound(name):
    problem = OperatorEquationProblem(make_family(name), 1.0)
    m0 = solve_optimal_observable(problem)
    assert bayesian_equation_residual(problem, m0) < 1e-10
    fam = make_family(name)
    nodes, weights = problem.quadrature.nodes_weights(fam.a, fam.b)
    mse = sum(w * (np.trace(fam.state(t) @ (m0 - t * np.eye(2 if name != "isotropic" else 4)) @
                            (m0 - t * np.eye(2 if name != "isotropic" else 4))).real)
              for t, w in zip(nodes, weights)) / fam.length
    assert mse == pytest.approx(bayes_bound(fam, m0).bound, abs=1e-10)


@pytest.mark.parametrize("name", ["ad", "depolarizing", "isotropic"])
@pytest.mark.parametrize("k", [0.1, 0.5, 1.0])
def test_total_variance_identities(name, k):
    problem = OperatorEquationProblem(make_family(name), k)
    checks = total_variance_checks(problem, solve_optimal_observable(problem))
    assert checks.identity_residual < 1e-8
    assert checks.area == pytest.approx(checks.area_target, abs=1e-8)
    assert checks.bound_holds and checks.average_holds


def test_small_k_average_variance_bound():
    problem = OperatorEquationProblem(make_family("ad"), 0.1)
    checks = total_variance_checks(problem, solve_optimal_observable(problem))
    assert checks.total_variance / problem.length <= 0.1 / 12
    assert checks.max_abs_bias > 1e-6


@pytest.mark.parametrize("copies", [1, 2, 3])
@pytest.mark.parametrize("alpha", [0.3, 1.5, 2.8])
def test_fourier_observable(copies, alpha):
    f = fourier_observable(copies)
    assert np.allclose(f, f.conj().T)
    rho = tensor_power(make_family("zrot").state(alpha), copies)
    assert np.trace(rho @ f).real == pytest.approx(fourier_partial_sum(alpha, copies), abs=1e-12)


def test_single_copy_fourier_term():
    assert fourier_partial_sum(0.7, 1) == pytest.approx(2 * math.sin(0.7))


def test_two_copy_operators_on_pure_states():
    rng = np.random.default_rng(0)
    ops = two_copy_bound_operators()
    for _ in range(10):
        psi = haar_random_pure(2, rng)
        rho = np.outer(psi, psi.conj())
        n2 = negativity(rho) ** 2
        both = np.kron(rho, rho)
        for name, op in ops.items():
            mean = np.trace(op @ both).real
            assert mean == pytest.approx(n2, abs=1e-10), name
        m1 = ops["M1"]
        var = np.trace(m1 @ m1 @ both).real - n2**2
        assert var == pytest.approx(4 * n2 - n2**2, abs=1e-10)


def test_two_copy_bounds_on_mixed_states():
    rng = np.random.default_rng(1)
    ops = two_copy_bound_operators()
    for _ in range(200):
        rho = random_mixed_two_qubit(rng)
        both = np.kron(rho, rho)
        for name in ("V1", "V2"):
            assert np.trace(ops[name] @ both).real <= negativity(rho) ** 2 + 1e-12


@pytest.mark.parametrize("s, expected", [(1, -0.1), (2, -9 / 34)])
def test_witness_closed_form(s, expected):
    assert witness_closed_form(s) == pytest.approx(expected)


@pytest.mark.parametrize("s", [1, 2])
def test_witness_haar_average(s):
    value = witness_haar_average(s, 20000, np.random.default_rng(s))
    assert value == pytest.approx(witness_closed_form(s), abs=0.01)
