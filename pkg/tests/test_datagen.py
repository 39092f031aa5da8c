import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qregress.core import negativity, random_mixed_two_qubit, tensor_product
from qregress.datagen import (FAMILY_NAMES, PLUS_DM, ad_channel, build_training_set, depolarizing_channel,
                              derive_seed, ising_ground_state, ising_hamiltonian, make_family, midpoint_labels,
                              random_labels, sample_mixed_by_negativity, sample_pure_by_negativity,
                              z_rotation_channel)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
CHANNELS = [(ad_channel, 1.0), (depolarizing_channel, 4 / 3), (z_rotation_channel, np.pi)]


def random_qubit_state(rng):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("channel, top", CHANNELS)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(0.0, 1.0))
@settings(max_examples=30, deadline=None)
def test_channels_preserve_trace_and_positivity(channel, top, seed, frac):
    rho = random_qubit_state(np.random.default_rng(seed))
    out = channel(rho, frac * top)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out, out.conj().T)
    assert np.linalg.eigvalsh(out).min() > -1e-12


def test_channel_endpoints():
    assert np.allclose(ad_channel(PLUS_DM, 1.0), np.diag([1, 0]))
    assert np.allclose(depolarizing_channel(PLUS_DM, 1.0), np.eye(2) / 2)
    assert np.allclose(z_rotation_channel(PLUS_DM, np.pi), np.array([[0.5, -0.5], [-0.5, 0.5]]))
    with pytest.raises(ValueError):
        depolarizing_channel(PLUS_DM, 1.5)


def ising_kron(n, h):
    def site(op, q):
        return tensor_product(*[op if i == q else np.eye(2) for i in range(n)])
    ham = np.zeros((2**n, 2**n), dtype=complex)
    for q in range(n):
        ham -= site(Z, q) @ site(Z, (q + 1) % n) + h * site(X, q)
    return ham


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("h", [0.3, 1.0, 1.7])
def test_ising_hamiltonian_matches_kron_oracle(n, h):
    assert np.allclose(ising_hamiltonian(n, h), ising_kron(n, h))


@pytest.mark.parametrize("n", [4, 6])
def test_ising_ground_state_is_lowest_and_energy_decreases(n):
    energies = []
    for h in (0.2, 0.6, 1.0, 1.4):
        psi = ising_ground_state(n, h)
        ham = ising_kron(n, h)
        e = np.vdot(psi, ham @ psi).real
        assert e == pytest.approx(np.linalg.eigvalsh(ham)[0], abs=1e-9)
        energies.append(e)
    assert np.all(np.diff(energies) < 0)


def test_ising_ground_state_sign_is_smooth():
    a, b = ising_ground_state(6, 0.80), ising_ground_state(6, 0.81)
    assert np.linalg.norm(a - b) < 0.05


@pytest.mark.parametrize("squared", [False, True])
def test_pure_sampler_fills_bins_exactly(squared):
    states, negs = sample_pure_by_negativity(40, 10, np.random.default_rng(1), squared=squared)
    values = negs**2 if squared else negs
    counts = np.bincount(np.minimum((values * 10).astype(int), 9), minlength=10)
    assert np.all(counts == 4)
    for psi, n in zip(states, negs):
        assert negativity(np.outer(psi, psi.conj())) == pytest.approx(n, abs=1e-12)


def test_mixed_sampler_fills_bins_with_valid_states():
    states, negs = sample_mixed_by_negativity(30, 10, np.random.default_rng(2))
    counts = np.bincount(np.minimum((negs * 10).astype(int), 9), minlength=10)
    assert np.all(counts == 3)
    for rho in states:
        assert np.linalg.eigvalsh(rho).min() > -1e-12


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_families_give_valid_states_and_derivatives(name):
    params = {"n": 4} if name == "ising" else {}
    fam = make_family(name, **params)
    mid = 0.5 * (fam.a + fam.b)
    rho = fam.state(mid)
    assert np.trace(rho).real == pytest.approx(1.0)
    d = fam.derivative(mid)
    assert abs(np.trace(d)) < 1e-6
    assert np.allclose(d, d.conj().T, atol=1e-8)
    for edge in (fam.a, fam.b):
        assert np.all(np.isfinite(fam.derivative(edge)))


def test_family_copies_and_range():
    fam = make_family("ad", copies=2)
    assert fam.n_qubits == 2
    with pytest.raises(ValueError):
        fam.state(1.5)
    with pytest.raises(ValueError):
        make_family("nope")


def test_label_grids_and_training_set():
    mids = midpoint_labels(0.0, 1.0, 4)
    assert np.allclose(mids, [0.125, 0.375, 0.625, 0.875])
    r = random_labels(0.0, 2.0, 100, np.random.default_rng(0))
    assert r.min() >= 0.0 and r.max() <= 2.0
    ts = build_training_set(make_family("isotropic"), mids, seed=7)
    assert len(ts) == 4 and ts.n_qubits == 2 and ts.label_range == (0.0, 1.0)
    assert np.allclose(ts.labels, mids)


def test_derive_seed_is_deterministic_and_distinct():
    values = {derive_seed(5, i) for i in range(1000)}
    assert len(values) == 1000
    assert derive_seed(5, 3) == derive_seed(5, 3)
    assert derive_seed(5, 3) != derive_seed(6, 3)
    assert all(0 <= v < 2**64 for v in values)


def test_random_mixed_two_qubit_has_full_negativity_range():
    rng = np.random.default_rng(0)
    negs = [negativity(random_mixed_two_qubit(rng)) for _ in range(2000)]
    assert min(negs) == 0.0 and max(negs) > 0.3
