import numpy as np
import pytest

from wigner_loss.channel import (
    EfficiencyError,
    apply_loss,
    beamsplitter_oracle,
    beamsplitter_unitary,
    kraus_operators,
    map_s,
)
from wigner_loss.fock import ladder_operators, validate_density
from wigner_loss.states import coherent_state, fock_state, mixed_example_state, odd_cat_state, vacuum


def test_kraus_completeness():
    ops = kraus_operators(0.6, 12)
    total = sum(K.conj().T @ K for K in ops)
    assert np.allclose(total, np.eye(12), atol=1e-13)


def test_identity_channel():
    rho = odd_cat_state(1.0)
    assert np.allclose(apply_loss(rho, 1.0), rho, atol=1e-12)


def test_fock1_loses_a_photon_with_probability_one_minus_eta():
    out = apply_loss(fock_state(1), 0.75)
    assert np.allclose(out[:2, :2], np.diag([0.25, 0.75]), atol=1e-14)


def test_coherent_amplitude_shrinks_by_sqrt_eta():
    out = apply_loss(coherent_state(1.0), 0.64)
    ref = coherent_state(0.8, cutoff=len(out))
    assert np.max(np.abs(out - ref)) < 1e-8


def test_total_loss_gives_vacuum():
    out = apply_loss(odd_cat_state(1.5), 0.0)
    assert out[0, 0].real == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eta", [0.1, 0.5, 0.9])
def test_loss_preserves_validity(eta):
    d = validate_density(apply_loss(odd_cat_state(2.0), eta))
    assert d.trace_defect < 1e-10
    assert d.min_eigenvalue > -1e-12


@pytest.mark.parametrize("eta", [-0.1, 1.5, float("nan")])
def test_bad_efficiency(eta):
    with pytest.raises(EfficiencyError):
        apply_loss(vacuum(), eta)


def test_beamsplitter_transforms_mode_operator():
    eta, dim = 0.3, 6
    U = beamsplitter_unitary(eta, dim, dim)
    a, _ = ladder_operators(dim)
    eye = np.eye(dim)
    A, B = np.kron(a, eye), np.kron(eye, a)
    lhs = U.conj().T @ A @ U
    rhs = np.sqrt(eta) * A + np.sqrt(1 - eta) * B
    # compare on states with at most dim-2 total photons, away from the cutoff
    n = np.add.outer(np.arange(dim), np.arange(dim)).ravel()
    low = n <= dim - 2
    assert np.allclose(lhs[np.ix_(low, low)], rhs[np.ix_(low, low)], atol=1e-12)


@pytest.mark.parametrize(
    "rho,eta",
    [(fock_state(3), 0.6), (mixed_example_state(), 0.55), (odd_cat_state(1.0), 0.75)],
)
def test_kraus_matches_beamsplitter(rho, eta):
    assert np.max(np.abs(apply_loss(rho, eta) - beamsplitter_oracle(rho, eta))) < 1e-9


def test_beamsplitter_vacuum_and_identity():
    assert np.allclose(beamsplitter_oracle(vacuum(), 0.3), vacuum(), atol=1e-12)
    rho = fock_state(2)
    assert np.allclose(beamsplitter_oracle(rho, 1.0), rho, atol=1e-10)


def test_beamsplitter_memory_guard():
    with pytest.raises(MemoryError):
        beamsplitter_oracle(fock_state(1, cutoff=60), 0.5)
    with pytest.raises(ValueError):
        beamsplitter_oracle(fock_state(1), 0.5, bath_dim=2)


def test_map_s():
    assert map_s(0.0, 0.5) == pytest.approx(-1.0)
    assert map_s(-1.0, 1.0) == pytest.approx(-1.0)
    s = np.linspace(-1, 0, 5)
    assert np.all(np.diff([map_s(x, 0.7) for x in s]) > 0)
    with pytest.raises(ZeroDivisionError):
        map_s(0.0, 0.0)
