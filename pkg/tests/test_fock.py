import math

import numpy as np
import pytest

from wigner_loss.fock import (
    CutoffError,
    CutoffWarning,
    check_cutoff,
    displace_ket,
    displacement_operator,
    ladder_operators,
    number_operator,
    parity_operator,
    squeeze_ket,
    squeeze_operator,
    tail_mass,
    validate_density,
)


def coherent_amplitudes(alpha, dim):
    m = np.arange(dim)
    logs = np.array([0.5 * math.lgamma(k + 1) for k in m])
    return np.exp(-abs(alpha) ** 2 / 2) * np.power(complex(alpha), m) / np.exp(logs)


@pytest.mark.parametrize("dim", [2, 5, 30])
def test_ladder_commutator_is_identity_below_edge(dim):
    a, ad = ladder_operators(dim)
    comm = a @ ad - ad @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)
    assert np.allclose(ad @ a, number_operator(dim))


def test_parity_diagonal():
    assert np.array_equal(np.diag(parity_operator(5)).real, [1, -1, 1, -1, 1])


@pytest.mark.parametrize("bad", [0, 1, 2.5, -3])
def test_check_cutoff_rejects(bad):
    with pytest.raises(CutoffError):
        check_cutoff(bad)


@pytest.mark.parametrize("alpha", [0.3, 1.2 - 0.4j, -2.0j])
def test_displacement_first_column_is_coherent(alpha):
    D = displacement_operator(alpha, 40)
    assert np.allclose(D[:, 0], coherent_amplitudes(alpha, 40), atol=1e-13)


def test_displacement_composition_near_identity():
    D = displacement_operator(0.7 + 0.2j, 40)
    Dm = displacement_operator(-0.7 - 0.2j, 40)
    assert np.allclose((D @ Dm)[:10, :10], np.eye(10), atol=1e-12)


def test_displacement_warns_for_large_amplitude():
    with pytest.warns(CutoffWarning):
        displacement_operator(3.0, 8)


def test_squeezed_vacuum_amplitudes():
    r = 0.6
    S = squeeze_operator(r, 40)
    n = np.arange(10)
    expected = np.tanh(r) ** n * np.sqrt([math.factorial(2 * k) for k in n]) / (2.0**n * np.array(
        [math.factorial(k) for k in n])) / math.sqrt(math.cosh(r))
    assert np.allclose(S[0:20:2, 0], expected, atol=1e-13)
    assert np.allclose(S[1:20:2, 0], 0.0, atol=1e-15)


def test_squeeze_operator_rejects_small_cutoff():
    with pytest.raises(CutoffError):
        squeeze_operator(2.0, 10)


def test_kets_match_operators():
    ket = np.zeros(30, dtype=complex)
    ket[1] = 1.0
    assert np.allclose(displace_ket(0.5j, ket), displacement_operator(0.5j, 30) @ ket, atol=1e-12)
    assert np.allclose(squeeze_ket(0.4, ket), squeeze_operator(0.4, 30) @ ket, atol=1e-12)


def test_validate_density_flags():
    good = np.diag([0.5, 0.5, 0, 0]).astype(complex)
    assert validate_density(good).valid
    bad = np.diag([0.5, 0.6, 0, 0]).astype(complex)
    assert "trace" in validate_density(bad).flags()
    neg = np.array([[1.2, 0, 0], [0, -0.2, 0], [0, 0, 0]], dtype=complex)
    assert "positivity" in validate_density(neg).flags()
    tail = np.diag([0.5, 0, 0.5]).astype(complex)
    assert tail_mass(tail) == pytest.approx(0.5)
    assert "tail_mass" in validate_density(tail).flags()
    with pytest.raises(ValueError):
        validate_density(np.zeros((2, 3)))
