import io
import math

import numpy as np
import pytest

from wigner_loss.channel import apply_loss
from wigner_loss.closed_forms import w0_odd_cat
from wigner_loss.qpd import (
    CoverageWarning,
    PhaseGrid,
    QpdKernel,
    UnsupportedOrderingError,
    blur_convolve,
    blur_kernel,
    char_fn,
    coherent_qpd,
    lossy_qpd_grid,
    overlap_integral,
    qpd_grid,
    qpd_value,
    w0_parity_series,
)
from wigner_loss.states import (
    coherent_state,
    displace_density,
    fock_state,
    mixed_example_state,
    odd_cat_state,
    squeezed_single_photon,
    vacuum,
)

TWO_OVER_PI = 2 / math.pi


def test_phase_grid_validation_and_axes():
    g = PhaseGrid(1 + 1j, 2.0, 5)
    assert g.spacing == 1.0
    assert g.alphas()[2, 2] == 1 + 1j
    assert g.alphas()[0, 4] == 3 + -1j  # first index is Im
    assert g.contains(3 + 3j) and not g.contains(3.5)
    with pytest.raises(ValueError):
        PhaseGrid(0, 1.0, 4)
    with pytest.raises(ValueError):
        PhaseGrid(0, -1.0, 5)


@pytest.mark.parametrize(
    "rho,alpha,s,expected",
    [
        (vacuum(), 0, 0.0, TWO_OVER_PI),
        (fock_state(1), 0, 0.0, -TWO_OVER_PI),
        (vacuum(), 0, -1.0, 1 / math.pi),
        (fock_state(1), 0.5, 0.0, TWO_OVER_PI * (4 * 0.25 - 1) * math.exp(-0.5)),
    ],
)
def test_known_values(rho, alpha, s, expected):
    assert qpd_value(rho, alpha, s) == pytest.approx(expected, abs=1e-10)


STATES = [fock_state(3), odd_cat_state(1.5), squeezed_single_photon(0.7), mixed_example_state(),
          displace_density(odd_cat_state(1.0), 0.5 + 0.3j)]


@pytest.mark.parametrize("rho", STATES)
@pytest.mark.parametrize("s", [0.0, -0.3, -1.0])
def test_three_evaluators_agree(rho, s):
    for alpha in (0, 0.3 + 0.2j, -1.1 + 0.7j, 2.5 - 1j):
        ref = qpd_value(rho, alpha, s, method="displacement")
        assert qpd_value(rho, alpha, s, method="laguerre") == pytest.approx(ref, abs=1e-9)
        assert qpd_value(rho, alpha, s) == pytest.approx(ref, abs=1e-9)


def test_kernel_reused_for_points():
    rho = odd_cat_state(1.0)
    k = QpdKernel(rho, 0.0)
    pts = np.array([0.1, 0.2j, 1 + 1j])
    assert np.allclose(k(pts), [qpd_value(rho, a, 0.0, method="laguerre") for a in pts], atol=1e-12)


def test_unknown_method_and_positive_s():
    with pytest.raises(UnsupportedOrderingError):
        qpd_value(vacuum(), 0, 0.5)
    with pytest.raises(ValueError):
        qpd_value(vacuum(), 0, 0.0, method="fft")


@pytest.mark.filterwarnings("ignore::wigner_loss.fock.CutoffWarning")
def test_char_fn_values():
    assert char_fn(fock_state(2), 0, -0.5) == 1
    assert char_fn(vacuum(60), 1.0, 0.0) == pytest.approx(math.exp(-0.5), abs=1e-8)
    rng = np.random.default_rng(7)
    rho = fock_state(1)
    for z in rng.normal(size=3) + 1j * rng.normal(size=3):
        c0 = char_fn(rho, z, 0.0)
        c1 = char_fn(rho, z, -1.0)
        assert c1 == pytest.approx(c0 * math.exp(-abs(z) ** 2 / 2), abs=1e-10)


@pytest.mark.filterwarnings("ignore::wigner_loss.fock.CutoffWarning")
@pytest.mark.parametrize("eta", [0.3, 0.8])
@pytest.mark.parametrize("s", [-1.0, -0.5, 0.0])
def test_char_fn_under_loss(eta, s):
    rho = odd_cat_state(1.0)
    lossy = apply_loss(rho, eta)
    for z in (0.4, -0.3 + 0.6j):
        lhs = char_fn(lossy, z, s)
        rhs = char_fn(rho, math.sqrt(eta) * z, s) * math.exp(-(1 - s) * (1 - eta) * abs(z) ** 2 / 2)
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_grid_normalization_and_origin():
    rho = odd_cat_state(1.5)
    g = lossy_qpd_grid(rho, 0.8, 0.0, PhaseGrid(0, 6.0, 201))
    assert g.normalization() == pytest.approx(1.0, abs=1e-6)
    assert g.value_at_center() == pytest.approx(w0_odd_cat(1.5, 0.8), abs=1e-7)


def test_grid_at_half_efficiency_is_nonnegative():
    g = lossy_qpd_grid(fock_state(1), 0.5, 0.0, PhaseGrid(0, 5.0, 201))
    assert g.values.min() >= -1e-9


def test_coverage_warning():
    with pytest.warns(CoverageWarning):
        lossy_qpd_grid(fock_state(1), 1.0, 0.0, PhaseGrid(0, 1.0, 21))


def test_grid_is_independent_of_thread_count(monkeypatch):
    rho = squeezed_single_photon(0.5)
    grid = PhaseGrid(0.1j, 5.0, 101)
    monkeypatch.setattr("wigner_loss.qpd._CHUNK_ELEMENTS", 4096)
    monkeypatch.setenv("WIGNER_LOSS_THREADS", "1")
    one = qpd_grid(rho, grid).values
    monkeypatch.setenv("WIGNER_LOSS_THREADS", "4")
    four = qpd_grid(rho, grid).values
    assert np.array_equal(one, four)


def test_csv_format():
    g = qpd_grid(vacuum(), PhaseGrid(0, 1.0, 3))
    buf = io.StringIO()
    g.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# alpha_re, alpha_im, value"
    assert len(lines) == 10
    centre = lines[5].split(",")
    assert float(centre[0]) == 0 and float(centre[1]) == 0
    assert float(centre[2]) == TWO_OVER_PI


def test_blur_kernel_and_route():
    grid = PhaseGrid(0, 5.0, 201)
    k = blur_kernel(grid.alphas(), 0.0, 0.7)
    assert np.sum(k) * grid.spacing**2 == pytest.approx(1.0, abs=1e-6)
    rho = fock_state(1)
    direct = lossy_qpd_grid(rho, 0.7, 0.0, grid).values
    blurred = blur_convolve(qpd_grid(rho, grid), 0.0, 0.7)
    assert np.max(np.abs(direct - blurred.values)) < 1e-3
    vac = blur_convolve(qpd_grid(vacuum(), grid), 0.0, 0.4)
    assert vac.normalization() == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        blur_convolve(qpd_grid(rho, grid), 0.0, 1.0)


def test_blur_route_fails_on_coarse_grid():
    grid = PhaseGrid(0, 5.0, 21)
    rho = fock_state(1)
    direct = lossy_qpd_grid(rho, 0.7, 0.0, grid, warn=False).values
    blurred = blur_convolve(qpd_grid(rho, grid), 0.0, 0.7).values
    assert np.max(np.abs(direct - blurred)) > 1e-3


@pytest.mark.parametrize("rho", [fock_state(3), odd_cat_state(2.0), mixed_example_state()])
@pytest.mark.parametrize("eta", [0.2, 0.6, 0.9])
def test_parity_series_matches_origin(rho, eta):
    assert w0_parity_series(rho, eta) == pytest.approx(qpd_value(apply_loss(rho, eta), 0, 0.0), abs=1e-10)


def test_parity_series_values():
    assert w0_parity_series(vacuum(), 0.3) == pytest.approx(TWO_OVER_PI)
    assert w0_parity_series(mixed_example_state(), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert w0_parity_series(fock_state(3), 0.9) == pytest.approx(-TWO_OVER_PI * 0.8**3, abs=1e-12)


def test_coherent_qpd_normalized():
    grid = PhaseGrid(0.5, 5.0, 201)
    for s in (0.0, -0.5):
        assert np.sum(coherent_qpd(grid.alphas(), 0.5, s)) * grid.spacing**2 == pytest.approx(1.0, abs=1e-9)


def test_overlap_vacuum_measure():
    grid = PhaseGrid(0, 6.0, 201)
    assert overlap_integral(vacuum(), 0j, 0.0, grid) == pytest.approx(1 / math.pi, abs=1e-6)
    assert overlap_integral(fock_state(1), 0j, 0.0, grid) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("beta", [0j, 0.5, 1 + 0.5j])
def test_overlap_is_s_invariant(beta):
    grid = PhaseGrid(0, 6.0, 201)
    psi = fock_state(1)
    v0 = overlap_integral(psi, beta, 0.0, grid)
    assert overlap_integral(psi, beta, -0.5, grid) == pytest.approx(v0, abs=1e-6)
    # the s -> -1 limit is the Husimi value of psi at beta
    assert overlap_integral(psi, beta, -1.0, grid) == pytest.approx(v0, abs=1e-6)
    assert v0 == pytest.approx(abs(beta) ** 2 * math.exp(-abs(beta) ** 2) / math.pi, abs=1e-6)


def test_overlap_accepts_density_matrix():
    grid = PhaseGrid(0, 6.0, 201)
    v = overlap_integral(fock_state(1), coherent_state(0.5), 0.0, grid)
    assert v == pytest.approx(overlap_integral(fock_state(1), 0.5, 0.0, grid), abs=1e-9)
    with pytest.raises(ValueError):
        overlap_integral(fock_state(1), fock_state(1), 0.0, grid)


@pytest.mark.parametrize("rho", STATES)
def test_husimi_nonnegative(rho):
    g = qpd_grid(rho, PhaseGrid(0, 5.0, 61), -1.0)
    assert g.values.min() >= -1e-10
