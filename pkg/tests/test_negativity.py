import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from wigner_loss.negativity import (
    NegativityReport,
    default_grid,
    find_min,
    golden_section,
    is_negative,
    negative_volume,
    negativity_report,
    refine_minimum,
    threshold_eta,
)
from wigner_loss.qpd import PhaseGrid, qpd_value
from wigner_loss.states import (
    StateSpec,
    coherent_state,
    fock_state,
    mixed_example_state,
    vacuum,
)


def radial_negative_volume_fock1():
    """int |W| d^2 alpha - 1 for W = (2/pi)(4r^2 - 1) exp(-2r^2), by numerical quadrature."""
    integrand = lambda r: abs(2 / math.pi * (4 * r * r - 1) * math.exp(-2 * r * r)) * 2 * math.pi * r
    inner, _ = quad(integrand, 0, 0.5)
    outer, _ = quad(integrand, 0.5, np.inf)
    return inner + outer - 1


def test_golden_section():
    x, fx = golden_section(lambda u: (u - 0.3) ** 2, -1, 2, 1e-10)
    assert x == pytest.approx(0.3, abs=1e-9)
    assert fx < 1e-18


def test_refine_minimum_2d():
    f = lambda a: (a.real - 0.2) ** 2 + 2 * (a.imag + 0.1) ** 2
    loc, val = refine_minimum(f, 0.5 + 0.5j, 1.0, PhaseGrid(0, 2.0, 11))
    assert abs(loc - (0.2 - 0.1j)) < 1e-6


def test_fock1_minimum_at_origin():
    loc, val = find_min(fock_state(1), 1.0, default_grid(fock_state(1)))
    assert abs(loc) < 1e-8
    assert val == pytest.approx(-2 / math.pi, abs=1e-8)


@pytest.mark.parametrize("eta", [1.0, 0.6])
def test_vacuum_and_coherent_never_negative(eta):
    for rho in (vacuum(), coherent_state(1.0)):
        assert find_min(rho, eta, default_grid(rho))[1] >= -1e-9


def test_mixed_minimum_is_off_origin():
    rho = mixed_example_state()
    loc, val = find_min(rho, 1.0, default_grid(rho))
    assert qpd_value(rho, 0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert val < -0.07 and abs(loc) > 0.2
    # stationary point of (2x^2 + x) exp(-2x^2): 8x^3 + 4x^2 - 4x - 1 = 0
    roots = np.roots([8, 4, -4, -1])
    x = min(r.real for r in roots if abs(r.imag) < 1e-12 and -0.5 < r.real < 0)
    assert loc.real == pytest.approx(x, abs=1e-6)


def test_minimum_found_between_grid_points():
    # the mixed state's negative dip is narrower than this grid's spacing near threshold
    rho = mixed_example_state()
    grid = PhaseGrid(0.25, 5.5, 41)
    assert find_min(rho, 0.876, grid, refine=False)[1] > 0
    assert find_min(rho, 0.876, grid)[1] < -1e-4


def test_recentring_for_displaced_cat():
    gamma = 1 + 0.5j
    rho = StateSpec("odd_cat", {"alpha0": 1.0, "displacement": [1, 0.5]}).build()
    loc, _ = find_min(rho, 0.8, default_grid(rho))
    assert abs(loc - math.sqrt(0.8) * gamma) < 1e-4


def test_negative_volume_fock1_oracle():
    grid = PhaseGrid(0, 6.0, 201)
    delta = negative_volume(fock_state(1), 1.0, grid)
    oracle = radial_negative_volume_fock1()
    assert oracle == pytest.approx(2 * (2 * math.exp(-0.5) - 1), abs=1e-12)
    assert delta == pytest.approx(oracle, abs=1e-3)
    assert negative_volume(fock_state(1), 0.5, grid) <= 1e-6
    assert negative_volume(vacuum(), 1.0, grid) == 0.0


def test_report_serialization():
    rep = negativity_report(fock_state(1), 0.8)
    doc = json.loads(json.dumps(rep.to_dict()))
    assert set(doc) == {"eta", "min_location", "min_value", "negative_volume", "grid_meta", "refined"}
    assert doc["min_value"] == pytest.approx(-2 / math.pi * 0.6, abs=1e-9)
    assert doc["negative_volume"] > 0
    assert isinstance(rep, NegativityReport)


def test_is_negative():
    grid = default_grid(fock_state(1))
    assert is_negative(fock_state(1), 0.52, grid)
    assert not is_negative(fock_state(1), 0.48, grid)


@pytest.mark.parametrize(
    "spec,expected",
    [
        (StateSpec("mixed_example"), 0.875),
        (StateSpec("fock", {"n": 3}), 0.5),
        (StateSpec("odd_cat", {"alpha0": 1.5}), 0.5),
    ],
)
def test_threshold(spec, expected):
    assert threshold_eta(spec, tol=1e-3) == pytest.approx(expected, abs=1e-3)


def test_threshold_none_for_gaussian():
    assert threshold_eta(StateSpec("coherent", {"alpha": 1.0})) is None


def test_threshold_tolerance_floor():
    with pytest.raises(ValueError):
        threshold_eta(fock_state(1), tol=1e-5)


def test_mixed_threshold_brackets_seven_eighths():
    rho = mixed_example_state()
    grid = default_grid(rho)
    assert find_min(rho, 0.88, grid)[1] < -1e-9
    assert find_min(rho, 0.87, grid)[1] >= -1e-9
