"""Property battery behind ``wigner-loss verify``.

Each check returns a :class:`PropertyResult`; the run passes only if all do.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import apply_loss, beamsplitter_oracle, map_s
from .closed_forms import (
    CURVE_FAMILIES,
    CURVE_N_BARS,
    abs_w0_curve,
    asymptote_w0,
    epsilon_samples,
    family_params_for_mean,
    log_slope_at_zero,
    w0_closed_form,
)
from .negativity import default_grid, find_min, negative_volume, threshold_eta
from .qpd import PhaseGrid, blur_convolve, char_fn, lossy_qpd_grid, overlap_integral, qpd_grid, qpd_value, w0_parity_series
from .fock import CutoffWarning
from .states import StateSpec, fock_state, vacuum

ETA_STEPS = tuple(round(0.5 + 0.05 * i, 2) for i in range(11))

PURE_NEGATIVE = (
    StateSpec("fock", {"n": 1}),
    StateSpec("fock", {"n": 3}),
    StateSpec("odd_cat", {"alpha0": 1.0}),
    StateSpec("odd_cat", {"alpha0": 2.0}),
    StateSpec("squeezed_single_photon", {"r": 1.0}),
)
TEST_STATES = PURE_NEGATIVE + (StateSpec("mixed_example"), StateSpec("coherent", {"alpha": 1.0}))

THRESHOLD_CASES = (
    (StateSpec("fock", {"n": 1}), 0.5),
    (StateSpec("fock", {"n": 3}), 0.5),
    (StateSpec("odd_cat", {"alpha0": 1.0}), 0.5),
    (StateSpec("odd_cat", {"alpha0": 1.5}), 0.5),
    (StateSpec("odd_cat", {"alpha0": 2.0}), 0.5),
    (StateSpec("squeezed_single_photon", {"r": 1.0}), 0.5),
    (StateSpec("mixed_example"), 0.875),
    (StateSpec("coherent", {"alpha": 1.0}), None),
)

FOCK1_NEGATIVE_VOLUME = 2.0 * (2.0 * math.exp(-0.5) - 1.0)


@dataclass(frozen=True)
class VerifyConfig:
    tail_tol: float = 1e-10
    points: int = 201
    extent: float | None = None
    tol: float = 1e-3

    def __post_init__(self):
        if not (self.tail_tol > 0 and self.tol > 0):
            raise ValueError("tolerances must be positive")
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError(f"points per axis must be odd and >= 3, got {self.points}")
        if self.extent is not None and not self.extent > 0:
            raise ValueError(f"extent must be positive, got {self.extent}")

    def grid_for(self, rho: np.ndarray) -> PhaseGrid:
        auto = default_grid(rho, self.points)
        if self.extent is None:
            return auto
        return PhaseGrid(auto.center, self.extent, self.points)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "metrics": self.metrics,
        }


def _label(spec: StateSpec) -> str:
    params = ",".join(f"{k}={v}" for k, v in spec.params.items())
    return f"{spec.family}({params})"


def check_closed_forms(cfg: VerifyConfig) -> PropertyResult:
    worst, worst_case, max_abs = 0.0, "", 0.0
    for family in CURVE_FAMILIES:
        n_bars = (1, 3, 11, 31, 101) if family == "fock" else (1, 3, 11)
        for n_bar in n_bars:
            spec = family_params_for_mean(family, n_bar)
            rho = spec.build(cfg.tail_tol)
            for eta in ETA_STEPS:
                numeric = w0_parity_series(apply_loss(rho, eta), 1.0)
                closed = w0_closed_form(spec, eta)
                err = abs(numeric - closed)
                ratio = err / max(1e-10, 1e-6 * abs(closed))
                max_abs = max(max_abs, err)
                if ratio > worst:
                    worst, worst_case = ratio, f"{family} n_bar={n_bar} eta={eta}"
    passed = worst <= 1.0
    detail = f"worst residual/tolerance {worst:.3g} at {worst_case}; max |residual| {max_abs:.3g}"
    return PropertyResult("closed_form_agreement", passed, detail, {"worst_ratio": worst, "max_residual": max_abs})


def check_kraus_vs_beamsplitter(cfg: VerifyConfig) -> PropertyResult:
    worst = 0.0
    cases = [(fock_state(3), 0.6), (fock_state(1), 0.75), (StateSpec("mixed_example").build(), 0.55)]
    cases += [(StateSpec("odd_cat", {"alpha0": 1.0}).build(cfg.tail_tol), eta) for eta in (0.55, 0.75, 0.95)]
    for rho, eta in cases:
        if len(rho) ** 2 > 2500:
            continue
        worst = max(worst, float(np.max(np.abs(apply_loss(rho, eta) - beamsplitter_oracle(rho, eta)))))
    return PropertyResult(
        "kraus_vs_beamsplitter", worst <= 1e-8, f"max |rho_kraus - rho_bs| = {worst:.3g} (limit 1e-8)", {"max_dev": worst}
    )


def check_blur_route(cfg: VerifyConfig) -> PropertyResult:
    rho, eta = fock_state(1), 0.7
    grid = PhaseGrid(0j, cfg.extent if cfg.extent is not None else 5.0, cfg.points)
    direct = lossy_qpd_grid(rho, eta, 0.0, grid, warn=False).values
    blurred = blur_convolve(qpd_grid(rho, grid, 0.0), 0.0, eta).values
    dev = float(np.max(np.abs(direct - blurred)))
    passed = dev < 1e-3
    detail = f"max |kraus - blur| = {dev:.3g} (limit 1e-3) at spacing {grid.spacing:.3g}"
    if not passed:
        detail += "; discretization too coarse for the blur quadrature"
    return PropertyResult("blur_route", passed, detail, {"max_dev": dev, "spacing": grid.spacing})


def check_char_fn_loss(cfg: VerifyConfig) -> PropertyResult:
    zs = [0.3, 0.5j, -0.4 + 0.7j, 1.0 - 0.2j, 1.2j]
    worst = 0.0
    with warnings.catch_warnings():
        # D(iz) is built on a padded space, so the cutoff warning is moot for traces
        warnings.simplefilter("ignore", CutoffWarning)
        for spec in (StateSpec("fock", {"n": 1}), StateSpec("odd_cat", {"alpha0": 1.0}), StateSpec("mixed_example")):
            rho = spec.build(cfg.tail_tol)
            for eta in (0.3, 0.7):
                lossy = apply_loss(rho, eta)
                for s in (-1.0, -0.5, 0.0):
                    for z in zs:
                        lhs = char_fn(lossy, z, s)
                        damp = math.exp(-(1 - s) * (1 - eta) * abs(z) ** 2 / 2)
                        gauss = char_fn(rho, math.sqrt(eta) * z, s) * damp
                        mapped = char_fn(rho, math.sqrt(eta) * z, map_s(s, eta))
                        worst = max(worst, abs(lhs - gauss), abs(lhs - mapped))
    return PropertyResult(
        "char_fn_loss_relations", worst <= 1e-8, f"max deviation {worst:.3g} (limit 1e-8)", {"max_dev": worst}
    )


def check_overlap_invariance(cfg: VerifyConfig) -> PropertyResult:
    grid = PhaseGrid(0j, cfg.extent if cfg.extent is not None else 6.0, cfg.points)
    psi = fock_state(1)
    worst = 0.0
    values = {}
    for beta in (0j, 0.5 + 0j, 1 + 0.5j):
        v0 = overlap_integral(psi, beta, 0.0, grid)
        v5 = overlap_integral(psi, beta, -0.5, grid)
        exact = abs(beta) ** 2 * math.exp(-abs(beta) ** 2) / math.pi
        values[f"{beta.real:g}{beta.imag:+g}i"] = [v0, v5]
        worst = max(worst, abs(v0 - v5), abs(v0 - exact))
    vac = overlap_integral(vacuum(), 0j, 0.0, grid)
    worst = max(worst, abs(vac - 1 / math.pi))
    detail = f"max |I(s=0) - I(s=-0.5)| and deviation from Tr(rho_psi rho_beta)/pi: {worst:.3g} (limit 1e-6)"
    return PropertyResult("overlap_s_invariance", worst <= 1e-6, detail, {"max_dev": worst, "values": values})


def _scan(cfg: VerifyConfig, specs, etas, predicate, name, describe):
    failures, lowest = [], {}
    for spec in specs:
        rho = spec.build(cfg.tail_tol)
        grid = cfg.grid_for(rho)
        for eta in etas:
            _, val = find_min(rho, eta, grid)
            lowest[f"{_label(spec)} eta={eta}"] = val
            if not predicate(val):
                failures.append(f"{_label(spec)} at eta={eta}: min {val:.3g}")
    passed = not failures
    return PropertyResult(name, passed, describe if passed else "; ".join(failures), {"min_values": lowest})


def check_sufficiency(cfg: VerifyConfig) -> PropertyResult:
    return _scan(
        cfg, PURE_NEGATIVE, (0.51, 0.6, 0.75, 0.9), lambda v: v < 0, "sufficiency", "all pure states negative above eta=1/2"
    )


def check_necessity(cfg: VerifyConfig) -> PropertyResult:
    return _scan(
        cfg, TEST_STATES, (0.5, 0.4, 0.25), lambda v: v >= -1e-9, "necessity", "no negativity at eta <= 1/2 (floor -1e-9)"
    )


def check_half_grid(cfg: VerifyConfig) -> PropertyResult:
    """Whole Wigner grid at eta = 1/2 is a Husimi function, hence >= -1e-9."""
    lowest = {}
    for spec in TEST_STATES:
        rho = spec.build(cfg.tail_tol)
        lowest[_label(spec)] = float(lossy_qpd_grid(rho, 0.5, 0.0, cfg.grid_for(rho), warn=False).values.min())
    worst = min(lowest.values())
    return PropertyResult("half_efficiency_grid", worst >= -1e-9, f"lowest grid value {worst:.3g}", {"grid_min": lowest})


def check_monotonicity(cfg: VerifyConfig) -> PropertyResult:
    failures, curves = [], {}
    for spec in PURE_NEGATIVE + (StateSpec("mixed_example"),):
        rho = spec.build(cfg.tail_tol)
        grid = cfg.grid_for(rho)
        mins = [find_min(rho, eta, grid)[1] for eta in ETA_STEPS]
        curves[_label(spec)] = mins
        if any(b > a + 1e-9 for a, b in zip(mins, mins[1:])):
            failures.append(_label(spec))
    detail = "min value non-increasing in eta" if not failures else f"increases for {', '.join(failures)}"
    return PropertyResult("monotonicity", not failures, detail, {"min_values": curves})


def check_thresholds(cfg: VerifyConfig) -> PropertyResult:
    found, failures = {}, []
    for spec, expected in THRESHOLD_CASES:
        rho = spec.build(cfg.tail_tol)
        eta_star = threshold_eta(rho, cfg.tol, cfg.grid_for(rho))
        found[_label(spec)] = eta_star
        if expected is None:
            ok = eta_star is None
        else:
            ok = eta_star is not None and abs(eta_star - expected) <= cfg.tol
        if not ok:
            failures.append(f"{_label(spec)}: got {eta_star}, expected {expected}")
    detail = "all thresholds within tolerance" if not failures else "; ".join(failures)
    return PropertyResult("thresholds", not failures, detail, {"eta_star": found, "tol": cfg.tol})


def check_husimi(cfg: VerifyConfig) -> PropertyResult:
    worst = math.inf
    for spec in TEST_STATES:
        rho = spec.build(cfg.tail_tol)
        grid = cfg.grid_for(rho)
        for eta in (1.0, 0.7):
            worst = min(worst, float(lossy_qpd_grid(rho, eta, -1.0, grid, warn=False).values.min()))
    return PropertyResult("husimi_nonnegative", worst >= -1e-9, f"lowest Q value {worst:.3g}", {"min_q": worst})


def check_normalization(cfg: VerifyConfig) -> PropertyResult:
    worst = 0.0
    for spec in TEST_STATES + (StateSpec("fock", {"n": 0}),):
        rho = spec.build(cfg.tail_tol)
        grid = cfg.grid_for(rho)
        for eta, s in ((1.0, 0.0), (0.8, 0.0), (0.6, -0.5)):
            worst = max(worst, abs(lossy_qpd_grid(rho, eta, s, grid, warn=False).normalization() - 1.0))
    return PropertyResult("normalization", worst <= 1e-5, f"max |sum W h^2 - 1| = {worst:.3g}", {"max_dev": worst})


def check_origin_series(cfg: VerifyConfig) -> PropertyResult:
    worst = 0.0
    for spec in TEST_STATES:
        rho = spec.build(cfg.tail_tol)
        for eta in (0.3, 0.6, 0.9):
            worst = max(worst, abs(w0_parity_series(rho, eta) - qpd_value(apply_loss(rho, eta), 0j, 0.0)))
    return PropertyResult("parity_series_at_origin", worst < 1e-10, f"max deviation {worst:.3g}", {"max_dev": worst})


def check_negative_volume(cfg: VerifyConfig) -> PropertyResult:
    rho = fock_state(1)
    grid = cfg.grid_for(rho)
    full = negative_volume(rho, 1.0, grid)
    half = negative_volume(rho, 0.5, grid)
    vac = negative_volume(vacuum(), 1.0, cfg.grid_for(vacuum()))
    passed = abs(full - FOCK1_NEGATIVE_VOLUME) <= 1e-3 and half <= 1e-6 and vac <= 1e-6
    detail = f"fock(1): {full:.6f} vs radial {FOCK1_NEGATIVE_VOLUME:.6f}; eta=1/2: {half:.3g}; vacuum: {vac:.3g}"
    return PropertyResult("negative_volume", passed, detail, {"fock1": full, "fock1_half": half, "vacuum": vac})


def check_curves(cfg: VerifyConfig) -> PropertyResult:
    eps = epsilon_samples()
    problems = []
    for n_bar in CURVE_N_BARS:
        for family in CURVE_FAMILIES:
            curve = abs_w0_curve(family, n_bar, eps)
            ok = curve[~np.isnan(curve)]
            if np.any(np.diff(ok) >= 0):
                problems.append(f"{family} n_bar={n_bar} not decreasing")
    slope = log_slope_at_zero("fock", 101)
    if abs(slope - 2.0) > 0.05:
        problems.append(f"fock n_bar=101 log-slope {slope:.4f} not 2 +- 0.05")
    sqz = abs(w0_closed_form(family_params_for_mean("squeezed_single_photon", 11), 1.0 - 1.0 / 11))
    asy = abs(asymptote_w0(1.0))
    departure = abs(sqz - asy) / asy
    if departure <= 0.10:
        problems.append(f"squeezed n_bar=11 departs from exp(-eps) by only {departure:.3g}")
    detail = "curves decreasing; rate-2 decay; squeezed departs from asymptote" if not problems else "; ".join(problems)
    return PropertyResult(
        "w0_curves", not problems, detail, {"fock101_log_slope": slope, "squeezed_departure_eps1_nbar11": departure}
    )


def check_recentring(cfg: VerifyConfig) -> PropertyResult:
    gamma = 1.0 + 0.5j
    rho = StateSpec("odd_cat", {"alpha0": 1.0, "displacement": [gamma.real, gamma.imag]}).build(cfg.tail_tol)
    grid = cfg.grid_for(rho)
    worst = 0.0
    for eta in (0.6, 0.8):
        loc, _ = find_min(rho, eta, grid)
        worst = max(worst, abs(loc - math.sqrt(eta) * gamma))
    return PropertyResult("recentring", worst <= 1e-4, f"max |loc - sqrt(eta) gamma| = {worst:.3g}", {"max_dev": worst})


def check_off_origin_minimum(cfg: VerifyConfig) -> PropertyResult:
    rho = StateSpec("mixed_example").build()
    loc, val = find_min(rho, 1.0, cfg.grid_for(rho))
    origin = qpd_value(rho, 0j, 0.0)
    passed = val < -1e-9 and abs(loc) > 1e-3 and abs(origin) < 1e-12
    detail = f"mixed example: min {val:.6g} at {loc:.6g}, W(0) = {origin:.3g}"
    return PropertyResult("mixed_off_origin_minimum", passed, detail, {"min_value": val, "location": [loc.real, loc.imag]})


CHECKS = (
    check_closed_forms,
    check_kraus_vs_beamsplitter,
    check_blur_route,
    check_char_fn_loss,
    check_overlap_invariance,
    check_origin_series,
    check_husimi,
    check_normalization,
    check_half_grid,
    check_necessity,
    check_sufficiency,
    check_monotonicity,
    check_thresholds,
    check_negative_volume,
    check_curves,
    check_recentring,
    check_off_origin_minimum,
)


def run_verify(cfg: VerifyConfig | None = None, checks=None, log=None) -> list[PropertyResult]:
    cfg = VerifyConfig() if cfg is None else cfg
    checks = CHECKS if checks is None else checks
    results = []
    for check in checks:
        start = time.perf_counter()
        try:
            res = check(cfg)
        except Exception as exc:  # a crashing check is a failing property
            res = PropertyResult(check.__name__.removeprefix("check_"), False, f"{type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        results.append(res)
        if log is not None:
            log(res)
    return results
