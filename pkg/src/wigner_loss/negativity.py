"""Negativity measures of lossy Wigner functions and the efficiency threshold where they vanish."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import apply_loss, check_eta
from .qpd import PhaseGrid, QpdKernel, lossy_qpd_grid
from .states import StateSpec, mean_quanta

NOISE_FLOOR = 1e-9
VOLUME_NOISE = 1e-8
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class NegativityReport:
    eta: float
    min_location: complex
    min_value: float
    negative_volume: float
    grid_meta: PhaseGrid
    refined: bool

    def to_dict(self) -> dict:
        loc = complex(self.min_location)
        return {
            "eta": self.eta,
            "min_location": [loc.real, loc.imag],
            "min_value": self.min_value,
            "negative_volume": self.negative_volume,
            "grid_meta": self.grid_meta.to_dict(),
            "refined": self.refined,
        }


def golden_section(f, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Minimize a unimodal scalar function on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def refine_minimum(f, start: complex, step: float, bounds: PhaseGrid, tol: float = 1e-6, max_sweeps: int = 50):
    """Alternating golden-section descent along Re and Im from ``start``.

    Each line search spans +-``step`` around the current point, clipped to the
    grid. Stops once a full sweep moves the point by less than ``tol``.
    """
    lo_re = bounds.center.real - bounds.half_extent
    hi_re = bounds.center.real + bounds.half_extent
    lo_im = bounds.center.imag - bounds.half_extent
    hi_im = bounds.center.imag + bounds.half_extent
    x, y = start.real, start.imag
    best = f(complex(x, y))
    for _ in range(max_sweeps):
        x0, y0 = x, y
        nx, fx = golden_section(lambda u: f(complex(u, y)), max(lo_re, x - step), min(hi_re, x + step), tol / 10)
        if fx <= best:
            x, best = nx, fx
        ny, fy = golden_section(lambda v: f(complex(x, v)), max(lo_im, y - step), min(hi_im, y + step), tol / 10)
        if fy <= best:
            y, best = ny, fy
        if math.hypot(x - x0, y - y0) < tol:
            break
    return complex(x, y), best


def _candidate_starts(values: np.ndarray, limit: int = 6) -> list[tuple[int, int]]:
    """Global grid minimum plus the lowest significant interior local minima.

    A dip whose negative part is narrower than the grid spacing shows up only
    as a local minimum of small positive value, so those get refined too.
    Minima at numerically vanishing values (far field) are skipped.
    """
    starts = [np.unravel_index(np.argmin(values), values.shape)]
    inner = values[1:-1, 1:-1]
    is_min = np.ones(inner.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= inner <= values[1 + di : values.shape[0] - 1 + di, 1 + dj : values.shape[1] - 1 + dj]
    scale = float(np.max(np.abs(values)))
    significant = is_min & ((inner < 0) | ((inner > 1e-10 * scale) & (inner < 0.05 * scale)))
    idx = np.argwhere(significant)
    order = np.argsort(inner[significant], kind="stable")
    for i, j in idx[order][:limit]:
        cand = (int(i) + 1, int(j) + 1)
        if cand not in starts:
            starts.append(cand)
    return starts


def find_min(rho: np.ndarray, eta: float, grid: PhaseGrid, refine: bool = True) -> tuple[complex, float]:
    """Global minimum of the lossy Wigner function: grid scan, then local refinement."""
    eta = check_eta(eta)
    lossy = apply_loss(rho, eta)
    coarse = lossy_qpd_grid(lossy, 1.0, 0.0, grid)
    return _refine_grid_min(lossy, coarse.values, grid) if refine else coarse.min()


def _refine_grid_min(lossy: np.ndarray, values: np.ndarray, grid: PhaseGrid) -> tuple[complex, float]:
    kernel = QpdKernel(lossy, 0.0)
    alphas = grid.alphas()
    i, j = np.unravel_index(np.argmin(values), values.shape)
    best_loc, best_val = complex(alphas[i, j]), float(values[i, j])
    clearly_negative = best_val < -NOISE_FLOOR
    for i, j in _candidate_starts(values):
        # once the grid is clearly negative, only dips of comparable depth can
        # win; shallow ones (including truncation noise) are not refined
        if clearly_negative and values[i, j] > 0.5 * best_val:
            continue
        cand_loc, cand_val = refine_minimum(kernel.value, complex(alphas[i, j]), grid.spacing, grid)
        if cand_val < best_val:
            best_loc, best_val = cand_loc, cand_val
    return best_loc, best_val


def negative_volume(rho: np.ndarray, eta: float, grid: PhaseGrid) -> float:
    """sum |W| h^2 - 1, i.e. twice the integrated magnitude of the negative part."""
    w = lossy_qpd_grid(rho, eta, 0.0, grid)
    delta = float(np.sum(np.abs(w.values)) * grid.spacing**2 - 1.0)
    return 0.0 if delta < VOLUME_NOISE else delta


def default_grid(rho: np.ndarray, points: int = 201) -> PhaseGrid:
    """Grid centred on <a>, covering the photon number and 6 sigma of the widest quadrature."""
    rho = np.asarray(rho, dtype=complex)
    dim = len(rho)
    sq = np.sqrt(np.arange(1, dim))
    beta = complex(np.sum(sq * np.diag(rho, k=-1)))
    a2 = complex(np.sum(sq[:-1] * sq[1:] * np.diag(rho, k=-2))) if dim > 2 else 0j
    n = mean_quanta(rho)
    # covariance of (Re alpha, Im alpha); the vacuum has 1/4 on the diagonal
    xx = (2 * a2.real + 2 * n + 1) / 4 - beta.real**2
    pp = (-2 * a2.real + 2 * n + 1) / 4 - beta.imag**2
    xp = a2.imag / 2 - beta.real * beta.imag
    sigma = math.sqrt(max(np.linalg.eigvalsh(np.array([[xx, xp], [xp, pp]]))))
    base = PhaseGrid.covering(max(n - abs(beta) ** 2, 0.0), points)
    center = complex(round(beta.real, 12), round(beta.imag, 12))
    return PhaseGrid(center, max(base.half_extent, 6.0 * sigma), points)


def negativity_report(rho: np.ndarray, eta: float, grid: PhaseGrid | None = None) -> NegativityReport:
    eta = check_eta(eta)
    grid = default_grid(rho) if grid is None else grid
    loc, val = find_min(rho, eta, grid)
    return NegativityReport(eta, loc, val, negative_volume(rho, eta, grid), grid, True)


def is_negative(rho: np.ndarray, eta: float, grid: PhaseGrid, noise: float = NOISE_FLOOR) -> bool:
    """Whether the refined Wigner minimum lies below -noise.

    Refinement can only lower the grid minimum, so it is skipped when a grid
    sample is already below -noise.
    """
    lossy = apply_loss(rho, check_eta(eta))
    values = lossy_qpd_grid(lossy, 1.0, 0.0, grid).values
    if values.min() < -noise:
        return True
    return _refine_grid_min(lossy, values, grid)[1] < -noise


def threshold_eta(
    state: StateSpec | np.ndarray,
    tol: float = 1e-3,
    grid: PhaseGrid | None = None,
    tail_tol: float = 1e-10,
    noise: float = NOISE_FLOOR,
) -> float | None:
    """Efficiency below which the Wigner function has no negative values.

    Bisects eta in [0, 1] on "refined Wigner minimum < -noise" until the
    bracket is below tol/4, and returns its midpoint. Returns None when the
    state is not negative even without loss.
    """
    if tol < 1e-4:
        raise ValueError(f"threshold tolerance must be >= 1e-4, got {tol}")
    rho = state.build(tail_tol) if isinstance(state, StateSpec) else np.asarray(state)
    grid = default_grid(rho) if grid is None else grid
    if not is_negative(rho, 1.0, grid, noise):
        return None
    lo, hi = 0.0, 1.0
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if is_negative(rho, mid, grid, noise):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
