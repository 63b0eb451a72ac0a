"""Analytic W0(eta), the Wigner function at the origin after loss, for odd-parity states.

All three families satisfy rho_nn = 0 for even n, which makes the origin the
most negative point before loss. Curves are indexed by the mean number of lost
quanta epsilon = (1 - eta) * n_bar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import check_eta
from .states import StateSpec

TWO_OVER_PI = 2.0 / math.pi
CURVE_FAMILIES = ("fock", "odd_cat", "squeezed_single_photon")
CURVE_N_BARS = (1, 3, 11, 31, 101)
# below this amplitude the odd cat equals |1> to ~1e-13 in mean photon number
MIN_CAT_ALPHA0 = 1e-3


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class LossBudget:
    eta: float
    n_bar: float

    @property
    def epsilon(self) -> float:
        return (1.0 - self.eta) * self.n_bar

    @classmethod
    def from_epsilon(cls, epsilon: float, n_bar: float) -> LossBudget:
        return cls(1.0 - epsilon / n_bar, n_bar)


def w0_fock(n: int, eta: float) -> float:
    """-(2/pi) (2 eta - 1)^n for odd n."""
    eta = check_eta(eta)
    if int(n) != n or n < 1 or n % 2 == 0:
        raise DomainError(f"Fock closed form needs an odd n >= 1, got {n!r}")
    return -TWO_OVER_PI * (2.0 * eta - 1.0) ** int(n)


def w0_odd_cat(alpha0: float, eta: float) -> float:
    """-(2/pi) (exp(-2(1-eta) a^2) - exp(-2 eta a^2)) / (1 - exp(-2 a^2)), a = alpha0.

    Written with expm1 so the alpha0 -> 0 limit (the state |1>) keeps full precision.
    """
    eta = check_eta(eta)
    alpha0 = float(alpha0)
    if not alpha0 > 0:
        raise DomainError(f"odd cat amplitude must be > 0, got {alpha0!r}")
    a2 = alpha0 * alpha0
    num = math.exp(-2.0 * eta * a2) * math.expm1(2.0 * (2.0 * eta - 1.0) * a2)
    den = -math.expm1(-2.0 * a2)
    return -TWO_OVER_PI * num / den


def w0_squeezed_single(r: float, eta: float) -> float:
    eta = check_eta(eta)
    sh2 = math.sinh(r) ** 2
    return TWO_OVER_PI * (1.0 - 2.0 * eta) / (1.0 + 4.0 * eta * (1.0 - eta) * sh2) ** 1.5


def w0_small_loss(rho_diag, eta: float, even_tol: float = 1e-8) -> float:
    """Small-loss approximation -(2/pi) sum_n exp(-2(1-eta) n) rho_nn.

    Only meaningful for 1 - eta << 1; the error grows with the loss.
    """
    eta = check_eta(eta)
    diag = np.real(np.asarray(rho_diag, dtype=complex))
    if diag.ndim == 2:
        diag = np.real(np.diag(diag))
    even = float(np.sum(diag[0::2]))
    if even > even_tol:
        raise DomainError(f"population on even number states is {even:.3g}; approximation needs odd support")
    n = np.arange(len(diag))
    return float(-TWO_OVER_PI * np.dot(np.exp(-2.0 * (1.0 - eta) * n), diag))


def asymptote_w0(epsilon: float) -> float:
    """Asymptote -(2/pi) exp(-epsilon) for a number distribution concentrated at its mean."""
    return -TWO_OVER_PI * math.exp(-epsilon)


def asymptote_w0_rate2(epsilon: float) -> float:
    """-(2/pi) exp(-2 epsilon): the small-loss sum evaluated on a distribution peaked at n_bar.

    The exact Fock result (1 - 2 eps/n)^n tends to this, not to exp(-eps).
    """
    return -TWO_OVER_PI * math.exp(-2.0 * epsilon)


def odd_cat_mean_quanta(alpha0: float) -> float:
    """<n> = a^2 (1 + e^{-2a^2}) / (1 - e^{-2a^2}) = a^2 coth(a^2) for the odd cat.

    This is what the Fock-space trace gives. The variant with exponent a^2 in
    place of 2a^2 disagrees with the trace; it is kept as
    :func:`odd_cat_mean_quanta_single_exponent` for comparison only.
    """
    a2 = float(alpha0) ** 2
    if a2 == 0:
        return 1.0
    return a2 * (1.0 + math.exp(-2.0 * a2)) / -math.expm1(-2.0 * a2)


def odd_cat_mean_quanta_single_exponent(alpha0: float) -> float:
    a2 = float(alpha0) ** 2
    return a2 * (1.0 + math.exp(-a2)) / -math.expm1(-a2)


def squeezed_single_mean_quanta(r: float) -> float:
    return 1.0 + 3.0 * math.sinh(r) ** 2


def family_params_for_mean(family: str, n_bar: float, tol: float = 1e-13) -> StateSpec:
    """State of ``family`` whose mean photon number is ``n_bar``."""
    if n_bar < 1:
        raise DomainError(f"mean photon number must be >= 1 for odd-parity families, got {n_bar}")
    if family == "fock":
        if abs(n_bar - round(n_bar)) > 1e-12 or int(round(n_bar)) % 2 == 0:
            raise DomainError(f"Fock family needs an odd integer mean, got {n_bar}")
        return StateSpec("fock", {"n": int(round(n_bar))})
    if family == "squeezed_single_photon":
        return StateSpec("squeezed_single_photon", {"r": math.asinh(math.sqrt((n_bar - 1.0) / 3.0))})
    if family == "odd_cat":
        if odd_cat_mean_quanta(MIN_CAT_ALPHA0) >= n_bar:
            return StateSpec("odd_cat", {"alpha0": MIN_CAT_ALPHA0})
        lo, hi = MIN_CAT_ALPHA0, math.sqrt(n_bar) + 1.0
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            if odd_cat_mean_quanta(mid) < n_bar:
                lo = mid
            else:
                hi = mid
        return StateSpec("odd_cat", {"alpha0": 0.5 * (lo + hi)})
    raise DomainError(f"no mean-photon parametrization for family {family!r}")


def w0_closed_form(spec: StateSpec, eta: float) -> float:
    p = spec.params
    if spec.family == "fock":
        return w0_fock(p["n"], eta)
    if spec.family == "odd_cat":
        return w0_odd_cat(float(p["alpha0"]), eta)
    if spec.family == "squeezed_single_photon":
        return w0_squeezed_single(float(p["r"]), eta)
    raise DomainError(f"no closed form for family {spec.family!r}")


def epsilon_samples(start: float = 0.0, stop: float = 4.0, count: int = 401) -> np.ndarray:
    return np.linspace(start, stop, count)


def abs_w0_curve(family: str, n_bar: float, epsilons) -> np.ndarray:
    """|W0| against epsilon; NaN where eta < 1/2 (no negativity left) or eta < 0."""
    spec = family_params_for_mean(family, n_bar)
    out = np.full(len(epsilons), np.nan)
    for i, eps in enumerate(epsilons):
        eta = 1.0 - eps / n_bar
        if eta >= 0.5:
            out[i] = abs(w0_closed_form(spec, eta))
    return out


def log_slope_at_zero(family: str, n_bar: float, h: float = 1e-4) -> float:
    """-d ln|W0| / d epsilon at epsilon = 0 from a one-sided finite difference."""
    spec = family_params_for_mean(family, n_bar)
    w_0 = abs(w0_closed_form(spec, 1.0))
    w_h = abs(w0_closed_form(spec, 1.0 - h / n_bar))
    return -(math.log(w_h) - math.log(w_0)) / h
