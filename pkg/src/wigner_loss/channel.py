"""Pure-loss channel: a beamsplitter of power transmissivity eta coupling the mode to a vacuum bath."""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg
from scipy.special import gammaln, xlogy
from scipy.stats import binom

from .fock import check_cutoff


class EfficiencyError(ValueError):
    pass


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise EfficiencyError(f"efficiency must lie in [0, 1], got {eta!r}")
    return eta


def check_s(s: float) -> float:
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"ordering parameter s must lie in [-1, 1], got {s!r}")
    return s


def _kraus_coefficients(k: int, dim: int, eta: float) -> np.ndarray:
    """<m|K_k|m+k> for m = 0 .. dim-1-k, K_k = sqrt((1-eta)^k / k!) a^k eta^(n/2)."""
    m = np.arange(dim - k, dtype=float)
    log_c = 0.5 * (gammaln(m + k + 1) - gammaln(k + 1) - gammaln(m + 1))
    log_c += 0.5 * (xlogy(k, 1.0 - eta) + xlogy(m, eta))
    return np.exp(log_c)


def kraus_operators(eta: float, dim: int) -> list[np.ndarray]:
    """All ``dim`` Kraus matrices of the loss channel at this cutoff."""
    eta = check_eta(eta)
    dim = check_cutoff(dim)
    ops = []
    for k in range(dim):
        K = np.zeros((dim, dim))
        c = _kraus_coefficients(k, dim, eta)
        K[np.arange(dim - k), np.arange(k, dim)] = c
        ops.append(K)
    return ops


def apply_loss(rho: np.ndarray, eta: float, tol: float = 1e-14) -> np.ndarray:
    """rho(eta) = sum_k K_k rho K_k^dag.

    Terms are added until the population still to be transferred, an upper
    bound on the trace norm of the remaining terms, drops below ``tol``.
    """
    eta = check_eta(eta)
    rho = np.asarray(rho, dtype=complex)
    dim = check_cutoff(len(rho))
    if eta == 1.0:
        return rho.copy()
    pops = np.clip(np.diag(rho).real, 0.0, None)
    n = np.arange(dim)
    out = np.zeros_like(rho)
    for k in range(dim):
        c = _kraus_coefficients(k, dim, eta)
        out[: dim - k, : dim - k] += np.outer(c, c) * rho[k:, k:]
        # mass of terms k+1, k+2, ...: photon-number n loses more than k quanta
        remainder = float(np.dot(pops, binom.sf(k, n, 1.0 - eta)))
        if remainder < tol:
            break
    return out


def beamsplitter_unitary(eta: float, dim: int, bath_dim: int) -> np.ndarray:
    """exp(theta (a^dag b - a b^dag)), cos(theta) = sqrt(eta), on the (dim * bath_dim) two-mode space.

    The generator conserves total photon number, so it is exponentiated one
    photon-number block at a time; index of |n, m> is ``n * bath_dim + m``.
    """
    eta = check_eta(eta)
    theta = math.acos(math.sqrt(eta))
    size = dim * bath_dim
    U = np.zeros((size, size))
    for total in range(dim + bath_dim - 1):
        ns = np.arange(max(0, total - bath_dim + 1), min(dim - 1, total) + 1)
        idx = ns * bath_dim + (total - ns)
        gen = np.zeros((len(ns), len(ns)))
        for j, n in enumerate(ns):
            m = total - n
            # a^dag b |n, m> = sqrt((n+1) m) |n+1, m-1>
            if j + 1 < len(ns):
                amp = theta * math.sqrt((n + 1) * m)
                gen[j + 1, j] += amp
                gen[j, j + 1] -= amp
        U[np.ix_(idx, idx)] = scipy.linalg.expm(gen)
    return U


def beamsplitter_oracle(
    rho: np.ndarray, eta: float, bath_dim: int | None = None, max_size: int = 2500
) -> np.ndarray:
    """Tr_B[U (rho x |0_B><0_B|) U^dag] built from the explicit two-mode unitary."""
    eta = check_eta(eta)
    rho = np.asarray(rho, dtype=complex)
    dim = check_cutoff(len(rho))
    bath_dim = dim if bath_dim is None else int(bath_dim)
    if bath_dim < dim:
        raise ValueError(f"bath cutoff {bath_dim} must be >= system cutoff {dim}")
    if dim * bath_dim > max_size:
        raise MemoryError(f"two-mode space {dim}x{bath_dim} exceeds the limit of {max_size} states")
    U = beamsplitter_unitary(eta, dim, bath_dim)
    V = U[:, np.arange(dim) * bath_dim]  # columns |n, 0_B>
    joint = (V @ rho @ V.conj().T).reshape(dim, bath_dim, dim, bath_dim)
    return np.einsum("ambm->ab", joint)


def map_s(s: float, eta: float) -> float:
    """Effective ordering parameter after loss: (s + eta - 1) / eta."""
    s = float(s)
    eta = check_eta(eta)
    if eta == 0.0:
        raise ZeroDivisionError("ordering-parameter map is undefined at eta = 0")
    return (s + eta - 1.0) / eta
