"""Truncated Fock-space operators and density-matrix diagnostics.

Convention: D(alpha) = exp(alpha a^dag - alpha^* a), S(r) = exp(r/2 (a^dag^2 - a^2)).

Operators returned at cutoff ``dim`` are the top-left ``dim x dim`` block of the
infinite-dimensional operator. Internally the exponential is taken in a padded
space and cropped, so matrix elements are accurate up to the edge of the block
instead of being distorted by the truncated generator.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply


class CutoffError(ValueError):
    """Raised when a Fock cutoff is too small for the requested object."""


class CutoffWarning(UserWarning):
    pass


def check_cutoff(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise CutoffError(f"Fock cutoff must be an integer >= 2, got {dim!r}")
    return int(dim)


def ladder_operators(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, a^dag)`` truncated to ``dim`` number states."""
    dim = check_cutoff(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(check_cutoff(dim), dtype=float)).astype(complex)


def parity_operator(dim: int) -> np.ndarray:
    """(-1)^n as a diagonal matrix."""
    n = np.arange(check_cutoff(dim))
    return np.diag(np.where(n % 2 == 0, 1.0, -1.0)).astype(complex)


def _sparse_lowering(dim: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), offsets=1, format="csr")


def _displacement_generator(alpha: complex, dim: int) -> sp.csr_matrix:
    a = _sparse_lowering(dim)
    return (alpha * a.T - np.conj(alpha) * a).tocsr().astype(complex)


def _squeeze_generator(r: float, dim: int) -> sp.csr_matrix:
    a = _sparse_lowering(dim)
    a2 = a @ a
    return (0.5 * r * (a2.T - a2)).tocsr().astype(complex)


def displacement_padding(alpha: complex, dim: int, support: int | None = None) -> int:
    """Working dimension that keeps the first ``dim`` rows of D(alpha) exact.

    ``support`` is the number of input columns that matter (defaults to ``dim``).
    """
    support = dim if support is None else support
    reach = math.sqrt(support) + abs(alpha)
    return max(dim + 16, int(math.ceil(reach * reach + 12.0 * reach + 16.0)))


def squeeze_padding(r: float, dim: int, support: int | None = None) -> int:
    support = dim if support is None else support
    r = abs(r)
    if r == 0.0:
        return dim
    decay = -math.log(math.tanh(r))
    # populations of S(r)|n> fall off like tanh(r)^m; keep ~80 e-folds
    tail = int(math.ceil(80.0 / max(decay, 1e-3)))
    spread = int(math.ceil(support * math.cosh(2 * r) + math.sinh(r) ** 2))
    return max(dim + 16, spread + tail)


def displacement_operator(alpha: complex, dim: int) -> np.ndarray:
    """Matrix of D(alpha) on the first ``dim`` number states."""
    dim = check_cutoff(dim)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds dim/4 = {dim / 4:.3g}; "
            "states displaced this far leave the truncated space",
            CutoffWarning,
            stacklevel=2,
        )
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    big = displacement_padding(alpha, dim)
    gen = _displacement_generator(alpha, big).toarray()
    return scipy.linalg.expm(gen)[:dim, :dim]


def squeeze_operator(r: float, dim: int) -> np.ndarray:
    """Matrix of S(r) on the first ``dim`` number states."""
    dim = check_cutoff(dim)
    r = float(r)
    if math.sinh(r) ** 2 > dim / 4:
        raise CutoffError(
            f"cutoff {dim} too small for squeeze factor r={r}: "
            f"vacuum squeezed photon number sinh^2 r = {math.sinh(r) ** 2:.3g}"
        )
    if r == 0.0:
        return np.eye(dim, dtype=complex)
    big = squeeze_padding(r, dim)
    gen = _squeeze_generator(r, big).toarray()
    return scipy.linalg.expm(gen)[:dim, :dim]


def _embed(vec: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[: len(vec)] = vec
    return out


def _support(ket: np.ndarray) -> int:
    nz = np.flatnonzero(np.abs(ket) > 0)
    return int(nz[-1]) + 1 if nz.size else 1


def displace_ket(alpha: complex, ket: np.ndarray, dim: int | None = None) -> np.ndarray:
    """D(alpha) applied to a ket, returned on the first ``dim`` number states.

    Population pushed beyond ``dim`` is dropped, not renormalized.
    """
    ket = np.asarray(ket, dtype=complex)
    dim = len(ket) if dim is None else dim
    big = max(displacement_padding(alpha, dim, _support(ket)), len(ket))
    out = expm_multiply(_displacement_generator(complex(alpha), big), _embed(ket, big))
    return out[:dim]


def squeeze_ket(r: float, ket: np.ndarray, dim: int | None = None) -> np.ndarray:
    """S(r) applied to a ket, returned on ``dim`` number states."""
    ket = np.asarray(ket, dtype=complex)
    dim = len(ket) if dim is None else dim
    big = max(squeeze_padding(r, dim, _support(ket)), len(ket))
    out = expm_multiply(_squeeze_generator(float(r), big), _embed(ket, big))
    return out[:dim]


@dataclass(frozen=True)
class DensityDiagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tail_mass: float
    tail_tol: float

    @property
    def hermitian(self) -> bool:
        return self.hermiticity_defect < 1e-12

    @property
    def trace_ok(self) -> bool:
        return self.trace_defect < 1e-10

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= -1e-10

    @property
    def tail_ok(self) -> bool:
        return self.tail_mass < self.tail_tol

    @property
    def valid(self) -> bool:
        return self.hermitian and self.trace_ok and self.positive and self.tail_ok

    def flags(self) -> list[str]:
        checks = {
            "hermiticity": self.hermitian,
            "trace": self.trace_ok,
            "positivity": self.positive,
            "tail_mass": self.tail_ok,
        }
        return [name for name, ok in checks.items() if not ok]

    def to_dict(self) -> dict:
        return {
            "hermiticity_defect": self.hermiticity_defect,
            "trace_defect": self.trace_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "tail_mass": self.tail_mass,
            "tail_tol": self.tail_tol,
            "valid": self.valid,
            "flags": self.flags(),
        }


def tail_mass(rho: np.ndarray) -> float:
    """Population of the two highest number states."""
    diag = np.real(np.diag(rho))
    return float(np.sum(diag[-2:]))


def validate_density(rho: np.ndarray, tail_tol: float = 1e-10) -> DensityDiagnostics:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    tr = float(abs(np.trace(rho) - 1.0))
    hermitian_part = 0.5 * (rho + rho.conj().T)
    min_eig = float(np.min(np.linalg.eigvalsh(hermitian_part)))
    return DensityDiagnostics(herm, tr, min_eig, tail_mass(rho), tail_tol)
