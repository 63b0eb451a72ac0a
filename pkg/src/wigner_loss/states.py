"""Density matrices for the state families studied under loss.

Every constructor accepts ``cutoff=None`` (auto) or an explicit Fock cutoff.
Auto cutoffs start from a family heuristic and grow until the population of
the two highest number states is below ``tail_tol``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fock import CutoffError, check_cutoff, displace_ket, squeeze_ket

FAMILIES = ("fock", "coherent", "odd_cat", "squeezed_single_photon", "mixed_example", "custom")

DEFAULT_TAIL_TOL = 1e-10
MAX_AUTO_CUTOFF = 6000


class StateParameterError(ValueError):
    pass


def ket_to_dm(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def basis_ket(n: int, dim: int) -> np.ndarray:
    ket = np.zeros(dim, dtype=complex)
    ket[n] = 1.0
    return ket


def _ket_tail(ket: np.ndarray) -> float:
    """Edge population plus whatever was pushed past the cutoff."""
    lost = max(0.0, 1.0 - float(np.vdot(ket, ket).real))
    return float(np.sum(np.abs(ket[-2:]) ** 2)) + lost


def _build_pure(
    make_ket: Callable[[int], np.ndarray],
    start_dim: int,
    cutoff: int | None,
    tail_tol: float,
    what: str,
) -> np.ndarray:
    if cutoff is not None:
        dim = check_cutoff(cutoff)
        ket = make_ket(dim)
        tail = _ket_tail(ket)
        if tail >= tail_tol:
            raise CutoffError(f"cutoff {dim} too small for {what}: tail mass {tail:.3g} >= {tail_tol:.3g}")
    else:
        dim = max(2, start_dim)
        while True:
            ket = make_ket(dim)
            if _ket_tail(ket) < tail_tol:
                break
            if dim >= MAX_AUTO_CUTOFF:
                raise CutoffError(f"auto cutoff for {what} exceeded {MAX_AUTO_CUTOFF}")
            dim = min(MAX_AUTO_CUTOFF, int(math.ceil(dim * 1.25)) + 2)
    ket = ket / np.linalg.norm(ket)
    return ket_to_dm(ket)


def fock_state(n: int, cutoff: int | None = None) -> np.ndarray:
    if int(n) != n or n < 0:
        raise StateParameterError(f"Fock number must be a nonnegative integer, got {n!r}")
    n = int(n)
    dim = n + 4 if cutoff is None else check_cutoff(cutoff)
    if n >= dim:
        raise CutoffError(f"Fock state |{n}> needs cutoff > {n}, got {dim}")
    return ket_to_dm(basis_ket(n, dim))


def vacuum(cutoff: int | None = None) -> np.ndarray:
    return fock_state(0, cutoff)


def _coherent_start(amplitude: float) -> int:
    a2 = amplitude**2
    return int(math.ceil(a2 + 8.0 * math.sqrt(a2 + 1.0)))


def coherent_state(alpha: complex, cutoff: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    alpha = complex(alpha)

    def make(dim):
        return displace_ket(alpha, basis_ket(0, dim))

    return _build_pure(make, _coherent_start(abs(alpha)), cutoff, tail_tol, f"coherent state alpha={alpha}")


def odd_cat_state(alpha0: float, cutoff: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Normalized |alpha0> - |-alpha0> for real ``alpha0 > 0``."""
    alpha0 = float(alpha0)
    if not alpha0 > 0:
        raise StateParameterError(f"odd cat amplitude must be real and > 0, got {alpha0!r}")
    norm = math.sqrt(-2.0 * math.expm1(-2.0 * alpha0**2))

    def make(dim):
        vac = basis_ket(0, dim)
        return (displace_ket(alpha0, vac) - displace_ket(-alpha0, vac)) / norm

    return _build_pure(make, _coherent_start(alpha0), cutoff, tail_tol, f"odd cat alpha0={alpha0}")


def squeezed_single_photon(r: float, cutoff: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """S(r)|1>."""
    r = float(r)
    start = int(math.ceil((1.0 + 3.0 * math.sinh(r) ** 2) * 12.0))
    start += start % 2

    def make(dim):
        return squeeze_ket(r, basis_ket(1, dim))

    return _build_pure(make, start, cutoff, tail_tol, f"squeezed single photon r={r}")


def mixed_example_state(cutoff: int = 4) -> np.ndarray:
    """(|0><0| + |1><1| + (|0><1| + |1><0|)/2) / 2, the mixed benchmark with threshold 7/8."""
    dim = check_cutoff(cutoff)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = rho[1, 1] = 0.5
    rho[0, 1] = rho[1, 0] = 0.25
    return rho


def custom_state(amplitudes, cutoff: int | None = None) -> np.ndarray:
    """Pure state from (unnormalized) Fock amplitudes."""
    amps = np.asarray([_as_complex(a) for a in amplitudes], dtype=complex)
    if amps.size == 0 or not np.any(amps):
        raise StateParameterError("custom state needs at least one nonzero amplitude")
    dim = len(amps) + 2 if cutoff is None else check_cutoff(cutoff)
    if dim < len(amps):
        raise CutoffError(f"cutoff {dim} shorter than {len(amps)} amplitudes")
    ket = np.zeros(dim, dtype=complex)
    ket[: len(amps)] = amps
    return ket_to_dm(ket / np.linalg.norm(ket))


def displace_density(rho: np.ndarray, gamma: complex, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """D(gamma) rho D(gamma)^dag on an enlarged cutoff chosen by tail mass."""
    gamma = complex(gamma)
    rho = np.asarray(rho, dtype=complex)
    if gamma == 0:
        return rho.copy()
    vals, vecs = np.linalg.eigh(rho)
    keep = vals > 1e-15
    dim = len(rho)
    reach = math.sqrt(dim) + abs(gamma)
    dim = max(dim, int(math.ceil(reach**2 + 8.0 * reach)))
    while True:
        cols = [displace_ket(gamma, vecs[:, j], dim) for j in np.flatnonzero(keep)]
        out = sum(p * ket_to_dm(c) for p, c in zip(vals[keep], cols))
        lost = 1.0 - float(np.trace(out).real) / float(np.sum(vals[keep]))
        if lost + float(np.sum(np.diag(out).real[-2:])) < tail_tol or dim >= MAX_AUTO_CUTOFF:
            break
        dim = int(math.ceil(dim * 1.25)) + 2
    return out / np.trace(out).real


def mean_quanta(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    return float(np.dot(np.arange(len(rho)), np.diag(rho).real))


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def parity_expectation(rho: np.ndarray) -> float:
    diag = np.diag(np.asarray(rho)).real
    return float(np.sum(diag[0::2]) - np.sum(diag[1::2]))


def even_population(rho: np.ndarray) -> float:
    return float(np.sum(np.diag(np.asarray(rho)).real[0::2]))


def _as_complex(value) -> complex:
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise StateParameterError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


def _encode_complex(value: complex):
    value = complex(value)
    return value.real if value.imag == 0 else [value.real, value.imag]


@dataclass(frozen=True)
class StateSpec:
    """Declarative state description, serializable as ``{"family", "params", "cutoff"}``."""

    family: str
    params: dict = field(default_factory=dict)
    cutoff: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise StateParameterError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        required = {
            "fock": ("n",),
            "coherent": ("alpha",),
            "odd_cat": ("alpha0",),
            "squeezed_single_photon": ("r",),
            "mixed_example": (),
            "custom": ("amplitudes",),
        }[self.family]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise StateParameterError(f"family {self.family!r} needs params {missing}")
        if self.cutoff is not None:
            check_cutoff(self.cutoff)

    def build(self, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
        p = self.params
        if self.family == "fock":
            rho = fock_state(p["n"], self.cutoff)
        elif self.family == "coherent":
            rho = coherent_state(_as_complex(p["alpha"]), self.cutoff, tail_tol)
        elif self.family == "odd_cat":
            alpha0 = _as_complex(p["alpha0"])
            if alpha0.imag != 0:
                raise StateParameterError("odd cat amplitude is taken real (Im alpha0 = 0)")
            rho = odd_cat_state(alpha0.real, self.cutoff, tail_tol)
        elif self.family == "squeezed_single_photon":
            rho = squeezed_single_photon(float(p["r"]), self.cutoff, tail_tol)
        elif self.family == "mixed_example":
            rho = mixed_example_state(self.cutoff or 4)
        else:
            rho = custom_state(p["amplitudes"], self.cutoff)
        if "displacement" in p:
            rho = displace_density(rho, _as_complex(p["displacement"]), tail_tol)
        return rho

    def to_dict(self) -> dict:
        params = {}
        for key, value in self.params.items():
            if key == "amplitudes":
                params[key] = [_encode_complex(_as_complex(v)) for v in value]
            elif isinstance(value, (complex, list, tuple, dict)):
                params[key] = _encode_complex(_as_complex(value))
            else:
                params[key] = value
        return {"family": self.family, "params": params, "cutoff": "auto" if self.cutoff is None else self.cutoff}

    @classmethod
    def from_dict(cls, doc: dict) -> StateSpec:
        if not isinstance(doc, dict) or "family" not in doc:
            raise StateParameterError("state spec must be an object with a 'family' field")
        cutoff = doc.get("cutoff", "auto")
        if cutoff in (None, "auto"):
            cutoff = None
        elif isinstance(cutoff, bool) or not isinstance(cutoff, int):
            raise StateParameterError(f"cutoff must be 'auto' or an integer, got {cutoff!r}")
        return cls(doc["family"], dict(doc.get("params", {})), cutoff)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> StateSpec:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> StateSpec:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
