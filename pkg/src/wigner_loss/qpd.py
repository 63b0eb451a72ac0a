"""s-parametrized quasi-probability distributions on the alpha plane.

Conventions: alpha = (q + i p)/sqrt(2) and d^2 alpha = d(Re alpha) d(Im alpha), so every
QPD integrates to 1 and the vacuum Wigner function is (2/pi) exp(-2|alpha|^2).
With this measure the overlap of an s-QPD with a (-s)-QPD is Tr(rho_1 rho_2)/pi.

The QPD is the expectation of the displaced, s-ordered parity

    T(alpha, s) = 2/(pi (1-s)) D(alpha) t^n D(alpha)^dag,   t = (s+1)/(s-1),

which reduces to the displaced parity at s=0 and to |alpha><alpha|/pi at s=-1.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln, xlogy

from .channel import apply_loss, check_eta, check_s
from .fock import displacement_operator, displacement_padding

THREADS_ENV = "WIGNER_LOSS_THREADS"
_CHUNK_ELEMENTS = 1 << 19


class UnsupportedOrderingError(ValueError):
    """Raised for s > 0, where the QPD of non-classical states is not a function."""


class CoverageWarning(UserWarning):
    pass


def _check_qpd_s(s: float) -> float:
    s = check_s(s)
    if s > 0:
        raise UnsupportedOrderingError(f"QPD evaluation needs s <= 0, got s={s}")
    return s


@dataclass(frozen=True)
class PhaseGrid:
    """Square grid of alpha values; ``points`` per axis is odd so the centre is sampled."""

    center: complex = 0j
    half_extent: float = 5.0
    points: int = 201

    def __post_init__(self):
        if self.points < 1 or self.points % 2 == 0:
            raise ValueError(f"points per axis must be odd and positive, got {self.points}")
        if not self.half_extent > 0:
            raise ValueError(f"half extent must be positive, got {self.half_extent}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.points - 1) if self.points > 1 else 2.0 * self.half_extent

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.points)

    @property
    def re_axis(self) -> np.ndarray:
        return self.center.real + self.axis

    @property
    def im_axis(self) -> np.ndarray:
        return self.center.imag + self.axis

    def alphas(self) -> np.ndarray:
        """Complex sample points, shape (points, points); first index runs over Im alpha."""
        return self.re_axis[None, :] + 1j * self.im_axis[:, None]

    def contains(self, alpha: complex) -> bool:
        d = complex(alpha) - complex(self.center)
        return abs(d.real) <= self.half_extent + 1e-12 and abs(d.imag) <= self.half_extent + 1e-12

    def to_dict(self) -> dict:
        c = complex(self.center)
        return {
            "center": [c.real, c.imag],
            "half_extent": self.half_extent,
            "points_per_axis": self.points,
            "spacing": self.spacing,
        }

    @classmethod
    def covering(cls, n_bar: float, points: int = 201, center: complex = 0j) -> PhaseGrid:
        """Grid wide enough for a state with mean photon number ``n_bar``."""
        return cls(center, 1.5 * math.sqrt(max(n_bar, 0.0)) + 4.5, points)


@dataclass(frozen=True)
class QpdGrid:
    grid: PhaseGrid
    s: float
    eta: float
    values: np.ndarray

    def normalization(self) -> float:
        return float(np.sum(self.values) * self.grid.spacing**2)

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def min(self) -> tuple[complex, float]:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return complex(self.grid.alphas()[i, j]), float(self.values[i, j])

    def value_at_center(self) -> float:
        c = self.grid.points // 2
        return float(self.values[c, c])

    def to_csv(self, fh) -> None:
        """Row-major dump: ``# alpha_re, alpha_im, value``, 17 significant digits."""
        fh.write("# alpha_re, alpha_im, value\n")
        re, im = self.grid.re_axis, self.grid.im_axis
        for i in range(self.grid.points):
            for j in range(self.grid.points):
                fh.write(f"{re[j]:.17g}, {im[i]:.17g}, {self.values[i, j]:.17g}\n")


def char_fn(rho: np.ndarray, z: complex, s: float) -> complex:
    """C(z, s) = Tr[rho exp(i(z^* a + z a^dag))] exp(s|z|^2/2); the exponential equals D(iz).

    Any finite real s is accepted: the loss map sends s below -1 and the
    characteristic function stays well defined there.
    """
    s = float(s)
    if not math.isfinite(s):
        raise ValueError(f"ordering parameter must be finite, got {s!r}")
    rho = np.asarray(rho, dtype=complex)
    z = complex(z)
    if z == 0:
        return complex(np.trace(rho))
    D = displacement_operator(1j * z, len(rho))
    return complex(np.sum(rho.T * D)) * math.exp(0.5 * s * abs(z) ** 2)


def coherent_qpd(alpha, beta: complex, s: float) -> np.ndarray:
    """QPD of the coherent state |beta> at ordering s < 1 (a Gaussian)."""
    s = float(s)
    if s >= 1:
        raise UnsupportedOrderingError("coherent-state QPD is a delta function at s = 1")
    w = 1.0 - s
    return 2.0 / (math.pi * w) * np.exp(-2.0 * np.abs(np.asarray(alpha) - beta) ** 2 / w)


def _ordered_parity_elements(alpha: complex, s: float, dim: int) -> np.ndarray:
    """Matrix <m|T(alpha, s)|n> on the first ``dim`` number states (associated-Laguerre form)."""
    m, n = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    r2 = abs(alpha) ** 2
    phase = np.exp(1j * (m - n) * np.angle(alpha))
    if s == -1.0:
        log_mag = -r2 + 0.5 * (xlogy(m + n, r2) - gammaln(m + 1) - gammaln(n + 1))
        return np.exp(log_mag) * phase / math.pi
    t = (s + 1.0) / (s - 1.0)
    c = 2.0 / (1.0 - s)
    log_mag = (
        math.log(2.0 / (math.pi * (1.0 - s)))
        - 2.0 * r2 / (1.0 - s)
        + 0.5 * (gammaln(lo + 1) - gammaln(hi + 1))
        + xlogy(k, c * abs(alpha))
    )
    lag = eval_genlaguerre(lo, k, 4.0 * r2 / (1.0 - s * s))
    return np.exp(log_mag) * phase * np.power(t, lo) * lag


def qpd_value(rho: np.ndarray, alpha: complex, s: float = 0.0, method: str = "clenshaw") -> float:
    """W(alpha, s) = Tr[rho T(alpha, s)] for s in [-1, 0].

    Three independent evaluations: ``"clenshaw"`` (the grid kernel at one
    point, default), ``"laguerre"`` (closed-form matrix elements of T) and
    ``"displacement"`` (D(alpha) by matrix exponential, then the ordered parity
    of D^dag rho D). They agree to ~1e-9 or better.
    """
    s = _check_qpd_s(s)
    rho = np.asarray(rho, dtype=complex)
    alpha = complex(alpha)
    if method == "clenshaw":
        return QpdKernel(rho, s).value(alpha)
    if method == "laguerre":
        T = _ordered_parity_elements(alpha, s, len(rho))
        return float(np.real(np.sum(rho.T * T)))
    if method == "displacement":
        dim = len(rho)
        big = displacement_padding(alpha, dim)
        rho_big = np.zeros((big, big), dtype=complex)
        rho_big[:dim, :dim] = rho
        D = displacement_operator(-alpha, big)
        pops = np.real(np.einsum("ij,jk,ik->i", D, rho_big, D.conj()))
        if s == -1.0:
            return float(pops[0] / math.pi)
        t = (s + 1.0) / (s - 1.0)
        return float(2.0 / (math.pi * (1.0 - s)) * np.dot(np.power(t, np.arange(big)), pops))
    raise ValueError(f"unknown method {method!r}")


class QpdKernel:
    """Tr[rho T(alpha, s)] at arbitrary points for one fixed (rho, s).

    Grouping by off-diagonal k = m - n,

        W = pref * Re sum_k (c alpha)^k / sqrt(k!) * sum_n w_k rho_{n,n+k} l_n^(k)(x),

    with l_n^(k) = t^n sqrt(n! k!/(n+k)!) L_n^(k)(x), x = 4|alpha|^2/(1-s^2) and
    w_k = 1 for k = 0, 2 otherwise. The inner sums run the Laguerre three-term
    recurrence backwards (Clenshaw) for all k at once; the outer one is Horner
    in k. Forward recurrences lose the decaying solution at large n and |alpha|.
    The recurrence tables depend only on (rho, s) and are built once.
    """

    def __init__(self, rho: np.ndarray, s: float):
        self.s = s = _check_qpd_s(s)
        self.rho = rho = np.asarray(rho, dtype=complex)
        dim = self.dim = len(rho)
        if s == -1.0:
            return
        self.t = t = (s + 1.0) / (s - 1.0)
        self.c = 2.0 / (1.0 - s)
        k = np.arange(dim, dtype=float)
        n = np.arange(dim, dtype=float)[:, None]
        # row n, column k: coefficient w_k rho[n, n+k] (zero past the edge)
        coeffs = np.zeros((dim, dim), dtype=complex)
        for kk in range(dim):
            coeffs[: dim - kk, kk] = np.diagonal(rho, offset=kk) * (1.0 if kk == 0 else 2.0)
        inv = 1.0 / np.sqrt((n + 1) * (n + k + 1))
        self.coeffs = coeffs.real.copy() if not np.any(coeffs.imag) else coeffs
        self.a_const = t * (2 * n + k + 1) * inv
        self.a_slope = -t * inv
        self.b = -t * t * np.sqrt((n + 1) * (n + 1 + k) / ((n + 2) * (n + k + 2)))
        self.horner = 1.0 / np.sqrt(np.arange(1, dim + 1))

    def __call__(self, alphas) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=complex)
        flat = alphas.ravel()
        r2 = np.abs(flat) ** 2
        s = self.s
        if s == -1.0:
            size = max(64, _CHUNK_ELEMENTS // self.dim)
            val = np.concatenate([self._husimi(flat[i : i + size]) for i in range(0, flat.size, size)])
            return (val * np.exp(-r2) / math.pi).reshape(alphas.shape)
        # the inner sums depend on alpha only through |alpha|^2
        r2_unique, inverse = np.unique(r2, return_inverse=True)
        x = 4.0 * r2_unique / (1.0 - s * s)
        size = max(64, _CHUNK_ELEMENTS // self.dim)
        chunks = [x[i : i + size] for i in range(0, x.size, size)]
        workers = _threads()
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(self._inner_sums, chunks))
        else:
            parts = [self._inner_sums(ch) for ch in chunks]
        y1 = np.concatenate(parts, axis=1)
        total = np.zeros(flat.size, dtype=complex)
        ca = self.c * flat
        for kk in range(self.dim - 1, -1, -1):
            total = y1[kk][inverse] + total * ca * self.horner[kk]
        pref = 2.0 / (math.pi * (1.0 - s)) * np.exp(-2.0 * r2 / (1.0 - s))
        return (np.real(total) * pref).reshape(alphas.shape)

    def _husimi(self, alphas: np.ndarray) -> np.ndarray:
        """<alpha| rho |alpha> e^{|alpha|^2}, from the unnormalized coherent amplitudes."""
        powers = np.empty((self.dim, alphas.size), dtype=complex)
        powers[0] = 1.0
        for m in range(1, self.dim):
            powers[m] = powers[m - 1] * alphas / math.sqrt(m)
        return np.real(np.sum(np.conj(powers) * (self.rho @ powers), axis=0))

    def _inner_sums(self, x: np.ndarray) -> np.ndarray:
        """Clenshaw sums over n for every k (rows) and every x (columns)."""
        coeffs = self.coeffs
        y1 = np.zeros((self.dim, x.size), dtype=coeffs.dtype)
        y2 = np.zeros_like(y1)
        for n in range(self.dim - 1, -1, -1):
            a_n = self.a_const[n][:, None] + self.a_slope[n][:, None] * x
            y1, y2 = coeffs[n][:, None] + a_n * y1 + self.b[n][:, None] * y2, y1
        return y1

    def value(self, alpha: complex) -> float:
        return float(self(np.array([complex(alpha)]))[0])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def qpd_grid(rho: np.ndarray, grid: PhaseGrid, s: float = 0.0, eta: float = 1.0) -> QpdGrid:
    """QPD of ``rho`` itself sampled on ``grid`` (``eta`` is metadata only)."""
    s = _check_qpd_s(s)
    values = QpdKernel(rho, s)(grid.alphas())
    return QpdGrid(grid, s, eta, values)


def lossy_qpd_grid(rho: np.ndarray, eta: float, s: float, grid: PhaseGrid, warn: bool = True) -> QpdGrid:
    """QPD after the loss channel, via Kraus operators and the ordered-parity recursion."""
    eta = check_eta(eta)
    out = qpd_grid(apply_loss(rho, eta), grid, s, eta)
    if warn and out.boundary_max() > 1e-8:
        warnings.warn(
            f"grid boundary carries |W| up to {out.boundary_max():.2g}; enlarge the extent",
            CoverageWarning,
            stacklevel=2,
        )
    return out


def blur_kernel(alpha, s: float, eta: float) -> np.ndarray:
    """B(alpha, s, eta) = 2/(pi w) exp(-2|alpha|^2 / w), w = (1-s)(1-eta)."""
    w = (1.0 - s) * (1.0 - eta)
    return 2.0 / (math.pi * w) * np.exp(-2.0 * np.abs(np.asarray(alpha)) ** 2 / w)


def blur_convolve(lossless: QpdGrid, s: float, eta: float) -> QpdGrid:
    """Lossy QPD as sum_beta W(beta, s) B(alpha - sqrt(eta) beta, s, eta) h^2 on the same grid.

    The kernel factorizes over Re and Im parts, so the double sum is two matrix products.
    """
    eta = check_eta(eta)
    s = check_s(s)
    if eta in (0.0, 1.0):
        raise ValueError("blur kernel is degenerate at eta = 0 or 1; use the direct route")
    if s >= 1:
        raise UnsupportedOrderingError("blur kernel needs s < 1")
    if not math.isclose(lossless.s, s):
        raise ValueError(f"input grid holds s={lossless.s}, requested s={s}")
    grid = lossless.grid
    w = (1.0 - s) * (1.0 - eta)
    root = math.sqrt(eta)
    norm = math.sqrt(2.0 / (math.pi * w))

    def gauss(axis):
        d = axis[:, None] - root * axis[None, :]
        return norm * np.exp(-2.0 * d * d / w)

    g_re, g_im = gauss(grid.re_axis), gauss(grid.im_axis)
    values = g_im @ lossless.values @ g_re.T * grid.spacing**2
    return QpdGrid(grid, s, eta, values)


def w0_parity_series(rho: np.ndarray, eta: float) -> float:
    """Lossy Wigner function at the origin: (2/pi) sum_n (1 - 2 eta)^n rho_nn."""
    eta = check_eta(eta)
    diag = np.diag(np.asarray(rho)).real
    return float(2.0 / math.pi * np.dot(np.power(1.0 - 2.0 * eta, np.arange(len(diag))), diag))


def overlap_integral(rho_psi: np.ndarray, beta, s: float, grid: PhaseGrid) -> float:
    """Scalar product  int W_psi(alpha, s) W_beta(alpha, -s) d^2 alpha  with a coherent state |beta>.

    ``beta`` is a complex amplitude or the coherent state's density matrix. The
    coherent QPD is the closed-form Gaussian. At s = -1 it becomes a delta
    function and the integral is the Husimi value Q_psi(beta).
    """
    s = _check_qpd_s(s)
    beta = coherent_amplitude(beta) if isinstance(beta, np.ndarray) else complex(beta)
    if s == -1.0:
        return qpd_value(rho_psi, beta, -1.0)
    w_psi = qpd_grid(rho_psi, grid, s).values
    w_beta = coherent_qpd(grid.alphas(), beta, -s)
    return float(np.sum(w_psi * w_beta) * grid.spacing**2)


def coherent_amplitude(rho: np.ndarray, tol: float = 1e-6) -> complex:
    """<a> of a density matrix that must be a coherent state."""
    rho = np.asarray(rho, dtype=complex)
    dim = len(rho)
    beta = complex(np.sum(np.sqrt(np.arange(1, dim)) * np.diag(rho, k=-1)))
    vac_overlap = qpd_value(rho, beta, -1.0) * math.pi  # <beta|rho|beta>
    if abs(vac_overlap - 1.0) > tol:
        raise ValueError(f"state is not a coherent state (fidelity {vac_overlap:.6g} with |{beta}>)")
    return beta
