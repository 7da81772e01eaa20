"""Spectral statistics of the chiral matrix H = [[0, X], [X*, 0]].

The spectrum of H is the multiset {+-sigma_i} of singular values of X padded with
|M - N| zeros, so everything here works from sigma, obtained through the Hermitian
eigen-decomposition of the smaller Gram matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, EmptyWindowError, NumericError


@dataclass
class SpectralSummary:
    sigma: np.ndarray
    eigs: np.ndarray
    moments: list[float]
    meta: dict = field(default_factory=dict)


class Normalization(str, enum.Enum):
    COUNT = "count"
    DENSITY = "density"


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    normalization: Normalization = Normalization.COUNT
    total: int = 0

    def densities(self) -> np.ndarray:
        """Counts divided by (total points * bin width)."""
        widths = np.diff(self.bin_edges)
        return self.counts / (max(self.total, 1) * widths)


@dataclass
class SpacingSample:
    E: float
    t: float
    rho_E: float
    s_values: np.ndarray
    n_window: int
    N: int

    def lambda_cdf(self, s) -> np.ndarray:
        """Empirical spacing CDF with the semicircle-predicted normalisation 1/(4 N t rho(E))."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        srt = np.sort(self.s_values)
        counts = np.searchsorted(srt, s, side="right")
        return counts / (4.0 * self.N * self.t * self.rho_E)


def _entries(X) -> np.ndarray:
    return np.asarray(getattr(X, "entries", X))


def singular_values(X) -> np.ndarray:
    """Descending singular values of X from the smaller Gram matrix."""
    A = _entries(X)
    if A.ndim != 2 or A.size == 0:
        raise DomainError("expected a non-empty 2-d matrix")
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix has non-finite entries")
    M, N = A.shape
    G = A @ A.conj().T if M <= N else A.conj().T @ A
    w = np.linalg.eigvalsh(G)
    w = np.clip(w, 0.0, None)
    return np.sqrt(w)[::-1].copy()


def eigenvalues_H(sigma, M: int, N: int) -> np.ndarray:
    """Ascending eigenvalues of H: {+-sigma} plus M + N - 2 min(M, N) zeros."""
    sigma = np.asarray(sigma, dtype=float)
    if len(sigma) != min(M, N):
        raise DomainError("sigma must have min(M, N) entries")
    zeros = np.zeros(M + N - 2 * len(sigma))
    pos = np.sort(sigma)
    return np.concatenate([-pos[::-1], zeros, pos])


def moments(sigma, N: int, k_max: int) -> list[float]:
    """Trace moments mu^(2k) = (1/N) sum_i sigma_i^(2k) for k = 1..k_max."""
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    sigma = np.sort(np.abs(np.asarray(sigma, dtype=float)))[::-1]
    smax = float(sigma[0]) if len(sigma) else 0.0
    if smax > 0 and 2 * k_max * math.log(smax) > 700:
        raise NumericError(f"mu^(2k) overflows double range for k_max={k_max}")
    s2 = sigma * sigma
    out = []
    p = np.ones_like(s2)
    for _ in range(k_max):
        p = p * s2
        out.append(math.fsum(p.tolist()) / N)
    return out


def summarize(X, k_max: int = 4, meta: dict | None = None) -> SpectralSummary:
    A = _entries(X)
    M, N = A.shape
    sigma = singular_values(A)
    return SpectralSummary(sigma, eigenvalues_H(sigma, M, N), moments(sigma, N, k_max), meta or {})


# ---------------------------------------------------------------------------
# reference laws
# ---------------------------------------------------------------------------

def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 2
    out = np.where(inside, np.sqrt(np.clip(4 - x * x, 0, None)) / (2 * np.pi), 0.0)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = 0.5 + x * np.sqrt(4 - x * x) / (4 * np.pi) + np.arcsin(x / 2) / np.pi
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def mp_edges(rho: float) -> tuple[float, float]:
    """Support [rho * lambda_-, rho * lambda_+] with lambda_+- = (1 +- rho**-0.5)**2."""
    if rho <= 0:
        raise DomainError("rho must be positive")
    r = rho ** -0.5
    return rho * (1 - r) ** 2, rho * (1 + r) ** 2


def _mp_standard(x, c):
    # Marchenko-Pastur density of ratio c (unit variance), absolutely continuous part
    lo, hi = (1 - math.sqrt(c)) ** 2, (1 + math.sqrt(c)) ** 2
    x = np.asarray(x, dtype=float)
    inside = (x > lo) & (x < hi) & (x > 0)
    xs = np.where(inside, x, 1.0)
    val = np.sqrt(np.clip((hi - xs) * (xs - lo), 0, None)) / (2 * np.pi * c * xs)
    return np.where(inside, val, 0.0)


def mp_density(t, rho: float):
    """Limiting density of the squared singular values, weighted by 1/N.

    Equals ``rho**-1 * f_{1/rho}(t / rho)`` with ``f_c`` the unit-variance
    Marchenko-Pastur density of ratio ``c``; its k-th moment is the limiting
    ``mu^(2k)`` and its total mass is ``min(rho, 1)``.
    """
    if rho <= 0:
        raise DomainError("rho must be positive")
    out = _mp_standard(np.asarray(t, dtype=float) / rho, 1.0 / rho) / rho
    return out if out.ndim else float(out)


def mp_density_rho2(t, rho: float):
    """The ``rho**-2`` prefactor variant, kept to compare conventions."""
    out = np.asarray(mp_density(t, rho)) / rho
    return out if out.ndim else float(out)


def mp_moment(k: int, rho: float, density=mp_density) -> float:
    """k-th moment of a density supported on the MP edges, by quadrature.

    The substitution t = m + h cos(phi) removes the square-root edge behaviour.
    """
    a, b = mp_edges(rho)
    m, h = (a + b) / 2, (b - a) / 2

    def g(phi):
        t = m + h * math.cos(phi)
        return t ** k * float(density(t, rho)) * h * math.sin(phi)

    val, err = integrate.quad(g, 0.0, math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise NumericError(f"quadrature failed for k={k}, rho={rho}")
    return val


def mp_cdf(t, rho: float):
    """Distribution function of the non-zero squared singular values (normalised to 1)."""
    a, b = mp_edges(rho)
    m, h = (a + b) / 2, (b - a) / 2
    mass = min(rho, 1.0)
    c = 1.0 / rho

    def g(phi):
        x = m + h * math.cos(phi)
        return float(_mp_standard(x / rho, c)) / rho * h * math.sin(phi)

    def one(x):
        if x <= a:
            return 0.0
        if x >= b:
            return 1.0
        phi = math.acos((x - m) / h)
        val, _ = integrate.quad(g, phi, math.pi, epsabs=1e-12, limit=200)
        return min(max(val / mass, 0.0), 1.0)

    arr = np.asarray(t, dtype=float)
    out = np.array([one(float(x)) for x in arr.ravel()]).reshape(arr.shape)
    return out if out.ndim else float(out)


def wigner_surmise(s):
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 0, 32 / np.pi**2 * s * s * np.exp(-4 * s * s / np.pi), 0.0)
    return out if out.ndim else float(out)


def wigner_surmise_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    a = 4 / np.pi
    inner = (math.sqrt(math.pi) * special.erf(math.sqrt(a) * s) / (4 * a**1.5)
             - s * np.exp(-a * s * s) / (2 * a))
    out = np.clip(32 / np.pi**2 * inner, 0.0, 1.0)
    return out if out.ndim else float(out)


def ks_distance(sample, reference_cdf) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = len(x)
    if n == 0:
        raise DomainError("empty sample")
    F = np.asarray(reference_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def level_spacing(eigs, E: float, t: float, N: int) -> SpacingSample:
    """Normalised nearest-neighbour gaps of eigenvalues within ``|lambda - E| <= t``."""
    if not -2 < E < 2:
        raise DomainError("energy must lie in (-2, 2)")
    if not 0 < t < 1:
        raise DomainError("cutoff must lie in (0, 1)")
    lam = np.sort(np.asarray(eigs, dtype=float))
    rho_E = float(semicircle_density(E))
    sel = np.nonzero(np.abs(lam[:-1] - E) <= t)[0]
    if len(sel) == 0:
        raise EmptyWindowError(f"no eigenvalue pairs within {t:g} of E={E:g}")
    s = 2 * N * rho_E * (lam[sel + 1] - lam[sel])
    return SpacingSample(E, t, rho_E, s, len(sel), N)


def histogram(values, bins: int = 100, normalization: Normalization = Normalization.COUNT,
              value_range: tuple[float, float] | None = None, eps: float = 1e-9) -> Histogram:
    """Uniform-bin histogram; the default range pads the data extremes by ``eps``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise DomainError("empty sample")
    if value_range is None:
        value_range = (float(v.min()) - eps, float(v.max()) + eps)
    counts, edges = np.histogram(v, bins=bins, range=value_range)
    return Histogram(edges, counts, Normalization(normalization), int(v.size))
