"""Moment identities and bounds for matrices without the y-average (models A, B, C)."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import mpmath
import numpy as np

from ..errors import DomainError, InvariantError, SizeError
from ..graphcore.explorations import canonicalize, enumerate_explorations
from ..matrixmodel import ExtReal, phase_frac_array
from ..spectra import moments, singular_values
from .phi import falling_factorial

IDENTITY_CAP = 10**7


@dataclass
class IdentityCheck:
    k: int
    lhs: float
    rhs: complex
    diff: float
    per_graph: dict[tuple[int, ...], complex]

    @property
    def passed(self) -> bool:
        return self.diff <= 1e-8 * max(1.0, abs(self.lhs))


def deterministic_graph_sum(k: int, X) -> tuple[complex, dict]:
    """N^-(1+k) sum over explorations, injective labels and all j in [N]^k of prod K.

    K_(i,i')(j) = N X_ij conj(X_i'j); no Kirchhoff constraint is imposed.
    """
    A = np.asarray(getattr(X, "entries", X))
    M, N = A.shape
    if (M * N) ** k > IDENTITY_CAP:
        raise SizeError(f"(M N)^k = {(M * N) ** k} exceeds {IDENTITY_CAP}")
    K = N * A[:, None, :] * A.conj()[None, :, :]
    J = np.array(list(itertools.product(range(N), repeat=k)), dtype=np.int64)
    per_graph = {}
    re_all, im_all = [], []
    for L in enumerate_explorations(k):
        tails = [a - 1 for a, _ in L.edges]
        heads = [b - 1 for _, b in L.edges]
        re, im = [], []
        for labels in itertools.permutations(range(M), L.l):
            lab = np.array(labels)
            prod = np.ones(len(J), dtype=np.complex128)
            for r in range(k):
                prod *= K[lab[tails[r]], lab[heads[r]], J[:, r]]
            re.append(float(prod.real.sum()))
            im.append(float(prod.imag.sum()))
        val = complex(math.fsum(re), math.fsum(im)) / N ** (1 + k)
        per_graph[L.nu] = val
        re_all.append(val.real)
        im_all.append(val.imag)
    return complex(math.fsum(re_all), math.fsum(im_all)), per_graph


def moment_deterministic_identity(k: int, X) -> IdentityCheck:
    """Compare (1/N) Tr[(X X*)^k] from singular values with the deterministic graph sum."""
    A = np.asarray(getattr(X, "entries", X))
    N = A.shape[1]
    lhs = moments(singular_values(A), N, k)[k - 1]
    rhs, per_graph = deterministic_graph_sum(k, A)
    return IdentityCheck(k, lhs, rhs, abs(lhs - rhs), per_graph)


def index_partition_counts(k: int, M: int) -> dict[tuple[int, ...], int]:
    """How many index tuples in [M]^k canonicalise to each exploration."""
    if M**k > IDENTITY_CAP:
        raise SizeError("M^k too large")
    return dict(Counter(canonicalize(t).nu for t in itertools.product(range(M), repeat=k)))


def check_index_partition(k: int, M: int) -> bool:
    """Every tuple maps to one exploration, and exploration L receives M!/(M-l)! tuples."""
    counts = index_partition_counts(k, M)
    expected = {L.nu: falling_factorial(M, L.l) for L in enumerate_explorations(k)}
    expected = {nu: c for nu, c in expected.items() if c}
    if sum(counts.values()) != M**k:
        raise InvariantError("index tuples were lost or duplicated")
    return counts == expected


# ---------------------------------------------------------------------------
# model B fourth moment
# ---------------------------------------------------------------------------

def _sqrt2() -> ExtReal:
    with mpmath.workprec(200):
        return ExtReal.from_mpf(mpmath.sqrt(2))


def _torus_norm(frac: np.ndarray) -> np.ndarray:
    return np.minimum(frac, 1.0 - frac)


def lattice_sum(Np: int) -> float:
    """(4 / (pi^2 N'^3)) sum_{s,r=1}^{N'/2} (||4 N' sqrt2 r s|| / ||4 sqrt2 r s||)^2."""
    h = Np // 2
    if h < 1:
        return 0.0
    w = _sqrt2()
    rs = np.outer(np.arange(1, h + 1, dtype=np.int64), np.arange(1, h + 1, dtype=np.int64))
    num = _torus_norm(phase_frac_array(4 * Np * rs, w.hi, w.lo))
    den = _torus_norm(phase_frac_array(4 * rs, w.hi, w.lo))
    ratio = (num / den) ** 2
    return 4.0 / (math.pi**2 * Np**3) * math.fsum(ratio.ravel().tolist())


def modelB_fourth_exact(N: int) -> float:
    """mu^(4) of model B: 1 + N^-3 sum_{j1 != j2} |sum_i e[sqrt2 i (j1^2 - j2^2)]|^2.

    The first term is the pattern with both row indices equal; the second is
    the two-vertex pattern, whose i-sum over distinct rows has been completed
    to a full square by removing the j1 = j2 terms.
    """
    w = _sqrt2()
    j = np.arange(1, N + 1, dtype=np.int64)
    d = (j[:, None] ** 2 - j[None, :] ** 2)
    d = d[d > 0]
    th = phase_frac_array(d, w.hi, w.lo)
    thN = phase_frac_array(N * d, w.hi, w.lo)
    vals = (np.sin(np.pi * thN) / np.sin(np.pi * th)) ** 2
    return 1.0 + 2.0 * math.fsum(vals.tolist()) / N**3


@dataclass
class ModelBBound:
    N: int
    N_alt: int
    value: float
    value_alt: float
    best: float
    implied_lower_bound: float


def modelB_fourth_bound(N: int) -> ModelBBound:
    """Evaluate the lattice sum at N and floor(8N/7) and the lower bound it gives.

    The two-vertex pattern contributes N^-3 sum_{j1 != j2} |.|^2 on top of the
    one-vertex pattern's 1, so the implied bound on mu^(4) is 1 + max.
    """
    if not 2 <= N <= 4000:
        raise SizeError("N must lie in 2..4000")
    Na = (8 * N) // 7
    v1, v2 = lattice_sum(N), lattice_sum(Na)
    best = max(v1, v2)
    return ModelBBound(N, Na, v1, v2, best, 1.0 + best)
