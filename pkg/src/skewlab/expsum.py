"""The constrained quadruple exponential sum ES_N and its decay in N.

ES_N(w) = N**-5 * sum_{i1, i2 <= M} sum_{j1 + j3 = j2 + j4}
          e[(w_i1 - w_i2) * (j1**2 - j2**2 + j3**2 - j4**2) / 2]

Three evaluators are provided: a brute-force sum over the quadruples, the
completed-square form (a sum of squared geometric series, hence >= 0) and an upper
bound obtained by estimating each geometric series.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, InvariantError, NumericError, SizeError
from .matrixmodel import (FreqSpec, FrequencySequence, make_frequencies, phase_frac_array,
                          random_frequencies, rows_for)

BRUTE_MAX_N = 128
NEAR_INTEGER = 1e-13
# the kernels multiply by L t <= N^2 / 4, which must stay below 2^31
SQUARE_MAX_N = 92000


class Method(str, enum.Enum):
    BRUTE_FORCE = "brute"
    COMPLETED_SQUARE = "square"
    GEOMETRIC_BOUND = "bound"


@dataclass
class ESResult:
    N: int
    M: int
    value: float
    method: Method
    runtime: float
    bound: float | None = None


@dataclass
class DecayFit:
    N_list: list[int]
    es_values: list[float]
    slope: float
    intercept: float
    r2: float


def _resolve(freq, N: int, rho) -> FrequencySequence:
    M = rows_for(rho, N)
    if M < 1:
        raise DomainError("floor(rho*N) must be at least 1")
    if isinstance(freq, FrequencySequence):
        if len(freq) < M:
            raise DomainError(f"need {M} frequencies, got {len(freq)}")
        if len(freq) > M:
            freq = FrequencySequence(freq.spec, M, freq.N, freq.hi[:M], freq.lo[:M])
        return freq
    return make_frequencies(freq, M, N)


def constant_es(N: int, M: int) -> float:
    """ES_N when all frequencies coincide: every quadruple contributes 1."""
    return M * M * (2 * N**3 + N) / (3 * N**5)


def random_freq_expectation(N: int, rho) -> float:
    """Exact mean of ES_N for frequencies uniform on [0, 2]^M."""
    M = rows_for(rho, N)
    return (M * (2 * N**3 + N) / 3 + M * (M - 1) * (2 * N * N - N)) / N**5


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------

def quadratic_exponent_histogram(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values q = (j1^2 - j2^2 + j3^2 - j4^2)/2 over j1 + j3 = j2 + j4, with counts."""
    j = np.arange(1, N + 1, dtype=np.int64)
    j1, j2, j3 = np.meshgrid(j, j, j, indexing="ij")
    j4 = j1 + j3 - j2
    ok = (j4 >= 1) & (j4 <= N)
    twice = j1[ok] ** 2 - j2[ok] ** 2 + j3[ok] ** 2 - j4[ok] ** 2
    if np.any(twice % 2):
        raise InvariantError("odd quadratic exponent under the linear constraint")
    return np.unique(twice // 2, return_counts=True)


def es_bruteforce(freq, N: int, rho=1) -> ESResult:
    """Sum over all constrained quadruples, grouped by the exponent they produce.

    With S(q) = sum_i e[q w_i] the (i1, i2) double sum is S(q) S(-q); both factors
    are computed independently so a non-zero imaginary part flags a bug.
    """
    if N > BRUTE_MAX_N:
        raise SizeError(f"brute-force ES is capped at N={BRUTE_MAX_N}")
    t0 = time.perf_counter()
    freq = _resolve(freq, N, rho)
    qs, counts = quadratic_exponent_histogram(N)
    total = 0j
    for start in range(0, len(qs), 2048):
        q = qs[start:start + 2048]
        c = counts[start:start + 2048]
        plus = phase_frac_array(q[None, :], freq.hi[:, None], freq.lo[:, None])
        minus = phase_frac_array(-q[None, :], freq.hi[:, None], freq.lo[:, None])
        s_plus = np.exp(2j * np.pi * plus).sum(axis=0)
        s_minus = np.exp(2j * np.pi * minus).sum(axis=0)
        total += np.sum(c * s_plus * s_minus)
    value = total / N**5
    if abs(value.imag) > 1e-9:
        raise InvariantError(f"ES_N has imaginary part {value.imag:.3e}")
    return ESResult(N, len(freq), float(value.real), Method.BRUTE_FORCE, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# completed square (numba kernels)
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@numba.njit(cache=True)
def _int_dist(m, hi, lo):
    # ||m (hi + lo)||, the distance to the nearest integer, for integer-valued
    # 0 <= m < 2**31.  Every piece is reduced with round() instead of floor() so
    # that a product close to an integer from either side stays small and keeps
    # its relative accuracy.
    hi = hi - round(hi)
    s, e = _two_sum(hi, lo)
    s = s - round(s)
    hi, lo = _two_sum(s, e)
    a = round(hi * 4194304.0) / 4194304.0
    r = hi - a
    b = round(r * 17592186044416.0) / 17592186044416.0
    c = r - b
    p1 = m * a
    p1 -= round(p1)
    p2 = m * b
    p2 -= round(p2)
    p3 = m * c + m * lo
    p3 -= round(p3)
    tot = p1 + p2 + p3
    return abs(tot - round(tot))


@numba.njit(cache=True)
def _series_sq(t, L, dh, dl):
    # |sum_{a=1}^{L} e[a t D]|^2 for the difference D = dh + dl, using
    # sin^2(pi x) = sin^2(pi ||x||)
    dist = _int_dist(float(t), dh, dl)
    if dist < NEAR_INTEGER:
        return float(L) * float(L)
    s1 = math.sin(math.pi * dist)
    sl = math.sin(math.pi * _int_dist(float(L) * float(t), dh, dl))
    return (sl * sl) / (s1 * s1)


@numba.njit(cache=True)
def _bound_term(t, dh, dl, N):
    dist = _int_dist(float(t), dh, dl)
    cap = float(N) * float(N)
    # compare before dividing: 4 dist^2 underflows for tiny distances
    if 4.0 * dist * dist * cap <= 1.0:
        return cap
    return 1.0 / (4.0 * dist * dist)


@numba.njit(cache=True)
def _pair_total(dh, dl, N, bound):
    # sum over t in (1-N, N-1); terms for t and -t coincide
    total = float(N) * float(N)
    for t in range(1, N):
        if bound:
            total += 2.0 * _bound_term(t, dh, dl, N)
        else:
            total += 2.0 * _series_sq(t, N - t, dh, dl)
    return total


@numba.njit(cache=True)
def _all_pairs(hi, lo, N, bound, out):
    M = hi.shape[0]
    k = 0
    for a in range(M):
        for b in range(a + 1, M):
            dh, e = _two_sum(hi[a], -hi[b])
            dl = e + (lo[a] - lo[b])
            dh, dl = _two_sum(dh, dl)
            out[k] = _pair_total(dh, dl, N, bound)
            k += 1


@numba.njit(cache=True)
def _by_offset(hi, lo, N, bound, out):
    # frequencies whose pairwise differences depend only on r = i1 - i2
    M = hi.shape[0]
    for r in range(1, M):
        dh, e = _two_sum(hi[r], -hi[0])
        dl = e + (lo[r] - lo[0])
        dh, dl = _two_sum(dh, dl)
        out[r - 1] = _pair_total(dh, dl, N, bound)


def _diagonal_total(N: int, bound: bool) -> float:
    # pairs with i1 == i2: every geometric series is at full length
    if bound:
        return float((2 * N - 1) * N * N)
    return (2 * N**3 + N) / 3


def _square_sum(freq: FrequencySequence, N: int, bound: bool, by_offset: bool | None) -> float:
    if N > SQUARE_MAX_N:
        raise SizeError(f"completed-square ES is capped at N={SQUARE_MAX_N}")
    M = len(freq)
    hi = np.ascontiguousarray(freq.hi, dtype=np.float64)
    lo = np.ascontiguousarray(freq.lo, dtype=np.float64)
    if by_offset is None:
        by_offset = freq.spec.difference_only
    diag = M * _diagonal_total(N, bound)
    if M == 1:
        return diag
    if by_offset:
        out = np.empty(M - 1)
        _by_offset(hi, lo, N, bound, out)
        weights = 2.0 * (M - np.arange(1, M))
        return math.fsum([diag, *(weights * out).tolist()])
    out = np.empty(M * (M - 1) // 2)
    _all_pairs(hi, lo, N, bound, out)
    return math.fsum([diag, *(2.0 * out).tolist()])


def es_completed_square(freq, N: int, rho=1, by_offset: bool | None = None) -> ESResult:
    """Exact ES_N as a sum of squared geometric series.

    For each pair the t-sum is ``N**2 + 2 sum_{t=1}^{N-1} sin^2(pi L th)/sin^2(pi th)``
    with ``L = N - t`` and ``th = t (w_i1 - w_i2)``; ``th`` within 1e-13 of an integer
    uses ``L**2``.  When differences depend only on ``i1 - i2`` (arithmetic or
    constant frequencies) the pair sum collapses to ``O(M)`` offsets.
    """
    t0 = time.perf_counter()
    freq = _resolve(freq, N, rho)
    value = _square_sum(freq, N, False, by_offset) / N**5
    return ESResult(N, len(freq), value, Method.COMPLETED_SQUARE, time.perf_counter() - t0)


def es_geometric_bound(freq, N: int, rho=1, by_offset: bool | None = None) -> ESResult:
    """Upper bound ``N**-5 sum min{N**2, 1/(4 ||t (w_i1 - w_i2)||**2)}``.

    Each squared geometric series is at most ``N**2`` and at most
    ``1/sin^2(pi th) <= 1/(4 ||th||**2)``.
    """
    t0 = time.perf_counter()
    freq = _resolve(freq, N, rho)
    bound = _square_sum(freq, N, True, by_offset) / N**5
    return ESResult(N, len(freq), bound, Method.GEOMETRIC_BOUND, time.perf_counter() - t0, bound=bound)


EVALUATORS = {
    Method.BRUTE_FORCE: es_bruteforce,
    Method.COMPLETED_SQUARE: es_completed_square,
    Method.GEOMETRIC_BOUND: es_geometric_bound,
}


def evaluate(freq, N: int, rho=1, method: Method | str = Method.COMPLETED_SQUARE) -> ESResult:
    return EVALUATORS[Method(method)](freq, N, rho)


# ---------------------------------------------------------------------------
# decay fits and random frequencies
# ---------------------------------------------------------------------------

def fit_loglog(N_list, values) -> DecayFit:
    N_list = [int(n) for n in N_list]
    values = [float(v) for v in values]
    if len(N_list) < 3:
        raise DomainError("a decay fit needs at least three values of N")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise NumericError("decay fit needs strictly positive finite values")
    x = np.log(np.asarray(N_list, dtype=float))
    y = np.log(np.asarray(values))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(N_list, values, float(slope), float(intercept), r2)


def fit_decay(freq: FreqSpec | str, N_list, rho=1, method: Method | str = Method.COMPLETED_SQUARE,
              results: list | None = None) -> DecayFit:
    """Least-squares slope of log ES_N against log N.

    Frequencies are regenerated for every N (power-law frequencies depend on N).
    Per-N results are appended to ``results`` when given.
    """
    if isinstance(freq, str):
        freq = FreqSpec.parse(freq)
    if len(N_list) < 3:
        raise DomainError("a decay fit needs at least three values of N")
    vals = []
    for N in N_list:
        res = evaluate(freq, N, rho, method)
        if results is not None:
            results.append(res)
        vals.append(res.value)
    return fit_loglog(N_list, vals)


def diophantine_count(N: int, verify_up_to: int = 40) -> int:
    """Solutions of j1 + j3 = j2 + j4 and j1^2 + j3^2 = j2^2 + j4^2 in [1, N]^4.

    The system forces {j1, j3} = {j2, j4}, giving 2N^2 - N; for small N the
    formula is checked against exhaustive search.
    """
    if N < 1:
        raise DomainError("N must be positive")
    formula = 2 * N * N - N
    if N <= verify_up_to:
        found = exhaustive_diophantine_count(N)
        if found != formula:
            raise InvariantError(f"exhaustive count {found} != 2N^2 - N = {formula}")
    return formula


def exhaustive_diophantine_count(N: int) -> int:
    j = np.arange(1, N + 1, dtype=np.int64)
    j1, j2, j3 = np.meshgrid(j, j, j, indexing="ij")
    j4 = j1 + j3 - j2
    ok = (j4 >= 1) & (j4 <= N) & (j1**2 + j3**2 == j2**2 + j4**2)
    return int(ok.sum())


def random_freq_mean(N: int, rho=1, samples: int = 100, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ES_N for w uniform on [0, 2]^M.

    Sample ``s`` uses Philox draw ``s`` of ``seed``; the standard error is NaN
    for a single sample.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    M = rows_for(rho, N)
    vals = np.array([es_completed_square(random_frequencies(M, seed, s), N, rho).value
                     for s in range(samples)])
    mean = math.fsum(vals.tolist()) / samples
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return mean, stderr
