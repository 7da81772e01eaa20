import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewlab.errors import DomainError, NumericError, SizeError
from skewlab.expsum import (ESResult, Method, constant_es, diophantine_count, es_bruteforce,
                            es_completed_square, es_geometric_bound, evaluate,
                            exhaustive_diophantine_count, fit_decay, fit_loglog,
                            random_freq_expectation, random_freq_mean)
from skewlab.matrixmodel import FreqKind, FreqSpec, FrequencySequence, make_frequencies


def _seq(values) -> FrequencySequence:
    values = np.asarray(values, dtype=float)
    return FrequencySequence(FreqSpec(FreqKind.FILE, path="<test>"), len(values), None,
                             values, np.zeros_like(values))


def _naive_es(w, N: int) -> float:
    """Quadruple loop over the defining sum, in mpmath so it shares no code with the library."""
    M = len(w)
    total = mpmath.mpf(0)
    with mpmath.workprec(120):
        ws = [mpmath.mpf(float(x)) for x in w]
        for j1, j2, j3 in itertools.product(range(1, N + 1), repeat=3):
            j4 = j1 + j3 - j2
            if not 1 <= j4 <= N:
                continue
            q = mpmath.mpf(j1 * j1 - j2 * j2 + j3 * j3 - j4 * j4) / 2
            for a in range(M):
                for b in range(M):
                    total += mpmath.cos(2 * mpmath.pi * (ws[a] - ws[b]) * q)
        return float(total / N**5)


# ---------------------------------------------------------------------------
# examples
# ---------------------------------------------------------------------------

def test_single_column():
    for freq in ("ialpha:sqrt2", "random:seed=3", "sqrti"):
        assert es_bruteforce(freq, 1).value == pytest.approx(1.0, abs=1e-15)
        assert es_completed_square(freq, 1).value == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("N", [1, 2, 4, 7, 16])
def test_constant_frequencies_closed_form(N):
    expected = constant_es(N, N)
    assert es_bruteforce("constant:0.37", N).value == pytest.approx(expected, rel=1e-12)
    assert es_completed_square("constant:0.37", N).value == pytest.approx(expected, rel=1e-12)
    # count oracle: number of solutions of j1 + j3 = j2 + j4
    count = sum(1 for j in itertools.product(range(1, N + 1), repeat=3)
                if 1 <= j[0] + j[2] - j[1] <= N)
    assert count == (2 * N**3 + N) // 3


def test_sqrt2_brute_matches_square_at_32():
    a = es_bruteforce("ialpha:sqrt2", 32).value
    b = es_completed_square("ialpha:sqrt2", 32).value
    assert abs(a - b) <= 1e-10


@pytest.mark.parametrize("N,M", [(3, 2), (4, 3), (5, 5)])
def test_routes_match_naive_oracle(N, M):
    w = np.random.default_rng(N).random(M) * 2
    ref = _naive_es(w, N)
    rho = f"{M}/{N}"     # exact; the float M/N can floor to M - 1
    assert es_bruteforce(_seq(w), N, rho).value == pytest.approx(ref, abs=1e-12)
    assert es_completed_square(_seq(w), N, rho).value == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_five_random_frequency_draws(N):
    for seed in range(5):
        f = make_frequencies(f"random:seed={seed}", N)
        assert abs(es_bruteforce(f, N).value - es_completed_square(f, N).value) <= 1e-10


def test_sqrt2_positive_and_decreasing():
    vals = [es_completed_square("ialpha:sqrt2", N).value for N in (64, 128, 256, 512)]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_bound_examples():
    for seed in range(10):
        f = make_frequencies(f"random:seed={seed}", 32)
        assert es_geometric_bound(f, 32).value >= es_completed_square(f, 32).value - 1e-9
    # constant frequencies: every term takes min = N^2, so the bound is M^2 (2N-1) N^2 / N^5
    N = 20
    bound = es_geometric_bound("constant:0.5", N).value
    assert bound == pytest.approx(N * N * (2 * N - 1) * N**2 / N**5, rel=1e-12)
    assert bound >= constant_es(N, N)
    ratio = es_geometric_bound("ialpha:sqrt2", 256).value / es_completed_square("ialpha:sqrt2", 256).value
    assert 1.0 <= ratio     # calibration only: the factor is reported, not asserted tight


def test_by_offset_matches_generic_path():
    for freq in ("ialpha:sqrt2", "constant:0.25"):
        f = make_frequencies(freq, 256)
        a = es_completed_square(f, 256, by_offset=True).value
        b = es_completed_square(f, 256, by_offset=False).value
        assert a == pytest.approx(b, rel=1e-12)


def test_caps_and_errors():
    with pytest.raises(SizeError):
        es_bruteforce("sqrti", 129)
    with pytest.raises(SizeError):
        es_completed_square("constant:0", 10**5)
    with pytest.raises(DomainError):
        es_completed_square(_seq([0.1, 0.2]), 10)       # needs 10 frequencies
    assert isinstance(evaluate("sqrti", 8, 1, "bound"), ESResult)
    assert evaluate("sqrti", 8, 1, Method.BRUTE_FORCE).method is Method.BRUTE_FORCE


def test_rho_enters_through_floor():
    f = make_frequencies("random:seed=9", 20)
    a = es_completed_square(f, 20, "0.5")
    b = es_completed_square(_seq(f.hi[:10]), 20, "0.5")
    assert a.M == 10 and a.value == b.value


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

freq_arrays = st.lists(st.floats(0, 2, allow_nan=False, allow_infinity=False), min_size=1, max_size=12)


@settings(max_examples=60)
@given(freq_arrays, st.integers(1, 32))
def test_route_equivalence_and_domination(w, N):
    M = len(w)
    f = _seq(w)
    rho = f"{M}/{N}"
    if M > N:
        return
    brute = es_bruteforce(f, N, rho).value
    exact = es_completed_square(f, N, rho).value
    bound = es_geometric_bound(f, N, rho).value
    assert abs(brute - exact) <= 1e-9
    assert exact >= -1e-12
    assert bound >= exact - 1e-9


@settings(max_examples=40)
@given(freq_arrays, st.integers(1, 24), st.data())
def test_integer_shift_invariance(w, N, data):
    M = len(w)
    if M > N:
        return
    i = data.draw(st.integers(0, M - 1))
    shifted = list(w)
    shifted[i] += 1.0
    rho = f"{M}/{N}"
    a = es_completed_square(_seq(w), N, rho).value
    b = es_completed_square(_seq(shifted), N, rho).value
    assert abs(a - b) <= 1e-9


# ---------------------------------------------------------------------------
# fits, Diophantine count, random frequencies
# ---------------------------------------------------------------------------

def test_fit_loglog_recovers_power():
    Ns = [16, 32, 64, 128]
    fit = fit_loglog(Ns, [3.0 * n**-0.5 for n in Ns])
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(NumericError):
        fit_loglog(Ns, [1, 2, 0, 1])
    with pytest.raises(DomainError):
        fit_loglog([1, 2], [1, 1])


def test_constant_decay_is_flat():
    fit = fit_decay("constant:0", [64, 128, 256, 512])
    assert abs(fit.slope) < 0.05


def test_diophantine_count():
    assert diophantine_count(1) == 1
    assert diophantine_count(2) == 6
    assert diophantine_count(5) == 45
    assert exhaustive_diophantine_count(2) == 6
    # independent loop for a middle value
    N = 9
    c = sum(1 for a, b, c_, d in itertools.product(range(1, N + 1), repeat=4)
            if a + c_ == b + d and a * a + c_ * c_ == b * b + d * d)
    assert diophantine_count(N) == c == 2 * N * N - N
    assert diophantine_count(1000) == 2 * 1000**2 - 1000


def test_random_mean_single_sample_reproducible():
    a = random_freq_mean(16, 1, 1, seed=5)
    b = random_freq_mean(16, 1, 1, seed=5)
    assert a[0] == b[0] and math.isnan(a[1])


def test_random_mean_close_to_exact_expectation():
    mean, err = random_freq_mean(24, 1, 40, seed=2)
    assert abs(mean - random_freq_expectation(24, 1)) <= 4 * err
    assert mean <= 16 / 24


def test_random_mean_decreases():
    m32, _ = random_freq_mean(32, 1, 30, seed=0)
    m64, _ = random_freq_mean(64, 1, 30, seed=0)
    assert m64 < m32
