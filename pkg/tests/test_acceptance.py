"""End-to-end acceptance suite.

Each test prints exactly one line of the form ``[ACC nn] PASS|FAIL  <what>  <measured>``
and then asserts, so the summary is readable in ``pytest -v`` output even when
a check fails.  Wall-clock budgets are asserted alongside the numbers.
"""

import math
import random
import time

import numpy as np
import pytest

from randomgraphs import bypass_instance, even_bypass_instance, loop_erase_instance
from skewlab.cli import main
from skewlab.expsum import (diophantine_count, es_bruteforce, es_completed_square, es_geometric_bound,
                            exhaustive_diophantine_count, fit_decay, random_freq_mean)
from skewlab.graphcore import (MELON, CurrentMode, bell, bypass, cycle_basis,
                               enumerate_admissible_currents, enumerate_explorations, even_bypass,
                               find_good_cycle, loop_erase, preprocess, verify_good_cycle)
from skewlab.matrixmodel import build_matrix, model_config
from skewlab.momentengine import (effective_propagator, lattice_sum, modelB_fourth_bound,
                                  moment_deterministic_identity, moment_graph_sum, moment_montecarlo,
                                  recursion_polys, reducible_weight_sum)
from skewlab.spectra import (eigenvalues_H, ks_distance, level_spacing, moments, mp_cdf,
                             semicircle_cdf, singular_values, wigner_surmise_cdf)


@pytest.fixture
def report(capsys):
    def _report(num: int, what: str, ok: bool, measured: str, seconds: float, budget: float):
        timed = seconds <= budget
        status = "PASS" if ok and timed else "FAIL"
        with capsys.disabled():
            print(f"\n[ACC {num:02d}] {status}  {what}  {measured}  ({seconds:.1f}s / {budget:.0f}s)")
        assert ok, measured
        assert timed, f"took {seconds:.1f}s, budget {budget}s"
    return _report


def test_acc01_catalan_recursion(report, tmp_path, capsys):
    t0 = time.perf_counter()
    code = main(["graphs", "recursion", "--kmax", "10", "--rho", "1", "--out-dir", str(tmp_path)])
    dt = time.perf_counter() - t0
    out = capsys.readouterr().out.strip().splitlines()[-1]
    expected = "1,1,2,5,14,42,132,429,1430,4862,16796"
    report(1, "recursion kmax=10 rho=1 gives Catalan", code == 0 and out == expected, out, dt, 1)


def test_acc02_enumeration_matches_recursion(report):
    t0 = time.perf_counter()
    polys = recursion_polys(6)
    sums = {k: reducible_weight_sum(k) for k in range(1, 7)}
    ok = all(sums[k] == polys[k] for k in sums) and sums[3] == (0, 1, 3, 1)
    report(2, "reducible weight sums equal proof-form recursion, k<=6", ok,
           f"mu3 coeffs {sums[3]}", time.perf_counter() - t0, 30)


def test_acc03_good_cycles_exhaustive(report):
    t0 = time.perf_counter()
    seen, nonpoint, failures = 0, 0, []
    for k in range(1, 7):
        for L in enumerate_explorations(k):
            seen += 1
            P = preprocess(L.graph().undirected()).graph
            if P.is_point():
                continue
            nonpoint += 1
            good = find_good_cycle(P)
            if good is None or not verify_good_cycle(P, good):
                failures.append(L.label())
    ok = not failures and bell(6) == 203 and len(enumerate_explorations(6)) == 203
    report(3, "every preprocessed non-point graph, k<=6, has a verified good cycle", ok,
           f"{seen} explorations, {nonpoint} non-point, {len(failures)} failures",
           time.perf_counter() - t0, 60)


def test_acc04_deterministic_identity(report):
    t0 = time.perf_counter()
    worst, ok = 0.0, True
    for model in ("A", "B"):
        X = build_matrix(model_config(model, 6))
        for k in (2, 3):
            chk = moment_deterministic_identity(k, X)
            worst = max(worst, chk.diff / max(1.0, abs(chk.lhs)))
            ok &= chk.diff <= 1e-8 * max(1.0, abs(chk.lhs))
    report(4, "trace moment = deterministic graph sum, N=6, k in {2,3}, models A and B", ok,
           f"max rel diff {worst:.2e}", time.perf_counter() - t0, 60)


def test_acc05_expsum_routes(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240501)
    worst_gap, min_exact, min_margin = 0.0, math.inf, math.inf
    for trial in range(50):
        N = int(rng.integers(1, 33))
        freq = f"random:seed={trial}"
        brute = es_bruteforce(freq, N).value
        exact = es_completed_square(freq, N).value
        bound = es_geometric_bound(freq, N).value
        worst_gap = max(worst_gap, abs(brute - exact))
        min_exact = min(min_exact, exact)
        min_margin = min(min_margin, bound - exact)
    ok = worst_gap <= 1e-9 and min_exact >= -1e-12 and min_margin >= -1e-9
    report(5, "brute = completed square, ES >= 0, bound dominates (50 draws)", ok,
           f"max |brute-square| {worst_gap:.1e}, min ES {min_exact:.3g}, min margin {min_margin:.3g}",
           time.perf_counter() - t0, 120)


def test_acc06_quasi_random_decay(report):
    t0 = time.perf_counter()
    Ns = [64, 128, 256, 512, 1024]
    s_alpha = fit_decay("ialpha:sqrt2", Ns).slope
    s_sqrt = fit_decay("sqrti", Ns).slope
    s_const = fit_decay("constant:0", Ns).slope
    ok = s_alpha <= -0.3 and s_sqrt <= -0.2 and abs(s_const) <= 0.05
    report(6, "log-log decay slopes of ES_N", ok,
           f"i*sqrt2 {s_alpha:.3f}, sqrt(i) {s_sqrt:.3f}, constant {s_const:.3g}",
           time.perf_counter() - t0, 300)


def test_acc07_random_frequency_mean(report):
    t0 = time.perf_counter()
    mean, err = random_freq_mean(32, 1, 100, seed=0)
    counts_ok = all(exhaustive_diophantine_count(N) == diophantine_count(N) == 2 * N * N - N
                    for N in range(1, 41))
    ok = mean <= 0.5 + 3 * err and counts_ok
    report(7, "random-frequency mean ES_32 and Diophantine count", ok,
           f"mean {mean:.4f} +- {err:.4f}, counts N<=40 {'match' if counts_ok else 'differ'}",
           time.perf_counter() - t0, 120)


def test_acc08_semicircle(report):
    t0 = time.perf_counter()
    N = 1000
    sigma = singular_values(build_matrix(model_config("skewshift", N, 1, "ialpha:sqrt2", seed=1)))
    mu2, mu4 = moments(sigma, N, 2)
    ks = ks_distance(eigenvalues_H(sigma, N, N), semicircle_cdf)
    ok = abs(mu2 - 1) <= 1e-9 and abs(mu4 - 2) <= 0.15 and ks <= 0.05
    report(8, "skew-shift i*sqrt2, N=1000 against the semicircle", ok,
           f"mu2 {mu2:.12f}, mu4 {mu4:.4f}, KS {ks:.4f}", time.perf_counter() - t0, 120)


def test_acc09_marchenko_pastur(report):
    t0 = time.perf_counter()
    N = 1000
    sigma = singular_values(build_matrix(model_config("skewshift", N, "1/2", "ialpha:sqrt2", seed=1)))
    mu2, mu4 = moments(sigma, N, 2)
    ks = ks_distance((sigma * sigma)[:500], lambda t: mp_cdf(t, 0.5))
    ok = abs(mu2 - 0.5) <= 1e-9 and abs(mu4 - 0.75) <= 0.1
    report(9, "skew-shift rho=1/2, N=1000 moments", ok,
           f"mu2 {mu2:.12f}, mu4 {mu4:.4f} (KS to MP {ks:.3f}, informational)",
           time.perf_counter() - t0, 60)


def test_acc10_montecarlo_vs_graph_sum(report):
    t0 = time.perf_counter()
    N = 50
    exact = moment_graph_sum(2, effective_propagator("ialpha:sqrt2", N))
    mean, err = moment_montecarlo(2, model_config("skewshift", N, 1, "ialpha:sqrt2", seed=11), 400, 11)
    ok = abs(mean - exact) <= 3 * err
    report(10, "Monte Carlo mu4 (400 draws) vs graph sum, N=50", ok,
           f"MC {mean:.5f} +- {err:.5f}, graph sum {exact:.5f}", time.perf_counter() - t0, 120)


def test_acc11_model_b_fourth_moment(report):
    t0 = time.perf_counter()
    best_mu4, best_N, min_sum = 0.0, None, math.inf
    for N in range(100, 501, 50):
        mu4 = moments(singular_values(build_matrix(model_config("B", N))), N, 2)[1]
        if mu4 > best_mu4:
            best_mu4, best_N = mu4, N
        min_sum = min(min_sum, modelB_fourth_bound(N).best)
    ok = best_mu4 > 2.02 and min_sum > 0
    report(11, "model B: some N in 100..500 has mu4 > 2.02; lattice sum max > 0 for all", ok,
           f"max mu4 {best_mu4:.4f} at N={best_N}, min lattice max {min_sum:.4f}",
           time.perf_counter() - t0, 300)


def test_acc12_level_spacing(report):
    t0 = time.perf_counter()
    N = 2000
    sigma = singular_values(build_matrix(model_config("A", N)))
    sample = level_spacing(eigenvalues_H(sigma, N, N), 0.0, N ** -0.1, N)
    ks = ks_distance(sample.s_values, wigner_surmise_cdf)
    report(12, "model A spacings at E=0 against the Wigner surmise", ks <= 0.1,
           f"KS {ks:.4f} over {len(sample.s_values)} spacings", time.perf_counter() - t0, 600)


def test_acc13_kirchhoff_counting(report):
    t0 = time.perf_counter()
    counts = {N: {m.value: enumerate_admissible_currents(MELON.graph(), N, m).count for m in CurrentMode}
              for N in (2, 5, 10)}
    ok = all(set(c.values()) == {(2 * N**3 + N) // 3} for N, c in counts.items())
    ok &= [counts[N]["basis"] for N in (2, 5, 10)] == [6, 85, 670]
    dims_ok = all(cycle_basis(L.graph()).dimension == L.k - L.l + 1
                  for k in range(1, 7) for L in enumerate_explorations(k))
    report(13, "melon current counts by both routes; cycle dimension k-l+1 for k<=6", ok and dims_ok,
           f"counts {[counts[N]['basis'] for N in (2, 5, 10)]}, dimensions {'ok' if dims_ok else 'wrong'}",
           time.perf_counter() - t0, 60)


def test_acc14_bypass_properties(report):
    t0 = time.perf_counter()
    rng = random.Random(14)
    done = {"bypass": 0, "even_bypass": 0, "loop_erase": 0}
    bad = []
    while min(done.values()) < 1000:
        if done["bypass"] < 1000 and (inst := bypass_instance(rng)) is not None:
            G, C, Cp, e, ep = inst
            out = bypass(C, Cp, e, ep)
            if not (out.is_simple() and out.valid_in(G) and out.uses(e) == 1 and out.uses(ep) == 0
                    and out.edge_set <= C.edge_set | Cp.edge_set):
                bad.append(("bypass", inst))
            done["bypass"] += 1
        if done["even_bypass"] < 1000 and (inst := even_bypass_instance(rng)) is not None:
            G, W, e1, e2 = inst
            out = even_bypass(W, e1, e2)
            if not (out.is_closed() and out.valid_in(G) and out.uses(e1) == 1 and out.uses(e2) == 0
                    and out.edge_set <= W.edge_set):
                bad.append(("even_bypass", inst))
            done["even_bypass"] += 1
        if done["loop_erase"] < 1000 and (inst := loop_erase_instance(rng)) is not None:
            G, W, a = inst
            out = loop_erase(W, a)
            if not (out.is_simple() and out.valid_in(G) and out.uses(a) == 1 and out.edge_set <= W.edge_set):
                bad.append(("loop_erase", inst))
            done["loop_erase"] += 1
    report(14, "1000 random trials each of bypass, even_bypass, loop_erase", not bad,
           f"{sum(done.values())} trials, {len(bad)} postcondition failures", time.perf_counter() - t0, 30)


@pytest.mark.slow
@pytest.mark.parametrize("model,expected", [("A", (3.0, 70.0, 4000.0)), ("B", (2.0, 5.0, 16.0))])
def test_table_moments_at_8000(report, model, expected):
    t0 = time.perf_counter()
    N = 8000
    mus = moments(singular_values(build_matrix(model_config(model, N))), N, 4)[1:]
    ok = all(abs(m - e) <= 0.3 * e for m, e in zip(mus, expected))
    report(15, f"model {model} N=8000 mu4, mu6, mu8 within 30% of the tabulated values", ok,
           "measured " + ", ".join(f"{m:.4g}" for m in mus), time.perf_counter() - t0, 3600)
