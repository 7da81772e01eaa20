"""Command-line front end: every run writes CSV/JSON artifacts plus manifest.json.

Exit codes: 0 success, 2 usage or size limit, 3 empty result, 4 property violation.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (DomainError, EmptyWindowError, InputError, InvariantError, NumericError,
                     SizeError)
from .io import RunManifest, sha256, write_csv, write_json

EXIT_OK, EXIT_USAGE, EXIT_EMPTY, EXIT_VIOLATION = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _rho(text: str):
    from fractions import Fraction
    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if r <= 0:
        raise argparse.ArgumentTypeError("rho must be positive")
    return r


def _set_threads(n: int | None) -> int:
    import numba
    from threadpoolctl import threadpool_limits

    n = n or os.cpu_count() or 1
    threadpool_limits(n)
    with warnings.catch_warnings():
        # numba probes optional threading layers and warns about the ones it skips
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n


def _model_config(args):
    from .matrixmodel import model_config
    return model_config(args.model, args.n, args.rho, args.freq, args.seed)


# ---------------------------------------------------------------------------
# spectrum / spacing
# ---------------------------------------------------------------------------

def cmd_spectrum(args, manifest: RunManifest) -> int:
    from .matrixmodel import build_matrix
    from .spectra import (eigenvalues_H, histogram, ks_distance, moments, mp_cdf, semicircle_cdf,
                          singular_values)

    cfg = _model_config(args)
    t0 = time.perf_counter()
    X = build_matrix(cfg)
    t_build = time.perf_counter() - t0
    sigma = singular_values(X)
    t_eig = time.perf_counter() - t0 - t_build
    M, N = cfg.M, cfg.N
    eigs = eigenvalues_H(sigma, M, N)
    mus = moments(sigma, N, args.kmax)
    hist = histogram(eigs, bins=args.bins)
    width = np.diff(hist.bin_edges)
    dens_full = hist.counts / ((M + N) * width)
    dens_2n = hist.counts / (2 * N * width)
    if M == N:
        ks = ks_distance(eigs, semicircle_cdf)
        reference = "semicircle"
    else:
        s2 = (sigma * sigma)[: min(M, N)]
        ks = ks_distance(s2, lambda t: mp_cdf(t, float(cfg.rho)))
        reference = "marchenko-pastur"
    meta = {"model": args.model, "freq": str(cfg.freq), "M": M, "N": N, "rho": str(cfg.rho),
            "y_seed": cfg.y_seed, "quad_form": cfg.quad_form.value}
    out = Path(args.out_dir)
    rows = [(float(a), float(b), float(d), float(e))
            for a, b, d, e in zip(hist.bin_edges[:-1], hist.bin_edges[1:], dens_full, dens_2n)]
    manifest.add_output(write_csv(out / "esd.csv", ["bin_left", "bin_right", "density", "density_2n"],
                                  rows, {**meta, "density": "1/(M+N) over all eigenvalues of H",
                                         "density_2n": "1/(2N)"}))
    manifest.add_output(write_csv(out / "moments.csv", ["k", "mu2k"],
                                  [(k + 1, m) for k, m in enumerate(mus)], meta))
    summary = {"config": cfg.to_dict(), "moments": {str(k + 1): m for k, m in enumerate(mus)},
               "ks": ks, "ks_reference": reference, "sigma_max": float(sigma[0]),
               "timings": {"build": t_build, "eigen": t_eig}}
    manifest.add_output(write_json(out / "summary.json", summary))
    print(f"M={M} N={N} mu^(2)={mus[0]:.12g}" + (f" mu^(4)={mus[1]:.6g}" if len(mus) > 1 else "")
          + f" KS({reference})={ks:.4f}")
    return EXIT_OK


def cmd_spacing(args, manifest: RunManifest) -> int:
    from .matrixmodel import build_matrix
    from .spectra import (eigenvalues_H, ks_distance, level_spacing, singular_values, wigner_surmise,
                          wigner_surmise_cdf)

    if not -2 < args.energy < 2:
        raise UsageError("--energy must lie in (-2, 2)")
    if args.cutoff_exp <= 0:
        raise UsageError("--cutoff-exp must be positive")
    cfg = _model_config(args)
    sigma = singular_values(build_matrix(cfg))
    eigs = eigenvalues_H(sigma, cfg.M, cfg.N)
    t = cfg.N ** (-args.cutoff_exp)
    sample = level_spacing(eigs, args.energy, t, cfg.N)
    ks = ks_distance(sample.s_values, wigner_surmise_cdf)
    edges = np.linspace(0.0, args.smax, args.bins + 1)
    counts, _ = np.histogram(sample.s_values, bins=edges)
    width = edges[1] - edges[0]
    dens = counts / (len(sample.s_values) * width)
    centers = (edges[:-1] + edges[1:]) / 2
    rows = [(float(c), int(n), float(d), float(wigner_surmise(c))) for c, n, d in zip(centers, counts, dens)]
    meta = {"model": args.model, "freq": str(cfg.freq), "N": cfg.N, "M": cfg.M, "E": args.energy,
            "t": repr(t), "spacings": len(sample.s_values), "ks_surmise": repr(ks)}
    manifest.add_output(write_csv(Path(args.out_dir) / "spacing.csv", ["s", "count", "density", "surmise"],
                                  rows, meta))
    print(f"spacings={len(sample.s_values)} mean_s={float(np.mean(sample.s_values)):.4f} KS(surmise)={ks:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# expsum
# ---------------------------------------------------------------------------

def cmd_expsum(args, manifest: RunManifest) -> int:
    from .expsum import BRUTE_MAX_N, evaluate, fit_loglog, random_freq_mean
    from .matrixmodel import FreqSpec

    if args.method == "brute" and max(args.n_list) > BRUTE_MAX_N:
        raise UsageError(f"--method brute is capped at N={BRUTE_MAX_N}")
    if args.method == "mean-random":
        spec_text = f"random:seed={args.seed}"
    else:
        if not args.freq:
            raise UsageError("--freq is required for this method")
        spec_text = args.freq
    spec = FreqSpec.parse(spec_text)
    header = ["N", "method", "value"]
    if args.method == "mean-random":
        header.append("stderr")
    if args.timings:
        header.append("seconds")
    rows, values = [], []
    for N in args.n_list:
        t0 = time.perf_counter()
        if args.method == "mean-random":
            mean, err = random_freq_mean(N, args.rho, args.samples, args.seed)
            row = [N, args.method, mean, err]
            values.append(mean)
        else:
            res = evaluate(spec, N, args.rho, args.method)
            row = [N, args.method, res.value]
            values.append(res.value)
        if args.timings:
            row.append(time.perf_counter() - t0)
        rows.append(row)
        print(f"N={N} {args.method} ES={row[2]:.10g}")
    meta = {"freq": str(spec), "rho": str(args.rho)}
    out = Path(args.out_dir)
    manifest.add_output(write_csv(out / "expsum.csv", header, rows, meta))
    if len(args.n_list) >= 3:
        fit = fit_loglog(args.n_list, values)
        manifest.add_output(write_csv(out / "decay.csv", ["kind", "N", "es", "fitted_slope"],
                                      [(str(spec), N, v, fit.slope) for N, v in zip(args.n_list, values)],
                                      {**meta, "r2": repr(fit.r2)}))
        print(f"fitted slope {fit.slope:.4f} (r2={fit.r2:.4f})")
    else:
        print("decay fit skipped: needs at least three values of N")
    return EXIT_OK


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def _graph_rows(ks):
    from .graphcore import enumerate_explorations
    for k in ks:
        yield from enumerate_explorations(k)


def cmd_graphs_enumerate(args, manifest: RunManifest) -> int:
    from .graphcore import cycle_basis, preprocess

    rows, graphs = [], []
    for L in _graph_rows([args.k]):
        G = L.graph()
        red = preprocess(G.undirected())
        rows.append([L.label(), L.k, L.l, int(red.is_point), len(red.graph.vertices),
                     len(red.graph.edges), cycle_basis(G).dimension])
        graphs.append(G.to_dict())
    out = Path(args.out_dir)
    manifest.add_output(write_csv(out / "explorations.csv",
                                  ["graph_id", "k", "l", "fully_reducible", "reduced_vertices",
                                   "reduced_edges", "cycle_dim"], rows, {"k": args.k}))
    manifest.add_output(write_json(out / "graphs.json", graphs))
    print(f"{len(rows)} explorations on {args.k} edges")
    return EXIT_OK


def cmd_graphs_goodcycles(args, manifest: RunManifest) -> int:
    from .graphcore import find_good_cycle, preprocess, verify_good_cycle

    ks = range(1, args.k + 1) if args.upto else [args.k]
    rows, failures = [], []
    for L in _graph_rows(ks):
        red = preprocess(L.graph().undirected())
        P = red.graph
        if P.is_point():
            rows.append([L.label(), L.k, len(P.vertices), len(P.edges), 1, "", ""])
            continue
        good = find_good_cycle(P)
        ok = good is not None and verify_good_cycle(P, good)
        cyc = " ".join(str(e) for e in good.cycle.edge_ids) if good else ""
        rows.append([L.label(), L.k, len(P.vertices), len(P.edges), 0, cyc, int(ok)])
        if not ok:
            failures.append(L.label())
    manifest.add_output(write_csv(Path(args.out_dir) / "goodcycles.csv",
                                  ["graph_id", "k", "reduced_vertices", "reduced_edges", "point",
                                   "good_cycle_edges", "verified"], rows, {"k": args.k, "upto": args.upto}))
    nonpoint = sum(1 for r in rows if r[4] == 0)
    print(f"{len(rows)} explorations, {nonpoint} non-point reduced graphs, {len(failures)} without a good cycle")
    if failures:
        print("no good cycle for: " + ", ".join(failures), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_graphs_phi(args, manifest: RunManifest) -> int:
    from .momentengine import effective_propagator, phi

    if not args.freq:
        raise UsageError("--freq is required")
    prop = effective_propagator(args.freq, args.n, args.rho)
    rows, graphs = [], []
    re_tot, im_tot = [], []
    for L in _graph_rows([args.k]):
        v = phi(L, prop)
        rows.append([L.label(), args.n, v.real, v.imag, abs(v)])
        graphs.append(L.graph().to_dict())
        re_tot.append(v.real)
        im_tot.append(v.imag)
    total = complex(math.fsum(re_tot), math.fsum(im_tot))
    out = Path(args.out_dir)
    manifest.add_output(write_csv(out / "phi.csv", ["graph_id", "N", "re", "im", "abs"], rows,
                                  {"freq": args.freq, "rho": str(args.rho), "k": args.k,
                                   "sum_re": repr(total.real), "sum_im": repr(total.imag)}))
    manifest.add_output(write_json(out / "graphs.json", graphs))
    print(f"sum of Phi over {len(rows)} explorations = {total.real:.12g} (imag {total.imag:.2e})")
    return EXIT_OK


def cmd_graphs_recursion(args, manifest: RunManifest) -> int:
    from .momentengine import recursion_moments

    table = recursion_moments(args.kmax, args.rho, args.form)
    rho1 = table.rho == 1
    rows = [[k, str(m), table.catalan[k] if rho1 else ""] for k, m in enumerate(table.mu_tilde)]
    manifest.add_output(write_csv(Path(args.out_dir) / "recursion.csv", ["k", "mu_tilde", "catalan_if_rho1"],
                                  rows, {"rho": str(table.rho), "form": args.form}))
    print(",".join(str(m) for m in table.mu_tilde))
    return EXIT_OK


def cmd_graphs_identity(args, manifest: RunManifest) -> int:
    from .matrixmodel import build_matrix, model_config
    from .momentengine import moment_deterministic_identity

    cfg = model_config(args.model, args.n, 1, args.freq)
    chk = moment_deterministic_identity(args.k, build_matrix(cfg))
    manifest.add_output(write_csv(Path(args.out_dir) / "identity.csv",
                                  ["k", "lhs", "rhs_re", "rhs_im", "abs_diff"],
                                  [[args.k, chk.lhs, chk.rhs.real, chk.rhs.imag, chk.diff]],
                                  {"model": args.model, "freq": str(cfg.freq), "N": args.n}))
    print(f"trace moment {chk.lhs:.15g}  graph sum {chk.rhs.real:.15g}  |diff| {chk.diff:.3e}")
    return EXIT_OK if chk.passed else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def cmd_replay(args, manifest: RunManifest) -> int:
    old = RunManifest.load(args.manifest)
    argv = list(old.argv)
    if "--out-dir" in argv:
        i = argv.index("--out-dir")
        argv[i + 1] = args.out_dir
    else:
        argv = argv + ["--out-dir", args.out_dir]
    code = main(argv)
    if code != EXIT_OK:
        return code
    mismatched = []
    for name, digest in old.outputs.items():
        path = Path(args.out_dir) / name
        if not name.endswith(".csv"):
            continue
        if not path.exists() or sha256(path) != digest:
            mismatched.append(name)
    for name in mismatched:
        print(f"digest mismatch: {name}", file=sys.stderr)
    print("replay reproduced all CSV outputs" if not mismatched else "replay differs")
    return EXIT_VIOLATION if mismatched else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, out_default="."):
    p.add_argument("--out-dir", default=out_default, help="directory for output files (default: .)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="threads for BLAS and numba kernels (default: all cores)")


def _model_flags(p, default_model):
    p.add_argument("--model", choices=["skewshift", "A", "B", "C"], default=default_model,
                   help="skewshift: C(j,2) w + j y with random y; A/B/C: deterministic, y = 0")
    p.add_argument("--freq", default=None,
                   help="frequency spec: ialpha:<float|sqrt2>, sqrti, power:<a>:<b>, random:seed=<u64>, "
                        "constant:<float>, file:<path> (default depends on model)")
    p.add_argument("--n", type=_positive_int, required=True, help="number of columns N")
    p.add_argument("--rho", type=_rho, default=1, help="aspect ratio; M = floor(rho N) (default 1)")
    p.add_argument("--seed", type=int, default=0, help="seed for the y offsets (skewshift only)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skewlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"skewlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="singular values, moments and eigenvalue histogram of H")
    _model_flags(p, "skewshift")
    p.add_argument("--bins", type=_positive_int, default=100)
    p.add_argument("--kmax", type=_positive_int, default=4, help="highest k for mu^(2k)")
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("spacing", help="nearest-neighbour level spacing near an energy")
    _model_flags(p, "A")
    p.add_argument("--energy", type=float, default=0.0, help="energy E in (-2, 2)")
    p.add_argument("--cutoff-exp", type=float, default=0.1, help="window half-width t = N^-gamma")
    p.add_argument("--bins", type=_positive_int, default=40)
    p.add_argument("--smax", type=float, default=4.0, help="upper end of the spacing histogram")
    _common(p)
    p.set_defaults(func=cmd_spacing)

    p = sub.add_parser("expsum", help="exponential sum ES_N over a list of N and its decay slope")
    p.add_argument("--freq", default=None, help="frequency spec (see spectrum --help)")
    p.add_argument("--n-list", type=_int_list, required=True, help="comma-separated N values")
    p.add_argument("--rho", type=_rho, default=1)
    p.add_argument("--method", choices=["brute", "square", "bound", "mean-random"], default="square")
    p.add_argument("--samples", type=_positive_int, default=100, help="Monte Carlo samples (mean-random)")
    p.add_argument("--seed", type=int, default=0, help="seed for mean-random")
    p.add_argument("--timings", action="store_true", help="add a seconds column (not reproducible)")
    _common(p)
    p.set_defaults(func=cmd_expsum)

    g = sub.add_parser("graphs", help="exploration graphs, good cycles, Phi, recursion, identities")
    gsub = g.add_subparsers(dest="graph_command", required=True, parser_class=_Parser)

    p = gsub.add_parser("enumerate", help="list explorations on k edges")
    p.add_argument("--k", type=_positive_int, required=True)
    _common(p)
    p.set_defaults(func=cmd_graphs_enumerate)

    p = gsub.add_parser("goodcycles", help="good cycle of every preprocessed exploration graph")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--upto", action="store_true", help="include all edge counts 1..k")
    _common(p)
    p.set_defaults(func=cmd_graphs_goodcycles)

    p = gsub.add_parser("phi", help="Phi(G_L) for every exploration on k edges")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--freq", default=None)
    p.add_argument("--rho", type=_rho, default=1)
    _common(p)
    p.set_defaults(func=cmd_graphs_phi)

    p = gsub.add_parser("recursion", help="limiting moments from the recursion, exact")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--rho", type=_rho, default=1)
    p.add_argument("--form", choices=["proof", "statement"], default="proof",
                   help="recursion variant; 'proof' matches the graph enumeration")
    _common(p)
    p.set_defaults(func=cmd_graphs_recursion)

    p = gsub.add_parser("identity", help="deterministic graph sum against the trace moment")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--model", choices=["A", "B", "C"], default="B")
    p.add_argument("--freq", default=None)
    _common(p)
    p.set_defaults(func=cmd_graphs_identity)

    p = sub.add_parser("replay", help="rerun a manifest and compare CSV digests")
    p.add_argument("manifest", type=Path)
    _common(p, out_default="replay")
    p.set_defaults(func=cmd_replay)
    return parser


def _config_echo(args) -> dict:
    skip = {"func", "threads", "out_dir"}
    return {k: (str(v) if not isinstance(v, (int, float, str, bool, list, type(None))) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = _set_threads(args.threads)
    name = args.command + (f" {args.graph_command}" if args.command == "graphs" else "")
    seeds = {k: getattr(args, k) for k in ("seed",) if hasattr(args, k)}
    manifest = RunManifest(argv, name, _config_echo(args), seeds, threads)
    t0 = time.perf_counter()
    try:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        code = args.func(args, manifest)
    except UsageError as exc:
        print(f"skewlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyWindowError as exc:
        print(f"skewlab: empty result: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (InputError, DomainError, SizeError) as exc:
        print(f"skewlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"skewlab: numeric failure: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except InvariantError as exc:
        print(f"skewlab: property violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    if args.command != "replay":
        manifest.wall_seconds = time.perf_counter() - t0
        manifest.write(args.out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
