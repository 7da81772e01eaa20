"""Limiting moments: weight sums over fully reducible graphs and their recursion.

Polynomials in rho are integer coefficient tuples ``(c0, c1, ...)``; values at a
rational rho are exact Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError, SizeError
from ..graphcore.explorations import enumerate_explorations
from ..graphcore.multigraph import is_fully_reducible
from ..spectra import mp_density, mp_density_rho2, mp_moment

Poly = tuple[int, ...]

PROOF_FORM = "proof"
STATEMENT_FORM = "statement"


def _trim(p: list[int]) -> Poly:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_mul(a: Poly, b: Poly) -> Poly:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_shift(a: Poly) -> Poly:
    """Multiply by rho."""
    return _trim([0, *a])


def poly_eval(p: Poly, rho):
    val = 0 * rho
    for c in reversed(p):
        val = val * rho + c
    return val


def poly_str(p: Poly) -> str:
    terms = []
    for n, c in enumerate(p):
        if c == 0:
            continue
        if n == 0:
            terms.append(str(c))
            continue
        mono = "rho" if n == 1 else f"rho^{n}"
        terms.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(terms) or "0"


def recursion_polys(k_max: int, form: str = PROOF_FORM) -> list[Poly]:
    """mu~_0 .. mu~_kmax as polynomials in rho.

    ``proof``:     mu~_k = rho mu~_{k-1} + sum_{n=2}^k mu~_{n-1} mu~_{k-n}
    ``statement``: mu~_k = mu~_{k-1} + sum_{n=2}^k rho mu~_{n-1} mu~_{k-n}
    Both start from mu~_0 = 1, mu~_1 = rho.  Only the first agrees with the
    enumeration of fully reducible graphs.
    """
    if not 0 <= k_max <= 30:
        raise SizeError("k_max must lie in 0..30")
    if form not in (PROOF_FORM, STATEMENT_FORM):
        raise DomainError(f"unknown recursion form {form!r}")
    mu: list[Poly] = [(1,), (0, 1)]
    for k in range(2, k_max + 1):
        conv: Poly = (0,)
        for n in range(2, k + 1):
            conv = poly_add(conv, poly_mul(mu[n - 1], mu[k - n]))
        if form == PROOF_FORM:
            mu.append(poly_add(poly_shift(mu[k - 1]), conv))
        else:
            mu.append(poly_add(mu[k - 1], poly_shift(conv)))
    return mu[:k_max + 1]


def _exact(rho):
    if isinstance(rho, Fraction):
        return rho
    if isinstance(rho, int):
        return Fraction(rho)
    if isinstance(rho, float):
        return Fraction(repr(rho))
    return Fraction(str(rho))


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@dataclass
class MomentTable:
    rho: Fraction
    mu_tilde: list[Fraction]
    catalan: list[int]
    reducible_polys: list[Poly]
    form: str = PROOF_FORM


def recursion_moments(k_max: int, rho=1, form: str = PROOF_FORM) -> MomentTable:
    """Exact mu~_0..mu~_kmax at rho from the recursion."""
    r = _exact(rho)
    if r <= 0:
        raise DomainError("rho must be positive")
    polys = recursion_polys(k_max, form)
    return MomentTable(r, [poly_eval(p, r) for p in polys],
                       [catalan(k) for k in range(k_max + 1)], polys, form)


def reducible_weight_sum(k: int) -> Poly:
    """Sum of rho^|V| over fully reducible explorations on k edges."""
    if not 1 <= k <= 7:
        raise SizeError("k must lie in 1..7")
    coeffs = [0] * (k + 2)
    for L in enumerate_explorations(k):
        if is_fully_reducible(L.graph()):
            coeffs[L.l] += 1
    return _trim(coeffs)


@dataclass
class MPCrossCheck:
    rho: float
    k: list[int]
    recursion: list[float]
    quadrature: list[float]            # moments of the mass-min(rho, 1) density
    quadrature_rho2: list[float]      # moments of the rho^-2 prefactor variant
    rel_error: list[float]
    rel_error_rho2: list[float]
    passed: bool
    matches: str


def mp_moment_crosscheck(k_max: int, rho, tol: float = 1e-6) -> MPCrossCheck:
    """Compare mu~_k with quadrature moments of both density conventions, k = 1..k_max."""
    r = float(rho)
    if r <= 0:
        raise DomainError("rho must be positive")
    table = recursion_moments(k_max, rho)
    ks = list(range(1, k_max + 1))
    rec = [float(table.mu_tilde[k]) for k in ks]
    quad, quad_p = [], []
    for k in ks:
        quad.append(mp_moment(k, r, mp_density))
        quad_p.append(mp_moment(k, r, mp_density_rho2))
    rel = [abs(q - v) / abs(v) for q, v in zip(quad, rec)]
    rel_p = [abs(q - v) / abs(v) for q, v in zip(quad_p, rec)]
    ok = max(rel) <= tol
    ok_p = max(rel_p) <= tol
    matches = "both" if ok and ok_p else "mass-min(rho,1)" if ok else "rho^-2" if ok_p else "neither"
    return MPCrossCheck(r, ks, rec, quad, quad_p, rel, rel_p, ok, matches)
