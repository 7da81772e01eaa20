"""Graph weights Phi(G_L) and the graphical moment sum.

For an exploration L on k edges and l vertices

    Phi(G_L) = N^-(1+k) sum_{i injective} sum_{j admissible} prod_r K_(i_a, i_b)(j_r)

With the effective propagator K_(i,i')(j) = e[(w_i - w_i') j^2 / 2] the edge
product collapses to prod_v e[w_{i_v} c_v] with integer vertex charges
c_v = (sum_out j^2 - sum_in j^2) / 2.  The sum over injective labels is then
done by inclusion-exclusion over set partitions of the vertices, which turns
an M^l loop into products of S(m) = sum_i e[m w_i].
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, InvariantError, SizeError
from ..expsum import DecayFit, fit_loglog
from ..graphcore.explorations import Exploration, ExplorationGraph, enumerate_explorations
from ..graphcore.kirchhoff import CurrentMode, enumerate_admissible_currents, incidence_matrix
from ..graphcore.multigraph import is_fully_reducible
from ..matrixmodel import (FreqSpec, FrequencySequence, ModelConfig, build_matrix,
                           make_frequencies, phase_frac_array, rows_for)
from ..spectra import moments, singular_values

DIRECT_CAP = 10**7


class PropagatorMode(str, enum.Enum):
    EFFECTIVE = "effective"   # y-averaged e[(w_i - w_i') j^2 / 2]
    MATRIX = "matrix"         # N X_ij conj(X_i'j) of a concrete matrix


@dataclass(frozen=True, eq=False)
class PropagatorSpec:
    mode: PropagatorMode
    N: int
    freq: FrequencySequence | None = None
    matrix: np.ndarray | None = None

    @classmethod
    def effective(cls, freq: FrequencySequence, N: int) -> "PropagatorSpec":
        return cls(PropagatorMode.EFFECTIVE, N, freq=freq)

    @classmethod
    def from_matrix(cls, X) -> "PropagatorSpec":
        A = np.asarray(getattr(X, "entries", X))
        return cls(PropagatorMode.MATRIX, A.shape[1], matrix=A)

    @property
    def M(self) -> int:
        return len(self.freq) if self.mode is PropagatorMode.EFFECTIVE else self.matrix.shape[0]

    def table(self) -> np.ndarray:
        """K[i, i', j-1] for every row pair and column."""
        if self.mode is PropagatorMode.MATRIX:
            X = self.matrix
            return self.N * X[:, None, :] * X.conj()[None, :, :]
        j2 = np.arange(1, self.N + 1, dtype=np.int64) ** 2
        # halving a double-double is exact, so frac(j^2 * w/2) is exact to rounding
        ph = phase_frac_array(j2[None, :], self.freq.hi[:, None] / 2, self.freq.lo[:, None] / 2)
        return np.exp(2j * np.pi * (ph[:, None, :] - ph[None, :, :]))


def _truncate(freq: FrequencySequence, M: int) -> FrequencySequence:
    if len(freq) < M:
        raise DomainError(f"need {M} frequencies, got {len(freq)}")
    if len(freq) == M:
        return freq
    return FrequencySequence(freq.spec, M, freq.N, freq.hi[:M], freq.lo[:M])


def effective_propagator(freq, N: int, rho=1) -> PropagatorSpec:
    M = rows_for(rho, N)
    if isinstance(freq, (str, FreqSpec)):
        freq = make_frequencies(freq, M, N)
    return PropagatorSpec.effective(_truncate(freq, M), N)


# ---------------------------------------------------------------------------
# set partitions
# ---------------------------------------------------------------------------

def set_partitions(n: int) -> list[tuple[tuple[int, ...], ...]]:
    """Set partitions of {0..n-1} as tuples of blocks, from restricted-growth strings."""
    out = []
    for L in enumerate_explorations(n) if n >= 1 else []:
        blocks: dict[int, list[int]] = {}
        for v, b in enumerate(L.nu):
            blocks.setdefault(b, []).append(v)
        out.append(tuple(tuple(b) for _, b in sorted(blocks.items())))
    return out


def mobius(partition) -> int:
    """Moebius function of the partition lattice against the finest partition."""
    val = 1
    for block in partition:
        s = len(block)
        val *= (-1) ** (s - 1) * math.factorial(s - 1)
    return val


def falling_factorial(M: int, l: int) -> int:
    out = 1
    for n in range(l):
        out *= M - n
    return out


# ---------------------------------------------------------------------------
# Phi
# ---------------------------------------------------------------------------

def _as_graph(L) -> ExplorationGraph:
    if isinstance(L, ExplorationGraph):
        return L
    if isinstance(L, Exploration):
        return L.graph()
    return Exploration(tuple(L)).graph()


def vertex_charges(G: ExplorationGraph, J: np.ndarray) -> np.ndarray:
    """c_v = (sum_out j^2 - sum_in j^2) / 2 for each current row of J."""
    A = incidence_matrix(G)
    twice = -(J.astype(np.int64) ** 2) @ A.T
    if np.any(twice % 2):
        raise InvariantError("odd vertex charge for a Kirchhoff current")
    return twice // 2


def power_sums(freq: FrequencySequence, values: np.ndarray) -> np.ndarray:
    """S(m) = sum_i e[m w_i] for each integer m in ``values``."""
    out = np.empty(len(values), dtype=np.complex128)
    for start in range(0, len(values), 4096):
        m = values[start:start + 4096]
        ph = phase_frac_array(m[None, :], freq.hi[:, None], freq.lo[:, None])
        out[start:start + 4096] = np.exp(2j * np.pi * ph).sum(axis=0)
    return out


def phi(L, prop: PropagatorSpec) -> complex:
    """Phi(G_L) for the effective propagator (fast path) or a concrete matrix (direct)."""
    G = _as_graph(L)
    if prop.mode is PropagatorMode.MATRIX:
        return phi_direct(G, prop)
    N, M, k, l = prop.N, prop.M, G.k, G.l
    if l > M:
        return 0j
    loops = G.loops()
    rest = tuple(e for r, e in enumerate(G.edges) if r not in set(loops))
    scale = float(N) ** len(loops) / float(N) ** (1 + k)
    if not rest:
        return complex(scale * falling_factorial(M, l))
    H = ExplorationGraph(l, rest, None)
    J = enumerate_admissible_currents(H, N, CurrentMode.BASIS, keep=True).currents
    if len(J) == 0:
        return 0j
    C, counts = np.unique(vertex_charges(H, J), axis=0, return_counts=True)
    parts = set_partitions(l)
    block_sums = []
    for part in parts:
        ind = np.zeros((l, len(part)), dtype=np.int64)
        for b, block in enumerate(part):
            ind[list(block), b] = 1
        block_sums.append(C @ ind)
    needed = np.unique(np.concatenate([bs.ravel() for bs in block_sums]))
    S = power_sums(prop.freq, needed)
    total = np.zeros(len(C), dtype=np.complex128)
    for part, bs in zip(parts, block_sums):
        lookup = S[np.searchsorted(needed, bs)]
        total += mobius(part) * np.prod(lookup, axis=1)
    weighted = counts * total
    re = math.fsum(weighted.real.tolist())
    im = math.fsum(weighted.imag.tolist())
    return complex(scale * re, scale * im)


def phi_direct(L, prop: PropagatorSpec) -> complex:
    """Reference evaluation: explicit loops over injective labels and admissible currents."""
    G = _as_graph(L)
    N, M, k, l = prop.N, prop.M, G.k, G.l
    J = enumerate_admissible_currents(G, N, CurrentMode.BASIS, keep=True).currents
    n_labels = falling_factorial(M, l)
    if n_labels * max(len(J), 1) * k > DIRECT_CAP * 10:
        raise SizeError("direct Phi evaluation too large")
    K = prop.table()
    tails = [a - 1 for a, _ in G.edges]
    heads = [b - 1 for _, b in G.edges]
    cols = J - 1
    re, im = [], []
    for labels in itertools.permutations(range(M), l):
        lab = np.array(labels)
        prod = np.ones(len(J), dtype=np.complex128)
        for r in range(k):
            prod *= K[lab[tails[r]], lab[heads[r]], cols[:, r]]
        s = prod.sum()
        re.append(s.real)
        im.append(s.imag)
    scale = 1.0 / float(N) ** (1 + k)
    return complex(scale * math.fsum(re), scale * math.fsum(im))


def moment_graph_sum(k: int, prop: PropagatorSpec) -> float:
    """Sum of Phi over all explorations on k edges; equals the y-averaged mu^(2k)."""
    vals = [phi(L, prop) for L in enumerate_explorations(k)]
    re = math.fsum(v.real for v in vals)
    im = math.fsum(v.imag for v in vals)
    if abs(im) > 1e-8 * max(1.0, abs(re)):
        raise InvariantError(f"graph sum has imaginary part {im:.3e}")
    return re


def moment_montecarlo(k: int, config: ModelConfig, samples: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of mu^(2k) over independent y draws ``0..samples-1``."""
    if samples < 2:
        raise DomainError("need at least two samples")
    freq = make_frequencies(config.freq, config.M, config.N)
    vals = []
    for s in range(samples):
        cfg = ModelConfig(config.N, config.rho, config.freq, config.quad_form, seed, s, config.x)
        sigma = singular_values(build_matrix(cfg, freq))
        vals.append(moments(sigma, config.N, k)[k - 1])
    arr = np.array(vals)
    return math.fsum(vals) / samples, float(arr.std(ddof=1) / math.sqrt(samples))


# ---------------------------------------------------------------------------
# leading and subleading graphs
# ---------------------------------------------------------------------------

@dataclass
class ReducibleCheck:
    nu: tuple[int, ...]
    l: int
    rho: float
    N_list: list[int]
    phi: list[complex]
    scaled_error: list[float]       # N * |Phi - rho^l|
    closed_form: list[float]        # M(M-1)...(M-l+1) / N^l
    constant: float
    passed: bool = field(default=False)


def phi_reducible_limit_check(L, freq, rho=1, N_list=(20, 40, 80), constant: float | None = None
                              ) -> ReducibleCheck:
    """Check |Phi(G_L) - rho^l| <= C/N for a fully reducible graph.

    For these graphs every vertex charge vanishes, so Phi equals the falling
    factorial M(M-1)...(M-l+1)/N^l; the default constant is l^2 + l.
    """
    G = _as_graph(L)
    if not is_fully_reducible(G):
        raise DomainError("graph is not fully reducible")
    rho_f = float(rho)
    C = float(G.l * G.l + G.l) if constant is None else constant
    phis, errs, closed = [], [], []
    for N in N_list:
        prop = effective_propagator(freq, N, rho)
        val = phi(G, prop)
        phis.append(val)
        errs.append(N * abs(val - rho_f ** G.l))
        closed.append(falling_factorial(prop.M, G.l) / N ** G.l)
    ok = all(e <= C for e in errs) and all(abs(p - c) <= 1e-9 * max(1, c) for p, c in zip(phis, closed))
    return ReducibleCheck(G.nu, G.l, rho_f, list(N_list), phis, errs, closed, C, ok)


def subleading_decay_check(L, freq, N_list, rho=1) -> DecayFit:
    """Fitted log-log slope of |Phi(G_L)| for a graph that is not fully reducible."""
    G = _as_graph(L)
    if is_fully_reducible(G):
        raise DomainError("graph is fully reducible; its weight does not decay")
    vals = [abs(phi(G, effective_propagator(freq, N, rho))) for N in N_list]
    return fit_loglog(N_list, vals)
