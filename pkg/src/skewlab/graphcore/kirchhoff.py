"""Cycle spaces of exploration graphs and integer currents obeying Kirchhoff's law."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SizeError
from .explorations import ExplorationGraph

BRUTE_CAP = 10**7
BASIS_CAP = 10**8
_CHUNK = 1 << 18


class CurrentMode(str, enum.Enum):
    BRUTE_FORCE = "brute"
    BASIS = "basis"


@dataclass(frozen=True, eq=False)
class CycleBasis:
    """Fundamental cycles of a spanning tree; row c has +1 on chord ``chords[c]``."""

    vectors: np.ndarray
    chords: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]


def incidence_matrix(G: ExplorationGraph) -> np.ndarray:
    """Rows indexed by vertex 1..l: +1 where the edge enters, -1 where it leaves."""
    A = np.zeros((G.l, G.k), dtype=np.int64)
    for r, (a, b) in enumerate(G.edges):
        A[b - 1, r] += 1
        A[a - 1, r] -= 1
    return A


def satisfies_kirchhoff(G: ExplorationGraph, j) -> bool:
    return bool(np.all(incidence_matrix(G) @ np.asarray(j, dtype=np.int64) == 0))


def cycle_basis(G: ExplorationGraph) -> CycleBasis:
    """Spanning-tree fundamental cycle basis, dimension k - l + 1.

    A BFS tree from vertex 1 is grown; every remaining edge (chord) closes a
    unique cycle, recorded with sign +1 where the cycle runs along an edge's
    orientation and -1 against it.
    """
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in G.vertices}
    for r, (a, b) in enumerate(G.edges):
        if a != b:
            adj[a].append((r, b))
            adj[b].append((r, a))
    parent: dict[int, tuple[int, int] | None] = {1: None}
    tree = set()
    q = deque([1])
    while q:
        v = q.popleft()
        for r, w in adj[v]:
            if w not in parent:
                parent[w] = (v, r)
                tree.add(r)
                q.append(w)
    if len(parent) != G.l:
        raise DomainError("graph is disconnected")

    def to_root(v):
        # signed edge vector of the tree path v -> 1
        vec = np.zeros(G.k, dtype=np.int64)
        while parent[v] is not None:
            p, r = parent[v]
            vec[r] += 1 if G.edges[r] == (v, p) else -1
            v = p
        return vec

    vectors, chords = [], []
    for r, (a, b) in enumerate(G.edges):
        if r in tree:
            continue
        vec = to_root(b) - to_root(a)
        vec[r] += 1
        vectors.append(vec)
        chords.append(r)
    mat = np.array(vectors, dtype=np.int64).reshape(len(vectors), G.k)
    return CycleBasis(mat, tuple(chords))


def _digit_block(start: int, stop: int, N: int, width: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), width), dtype=np.int64)
    for p in range(width - 1, -1, -1):
        out[:, p] = idx % N + 1
        idx //= N
    return out


@dataclass
class CurrentCount:
    count: int
    currents: np.ndarray | None = None


def enumerate_admissible_currents(G: ExplorationGraph, N: int,
                                  mode: CurrentMode | str = CurrentMode.BASIS,
                                  keep: bool = False) -> CurrentCount:
    """All j in {1..N}^k satisfying Kirchhoff's law at every vertex.

    The brute-force mode scans the full box.  The basis mode scans the chord
    values only: a current is determined by its chord components through the
    fundamental basis, and is kept when all edges land inside the box.
    """
    mode = CurrentMode(mode)
    if N < 1:
        raise DomainError("N must be positive")
    kept = []
    count = 0
    if mode is CurrentMode.BRUTE_FORCE:
        total = N ** G.k
        if total > BRUTE_CAP:
            raise SizeError(f"N^k = {total} exceeds {BRUTE_CAP}")
        A = incidence_matrix(G)
        for start in range(0, total, _CHUNK):
            J = _digit_block(start, min(total, start + _CHUNK), N, G.k)
            ok = np.all(J @ A.T == 0, axis=1)
            count += int(ok.sum())
            if keep:
                kept.append(J[ok])
    else:
        basis = cycle_basis(G)
        d = basis.dimension
        total = N ** d
        if total * G.k > BASIS_CAP:
            raise SizeError(f"N^d * k = {total * G.k} exceeds {BASIS_CAP}")
        for start in range(0, total, _CHUNK):
            C = _digit_block(start, min(total, start + _CHUNK), N, d)
            J = C @ basis.vectors
            ok = np.all((J >= 1) & (J <= N), axis=1)
            count += int(ok.sum())
            if keep:
                kept.append(J[ok])
    currents = None
    if keep:
        currents = np.concatenate(kept) if kept else np.zeros((0, G.k), dtype=np.int64)
        currents = currents[np.lexsort(currents.T[::-1])]
    return CurrentCount(count, currents)
