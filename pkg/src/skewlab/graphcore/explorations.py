"""Explorations: canonical index patterns of closed walks and their directed graphs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from ..errors import DomainError, SizeError

MAX_K = 8


@dataclass(frozen=True)
class Exploration:
    """Restricted-growth sequence nu; edges are (nu_r, nu_{r+1}) with wrap-around."""

    nu: tuple[int, ...]

    def __post_init__(self):
        if not self.nu:
            raise DomainError("an exploration needs at least one edge")
        seen = 0
        for v in self.nu:
            if v < 1 or v > seen + 1:
                raise DomainError(f"{self.nu} is not a restricted-growth sequence")
            seen = max(seen, v)

    @property
    def k(self) -> int:
        return len(self.nu)

    @property
    def l(self) -> int:
        return max(self.nu)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        nu = self.nu
        return tuple((nu[r], nu[(r + 1) % len(nu)]) for r in range(len(nu)))

    def graph(self) -> "ExplorationGraph":
        return ExplorationGraph(self.l, self.edges, self.nu)

    def label(self) -> str:
        return "".join(str(v) for v in self.nu)


@dataclass(frozen=True)
class ExplorationGraph:
    """Directed multigraph on vertices 1..l; edge r is the r-th step of the circuit."""

    l: int
    edges: tuple[tuple[int, int], ...]
    nu: tuple[int, ...] | None = None

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.l + 1)

    def in_out_degrees(self) -> dict[int, tuple[int, int]]:
        deg = {v: [0, 0] for v in self.vertices}
        for a, b in self.edges:
            deg[a][1] += 1
            deg[b][0] += 1
        return {v: (d[0], d[1]) for v, d in deg.items()}

    def loops(self) -> list[int]:
        return [r for r, (a, b) in enumerate(self.edges) if a == b]

    def undirected(self):
        from .multigraph import Multigraph
        return Multigraph.from_edges(self.edges, vertices=self.vertices)

    def to_dict(self) -> dict:
        return {"vertices": self.l,
                "edges": [{"id": r, "tail": a, "head": b} for r, (a, b) in enumerate(self.edges)],
                "exploration": list(self.nu) if self.nu is not None else None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _restricted_growth(k: int):
    seq = [1]

    def rec(top):
        if len(seq) == k:
            yield tuple(seq)
            return
        for v in range(1, top + 2):
            seq.append(v)
            yield from rec(max(top, v))
            seq.pop()

    yield from rec(1)


@lru_cache(maxsize=None)
def _enumerate(k: int) -> tuple[Exploration, ...]:
    return tuple(Exploration(nu) for nu in _restricted_growth(k))


def enumerate_explorations(k: int) -> list[Exploration]:
    """All explorations on k edges in lexicographic order of nu (Bell(k) of them)."""
    if not 1 <= k <= MAX_K:
        raise SizeError(f"k must lie in 1..{MAX_K}")
    return list(_enumerate(k))


def canonicalize(indices) -> Exploration:
    """Relabel by order of first occurrence, e.g. (7, 3, 7, 3) -> (1, 2, 1, 2)."""
    indices = list(indices)
    if not indices:
        raise DomainError("empty index list")
    relabel: dict = {}
    nu = []
    for i in indices:
        if i not in relabel:
            relabel[i] = len(relabel) + 1
        nu.append(relabel[i])
    return Exploration(tuple(nu))


def bell(k: int) -> int:
    """Bell numbers via the Bell triangle."""
    if k < 0:
        raise DomainError("k must be non-negative")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


MELON = Exploration((1, 2, 1, 2))
TWO_CYCLE = Exploration((1, 2))
SINGLE_LOOP = Exploration((1,))
DOUBLE_TRIANGLE = Exploration((1, 2, 3, 1, 2, 3))
