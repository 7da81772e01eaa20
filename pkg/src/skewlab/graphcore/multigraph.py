"""Undirected multigraphs with stable edge ids, preprocessing and canonical forms."""

from __future__ import annotations

import itertools
import json
import random
from collections import Counter
from dataclasses import dataclass, field

from ..errors import DomainError, InvariantError


@dataclass(frozen=True)
class Multigraph:
    """Vertices plus edges ``(eid, u, v)``; loops and parallel edges are allowed."""

    vertices: frozenset
    edges: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_edges(cls, pairs, vertices=None) -> "Multigraph":
        pairs = list(pairs)
        vs = set(vertices) if vertices is not None else set()
        for u, v in pairs:
            vs.update((u, v))
        return cls(frozenset(vs), tuple((r, u, v) for r, (u, v) in enumerate(pairs)))

    def __post_init__(self):
        ids = [e[0] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate edge ids")
        for _, u, v in self.edges:
            if u not in self.vertices or v not in self.vertices:
                raise DomainError(f"edge ({u}, {v}) has an endpoint outside the vertex set")

    @property
    def edge_map(self) -> dict[int, tuple[int, int]]:
        return {e: (u, v) for e, u, v in self.edges}

    def endpoints(self, eid: int) -> tuple[int, int]:
        for e, u, v in self.edges:
            if e == eid:
                return u, v
        raise DomainError(f"no edge {eid}")

    def degree(self, v) -> int:
        return sum((u == v) + (w == v) for _, u, w in self.edges)

    def degrees(self) -> dict:
        deg = {v: 0 for v in self.vertices}
        for _, u, w in self.edges:
            deg[u] += 1
            deg[w] += 1
        return deg

    def incident(self, v) -> list[tuple[int, int]]:
        """(edge id, other endpoint) pairs; a loop is listed once."""
        out = []
        for e, u, w in self.edges:
            if u == v:
                out.append((e, w))
            elif w == v:
                out.append((e, u))
        return out

    def adjacency(self, skip=()) -> dict:
        skip = set(skip)
        adj = {v: [] for v in self.vertices}
        for e, u, w in self.edges:
            if e in skip:
                continue
            adj[u].append((e, w))
            if u != w:
                adj[w].append((e, u))
        return adj

    def is_point(self) -> bool:
        return len(self.vertices) == 1 and not self.edges

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        start = min(self.vertices)
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for _, w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def without_edges(self, eids) -> "Multigraph":
        eids = set(eids)
        return Multigraph(self.vertices, tuple(e for e in self.edges if e[0] not in eids))

    def next_edge_id(self) -> int:
        return max((e[0] for e in self.edges), default=-1) + 1

    def to_dict(self) -> dict:
        return {"vertices": sorted(self.vertices),
                "edges": [{"id": e, "u": u, "v": v} for e, u, v in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    kind: str           # "remove_loop", "delete_isolated", "short_circuit"
    vertex: int | None
    removed: tuple[int, ...]
    added: int | None = None

    def __str__(self) -> str:
        if self.kind == "short_circuit":
            return f"short_circuit v={self.vertex} edges={list(self.removed)} -> e{self.added}"
        if self.kind == "remove_loop":
            return f"remove_loop e{self.removed[0]} at v={self.vertex}"
        return f"delete_isolated v={self.vertex}"


@dataclass
class PreprocessResult:
    graph: Multigraph
    steps: list[Step] = field(default_factory=list)

    @property
    def is_point(self) -> bool:
        return self.graph.is_point()


def _check_even(G: Multigraph):
    odd = [v for v, d in G.degrees().items() if d % 2]
    if odd:
        raise InvariantError(f"vertices of odd degree: {sorted(odd)}")


def _applicable_steps(G: Multigraph) -> list[tuple[str, object]]:
    steps: list[tuple[str, object]] = []
    for e, u, v in G.edges:
        if u == v:
            steps.append(("remove_loop", e))
    deg = G.degrees()
    if len(G.vertices) > 1:
        steps.extend(("delete_isolated", v) for v in sorted(G.vertices) if deg[v] == 0)
    steps.extend(("short_circuit", v) for v in sorted(G.vertices) if deg[v] == 2)
    return steps


def _apply(G: Multigraph, kind: str, arg) -> tuple[Multigraph, Step]:
    if kind == "remove_loop":
        u = G.endpoints(arg)[0]
        return G.without_edges([arg]), Step(kind, u, (arg,))
    if kind == "delete_isolated":
        return Multigraph(G.vertices - {arg}, G.edges), Step(kind, arg, ())
    v = arg
    inc = G.incident(v)
    if len(inc) != 2:
        # a degree-2 vertex carrying a loop: remove the loop instead
        raise InvariantError("short-circuit requested at a vertex with a loop")
    (e1, a), (e2, b) = inc
    new_id = G.next_edge_id()
    edges = tuple(x for x in G.edges if x[0] not in (e1, e2)) + ((new_id, a, b),)
    return Multigraph(G.vertices - {v}, edges), Step(kind, v, (e1, e2), new_id)


def preprocess(G: Multigraph, rng: random.Random | None = None) -> PreprocessResult:
    """Reduce G by loop removal, isolated-vertex deletion and short-circuiting.

    The default order removes every loop first, then isolated vertices (never the
    last vertex), then short-circuits the lowest-labelled degree-2 vertex, and
    repeats.  With ``rng`` an applicable step is picked at random instead, which
    is used to probe confluence.
    """
    _check_even(G)
    steps: list[Step] = []
    while True:
        options = _applicable_steps(G)
        if not options:
            return PreprocessResult(G, steps)
        if rng is not None:
            kind, arg = rng.choice(options)
            if kind == "short_circuit" and len(G.incident(arg)) != 2:
                continue
            G, st = _apply(G, kind, arg)
            steps.append(st)
            continue
        loops = [a for k, a in options if k == "remove_loop"]
        if loops:
            for e in loops:
                G, st = _apply(G, "remove_loop", e)
                steps.append(st)
            continue
        kind, arg = options[0]
        G, st = _apply(G, kind, arg)
        steps.append(st)


def is_fully_reducible(G) -> bool:
    """True when preprocessing ends at a single vertex without edges."""
    if hasattr(G, "undirected"):
        G = G.undirected()
    return preprocess(G).is_point


def canonical_form(G: Multigraph) -> tuple:
    """Isomorphism invariant: lexicographically least relabelled edge multiset."""
    verts = sorted(G.vertices)
    n = len(verts)
    best = None
    for perm in itertools.permutations(range(n)):
        relabel = {v: perm[i] for i, v in enumerate(verts)}
        key = tuple(sorted(tuple(sorted((relabel[u], relabel[w]))) for _, u, w in G.edges))
        if best is None or key < best:
            best = key
    return (n, best or ())


def degree_profile(G: Multigraph) -> tuple:
    return tuple(sorted(Counter(G.degrees().values()).items()))
