"""Edge-disjoint paths in undirected multigraphs via unit-capacity max-flow."""

from __future__ import annotations

from collections import deque

from ..errors import ContractError
from .multigraph import Multigraph


def max_edge_disjoint_paths(G: Multigraph, s, t, stop_at: int | None = None) -> int:
    """Number of pairwise edge-disjoint s-t paths (Edmonds-Karp, unit capacities).

    Each undirected edge becomes two opposite arcs of capacity one; loops carry no
    flow.  ``stop_at`` ends the search early once that many paths are found.
    """
    if s == t:
        raise ContractError("source and sink must differ")
    if s not in G.vertices or t not in G.vertices:
        raise ContractError("source and sink must be vertices of the graph")
    # arcs stored as [to, capacity, index of reverse arc]
    arcs: dict = {v: [] for v in G.vertices}
    for _, u, v in G.edges:
        if u == v:
            continue
        arcs[u].append([v, 1, len(arcs[v])])
        arcs[v].append([u, 1, len(arcs[u]) - 1])
    flow = 0
    while stop_at is None or flow < stop_at:
        prev = {s: None}
        q = deque([s])
        while q and t not in prev:
            v = q.popleft()
            for n, (w, cap, _) in enumerate(arcs[v]):
                if cap > 0 and w not in prev:
                    prev[w] = (v, n)
                    q.append(w)
        if t not in prev:
            break
        w = t
        while prev[w] is not None:
            v, n = prev[w]
            arc = arcs[v][n]
            arc[1] -= 1
            arcs[w][arc[2]][1] += 1
            w = v
        flow += 1
    return flow


def has_four_edge_disjoint_paths(G: Multigraph, v1, v2) -> bool:
    """True when v1 and v2 are joined by at least four edge-disjoint paths.

    A fully reducible graph never has such a pair, so this is a certificate of
    non-reducibility.
    """
    return max_edge_disjoint_paths(G, v1, v2, stop_at=4) >= 4
