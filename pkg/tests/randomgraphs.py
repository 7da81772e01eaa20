"""Random small multigraphs, closed walks and bypass scenarios shared by the graph tests."""

from __future__ import annotations

import random
from collections import Counter

from skewlab.graphcore import CycleWalk, Multigraph, simple_cycles


def random_multigraph(rng: random.Random, n_max: int = 5, e_max: int = 9, loops: bool = True
                      ) -> Multigraph:
    """Connected multigraph: a random spanning tree plus extra edges (parallel edges likely)."""
    n = rng.randint(2, n_max)
    pairs = [(rng.randrange(v), v) for v in range(1, n)]
    for _ in range(rng.randint(1, max(1, e_max - len(pairs)))):
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v and not loops:
            continue
        pairs.append((u, v))
    return Multigraph.from_edges(pairs, vertices=range(n))


def random_even_multigraph(rng: random.Random, n_max: int = 6, cycles: int = 4) -> Multigraph:
    """Union of random closed trails, so every degree is even."""
    n = rng.randint(1, n_max)
    pairs = []
    for _ in range(rng.randint(1, cycles)):
        length = rng.randint(1, 4)
        walk = [rng.randrange(n) for _ in range(length)]
        for a, b in zip(walk, walk[1:] + walk[:1]):
            pairs.append((a, b))
    return Multigraph.from_edges(pairs, vertices=range(n))


def random_closed_walk(rng: random.Random, G: Multigraph, steps: int) -> CycleWalk | None:
    """Random walk of ``steps`` moves from a random vertex, closed by retracing a BFS path."""
    inc = {v: G.incident(v) for v in G.vertices}
    start = rng.choice(sorted(v for v in G.vertices if inc[v]))
    cur, out = start, []
    for _ in range(steps):
        e, w = rng.choice(inc[cur])
        out.append((e, cur, w))
        cur = w
    # close up along a BFS path
    prev = {cur: None}
    queue = [cur]
    while queue and start not in prev:
        v = queue.pop(0)
        for e, w in inc[v]:
            if w not in prev:
                prev[w] = (e, v)
                queue.append(w)
    back = []
    v = start
    while prev[v] is not None:
        e, u = prev[v]
        back.append((e, u, v))
        v = u
    out.extend(reversed(back))
    return CycleWalk(tuple(out)) if out else None


def bypass_instance(rng: random.Random, tries: int = 50):
    """(G, C, C', e, e') satisfying the bypass preconditions, or None."""
    for _ in range(tries):
        G = random_multigraph(rng, loops=False)
        cyc = [c for c in simple_cycles(G) if len(c) >= 2]
        rng.shuffle(cyc)
        for C in cyc:
            ids = C.edge_ids
            e_prime = rng.choice(ids)
            others = [e for e in ids if e != e_prime]
            e = rng.choice(others)
            options = [D for D in cyc if D.uses(e_prime) == 1 and D.uses(e) == 0]
            if options:
                Cp = rng.choice(options)
                if rng.random() < 0.5:
                    Cp = Cp.reversed()
                C = C.rotate_to(rng.randrange(len(C)))
                return G, C, Cp, e, e_prime
    return None


def even_bypass_instance(rng: random.Random, tries: int = 200):
    """(G, W, e1, e2) with W closed, e1 used once and e2 an even positive number of times."""
    for _ in range(tries):
        G = random_multigraph(rng)
        W = random_closed_walk(rng, G, rng.randint(2, 12))
        if W is None:
            continue
        counts = Counter(W.edge_ids)
        singles = [e for e, c in counts.items() if c == 1]
        evens = [e for e, c in counts.items() if c and c % 2 == 0]
        if singles and evens:
            return G, W, rng.choice(singles), rng.choice(evens)
    return None


def loop_erase_instance(rng: random.Random, tries: int = 200):
    """(G, W, anchor) with W closed and the anchor edge used exactly once."""
    for _ in range(tries):
        G = random_multigraph(rng)
        W = random_closed_walk(rng, G, rng.randint(1, 12))
        if W is None:
            continue
        counts = Counter(W.edge_ids)
        singles = [e for e, c in counts.items() if c == 1]
        if singles:
            return G, W, rng.choice(singles)
    return None
