"""Closed walks on multigraphs: simple cycles, good cycles, loop erasure and bypasses."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

from ..errors import ContractError, DegeneracyError
from .multigraph import Multigraph


@dataclass(frozen=True)
class CycleWalk:
    """Closed walk as oriented steps ``(edge id, from, to)``."""

    steps: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_edges(cls, G: Multigraph, eids, start=None) -> "CycleWalk":
        """Orient a list of edge ids into a walk, starting at ``start`` (or a fitting endpoint)."""
        emap = G.edge_map
        eids = list(eids)
        if not eids:
            return cls(())
        u, v = emap[eids[0]]
        if start is None:
            if len(eids) > 1:
                nu, nv = emap[eids[1]]
                start = u if v in (nu, nv) else v
            else:
                start = u
        cur = start
        steps = []
        for e in eids:
            a, b = emap[e]
            if a == cur:
                steps.append((e, a, b))
                cur = b
            elif b == cur:
                steps.append((e, b, a))
                cur = a
            else:
                raise ContractError(f"edge {e} does not continue the walk at vertex {cur}")
        return cls(tuple(steps))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def edge_ids(self) -> list[int]:
        return [s[0] for s in self.steps]

    @property
    def edge_set(self) -> frozenset:
        return frozenset(self.edge_ids)

    @property
    def vertices(self) -> list:
        return [s[1] for s in self.steps]

    def uses(self, eid: int) -> int:
        return sum(1 for s in self.steps if s[0] == eid)

    def is_closed(self) -> bool:
        if not self.steps:
            return False
        for (e1, a1, b1), (e2, a2, b2) in zip(self.steps, self.steps[1:] + self.steps[:1]):
            if b1 != a2:
                return False
        return True

    def is_simple(self) -> bool:
        """Closed, no repeated edge and no repeated vertex."""
        ids = self.edge_ids
        vs = self.vertices
        return self.is_closed() and len(set(ids)) == len(ids) and len(set(vs)) == len(vs)

    def valid_in(self, G: Multigraph) -> bool:
        emap = G.edge_map
        for e, a, b in self.steps:
            if e not in emap or sorted(emap[e]) != sorted((a, b)):
                return False
        return True

    def rotate_to(self, index: int) -> "CycleWalk":
        return CycleWalk(self.steps[index:] + self.steps[:index])

    def reversed(self) -> "CycleWalk":
        return CycleWalk(tuple((e, b, a) for e, a, b in reversed(self.steps)))

    def first_index(self, eid: int) -> int:
        for n, s in enumerate(self.steps):
            if s[0] == eid:
                return n
        raise ContractError(f"edge {eid} is not on the walk")


# ---------------------------------------------------------------------------
# simple cycles and good cycles
# ---------------------------------------------------------------------------

def simple_cycles(G: Multigraph, max_len: int | None = None) -> list[CycleWalk]:
    """All simple cycles, sorted by length and then by sorted edge ids.

    Each cycle is rooted at its smallest vertex and grown by DFS through larger
    vertices; parallel edges give distinct cycles, loops are cycles of length one.
    """
    adj = G.adjacency()
    for v in adj:
        adj[v].sort()
    found: dict[frozenset, CycleWalk] = {}
    for e, u, w in G.edges:
        if u == w:
            found[frozenset([e])] = CycleWalk(((e, u, u),))
    limit = max_len or len(G.edges)
    for root in sorted(G.vertices):
        path: list[tuple[int, int, int]] = []
        on_path = {root}

        def dfs(v):
            for e, w in adj[v]:
                if w == v or any(s[0] == e for s in path):
                    continue
                if w == root and path:
                    cyc = tuple(path) + ((e, v, w),)
                    key = frozenset(s[0] for s in cyc)
                    if len(key) == len(cyc) and key not in found:
                        found[key] = CycleWalk(cyc)
                    continue
                if w in on_path or w < root or len(path) + 1 >= limit:
                    continue
                path.append((e, v, w))
                on_path.add(w)
                dfs(w)
                on_path.discard(w)
                path.pop()

        dfs(root)
    cycles = [c for c in found.values() if len(c) <= limit]
    return sorted(cycles, key=lambda c: (len(c), sorted(c.edge_ids)))


def _bfs_path(G: Multigraph, src, dst, skip) -> list[int] | None:
    """Edge ids of a shortest path from src to dst avoiding ``skip``."""
    if src == dst:
        return []
    adj = G.adjacency(skip)
    prev = {src: None}
    q = deque([src])
    while q:
        v = q.popleft()
        for e, w in sorted(adj[v]):
            if w not in prev:
                prev[w] = (v, e)
                if w == dst:
                    path = []
                    x = w
                    while prev[x] is not None:
                        x, e2 = prev[x]
                        path.append(e2)
                    return path[::-1]
                q.append(w)
    return None


@dataclass
class GoodCycle:
    cycle: CycleWalk
    witnesses: dict[int, CycleWalk]


def witness_for(G: Multigraph, cycle: CycleWalk, eid: int) -> CycleWalk | None:
    """A simple cycle through ``eid`` meeting ``cycle`` only in ``eid``, if any.

    Such a cycle exists iff the endpoints of ``eid`` are connected once the
    edges of ``cycle`` are removed; the witness is a shortest connecting path
    closed up by ``eid``.
    """
    u, v = G.endpoints(eid)
    if u == v:
        return CycleWalk(((eid, u, u),))
    path = _bfs_path(G, v, u, cycle.edge_set)
    if path is None:
        return None
    return CycleWalk.from_edges(G, [eid, *path], start=u)


def find_good_cycle(G: Multigraph) -> GoodCycle | None:
    """Shortest good cycle with its witnesses; ``None`` when there is none."""
    if G.is_point():
        return None
    for cyc in simple_cycles(G):
        witnesses = {}
        for e in cyc.edge_ids:
            w = witness_for(G, cyc, e)
            if w is None:
                break
            witnesses[e] = w
        else:
            return GoodCycle(cyc, witnesses)
    return None


def verify_good_cycle(G: Multigraph, good: GoodCycle) -> bool:
    c = good.cycle
    if not (c.valid_in(G) and c.is_simple()):
        return False
    if set(good.witnesses) != set(c.edge_ids):
        return False
    for e, w in good.witnesses.items():
        if not (w.valid_in(G) and w.is_simple()):
            return False
        if w.edge_set & c.edge_set != {e}:
            return False
    return True


# ---------------------------------------------------------------------------
# loop erasure and bypasses
# ---------------------------------------------------------------------------

def loop_erase(walk: CycleWalk, anchor: int | None = None) -> CycleWalk:
    """Reduce a closed walk to a simple cycle through an edge it uses exactly once.

    Starting after the anchor, the walk back to the anchor's tail is followed and
    every excursion that returns to an already visited vertex is cut out.
    """
    if not walk.is_closed():
        raise ContractError("loop erasure needs a closed walk")
    counts = Counter(walk.edge_ids)
    if anchor is None:
        singles = [e for e in walk.edge_ids if counts[e] == 1]
        if not singles:
            raise DegeneracyError("no edge is used exactly once; the walk may collapse")
        anchor = singles[0]
    elif counts[anchor] != 1:
        raise ContractError(f"anchor edge {anchor} is used {counts[anchor]} times")
    w = walk.rotate_to(walk.first_index(anchor))
    e0, tail, head = w.steps[0]
    if tail == head:
        return CycleWalk((w.steps[0],))
    stack: list[tuple[int, int, int]] = []
    pos = {head: 0}
    for step in w.steps[1:]:
        stack.append(step)
        to = step[2]
        if to in pos:
            del stack[pos[to]:]
            pos = {head: 0}
            for n, s in enumerate(stack):
                pos[s[2]] = n + 1
        else:
            pos[to] = len(stack)
    # stack now runs head -> tail without repeating a vertex; the tail itself was
    # recorded as the last position
    out = CycleWalk((w.steps[0], *stack))
    if not out.is_simple():
        raise DegeneracyError("loop erasure did not produce a simple cycle")
    return out


def bypass(C: CycleWalk, C_prime: CycleWalk, e: int, e_prime: int) -> CycleWalk:
    """Simple cycle through ``e`` avoiding ``e_prime``, built from ``C`` and ``C_prime``.

    ``C`` minus ``e_prime`` and ``C_prime`` minus ``e_prime`` are two paths between
    the endpoints of ``e_prime``; joined they form a closed walk using ``e`` once,
    which is then loop-erased.
    """
    if e == e_prime:
        raise ContractError("e and e' must differ")
    if not C.is_simple() or not C_prime.is_simple():
        raise ContractError("bypass needs simple cycles")
    if C.uses(e) != 1 or C.uses(e_prime) != 1:
        raise ContractError("C must contain both e and e'")
    if C_prime.uses(e_prime) != 1 or C_prime.uses(e) != 0:
        raise ContractError("C' must contain e' but not e")
    c = C.rotate_to(C.first_index(e_prime))
    _, x, y = c.steps[0]
    path_c = list(c.steps[1:])                      # y -> x
    cp = C_prime.rotate_to(C_prime.first_index(e_prime))
    _, a, b = cp.steps[0]
    tail_steps = list(cp.steps[1:])                 # b -> a
    if (a, b) == (x, y):
        path_p = [(eid, t, f) for eid, f, t in reversed(tail_steps)]   # x -> y
    else:
        path_p = tail_steps                          # here b == x, a == y
    walk = CycleWalk(tuple(path_c + path_p))
    if not walk.steps:
        raise DegeneracyError("bypass produced an empty walk")
    return loop_erase(walk, e)


def even_bypass(C: CycleWalk, e1: int, e2: int) -> CycleWalk:
    """Closed walk using ``e1`` once and ``e2`` never, with edges taken from ``C``.

    ``e2`` must occur an even number of times.  Repeatedly take its first and last
    occurrence: if they run in opposite directions the segment between them is
    cut out; otherwise both are dropped and the segment between them is reversed.
    """
    if e1 == e2:
        raise ContractError("e1 and e2 must differ")
    if not C.is_closed():
        raise ContractError("even bypass needs a closed walk")
    if C.uses(e1) != 1:
        raise ContractError("e1 must be used exactly once")
    if C.uses(e2) % 2:
        raise ContractError("e2 must be used an even number of times")
    steps = list(C.rotate_to(C.first_index(e1)).steps)
    while any(s[0] == e2 for s in steps):
        idx = [n for n, s in enumerate(steps) if s[0] == e2]
        i, f = idx[0], idx[-1]
        _, vi, wi = steps[i]
        _, vf, wf = steps[f]
        if vi == wi:
            steps = [s for s in steps if s[0] != e2]
        elif (vi, wi) == (wf, vf):
            steps = steps[:i] + steps[f + 1:]
        else:
            middle = [(eid, t, fr) for eid, fr, t in reversed(steps[i + 1:f])]
            steps = steps[:i] + middle + steps[f + 1:]
    out = CycleWalk(tuple(steps))
    if not out.is_closed():
        raise DegeneracyError("even bypass broke the walk")
    return out
