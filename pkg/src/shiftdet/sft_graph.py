"""De Bruijn graphs of binary shifts of finite type, double loops and good vertices.

A vertex is a legal binary word of length N; u -> v when u[1:] == v[:-1].
Bi-infinite walks are exactly the points of the shift.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

Vertex = Hashable
Cycle = tuple  # rotated so the least vertex comes first


class GraphPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Digraph:
    vertices: tuple
    succ: Mapping[Vertex, tuple] = field(repr=False)

    @classmethod
    def from_edges(cls, vertices: Iterable[Vertex], edges: Iterable[tuple]) -> "Digraph":
        vs = tuple(sorted(set(vertices)))
        out: dict = {v: [] for v in vs}
        for a, b in edges:
            out[a].append(b)
        return cls(vs, {v: tuple(sorted(set(out[v]))) for v in vs})

    def successors(self, v: Vertex) -> tuple:
        return self.succ[v]

    def edges(self) -> list[tuple]:
        return [(a, b) for a in self.vertices for b in self.succ[a]]

    def reversed(self) -> "Digraph":
        return Digraph.from_edges(self.vertices, ((b, a) for a, b in self.edges()))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges())
        return g

    def __len__(self) -> int:
        return len(self.vertices)


def _has_forbidden(word: str, forbidden: Sequence[str]) -> bool:
    return any(f in word for f in forbidden)


@dataclass(frozen=True)
class DeBruijnGraph(Digraph):
    N: int = 0
    forbidden: tuple = ()

    def is_legal(self, word: str) -> bool:
        return not _has_forbidden(word, self.forbidden)

    def word_of_walk(self, walk: Sequence[str]) -> str:
        """Symbol stream spelled by a vertex walk."""
        if not walk:
            return ""
        return walk[0] + "".join(v[-1] for v in walk[1:])

    def walk_of_word(self, word: str) -> list[str]:
        return [word[i:i + self.N] for i in range(len(word) - self.N + 1)]


def build_debruijn(forbidden: Iterable[str], N: int) -> DeBruijnGraph:
    forbidden = tuple(sorted(set(forbidden)))
    if any(set(w) - {"0", "1"} or not w for w in forbidden):
        raise GraphPreconditionError("forbidden words must be non-empty binary strings")
    if N < 1 or (forbidden and N < max(map(len, forbidden))):
        raise GraphPreconditionError(f"N={N} is shorter than the longest forbidden word")
    vs = ["".join(p) for p in product("01", repeat=N)]
    vs = [v for v in vs if not _has_forbidden(v, forbidden)]
    vset = set(vs)
    succ = {v: tuple(w for w in (v[1:] + "0", v[1:] + "1") if w in vset) for v in vs}
    return DeBruijnGraph(tuple(vs), succ, N, forbidden)


def normalize_cycle(cycle: Sequence[Vertex]) -> Cycle:
    i = min(range(len(cycle)), key=lambda k: cycle[k])
    return tuple(cycle[i:]) + tuple(cycle[:i])


def is_cycle(G: Digraph, cycle: Sequence[Vertex]) -> bool:
    if not cycle or len(set(cycle)) != len(cycle):
        return False
    return all(cycle[(i + 1) % len(cycle)] in G.successors(v) for i, v in enumerate(cycle))


@dataclass(frozen=True, order=True)
class DoubleLoop:
    C0: Cycle
    C1: Cycle
    shared: Vertex

    @classmethod
    def of(cls, a: Sequence[Vertex], b: Sequence[Vertex]) -> "DoubleLoop":
        a, b = normalize_cycle(a), normalize_cycle(b)
        if a == b:
            raise GraphPreconditionError("a double loop needs two distinct cycles")
        common = set(a) & set(b)
        if not common:
            raise GraphPreconditionError("cycles of a double loop must meet")
        c0, c1 = sorted((a, b))
        return cls(c0, c1, min(common))

    def circuit(self, i: int, start: Vertex | None = None) -> list:
        """Cycle C_i read from ``start`` (default: the shared vertex), not repeating the start."""
        c = (self.C0, self.C1)[i]
        start = self.shared if start is None else start
        k = c.index(start)
        return list(c[k:] + c[:k])

    def vertices(self) -> set:
        return set(self.C0) | set(self.C1)

    def to_json(self) -> dict:
        return {"C0": list(self.C0), "C1": list(self.C1), "shared": self.shared}


def simple_cycles(G: Digraph) -> list[Cycle]:
    """All simple cycles in the fixed cycle order."""
    return sorted(normalize_cycle(c) for c in nx.simple_cycles(G.to_networkx()))


def double_loops(G: Digraph, through: Vertex | None = None) -> list[DoubleLoop]:
    cycles = simple_cycles(G)
    out = set()
    for i, a in enumerate(cycles):
        for b in cycles[i + 1:]:
            common = set(a) & set(b)
            if common and (through is None or through in common):
                dl = DoubleLoop.of(a, b)
                if through is not None:
                    dl = DoubleLoop(dl.C0, dl.C1, through)
                out.add(dl)
    return sorted(out)


def branching_core(G: Digraph) -> set:
    """Vertices of strongly connected components that are more than one simple cycle."""
    g = G.to_networkx()
    core = set()
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if sub.number_of_edges() > len(comp):
            core |= comp
    return core


def _reaching(G: Digraph, targets: set) -> set:
    """Vertices with a forward path (possibly empty) into ``targets``."""
    back = G.reversed()
    seen = set(targets)
    todo = deque(targets)
    while todo:
        v = todo.popleft()
        for w in back.successors(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def shortest_path(G: Digraph, src: Vertex, dst: Vertex) -> list | None:
    """BFS path src .. dst, ties broken by vertex order; [src] when src == dst."""
    prev = {src: None}
    todo = deque([src])
    while todo:
        v = todo.popleft()
        if v == dst:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for w in G.successors(v):
            if w not in prev:
                prev[w] = v
                todo.append(w)
    return None


def find_double_loop(G: Digraph) -> DoubleLoop | None:
    """Walk toward a double loop the way the existence argument does.

    Only vertices with uncountably many forward paths are visited. Follow such
    vertices until one repeats, which closes a loop; then leave the loop along
    a different edge and repeat. Everything visited so far reaches the current
    loop, so once a branch re-enters it the branch edge closes a second cycle.
    """
    rich = _reaching(G, branching_core(G))
    if not rich:
        return None
    visited: set = set()
    loop, origin, v = None, None, min(rich)
    while True:
        path, pos = [v], {v: 0}
        visited.add(v)
        while True:
            nxt = min(w for w in G.successors(path[-1]) if w in rich)
            if nxt in pos:
                new_loop = path[pos[nxt]:]
                break
            if nxt in visited:
                return _close(G, loop, origin, v)
            pos[nxt] = len(path)
            path.append(nxt)
            visited.add(nxt)
        loop = new_loop
        for k, u in enumerate(loop):
            follow = loop[(k + 1) % len(loop)]
            exits = [w for w in G.successors(u) if w != follow and w in rich]
            if exits:
                origin, v = u, min(exits)
                break
        else:  # pragma: no cover - a loop of rich vertices always has an exit
            raise AssertionError("rich loop without an exit")
        if v in visited:
            return _close(G, loop, origin, v)


def _close(G: Digraph, loop: list, u: Vertex, w: Vertex) -> DoubleLoop:
    back = shortest_path(G, w, u)
    assert back is not None
    other = [u] + back[:-1]
    return DoubleLoop.of(loop, other)


@dataclass(frozen=True)
class Goodness:
    right: bool
    left: bool

    @property
    def both(self) -> bool:
        return self.right and self.left

    @property
    def neither(self) -> bool:
        return not (self.right or self.left)


def classify_good(G: Digraph) -> dict[Vertex, Goodness]:
    """Good to the right: uncountably many forward paths, i.e. a branching
    component is reachable. Good to the left: the same on the reversed graph."""
    right = _reaching(G, branching_core(G))
    back = G.reversed()
    left = _reaching(back, branching_core(back))
    return {v: Goodness(v in right, v in left) for v in G.vertices}


def word_goodness(G: DeBruijnGraph, word: str) -> Goodness:
    """Words that are not vertices are bad both ways."""
    if len(word) != G.N or word not in G.succ:
        return Goodness(False, False)
    return classify_good(G)[word]


EPS_GRID = 10**4


def _eps_ok(eps: Fraction, size: int) -> bool:
    third = Fraction(1, 3)
    unique = eps < (third - Fraction(4, 3) * eps) * (1 - eps) / size
    minority = (1 - eps) ** 2 / (10 * size) >= eps
    return unique and minority


@lru_cache(maxsize=None)
def epsilon_max(size: int) -> Fraction:
    """Largest grid value of eps under which a qualifying majority loop is unique."""
    if size < 1:
        raise GraphPreconditionError("graph size must be positive")
    # both constraints are monotone in eps on [0, 1/4], so scan up to the first failure
    k = 0
    while k + 1 < EPS_GRID // 4 and _eps_ok(Fraction(k + 1, EPS_GRID), size):
        k += 1
    return Fraction(k, EPS_GRID)


def to_dot(G: Digraph, loop: DoubleLoop | None = None, goodness: Mapping | None = None) -> str:
    lines = ["digraph debruijn {", "  rankdir=LR;"]
    for v in G.vertices:
        attrs = [f'label="{v}"']
        if loop is not None and v == loop.shared:
            attrs.append("shape=doublecircle")
        if goodness is not None and goodness[v].both:
            attrs.append("style=filled fillcolor=lightgrey")
        lines.append(f'  "{v}" [{" ".join(attrs)}];')
    marked = {}
    if loop is not None:
        for i, color in ((0, "blue"), (1, "red")):
            c = (loop.C0, loop.C1)[i]
            for k, v in enumerate(c):
                marked.setdefault((v, c[(k + 1) % len(c)]), color)
    for a, b in G.edges():
        extra = f' [color={marked[(a, b)]} penwidth=2]' if (a, b) in marked else ""
        lines.append(f'  "{a}" -> "{b}"{extra};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def classification_json(G: DeBruijnGraph) -> str:
    good = classify_good(G)
    loop = find_double_loop(G)
    doc = {
        "N": G.N,
        "forbidden": list(G.forbidden),
        "vertices": [{"word": v, "good_right": good[v].right, "good_left": good[v].left} for v in G.vertices],
        "edges": [list(e) for e in G.edges()],
        "double_loop": loop.to_json() if loop else None,
        "epsilon_max": str(epsilon_max(max(len(G), 1))),
    }
    return json.dumps(doc, indent=2, sort_keys=True)
