import json
import random
from fractions import Fraction
from itertools import product

import pytest

from shiftdet.sft_graph import (
    Digraph,
    DoubleLoop,
    GraphPreconditionError,
    build_debruijn,
    classification_json,
    classify_good,
    double_loops,
    epsilon_max,
    find_double_loop,
    is_cycle,
    simple_cycles,
    to_dot,
)


def brute_cycles(G):
    """Every simple cycle, found by DFS from its least vertex."""
    out = set()

    def dfs(start, path, seen):
        for w in G.successors(path[-1]):
            if w == start:
                out.add(tuple(path))
            elif w > start and w not in seen:
                dfs(start, path + [w], seen | {w})

    for v in G.vertices:
        dfs(v, [v], {v})
    return out


def brute_has_double_loop(G):
    cycles = list(brute_cycles(G))
    return any(set(a) & set(b) for i, a in enumerate(cycles) for b in cycles[i + 1:])


def brute_reach(G, u):
    seen, todo = {u}, [u]
    while todo:
        for w in G.successors(todo.pop()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def first_returns(G, w, limit, stop=2):
    """Count closed walks at w that avoid w in between, up to ``stop``."""
    can_return = {v for v in G.vertices if w in brute_reach(G, v)}
    found = 0
    stack = [(w, 0)]
    while stack and found < stop:
        v, depth = stack.pop()
        for x in G.successors(v):
            if x == w:
                found += 1
            elif depth + 1 < limit and x in can_return:
                stack.append((x, depth + 1))
    return found


def brute_good_right(G, u):
    limit = 4 * len(G)
    return any(first_returns(G, w, limit) >= 2 for w in brute_reach(G, u))


def count_paths(G, u, length):
    counts = {u: 1}
    for _ in range(length):
        nxt = {}
        for v, c in counts.items():
            for w in G.successors(v):
                nxt[w] = nxt.get(w, 0) + c
        counts = nxt
    return sum(counts.values())


def random_graphs(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        N = rng.randint(1, 4)
        words = ["".join(p) for L in range(1, N + 1) for p in product("01", repeat=L)]
        forbidden = rng.sample(words, rng.randint(0, min(4, len(words))))
        G = build_debruijn(forbidden, N) if not forbidden or max(map(len, forbidden)) <= N else None
        if G is not None and len(G) <= 8:
            out.append(G)
    return out


GRAPHS = random_graphs(17, 150)


def test_golden_mean_graph():
    G = build_debruijn(["11"], 2)
    assert G.vertices == ("00", "01", "10")
    assert set(G.edges()) == {("00", "00"), ("00", "01"), ("01", "10"), ("10", "00"), ("10", "01")}


def test_small_examples():
    assert len(build_debruijn(["0", "1"], 1)) == 0
    G = build_debruijn(["00", "11"], 2)
    assert set(G.edges()) == {("01", "10"), ("10", "01")}
    with pytest.raises(GraphPreconditionError):
        build_debruijn(["111"], 2)


def test_edges_exhaustive():
    for G in GRAPHS:
        vs = set(G.vertices)
        assert all(G.is_legal(v) for v in vs)
        expected = {(a, b) for a in vs for b in vs if a[1:] == b[:-1]}
        assert set(G.edges()) == expected


def test_random_walks_avoid_forbidden():
    rng = random.Random(2)
    for G in GRAPHS:
        if not G.vertices:
            continue
        walk = [rng.choice(G.vertices)]
        while len(walk) < 200 and G.successors(walk[-1]):
            walk.append(rng.choice(G.successors(walk[-1])))
        assert G.is_legal(G.word_of_walk(walk))
        assert G.walk_of_word(G.word_of_walk(walk)) == walk


def test_double_loop_examples():
    G = build_debruijn(["11"], 2)
    assert find_double_loop(G) == DoubleLoop(("00",), ("00", "01", "10"), "00")
    assert find_double_loop(build_debruijn(["00", "11"], 2)) is None
    assert find_double_loop(Digraph.from_edges([], [])) is None


def test_simple_cycles_match_brute_force():
    for G in GRAPHS:
        assert set(simple_cycles(G)) == brute_cycles(G)


def test_find_double_loop_matches_enumeration():
    hits = 0
    for G in GRAPHS:
        dl = find_double_loop(G)
        assert (dl is not None) == brute_has_double_loop(G)
        if dl is None:
            continue
        hits += 1
        assert is_cycle(G, dl.C0) and is_cycle(G, dl.C1)
        assert dl.C0 < dl.C1 and dl.shared in set(dl.C0) & set(dl.C1)
        assert DoubleLoop.of(dl.C1, dl.C0) == dl
        good = classify_good(G)
        assert all(good[v].both for v in dl.vertices())
    assert hits > 20


def test_all_double_loops_valid():
    for G in GRAPHS[:40]:
        for dl in double_loops(G):
            assert is_cycle(G, dl.C0) and is_cycle(G, dl.C1) and dl.C0 < dl.C1


def test_classify_examples():
    good = classify_good(build_debruijn(["11"], 2))
    assert all(g.right and g.left for g in good.values())
    good = classify_good(build_debruijn(["00", "11"], 2))
    assert not any(g.right or g.left for g in good.values())
    good = classify_good(Digraph.from_edges("ab", [("a", "b")]))
    assert all(g.neither for g in good.values())


def test_classify_matches_brute_force():
    for G in GRAPHS:
        good = classify_good(G)
        back = G.reversed()
        for u in G.vertices:
            assert good[u].right == brute_good_right(G, u)
            assert good[u].left == brute_good_right(back, u)
            if good[u].right:
                # at least doubling every |V| steps once the double loop is reached
                V = len(G)
                assert count_paths(G, u, 4 * V) >= 2 ** 3


def test_one_sided_goodness():
    # a path into the golden-mean core from a vertex with no predecessors
    G = Digraph.from_edges("sxy", [("s", "x"), ("x", "x"), ("x", "y"), ("y", "x")])
    good = classify_good(G)
    assert good["s"].right and not good["s"].left
    assert good["x"].both


def test_epsilon_examples():
    e3 = epsilon_max(3)
    assert Fraction(2, 100) < e3 < Fraction(4, 100)
    # the minority bound (1 - eps)^2 >= 30 eps is the binding one
    step = Fraction(1, 10**4)
    assert (1 - e3) ** 2 >= 30 * e3 and (1 - e3 - step) ** 2 < 30 * (e3 + step)
    assert e3 >= epsilon_max(30)
    sizes = [1, 2, 3, 5, 8, 16, 30, 100, 1000]
    values = [epsilon_max(n) for n in sizes]
    assert values == sorted(values, reverse=True)
    assert all(v <= Fraction(1, 10 * n) for n, v in zip(sizes, values))


def test_dot_and_json_export():
    G = build_debruijn(["11"], 2)
    dot = to_dot(G, find_double_loop(G), classify_good(G))
    assert dot.startswith("digraph") and '"00" -> "00" [color=blue' in dot
    assert '"01" -> "10" [color=red' in dot
    doc = json.loads(classification_json(G))
    assert doc["double_loop"] == {"C0": ["00"], "C1": ["00", "01", "10"], "shared": "00"}
    assert all(v["good_right"] and v["good_left"] for v in doc["vertices"])
