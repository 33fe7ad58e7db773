"""Desk-scale acceptance checks, shared by the test suite and ``shiftdet accept``."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .amenability import (
    appropriate_spread,
    coset_split,
    folner_lower_bound,
    folner_ratio,
    identity_layers,
    reindex_layers,
    ring_layout,
)
from .codec import encode_moves, invariance_bound_check, random_moves, roundtrip_case
from .games import (
    GameSpec,
    RuleTree,
    auxiliary_game,
    aux_layout,
    beats_all,
    extend_rules_game,
    solve,
    transfer_rules_strategy,
    transfer_shift_strategy,
)
from .groups import parse_group
from .sft_codec import (
    Window,
    block_schedule,
    codewords,
    decode_bits,
    default_eps,
    qualifies,
    ring_witnesses,
    sft_encode,
)
from .sft_graph import (
    Digraph,
    DoubleLoop,
    build_debruijn,
    classify_good,
    epsilon_max,
    find_double_loop,
)

DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class Outcome:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _groups_with_layers(names):
    for name in names:
        G = parse_group(name)
        H = G.left if name.startswith("Zx") else G
        yield name, G, H


# --- oracles ----------------------------------------------------------------------------


def cycles_by_dfs(G: Digraph) -> set[tuple]:
    """Every simple cycle, each listed from its least vertex."""
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


def has_double_loop_by_enumeration(G: Digraph) -> bool:
    cycles = list(cycles_by_dfs(G))
    return any(set(a) & set(b) for i, a in enumerate(cycles) for b in cycles[i + 1:])


def random_graphs(seed: int, count: int, max_vertices: int = 8, max_N: int = 4) -> list[Digraph]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        N = rng.randint(1, max_N)
        words = ["".join(p) for L in range(1, N + 1) for p in itertools.product("01", repeat=L)]
        forbidden = rng.sample(words, rng.randint(0, min(4, len(words))))
        G = build_debruijn(forbidden, N)
        if len(G) <= max_vertices:
            out.append(G)
    return out


# --- criteria -----------------------------------------------------------------------------


def folner_bound(seed: int) -> tuple[bool, str]:
    cases = 0
    for name, G, _ in _groups_with_layers(["Z", "F2", "ZxC2"]):
        ball = G.ball(5)
        for n in range(31):
            for g in ball:
                if folner_ratio(G, n, g) < folner_lower_bound(n, G.word_length(g)):
                    return False, f"{name}: n={n}, g={g}"
                cases += 1
    return True, f"{cases} (group, n, g) cases"


def spread_bound(seed: int) -> tuple[bool, str]:
    F2 = parse_group("F2")
    cases = 0
    for g in F2.ball(4):
        for n in range(13):
            if appropriate_spread(F2, g, n) > 2 * len(g) + 2:
                return False, f"g={g}, n={n}"
            cases += 1
    return True, f"{cases} cases on F2"


def codec_roundtrip(seed: int) -> tuple[bool, str]:
    rng = random.Random(seed)
    setups = []
    for name, G, H in _groups_with_layers(["Z", "F2"]):
        layers = identity_layers(H)
        setups.append((name, ring_layout(layers), coset_split(G, layers)))
    for k in range(200):
        name, layout, part = setups[k % len(setups)]
        moves = random_moves(rng, 6, rng.randint(1, 3))
        J = rng.randint(0, 8)
        if not roundtrip_case(moves, J, layout, part):
            return False, f"{name}: moves={moves}, J={J}"
    return True, "200 random move vectors"


def invariance_bound(seed: int) -> tuple[bool, str]:
    rng = random.Random(seed)
    cases = 0
    for name, G, H in _groups_with_layers(["Z", "F2", "ZxC2"]):
        for layers in (identity_layers(H), reindex_layers(H, Fraction(9, 10), 3)):
            layout, part = ring_layout(layers), coset_split(G, layers)
            moves = tuple(rng.randrange(1, 3) for _ in range(4))
            x = encode_moves(moves, 1, layout, part)
            for g in G.ball(3):
                for n in (0, 1):
                    for j in (0, 1):
                        for rep in invariance_bound_check(x, layout, part, g, n, j):
                            cases += 1
                            if not rep.passed:
                                return False, f"{name}: g={g}, n={n}, j={j}, |T|={rep.t_size} > {rep.bound}"
    ok = cases >= 50
    return ok, f"{cases} (g, n, j, coset) cases"


def golden_mean(seed: int) -> tuple[bool, str]:
    G = build_debruijn(["11"], 2)
    if (len(G), len(G.edges())) != (3, 5):
        return False, f"{len(G)} vertices, {len(G.edges())} edges"
    dl = find_double_loop(G)
    cycles = cycles_by_dfs(G)
    if dl != DoubleLoop(("00",), ("00", "01", "10"), "00") or not {dl.C0, dl.C1} <= cycles:
        return False, f"double loop {dl}"
    if not all(g.both for g in classify_good(G).values()):
        return False, "a golden-mean vertex is not good both ways"
    H = build_debruijn(["00", "11"], 2)
    if find_double_loop(H) is not None or has_double_loop_by_enumeration(H):
        return False, "{00, 11} has a double loop"
    if any(g.right or g.left for g in classify_good(H).values()):
        return False, "{00, 11} has a good vertex"
    return True, "3 vertices, 5 edges, loop ({00}, {00,01,10}); {00,11} all bad"


def epsilon_uniqueness(seed: int) -> tuple[bool, str]:
    eps = epsilon_max(3)
    if not Fraction(2, 100) < eps < Fraction(4, 100):
        return False, f"epsilon_max(3) = {eps}"
    nxt = eps + Fraction(1, 10**4)
    first = nxt < (Fraction(1, 3) - Fraction(4, 3) * nxt) * (1 - nxt) / 3
    second = (1 - nxt) ** 2 / 30 >= nxt
    if not first or second:
        return False, "the minority inequality is not the binding one"
    for n0 in range(61):
        for n1 in range(61 - n0):
            if len(qualifies((n0, n1), 10**6, 10**6, eps)) > 1:
                return False, f"counts ({n0}, {n1}) have two witnesses"
    G = build_debruijn(["11"], 2)
    c0, c1 = codewords(find_double_loop(G), "00")

    def check(bits) -> bool:
        w = "00" + "".join((c0, c1)[b] for b in bits)
        return len(ring_witnesses(Window.from_string(w), G, 0, len(w), eps)) <= 1

    windows = 0
    for L in range(1, 15):
        for bits in itertools.product((0, 1), repeat=L):
            windows += 1
            if not check(bits):
                return False, f"pattern {bits} has two witnesses"
    rng = random.Random(seed)
    for _ in range(1000):
        bits = [rng.randrange(2) for _ in range(rng.randint(15, 60))]
        windows += 1
        if not check(bits):
            return False, f"pattern {bits} has two witnesses"
    return True, f"eps={eps}; all count pairs to 60; {windows} windows"


def sft_roundtrip(seed: int) -> tuple[bool, str]:
    G = build_debruijn(["11"], 2)
    S = block_schedule(2, K=4)
    eps = default_eps(G)
    count = 0
    for L in range(9):
        for bits in itertools.product((0, 1), repeat=L):
            y = sft_encode(bits, G, S, eps=eps)
            if decode_bits(y, G, S, eps=eps) != bits:
                return False, f"bits {bits}"
            count += 1
    return True, f"{count} bit strings"


RULE_TREES = {
    "last<2": RuleTree.from_predicate(3, (0, 1, 2), lambda p: p[-1] < 2),
    "pattern": RuleTree.from_pattern(3, (0, 1, 2), "(0[01]|1.|2[12])[02]"),
}


def rules_transfer(seed: int) -> tuple[bool, str]:
    start = time.perf_counter()
    games = 0
    for name, tree in RULE_TREES.items():
        for bits in range(2 ** len(tree.leaves())):
            g = GameSpec.from_bits(tree, bits)
            ext = extend_rules_game(g)
            w, sigma = solve(ext)
            if solve(g)[0] != w:
                return False, f"{name} payoff {bits}: winners differ"
            if not beats_all(g, transfer_rules_strategy(sigma, g, ext)):
                return False, f"{name} payoff {bits}: transferred strategy loses"
            games += 1
    spent = time.perf_counter() - start
    return spent < 60, f"{games} payoffs in {spent:.1f}s"


def shift_transfer(seed: int) -> tuple[bool, str]:
    layout = aux_layout(2, (0, 1), rings=2)
    full = RuleTree.full(2, (0, 1))
    for bits in range(16):
        base = GameSpec.from_bits(full, bits)
        w, tau = solve(auxiliary_game(base, layout))
        if solve(base)[0] != w or not beats_all(base, transfer_shift_strategy(tau, layout)):
            return False, f"payoff {bits}"
    return True, "16 payoffs"


def double_loop_oracle(seed: int) -> tuple[bool, str]:
    graphs = random_graphs(seed, 100)
    found = 0
    for k, G in enumerate(graphs):
        dl = find_double_loop(G)
        if (dl is not None) != has_double_loop_by_enumeration(G):
            return False, f"graph {k}: {G.vertices}"
        if dl is not None:
            cycles = cycles_by_dfs(G)
            if dl.C0 not in cycles or dl.C1 not in cycles:
                return False, f"graph {k}: loop is not two simple cycles"
            found += 1
    return True, f"100 graphs, {found} with a double loop"


CRITERIA: list[tuple[int, str, Callable[[int], tuple[bool, str]]]] = [
    (1, "folner bound", folner_bound),
    (2, "spread bound", spread_bound),
    (3, "shift codec round trip", codec_roundtrip),
    (4, "ring invariance bound", invariance_bound),
    (5, "golden mean shift", golden_mean),
    (6, "epsilon uniqueness", epsilon_uniqueness),
    (7, "sft codec round trip", sft_roundtrip),
    (8, "rules game transfer", rules_transfer),
    (9, "toy shift transfer", shift_transfer),
    (10, "double loop oracle", double_loop_oracle),
]


def run(number: int, seed: int = DEFAULT_SEED) -> Outcome:
    for k, name, fn in CRITERIA:
        if k == number:
            start = time.perf_counter()
            try:
                ok, detail = fn(seed)
            except Exception as exc:  # a crash is a failure, reported by name
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return Outcome(k, name, ok, detail, time.perf_counter() - start)
    raise KeyError(number)


def run_all(seed: int = DEFAULT_SEED) -> list[Outcome]:
    return [run(k, seed) for k, _, _ in CRITERIA]
