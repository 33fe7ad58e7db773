"""Finite alternating games: backward induction, rules games and strategy transfer.

Player I moves at even positions, player II at odd ones. A game of depth D
is decided at its depth-D leaves; ``payoff`` is the set of leaves I wins.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .amenability import PLAYER_I, PLAYER_II, DyadicPairing
from .groups import BudgetExceeded

Position = tuple

DEFAULT_BUDGET = 10**7


class GameError(ValueError):
    pass


class PreconditionError(GameError):
    pass


class SearchExhausted(GameError):
    def __init__(self, msg: str, rings: Sequence = ()):
        super().__init__(msg)
        self.rings = tuple(rings)


def mover(pos: Position) -> str:
    return PLAYER_I if len(pos) % 2 == 0 else PLAYER_II


def other(player: str) -> str:
    return PLAYER_II if player == PLAYER_I else PLAYER_I


# --- rule trees -----------------------------------------------------------------------


@dataclass(frozen=True)
class RuleTree:
    depth: int
    alphabet: tuple
    positions: frozenset = field(repr=False)

    @classmethod
    def full(cls, depth: int, alphabet: Iterable) -> "RuleTree":
        return cls.from_plays(depth, alphabet, product(tuple(alphabet), repeat=depth))

    @classmethod
    def from_plays(cls, depth: int, alphabet: Iterable, plays: Iterable[Sequence]) -> "RuleTree":
        """The tree of prefixes of the given complete plays (pruned by construction)."""
        alphabet = tuple(sorted(set(alphabet)))
        pos = {()}
        for p in plays:
            p = tuple(p)
            if len(p) != depth or not set(p) <= set(alphabet):
                raise GameError(f"{p} is not a play of depth {depth} over {alphabet}")
            pos.update(p[:k] for k in range(depth + 1))
        if depth > 0 and len(pos) == 1:
            raise GameError("rule tree has no plays")
        return cls(depth, alphabet, frozenset(pos))

    @classmethod
    def from_predicate(cls, depth: int, alphabet: Iterable, legal: Callable[[Position], bool]) -> "RuleTree":
        """Positions all of whose prefixes pass ``legal``, pruned of dead ends."""
        alphabet = tuple(sorted(set(alphabet)))
        plays = []

        def grow(p):
            if len(p) == depth:
                plays.append(p)
                return
            for a in alphabet:
                if legal(p + (a,)):
                    grow(p + (a,))

        grow(())
        return cls.from_plays(depth, alphabet, plays)

    @classmethod
    def from_pattern(cls, depth: int, alphabet: Iterable, pattern: str) -> "RuleTree":
        """Plays whose move string (one character per move) fully matches ``pattern``."""
        alphabet = tuple(sorted(set(alphabet)))
        rx = re.compile(pattern)
        plays = [p for p in product(alphabet, repeat=depth) if rx.fullmatch("".join(map(str, p)))]
        return cls.from_plays(depth, alphabet, plays)

    def __contains__(self, pos) -> bool:
        return tuple(pos) in self.positions

    def moves(self, pos: Position) -> tuple:
        return tuple(a for a in self.alphabet if pos + (a,) in self.positions)

    def leaves(self) -> list[Position]:
        return sorted(p for p in self.positions if len(p) == self.depth)

    def is_full(self) -> bool:
        return len(self.leaves()) == len(self.alphabet) ** self.depth

    def is_pruned(self) -> bool:
        return all(self.moves(p) for p in self.positions if len(p) < self.depth)


# --- games and strategies -----------------------------------------------------------------


@dataclass(frozen=True)
class GameSpec:
    tree: RuleTree
    payoff: frozenset  # leaves won by player I

    def __post_init__(self):
        stray = set(self.payoff) - set(self.tree.leaves())
        if stray:
            raise GameError(f"payoff names non-leaves {sorted(stray)[:3]}")

    @classmethod
    def from_predicate(cls, tree: RuleTree, wins: Callable[[Position], bool]) -> "GameSpec":
        return cls(tree, frozenset(p for p in tree.leaves() if wins(p)))

    @classmethod
    def from_bits(cls, tree: RuleTree, bits: int | str) -> "GameSpec":
        """Leaf k (in lexicographic order) is won by I iff bit k is set."""
        leaves = tree.leaves()
        if isinstance(bits, str):
            if len(bits) != len(leaves) or set(bits) - {"0", "1"}:
                raise GameError(f"payoff bitmap needs {len(leaves)} binary digits")
            bits = int(bits[::-1], 2)
        return cls(tree, frozenset(p for k, p in enumerate(leaves) if bits >> k & 1))

    @property
    def depth(self) -> int:
        return self.tree.depth

    def wins_I(self, leaf: Position) -> bool:
        return tuple(leaf) in self.payoff


@dataclass(frozen=True)
class Strategy:
    owner: str
    table: Mapping[Position, object]

    def __call__(self, pos: Position):
        try:
            return self.table[tuple(pos)]
        except KeyError:
            raise GameError(f"strategy of {self.owner} undefined at {pos}") from None

    def to_json(self) -> dict:
        return {"owner": self.owner, "table": {"".join(map(str, p)) or "-": m for p, m in sorted(self.table.items())}}


def solve(spec: GameSpec, budget: int = DEFAULT_BUDGET) -> tuple[str, Strategy]:
    """Backward induction: the winner and a winning strategy on all its legal turns."""
    tree = spec.tree
    if len(tree.positions) > budget:
        raise BudgetExceeded(f"{len(tree.positions)} positions exceed the budget {budget}")
    if not tree.is_pruned():
        raise PreconditionError("rule tree has dead ends")
    value: dict[Position, str] = {}
    for pos in sorted(tree.positions, key=len, reverse=True):
        if len(pos) == tree.depth:
            value[pos] = PLAYER_I if spec.wins_I(pos) else PLAYER_II
        else:
            who = mover(pos)
            kids = [value[pos + (a,)] for a in tree.moves(pos)]
            value[pos] = who if who in kids else other(who)
    winner = value[()]
    table = {}
    for pos in tree.positions:
        if len(pos) < tree.depth and mover(pos) == winner:
            good = [a for a in tree.moves(pos) if value[pos + (a,)] == winner]
            table[pos] = good[0] if good else tree.moves(pos)[0]
    return winner, Strategy(winner, table)


def plays_against(tree: RuleTree, strategy: Strategy) -> Iterator[Position]:
    """Every complete play consistent with ``strategy`` against all legal counter-plays."""
    stack = [()]
    while stack:
        pos = stack.pop()
        if len(pos) == tree.depth:
            yield pos
        elif mover(pos) == strategy.owner:
            a = strategy(pos)
            if a not in tree.moves(pos):
                raise GameError(f"strategy leaves the rule tree at {pos} with {a}")
            stack.append(pos + (a,))
        else:
            stack.extend(pos + (a,) for a in tree.moves(pos))


def beats_all(spec: GameSpec, strategy: Strategy) -> bool:
    want = strategy.owner == PLAYER_I
    return all(spec.wins_I(p) == want for p in plays_against(spec.tree, strategy))


# --- rules games ---------------------------------------------------------------------------


def retract(x: Sequence, tree: RuleTree) -> Position:
    """Replace each illegal move, in order, by the least legal one."""
    out: tuple = ()
    for a in tuple(x)[: tree.depth]:
        legal = tree.moves(out)
        out += (a if a in legal else legal[0],)
    return out


def _decided(tree: RuleTree, payoff: frozenset, pos: Position) -> bool | None:
    """True/False if every legal leaf below pos is won/lost by I, None if both occur."""
    below = {payoff.__contains__(p) for p in tree.leaves() if p[: len(pos)] == pos}
    return next(iter(below)) if len(below) == 1 else None


def extend_rules_game(spec: GameSpec) -> GameSpec:
    """The total game A' on the full tree.

    A play inside the rules keeps its payoff. A play that first leaves the rules
    at s is lost by whoever made the last move of s, unless the legal leaves
    below s minus that move all share one outcome; then it is scored by the
    retraction.
    """
    tree = spec.tree
    full = RuleTree.full(tree.depth, tree.alphabet)
    wins = set()
    for x in full.leaves():
        k = next((k for k in range(len(x)) if x[: k + 1] not in tree), None)
        if k is None:
            ok = spec.wins_I(x)
        elif _decided(tree, spec.payoff, x[:k]) is None:
            ok = k % 2 == 1  # II broke the rules at an undecided node
        else:
            ok = spec.wins_I(retract(x, tree))
        if ok:
            wins.add(x)
    return GameSpec(full, frozenset(wins))


def transfer_rules_strategy(sigma: Strategy, spec: GameSpec, extended: GameSpec | None = None) -> Strategy:
    """sigma = l o sigma': play sigma' on the virtual play and retract its answers."""
    extended = extended or extend_rules_game(spec)
    if not beats_all(extended, sigma):
        raise PreconditionError(f"the strategy of {sigma.owner} does not win the extended game")
    tree = spec.tree
    table = {}
    stack = [((), ())]  # (real position, virtual position)
    while stack:
        real, virt = stack.pop()
        if len(real) == tree.depth:
            continue
        if mover(real) == sigma.owner:
            v = virt + (sigma(virt),)
            a = retract(v, tree)[-1]
            table[real] = a
            stack.append((real + (a,), v))
        else:
            stack.extend((real + (a,), virt + (a,)) for a in tree.moves(real))
    return Strategy(sigma.owner, table)


# --- toy shift transfer ----------------------------------------------------------------------


@dataclass(frozen=True)
class AuxLayout:
    """Rings (player, n, j), j < rings, written one per auxiliary move in ring-index order.

    A move writes the ring's status: a base move m (an m-ring) or ``invalid``.
    Player I's ring (n, j) has index c - 1 and II's has index c, c = 2^(n+1)(2j+1).
    """

    base_depth: int
    alphabet: tuple
    rings: int
    window: tuple[int, int]
    order: tuple

    @property
    def invalid(self):
        return max(self.alphabet) + 1

    @property
    def aux_alphabet(self) -> tuple:
        return self.alphabet + (self.invalid,)

    @property
    def depth(self) -> int:
        return len(self.order)

    def move_of(self, ring) -> int:
        player, n, _ = ring
        return 2 * n + (0 if player == PLAYER_I else 1)

    def positions_of(self, move: int) -> list[int]:
        return [k for k, r in enumerate(self.order) if self.move_of(r) == move]

    def decode(self, play: Sequence) -> list:
        """Per base move: its value when every window ring agrees on it, else None."""
        out = []
        for i in range(self.base_depth):
            vals = {play[k] for k in self.positions_of(i) if self.window[0] <= self.order[k][2] <= self.window[1]}
            out.append(next(iter(vals)) if len(vals) == 1 and self.invalid not in vals else None)
        return out


def aux_layout(base_depth: int, alphabet: Iterable = (0, 1), rings: int = 2,
               window: tuple[int, int] | None = None) -> AuxLayout:
    if base_depth < 1 or rings < 1:
        raise GameError("need at least one move and one ring per move")
    pairing = DyadicPairing()
    keyed = []
    for i in range(base_depth):
        player, n = (PLAYER_I if i % 2 == 0 else PLAYER_II), i // 2
        for j in range(rings):
            c = pairing.c(n, j)
            keyed.append((c - 1 if player == PLAYER_I else c, (player, n, j)))
    order = tuple(r for _, r in sorted(keyed))
    return AuxLayout(base_depth, tuple(sorted(set(alphabet))), rings, window or (0, rings - 1), order)


def auxiliary_game(base: GameSpec, layout: AuxLayout) -> GameSpec:
    """I wins iff, at the first move whose rings fail to decode, the failing player is II;
    when every move decodes, the decoded play decides."""
    if not base.tree.is_full():
        raise GameError("the toy transfer takes a base game on the full tree")
    tree = RuleTree.full(layout.depth, layout.aux_alphabet)

    def wins(play):
        decoded = layout.decode(play)
        for i, v in enumerate(decoded):
            if v is None:
                return i % 2 == 1
        return base.wins_I(tuple(decoded))

    return GameSpec.from_predicate(tree, wins)


def transfer_shift_strategy(tau: Strategy, layout: AuxLayout, budget: int = 10**5) -> Strategy:
    """Base-game strategy read off an auxiliary strategy.

    At base move k, search every auxiliary position consistent with tau in which
    the opponent writes compliant rings for its moves (the known ones verbatim,
    future ones with every possible value). Once the mover's rings for move k are
    written, they must be valid (checked first) and carry one value m in every
    branch; m is played. Otherwise the search is exhausted.
    """
    owner = tau.owner
    base_tree = RuleTree.full(layout.base_depth, layout.alphabet)
    nodes = 0

    def ring_values(history: Position) -> list[dict]:
        nonlocal nodes
        k = len(history)
        mine = layout.positions_of(k)
        last = max(mine)
        found = []
        stack = [((), {})]
        while stack:
            prefix, assumed = stack.pop()
            nodes += 1
            if nodes > budget:
                raise SearchExhausted(f"search budget {budget} spent at base position {history}")
            t = len(prefix)
            if t > last:
                found.append({layout.order[q]: prefix[q] for q in mine})
                continue
            ring = layout.order[t]
            i = layout.move_of(ring)
            if (ring[0] == owner):
                stack.append((prefix + (tau(prefix),), assumed))
            elif i < k:
                stack.append((prefix + (history[i],), assumed))
            elif i in assumed:
                stack.append((prefix + (assumed[i],), assumed))
            else:
                stack.extend((prefix + (m,), {**assumed, i: m}) for m in layout.alphabet)
        return found

    table = {}
    for pos in sorted(base_tree.positions):
        if len(pos) == base_tree.depth or mover(pos) != owner:
            continue
        outcomes = ring_values(pos)
        windowed = [{r: v for r, v in o.items() if layout.window[0] <= r[2] <= layout.window[1]} for o in outcomes]
        bad = sorted({r for o in windowed for r, v in o.items() if v == layout.invalid})
        if bad:
            raise SearchExhausted(f"rings {bad} stay invalid at base position {pos}", bad)
        values = {v for o in windowed for v in o.values()}
        if len(values) != 1:
            unstable = sorted({r for o in windowed for r in o})
            raise SearchExhausted(f"rings {unstable} do not settle on one value at base position {pos} "
                                  f"(seen {sorted(values)})", unstable)
        table[pos] = values.pop()
    return Strategy(owner, table)


def ring_strategy(owner: str, layout: AuxLayout, rule: Callable[[tuple], object]) -> Strategy:
    """Auxiliary strategy writing rule(ring) into each of the owner's rings."""
    tree = RuleTree.full(layout.depth, layout.aux_alphabet)
    table = {p: rule(layout.order[len(p)]) for p in tree.positions
             if len(p) < layout.depth and layout.order[len(p)][0] == owner}
    return Strategy(owner, table)


# --- text fixtures ---------------------------------------------------------------------------


_SAFE_CALLS = {"sum": sum, "len": len, "max": max, "min": min, "all": all, "any": any, "abs": abs}
_SAFE_NODES = (ast.Expression, ast.BoolOp, ast.BinOp, ast.UnaryOp, ast.Compare, ast.Call, ast.Name,
               ast.Load, ast.Constant, ast.Subscript, ast.Slice, ast.Tuple, ast.List, ast.IfExp,
               ast.operator, ast.boolop, ast.cmpop, ast.unaryop)


def compile_payoff(expr: str) -> Callable[[Position], bool]:
    """A payoff expression in the play ``x`` (a tuple), e.g. ``sum(x) % 2 == 0``."""
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _SAFE_NODES):
            raise GameError(f"payoff expression may not use {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id != "x" and node.id not in _SAFE_CALLS:
            raise GameError(f"unknown name {node.id!r} in payoff expression")
    code = compile(tree, "<payoff>", "eval")
    return lambda x: bool(eval(code, {"__builtins__": {}}, {**_SAFE_CALLS, "x": tuple(x)}))


def parse_game(text: str) -> GameSpec:
    """Fixture format, one directive per line (``#`` starts a comment)::

        depth 3
        alphabet 0 1 2
        rule [01]*          # optional: regex on the move string of complete plays
        payoff expr sum(x) % 2 == 0     # or: payoff bits 0110... over the rule tree's leaves
    """
    fields: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        fields[key] = rest.strip()
    try:
        depth = int(fields["depth"])
        alphabet = tuple(int(a) for a in fields["alphabet"].split())
        kind, _, body = fields["payoff"].partition(" ")
    except (KeyError, ValueError) as exc:
        raise GameError(f"fixture needs depth, alphabet and payoff lines ({exc})") from exc
    if any(not 0 <= a <= 9 for a in alphabet):
        raise GameError("fixture moves are single digits")
    tree = RuleTree.from_pattern(depth, alphabet, fields["rule"]) if "rule" in fields else RuleTree.full(depth, alphabet)
    if kind == "bits":
        return GameSpec.from_bits(tree, body.strip())
    if kind == "expr":
        return GameSpec.from_predicate(tree, compile_payoff(body))
    raise GameError(f"unknown payoff kind {kind!r}")
