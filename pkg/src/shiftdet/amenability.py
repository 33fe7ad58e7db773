"""Length-class layers, Følner ratios, player partitions and ring layouts.

Classes are word-length spheres ``S_r = {g : |g| = r}`` of a group H.  A
class is identified by its radius r, so the layer ``A_n`` is the radius
range ``0..n`` and never has to be materialized to be counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .groups import BudgetExceeded, DirectProduct, Group, GroupElement, UsageError

PLAYER_I = "I"
PLAYER_II = "II"


def class_count(group: Group, n: int) -> int:
    """|A_n|: number of nonempty length classes of radius <= n."""
    if n < 0:
        return 0
    diam = group.max_length()
    return n + 1 if diam is None else min(n, diam) + 1


def length_classes(group: Group, n: int) -> list[frozenset[GroupElement]]:
    """A_n as explicit sets of elements (spheres of radius 0..n)."""
    if n < 0:
        raise UsageError("n must be nonnegative")
    out = []
    for r in range(n + 1):
        s = group.sphere(r)
        if not s:
            break
        out.append(frozenset(s))
    return out


def quotient_looks_infinite(group: Group, up_to: int) -> bool:
    """New classes keep appearing up to radius ``up_to`` (within the budget)."""
    try:
        return all(group.sphere_size(r) > 0 for r in range(up_to + 1))
    except BudgetExceeded:
        return True


def appropriate_spread(group: Group, g: GroupElement, n: int) -> int:
    """max over C in A_n of the number of classes met by gC."""
    best = 0
    for r in range(class_count(group, n)):
        best = max(best, len(group.translate_lengths(g, r)))
    return best


def spread_bound(group: Group, g: GroupElement) -> int:
    return 2 * group.word_length(g) + 2


def folner_count(group: Group, n: int, g: GroupElement) -> int:
    """|{C in A_n : gC is inside the union of A_n}|."""
    return sum(
        1 for r in range(class_count(group, n)) if max(group.translate_lengths(g, r)) <= n
    )


def folner_ratio(group: Group, n: int, g: GroupElement) -> Fraction:
    return Fraction(folner_count(group, n, g), class_count(group, n))


def folner_lower_bound(n: int, length: int) -> Fraction:
    return Fraction(max(n - length + 1, 0), n + 1)


@dataclass
class LayerSystem:
    """Word-length layers of ``group`` with a reindexing k_0 < k_1 < ...

    The reindexed layer A'_i is A_{k_i}, i.e. the radius range 0..k_i.
    ``target`` is the growth ratio the greedy reindexing guarantees; None
    means the identity reindexing k_i = i.
    """

    group: Group
    target: Fraction | None = None
    max_layer: int | None = None
    _k: list[int] = field(default_factory=lambda: [0], repr=False)

    @classmethod
    def from_sequence(cls, group: Group, ks: list[int]) -> "LayerSystem":
        """Fixed reindexing; asking for layers past the end is a budget error."""
        if not ks or ks[0] != 0 or any(a >= b for a, b in zip(ks, ks[1:])):
            raise UsageError("layer sequence must start at 0 and increase strictly")
        return cls(group, None, ks[-1], list(ks))

    def k(self, i: int) -> int:
        if i < 0:
            raise UsageError("layer index must be nonnegative")
        while len(self._k) <= i:
            self._k.append(self._next_k(self._k[-1]))
        return self._k[i]

    def _next_k(self, prev: int) -> int:
        if self.max_layer is not None and prev >= self.max_layer:
            raise BudgetExceeded(f"layer sequence ends at {prev}")
        if self.target is None or self.target <= 0:
            nxt = prev + 1
        elif self.group.max_length() is None:
            # |A_k| = k + 1, so (k - prev) / (k + 1) >= t  <=>  k >= (prev + t) / (1 - t)
            t = self.target
            bound = (prev + t) / (1 - t)
            nxt = max(prev + 1, -((-bound.numerator) // bound.denominator))
        else:
            nxt = self._search_next(prev)
        if self.max_layer is not None and nxt > self.max_layer:
            raise BudgetExceeded(f"reindexing needs layer {nxt} > max_layer {self.max_layer}")
        diam = self.group.max_length()
        if diam is not None and nxt > diam:
            raise BudgetExceeded(
                f"{self.group.name} has only {diam + 1} classes; cannot extend past layer {prev}"
            )
        return nxt

    def _search_next(self, prev: int) -> int:
        diam = self.group.max_length()
        a_prev = class_count(self.group, prev)
        for k in range(prev + 1, diam + 1):
            a_k = class_count(self.group, k)
            if Fraction(a_k - a_prev, a_k) >= self.target:
                return k
        raise BudgetExceeded(f"target ratio {self.target} not achievable after layer {prev}")

    def layer_size(self, i: int) -> int:
        """|A'_i| as a number of classes."""
        return class_count(self.group, self.k(i))

    def ring_radii(self, i: int) -> tuple[int, int]:
        """A'_i minus A'_{i-1} as a half-open radius interval (lo, hi]."""
        if i < 1:
            raise UsageError("rings start at layer index 1")
        return self.k(i - 1), self.k(i)

    def layer_of_radius(self, r: int) -> int:
        """Least i with radius r in A'_i."""
        i = 0
        while self.k(i) < r:
            i += 1
        return i

    def growth_ratio(self, i: int) -> Fraction:
        a, b = self.layer_size(i), self.layer_size(i + 1)
        return Fraction(b - a, b)


def reindex_layers(group: Group, target_ratio: Fraction | float | str = Fraction(9, 10),
                   stages: int = 8, max_layer: int | None = None) -> LayerSystem:
    """Greedy minimal reindexing so every step has |A'_{i+1} - A'_i| / |A'_{i+1}| >= target."""
    t = Fraction(target_ratio)
    if not 0 <= t < 1:
        raise UsageError("target ratio must lie in [0, 1)")
    ls = LayerSystem(group, t, max_layer)
    ls.k(stages)
    return ls


def identity_layers(group: Group) -> LayerSystem:
    return LayerSystem(group, None)


# --- player partition ---------------------------------------------------------


def radius_side(layers: LayerSystem, r: int) -> str:
    """Player owning the class of radius r: H_1 is A'_0 plus the even rings."""
    i = layers.layer_of_radius(r)
    if i == 0 or i % 2 == 0:
        return PLAYER_I
    return PLAYER_II


@dataclass
class PlayerPartition:
    """Split of G into G_I = U g_k H_1 and G_II = U g_k H_2.

    ``group`` is either H itself or H x F with F finite; ``coset_reps`` are
    the elements g_k and ``decompose`` maps g to (k, h) with g = g_k h.
    """

    group: Group
    layers: LayerSystem

    @property
    def subgroup(self) -> Group:
        return self.layers.group

    @property
    def coset_reps(self) -> list[GroupElement]:
        if self.group == self.subgroup:
            return [self.group.identity()]
        assert isinstance(self.group, DirectProduct)
        e = self.subgroup.identity()
        return [self.group.pair(e, f) for f in self.group.right.ball(self.group.right.order)]

    def decompose(self, g: GroupElement) -> tuple[int, GroupElement]:
        if self.group == self.subgroup:
            self.group._check(g)
            return 0, g
        h, f = self.group.split(g)
        return self.coset_index(f), h

    def coset_index(self, f: GroupElement) -> int:
        reps = [self.group.split(c)[1] for c in self.coset_reps]
        return reps.index(f)

    def compose(self, k: int, h: GroupElement) -> GroupElement:
        if self.group == self.subgroup:
            return h
        return self.group.pair(h, self.group.split(self.coset_reps[k])[1])

    def side(self, g: GroupElement) -> str:
        _, h = self.decompose(g)
        return radius_side(self.layers, self.subgroup.word_length(h))

    def split_ball(self, r: int) -> tuple[set[GroupElement], set[GroupElement]]:
        g1, g2 = set(), set()
        for g in self.group.ball(r):
            (g1 if self.side(g) == PLAYER_I else g2).add(g)
        return g1, g2

    def enumeration(self, r: int) -> list[GroupElement]:
        """Interleave G_I and G_II in BFS order so even positions are G_I.

        Stops when either side is exhausted inside ball(r), so every listed
        position satisfies the parity condition.
        """
        g1, g2 = [], []
        for g in self.group.ball(r):
            (g1 if self.side(g) == PLAYER_I else g2).append(g)
        out = []
        for a, b in zip(g1, g2):
            out += [a, b]
        return out


def parity_partition(layers: LayerSystem) -> PlayerPartition:
    return PlayerPartition(layers.group, layers)


def coset_split(group: Group, layers: LayerSystem) -> PlayerPartition:
    """Partition G = H or G = H x F (F finite) using the layers on H."""
    h = layers.group
    if group == h:
        return PlayerPartition(group, layers)
    if isinstance(group, DirectProduct) and group.left == h and group.right.finite:
        return PlayerPartition(group, layers)
    raise UsageError(f"unsupported subgroup shape: {h.name} in {group.name}")


# --- rings --------------------------------------------------------------------


def _v2(x: int) -> int:
    return (x & -x).bit_length() - 1


@dataclass(frozen=True)
class DyadicPairing:
    """c_{n,j} = 2^{n+1}(2j+1) covers the positive evens, d_{n,j} = c_{n,j} - 1 the odds."""

    def c(self, n: int, j: int) -> int:
        return 2 ** (n + 1) * (2 * j + 1)

    def d(self, n: int, j: int) -> int:
        return self.c(n, j) - 1

    def owner(self, index: int) -> tuple[str, int, int]:
        if index < 1:
            raise UsageError("layer index 0 is the core, not a ring")
        m = index if index % 2 == 0 else index + 1
        n = _v2(m) - 1
        j = (m >> (n + 1)) // 2
        return (PLAYER_I if index % 2 == 0 else PLAYER_II), n, j


@dataclass(frozen=True)
class TablePairing:
    """Explicit finite pairing {(player, n, j): layer index}."""

    table: tuple[tuple[tuple[str, int, int], int], ...]

    def __post_init__(self):
        seen = {}
        for key, idx in self.table:
            player = key[0]
            if idx < 1:
                raise UsageError("ring indices must be >= 1")
            if (player == PLAYER_I) != (idx % 2 == 0):
                raise UsageError(f"ring {key} must use an {'even' if player == PLAYER_I else 'odd'} index")
            if idx in seen:
                raise UsageError(f"pairing not injective: {key} and {seen[idx]} share {idx}")
            seen[idx] = key

    @classmethod
    def from_mapping(cls, mapping: dict) -> "TablePairing":
        return cls(tuple(sorted((tuple(k), int(v)) for k, v in mapping.items())))

    def _lookup(self, key):
        for k, v in self.table:
            if k == key:
                return v
        raise UsageError(f"pairing has no ring {key}")

    def c(self, n: int, j: int) -> int:
        return self._lookup((PLAYER_I, n, j))

    def d(self, n: int, j: int) -> int:
        return self._lookup((PLAYER_II, n, j))

    def owner(self, index: int) -> tuple[str, int, int]:
        for k, v in self.table:
            if v == index:
                return k
        raise UsageError(f"layer {index} is not a ring of this pairing")


@dataclass
class RingLayout:
    layers: LayerSystem
    pairing: DyadicPairing | TablePairing = field(default_factory=DyadicPairing)

    @property
    def group(self) -> Group:
        return self.layers.group

    def ring_index(self, player: str, n: int, j: int) -> int:
        if player == PLAYER_I:
            return self.pairing.c(n, j)
        if player == PLAYER_II:
            return self.pairing.d(n, j)
        raise UsageError(f"unknown player {player!r}")

    def ring_radii(self, player: str, n: int, j: int) -> tuple[int, int]:
        """Ring B^player_{n,j} as the radius interval (lo, hi]."""
        return self.layers.ring_radii(self.ring_index(player, n, j))

    def ring_classes(self, player: str, n: int, j: int) -> range:
        lo, hi = self.ring_radii(player, n, j)
        return range(lo + 1, hi + 1)

    def ring_size(self, player: str, n: int, j: int) -> int:
        lo, hi = self.ring_radii(player, n, j)
        return hi - lo

    def inner_size(self, player: str, n: int, j: int) -> int:
        """|A'_{c-1}|, the classes strictly inside the ring."""
        return self.layers.layer_size(self.ring_index(player, n, j) - 1)

    def rings(self, n_max: int, j_max: int) -> Iterator[tuple[str, int, int]]:
        for player in (PLAYER_I, PLAYER_II):
            for n in range(n_max + 1):
                for j in range(j_max + 1):
                    yield player, n, j

    def to_json(self, n_max: int = 2, j_max: int = 3) -> str:
        rings = []
        for player, n, j in self.rings(n_max, j_max):
            lo, hi = self.ring_radii(player, n, j)
            rings.append({"player": player, "n": n, "j": j,
                          "index": self.ring_index(player, n, j), "radii": [lo + 1, hi]})
        top = max(r["index"] for r in rings)
        doc = {
            "group": self.group.name,
            "target": None if self.layers.target is None else str(self.layers.target),
            "k": [self.layers.k(i) for i in range(top + 1)],
            "rings": rings,
        }
        return json.dumps(doc, indent=2)


def ring_layout(layers: LayerSystem, pairing: DyadicPairing | TablePairing | None = None) -> RingLayout:
    return RingLayout(layers, pairing or DyadicPairing())


def layout_from_json(text: str, group: Group) -> RingLayout:
    """Rebuild a layout exported by :meth:`RingLayout.to_json` (rings become a table pairing)."""
    doc = json.loads(text)
    if doc["group"] != group.name:
        raise UsageError(f"layout is for {doc['group']}, not {group.name}")
    target = None if doc["target"] is None else Fraction(doc["target"])
    layers = LayerSystem(group, target)
    layers._k = list(doc["k"])
    table = {(r["player"], r["n"], r["j"]): r["index"] for r in doc["rings"]}
    return RingLayout(layers, TablePairing.from_mapping(table))

