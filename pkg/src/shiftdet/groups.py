"""Finitely generated groups with computable canonical forms.

Supported kinds: free groups F_k, free abelian groups Z^d, finite groups
given by a multiplication table, and direct products of those.  Every
generating set is closed under inverses, and word length is measured
against it.
"""

from __future__ import annotations

import csv
import io
import os
import re
import threading
from collections import deque
from dataclasses import dataclass
from itertools import product as iproduct
from pathlib import Path
from typing import Hashable, Iterable, Iterator, Sequence

DEFAULT_BUDGET = 10**6


class UsageError(ValueError):
    """Raised for malformed input or operands from the wrong group."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured element budget."""


def element_budget() -> int:
    return int(os.environ.get("SHIFTDET_BUDGET", DEFAULT_BUDGET))


@dataclass(frozen=True)
class GroupElement:
    group: "Group"
    key: Hashable

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.multiply(self, other)

    def inverse(self) -> "GroupElement":
        return self.group.inverse(self)

    @property
    def word(self) -> tuple[int, ...]:
        """Canonical word as signed 1-based generator indices (-i is the inverse of i)."""
        return self.group.canonical_word(self)

    def __len__(self) -> int:
        return self.group.word_length(self)

    def __repr__(self) -> str:
        return f"{self.group.name}<{self.group.format_key(self.key)}>"


class Group:
    """Base class.  Subclasses fix the canonical form and multiplication."""

    name = "G"
    finite = False

    def __init__(self) -> None:
        self._layers: list[list[GroupElement]] = []
        self._seen: dict[Hashable, int] = {}
        self._lock = threading.Lock()

    # -- structure supplied by subclasses ---------------------------------
    def identity(self) -> GroupElement:
        raise NotImplementedError

    def _mul_keys(self, a: Hashable, b: Hashable) -> Hashable:
        raise NotImplementedError

    def _inv_key(self, a: Hashable) -> Hashable:
        raise NotImplementedError

    def generators(self) -> list[GroupElement]:
        """Symmetric generating set (closed under inverses)."""
        raise NotImplementedError

    def canonical_word(self, g: GroupElement) -> tuple[int, ...]:
        raise NotImplementedError

    def format_key(self, key: Hashable) -> str:
        return str(key)

    def parse_key(self, text: str) -> Hashable:
        raise UsageError(f"cannot parse elements of {self.name}")

    # -- generic operations -----------------------------------------------
    def element(self, key: Hashable) -> GroupElement:
        return GroupElement(self, key)

    def _check(self, *elements: GroupElement) -> None:
        for e in elements:
            if e.group != self:
                raise UsageError(f"element {e!r} does not belong to {self.name}")

    def multiply(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check(g, h)
        return GroupElement(self, self._mul_keys(g.key, h.key))

    def inverse(self, g: GroupElement) -> GroupElement:
        self._check(g)
        return GroupElement(self, self._inv_key(g.key))

    def parse(self, text: str) -> GroupElement:
        return GroupElement(self, self.parse_key(text.strip()))

    def from_word(self, word: Iterable[int]) -> GroupElement:
        gens = self.generator_letters()
        g = self.identity()
        for letter in word:
            try:
                g = g * gens[letter]
            except KeyError:
                raise UsageError(f"unknown generator letter {letter}") from None
        return g

    def generator_letters(self) -> dict[int, GroupElement]:
        """Map signed letters +-i to generator elements."""
        raise NotImplementedError

    def _grow_layer(self, budget: int) -> bool:
        # caller holds the lock
        if not self._layers:
            e = self.identity()
            self._layers.append([e])
            self._seen[e.key] = 0
            return True
        r = len(self._layers)
        gens = self.generators()
        new: list[GroupElement] = []
        for g in self._layers[-1]:
            for s in gens:
                h = GroupElement(self, self._mul_keys(g.key, s.key))
                if h.key not in self._seen:
                    if len(self._seen) >= budget:
                        raise BudgetExceeded(
                            f"{self.name}: ball of radius {r} exceeds {budget} elements"
                        )
                    self._seen[h.key] = r
                    new.append(h)
        if not new:
            return False
        self._layers.append(new)
        return True

    def bfs_sphere(self, r: int) -> list[GroupElement]:
        """Elements at Cayley-graph distance exactly r, by breadth-first search."""
        if r < 0:
            raise UsageError("radius must be nonnegative")
        budget = element_budget()
        with self._lock:
            while len(self._layers) <= r:
                if not self._grow_layer(budget):
                    return []
            return list(self._layers[r])

    def bfs_word_length(self, g: GroupElement) -> int:
        """Word length found by breadth-first search over Cayley balls."""
        self._check(g)
        bound = len(self.canonical_word(g))
        for r in range(bound + 1):
            self.bfs_sphere(r)
            if g.key in self._seen:
                return self._seen[g.key]
        raise AssertionError(f"{g!r} not found within its canonical-word bound {bound}")

    def word_length(self, g: GroupElement) -> int:
        return self.bfs_word_length(g)

    def sphere(self, r: int) -> list[GroupElement]:
        return self.bfs_sphere(r)

    def sphere_size(self, r: int) -> int:
        return len(self.sphere(r))

    def ball(self, r: int) -> list[GroupElement]:
        out: list[GroupElement] = []
        for i in range(r + 1):
            s = self.sphere(i)
            if not s:
                break
            out.extend(s)
        if len(out) > element_budget():
            raise BudgetExceeded(f"{self.name}: ball({r}) exceeds budget")
        return out

    def max_length(self) -> int | None:
        """Diameter of the Cayley graph for finite groups, None if infinite."""
        if not self.finite:
            return None
        r = 0
        while self.sphere(r + 1):
            r += 1
        return r

    def translate_lengths(self, u: GroupElement, r: int) -> frozenset[int]:
        """The set {|u c| : |c| = r}, i.e. which length classes u * S_r meets."""
        self._check(u)
        cache = self.__dict__.setdefault("_tl_cache", {})
        out = cache.get((u.key, r))
        if out is None:
            out = cache[(u.key, r)] = self._translate_lengths(u, r)
        return out

    def _translate_lengths(self, u: GroupElement, r: int) -> frozenset[int]:
        return frozenset(self.word_length(u * c) for c in self.sphere(r))

    def stable_offsets(self, u: GroupElement) -> frozenset[int] | None:
        """D with translate_lengths(u, r) = {r + d : d in D} for all r > |u|, if known."""
        return None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, Group) and self._signature() == other._signature()

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = self.__dict__["_hash"] = hash(self._signature())
        return h

    def _signature(self) -> Hashable:
        raise NotImplementedError

    def __repr__(self) -> str:
        return self.name


def _reduce(word: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class FreeGroup(Group):
    """F_k; elements are freely reduced words over letters +-1..+-k."""

    def __init__(self, rank: int):
        if rank < 1:
            raise UsageError("free group rank must be >= 1")
        super().__init__()
        self.rank = rank
        self.name = f"F{rank}"

    def _signature(self):
        return ("free", self.rank)

    def identity(self):
        return GroupElement(self, ())

    def _mul_keys(self, a, b):
        i = 0
        while i < min(len(a), len(b)) and a[len(a) - 1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def _inv_key(self, a):
        return tuple(-x for x in reversed(a))

    def generator_letters(self):
        return {s * i: GroupElement(self, (s * i,)) for i in range(1, self.rank + 1) for s in (1, -1)}

    def generators(self):
        return [GroupElement(self, (s * i,)) for i in range(1, self.rank + 1) for s in (1, -1)]

    def canonical_word(self, g):
        return g.key

    def word_length(self, g):
        self._check(g)
        return len(g.key)

    def sphere(self, r):
        letters = [s * i for i in range(1, self.rank + 1) for s in (1, -1)]
        if r == 0:
            return [self.identity()]
        size = 2 * self.rank * (2 * self.rank - 1) ** (r - 1)
        if size > element_budget():
            raise BudgetExceeded(f"{self.name}: sphere({r}) has {size} elements")
        words: list[tuple[int, ...]] = [(x,) for x in letters]
        for _ in range(r - 1):
            words = [w + (x,) for w in words for x in letters if x != -w[-1]]
        return [GroupElement(self, w) for w in words]

    def sphere_size(self, r):
        return 1 if r == 0 else 2 * self.rank * (2 * self.rank - 1) ** (r - 1)

    def stable_offsets(self, u):
        n = self.word_length(u)
        return frozenset(x - n for x in self.translate_lengths(u, n))

    def _translate_lengths(self, u, r):
        # Only the first |u| letters of c can cancel against u, so for
        # r > |u| the lengths are those of u * S_|u| shifted by r - |u|.
        n = len(u.key)
        if r <= n:
            return frozenset(len(self._mul_keys(u.key, c.key)) for c in self.sphere(r))
        base = self.translate_lengths(u, n)
        return frozenset(x + r - n for x in base)

    def format_key(self, key):
        if not key:
            return "e"
        alphabet = "abcdefghijklmnopqrstuvwxyz"
        if self.rank > len(alphabet):
            return ".".join(str(x) for x in key)
        return "".join(alphabet[abs(x) - 1] + ("'" if x < 0 else "") for x in key)

    def parse_key(self, text):
        if text in ("", "e", "1"):
            return ()
        alphabet = "abcdefghijklmnopqrstuvwxyz"
        out = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch not in alphabet[: self.rank]:
                raise UsageError(f"bad letter {ch!r} in {text!r} for {self.name}")
            letter = alphabet.index(ch) + 1
            if i + 1 < len(text) and text[i + 1] in "'-^":
                letter = -letter
                i += 1
            out.append(letter)
            i += 1
        return _reduce(out)


class FreeAbelianGroup(Group):
    """Z^d with the standard generators +-e_i; word length is the L1 norm."""

    def __init__(self, dim: int):
        if dim < 1:
            raise UsageError("free abelian dimension must be >= 1")
        super().__init__()
        self.dim = dim
        self.name = "Z" if dim == 1 else f"Z{dim}"

    def _signature(self):
        return ("free-abelian", self.dim)

    def identity(self):
        return GroupElement(self, (0,) * self.dim)

    def _mul_keys(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _inv_key(self, a):
        return tuple(-x for x in a)

    def _unit(self, i, s):
        v = [0] * self.dim
        v[i] = s
        return GroupElement(self, tuple(v))

    def generators(self):
        return [self._unit(i, s) for i in range(self.dim) for s in (1, -1)]

    def generator_letters(self):
        return {s * (i + 1): self._unit(i, s) for i in range(self.dim) for s in (1, -1)}

    def canonical_word(self, g):
        word: list[int] = []
        for i, x in enumerate(g.key):
            word.extend([(i + 1) if x > 0 else -(i + 1)] * abs(x))
        return tuple(word)

    def word_length(self, g):
        self._check(g)
        return sum(abs(x) for x in g.key)

    def sphere(self, r):
        if self.dim == 1:
            return [self.identity()] if r == 0 else [self.element((r,)), self.element((-r,))]
        return super().sphere(r)

    def _translate_lengths(self, u, r):
        if self.dim == 1:
            a = u.key[0]
            return frozenset({abs(a + r), abs(a - r)})
        return super()._translate_lengths(u, r)

    def stable_offsets(self, u):
        if self.dim != 1:
            return None
        self._check(u)
        a = u.key[0]
        return frozenset({a, -a})

    def format_key(self, key):
        return str(key[0]) if self.dim == 1 else "(" + ",".join(map(str, key)) + ")"

    def parse_key(self, text):
        parts = [p for p in re.split(r"[,\s()]+", text) if p]
        if len(parts) != self.dim:
            raise UsageError(f"expected {self.dim} integers, got {text!r}")
        return tuple(int(p) for p in parts)


class FiniteGroup(Group):
    """Finite group given by a multiplication table over indices 0..n-1."""

    finite = True

    def __init__(self, table: Sequence[Sequence[int]], name: str = "F",
                 generators: Sequence[int] | None = None):
        super().__init__()
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        self.name = name
        self._validate()
        self._identity = next(
            i for i in range(self.order) if all(self.table[i][j] == j for j in range(self.order))
        )
        self._inv = tuple(
            next(j for j in range(self.order) if self.table[i][j] == self._identity)
            for i in range(self.order)
        )
        if generators is None:
            generators = [i for i in range(self.order) if i != self._identity]
        gens = set(generators)
        gens |= {self._inv[i] for i in gens}
        self._gens = tuple(sorted(gens))
        if len(self.ball(self.order)) != self.order:
            raise UsageError(f"{name}: generators do not generate the group")

    @property
    def order(self) -> int:
        return len(self.table)

    def _validate(self):
        n = len(self.table)
        if n == 0 or any(len(row) != n for row in self.table):
            raise UsageError("multiplication table must be square and nonempty")
        full = set(range(n))
        for row in self.table:
            if set(row) != full:
                raise UsageError("multiplication table is not a Latin square")
        for col in range(n):
            if {self.table[r][col] for r in range(n)} != full:
                raise UsageError("multiplication table is not a Latin square")
        t = self.table
        for a, b, c in iproduct(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise UsageError(f"multiplication table is not associative at {(a, b, c)}")

    def _signature(self):
        return ("finite", self.table, self._gens)

    def identity(self):
        return GroupElement(self, self._identity)

    def _mul_keys(self, a, b):
        return self.table[a][b]

    def _inv_key(self, a):
        return self._inv[a]

    def generators(self):
        return [GroupElement(self, i) for i in self._gens]

    def generator_letters(self):
        # letter i+1 is element i; the inverse letter names the inverse element
        out = {}
        for i in self._gens:
            out[i + 1] = GroupElement(self, i)
            out[-(i + 1)] = GroupElement(self, self._inv[i])
        return out

    def canonical_word(self, g):
        # shortlex-least geodesic, found by BFS with sorted generator order
        self._check(g)
        parent: dict[int, tuple[int, int] | None] = {self._identity: None}
        queue = deque([self._identity])
        while queue and g.key not in parent:
            x = queue.popleft()
            for s in self._gens:
                y = self.table[x][s]
                if y not in parent:
                    parent[y] = (x, s)
                    queue.append(y)
        word = []
        k = g.key
        while parent[k] is not None:
            k, s = parent[k]
            word.append(s + 1)
        return tuple(reversed(word))

    def parse_key(self, text):
        k = int(text.lstrip("g"))
        if not 0 <= k < self.order:
            raise UsageError(f"{self.name} has no element {k}")
        return k

    def format_key(self, key):
        return f"g{key}"


def cyclic_group(n: int) -> FiniteGroup:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(table, name=f"C{n}", generators=[1 % n] if n > 1 else [])


class DirectProduct(Group):
    """H x K with generators (s, e) and (e, t)."""

    def __init__(self, left: Group, right: Group):
        super().__init__()
        self.left = left
        self.right = right
        self.finite = left.finite and right.finite
        self.name = f"{left.name}x{right.name}"

    def _signature(self):
        return ("product", self.left._signature(), self.right._signature())

    def identity(self):
        return GroupElement(self, (self.left.identity().key, self.right.identity().key))

    def _mul_keys(self, a, b):
        return (self.left._mul_keys(a[0], b[0]), self.right._mul_keys(a[1], b[1]))

    def _inv_key(self, a):
        return (self.left._inv_key(a[0]), self.right._inv_key(a[1]))

    def pair(self, h: GroupElement, k: GroupElement) -> GroupElement:
        self.left._check(h)
        self.right._check(k)
        return GroupElement(self, (h.key, k.key))

    def split(self, g: GroupElement) -> tuple[GroupElement, GroupElement]:
        self._check(g)
        return GroupElement(self.left, g.key[0]), GroupElement(self.right, g.key[1])

    def generators(self):
        e_l, e_r = self.left.identity(), self.right.identity()
        return [self.pair(s, e_r) for s in self.left.generators()] + [
            self.pair(e_l, t) for t in self.right.generators()
        ]

    def _offset(self) -> int:
        return max((abs(k) for k in self.left.generator_letters()), default=0)

    def generator_letters(self):
        off = self._offset()
        e_l, e_r = self.left.identity(), self.right.identity()
        out = {k: self.pair(v, e_r) for k, v in self.left.generator_letters().items()}
        for k, v in self.right.generator_letters().items():
            out[k + off if k > 0 else k - off] = self.pair(e_l, v)
        return out

    def canonical_word(self, g):
        h, k = self.split(g)
        off = self._offset()
        return h.word + tuple(x + off if x > 0 else x - off for x in k.word)

    def word_length(self, g):
        h, k = self.split(g)
        return self.left.word_length(h) + self.right.word_length(k)

    def format_key(self, key):
        return f"({self.left.format_key(key[0])};{self.right.format_key(key[1])})"

    def parse_key(self, text):
        inner = text.strip()
        if inner.startswith("(") and inner.endswith(")"):
            inner = inner[1:-1]
        if ";" not in inner:
            raise UsageError(f"product elements are written (h;k), got {text!r}")
        a, b = inner.split(";", 1)
        return (self.left.parse_key(a.strip()), self.right.parse_key(b.strip()))


_ATOM = re.compile(r"^(?:Z(\d*)|Z\^(\d+)|F_?(\d+)|C(\d+))$")


def parse_group(text: str) -> Group:
    """Parse a compact group name: ``Z``, ``Z2``/``Z^2``, ``F2``, ``C3``, ``ZxC2``."""
    parts = [p.strip() for p in re.split(r"\s*[x×*]\s*", text.strip()) if p.strip()]
    if not parts:
        raise UsageError("empty group description")
    groups = []
    for p in parts:
        m = _ATOM.match(p)
        if not m:
            raise UsageError(f"unknown group {p!r}")
        z, zpow, f, c = m.groups()
        if f is not None:
            groups.append(FreeGroup(int(f)))
        elif c is not None:
            groups.append(cyclic_group(int(c)))
        else:
            groups.append(FreeAbelianGroup(int(z or zpow or 1)))
    g = groups[0]
    for h in groups[1:]:
        g = DirectProduct(g, h)
    return g


def load_group_config(source: str | Path) -> Group:
    """Load a group from a plain-text config of ``key: value`` lines.

    Keys: ``kind`` (free, free-abelian, finite-table, direct-product, or a
    compact name accepted by :func:`parse_group`), ``rank``/``dimension``,
    ``table`` (CSV path, relative to the config file), ``generators``
    (comma-separated indices), ``left``/``right`` (compact names).
    """
    path = Path(source)
    text = path.read_text() if path.exists() else str(source)
    base = path.parent if path.exists() else Path(".")
    cfg: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line and "=" not in line:
            raise UsageError(f"bad config line {line!r}")
        k, v = re.split(r"\s*[:=]\s*", line, maxsplit=1)
        cfg[k.strip().lower()] = v.strip()
    kind = cfg.get("kind")
    if kind is None:
        raise UsageError("group config needs a 'kind'")
    if kind == "free":
        return FreeGroup(int(cfg.get("rank", 1)))
    if kind == "free-abelian":
        return FreeAbelianGroup(int(cfg.get("dimension", cfg.get("rank", 1))))
    if kind == "finite-table":
        if "table" not in cfg:
            raise UsageError("finite-table groups need a 'table' CSV")
        table_path = base / cfg["table"]
        table_text = table_path.read_text() if table_path.exists() else cfg["table"].replace(";", "\n")
        rows = [[int(x) for x in row if x.strip()] for row in csv.reader(io.StringIO(table_text)) if row]
        gens = [int(x) for x in cfg["generators"].split(",")] if "generators" in cfg else None
        return FiniteGroup(rows, name=cfg.get("name", "F"), generators=gens)
    if kind == "direct-product":
        return DirectProduct(parse_group(cfg["left"]), parse_group(cfg["right"]))
    return parse_group(kind)


def elements_up_to(group: Group, r: int) -> Iterator[GroupElement]:
    for i in range(r + 1):
        yield from group.sphere(i)
