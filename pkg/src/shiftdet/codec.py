"""Configurations on G, class/ring status, the ring encoder and majority decoder.

Two configuration types share one interface:

* :class:`Configuration` is an explicit finite map element -> symbol.
* :class:`RadialConfiguration` is a translate ``t . x0`` of a configuration
  ``x0`` whose value at ``g_k h`` depends only on the coset k and on |h|.
  Encoder output has this form, which lets rings of astronomically many
  classes be handled exactly by sweeping over radius intervals.

Both expose ``class_profile(partition, k, lo, hi)``: a Counter of class
signatures ``(assigned values, partially assigned?)`` over the classes of
radius lo < r <= hi in coset k.
"""

from __future__ import annotations

import bisect
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .amenability import (
    PLAYER_I,
    PLAYER_II,
    PlayerPartition,
    RingLayout,
    appropriate_spread,
)
from .groups import BudgetExceeded, Group, GroupElement, UsageError

ClassInfo = tuple[frozenset, bool]

INVALID_FRACTION = Fraction(1, 10)
M_RING_FRACTION = Fraction(1, 2)


class CodecError(RuntimeError):
    pass


class InsufficientData(CodecError):
    """A ring in the decoding window is not yet declared."""


class PreconditionError(CodecError):
    pass


@dataclass(frozen=True)
class ClassStatus:
    kind: str  # "undeclared" | "m-class" | "invalid"
    m: int | None = None

    @classmethod
    def of(cls, values: frozenset) -> "ClassStatus":
        if not values:
            return cls("undeclared")
        if len(values) == 1:
            return cls("m-class", next(iter(values)))
        return cls("invalid")


@dataclass(frozen=True)
class RingStatus:
    size: int
    undeclared: int
    invalid_count: int
    m_counts: tuple[tuple[int, int], ...]

    @property
    def declared(self) -> bool:
        return self.undeclared == 0

    @property
    def invalid(self) -> bool:
        return self.declared and self.invalid_count >= INVALID_FRACTION * self.size

    @property
    def m_values(self) -> frozenset[int]:
        if not self.declared:
            return frozenset()
        return frozenset(m for m, c in self.m_counts if c >= M_RING_FRACTION * self.size)

    @property
    def kind(self) -> str:
        if not self.declared:
            return "undeclared"
        if self.invalid:
            return "invalid"
        if self.m_values:
            return "m-ring"
        return "declared-neither"

    @classmethod
    def from_profile(cls, profile: Counter) -> "RingStatus":
        size = sum(profile.values())
        undeclared = invalid = 0
        m_counts: Counter = Counter()
        for (values, _partial), count in profile.items():
            st = ClassStatus.of(values)
            if st.kind == "undeclared":
                undeclared += count
            elif st.kind == "invalid":
                invalid += count
            else:
                m_counts[st.m] += count
        return cls(size, undeclared, invalid, tuple(sorted(m_counts.items())))


def _check_symbol(v: int, alphabet: int | None) -> None:
    if not isinstance(v, int) or v < 0 or (alphabet is not None and v >= alphabet):
        raise UsageError(f"symbol {v!r} outside alphabet {alphabet}")


@dataclass(frozen=True)
class Configuration:
    """Finite partial map from group elements to symbols."""

    group: Group
    values: Mapping[GroupElement, int] = field(default_factory=dict)
    alphabet: int | None = None

    def __post_init__(self):
        for g, v in self.values.items():
            self.group._check(g)
            _check_symbol(v, self.alphabet)

    def __getitem__(self, g: GroupElement) -> int | None:
        return self.values.get(g)

    def extend(self, g: GroupElement, v: int) -> "Configuration":
        return Configuration(self.group, {**self.values, g: v}, self.alphabet)

    def shift(self, g: GroupElement) -> "Configuration":
        """(g . x)(h) = x(g^-1 h), so the value at h moves to g h."""
        return Configuration(self.group, {g * h: v for h, v in self.values.items()}, self.alphabet)

    def value_at(self, partition: PlayerPartition, g: GroupElement) -> int | None:
        return self.values.get(g)

    def class_info(self, partition: PlayerPartition, k: int, r: int) -> ClassInfo:
        vals = set()
        partial = False
        for h in partition.subgroup.sphere(r):
            v = self.values.get(partition.compose(k, h))
            if v is None:
                partial = True
            else:
                vals.add(v)
        return frozenset(vals), partial

    def class_profile(self, partition: PlayerPartition, k: int, lo: int, hi: int) -> Counter:
        return Counter(self.class_info(partition, k, r) for r in range(lo + 1, hi + 1))

    def to_json(self) -> str:
        return json.dumps({
            "group": self.group.name,
            "alphabet": self.alphabet,
            "values": {self.group.format_key(g.key): v for g, v in sorted(
                self.values.items(), key=lambda kv: (len(kv[0].word), kv[0].word))},
        }, indent=1)

    @classmethod
    def from_json(cls, text: str, group: Group) -> "Configuration":
        doc = json.loads(text)
        if doc["group"] != group.name:
            raise UsageError(f"configuration is over {doc['group']}, not {group.name}")
        return cls(group, {group.parse(k): int(v) for k, v in doc["values"].items()}, doc.get("alphabet"))


Segment = tuple[int, int, int]  # inclusive radius range and its symbol


@dataclass(frozen=True)
class RadialConfiguration:
    """``translation . x0`` where x0(g_k h) = profile_k(|h|).

    Each profile is a sorted tuple of disjoint inclusive radius segments;
    radii outside every segment are unassigned.
    """

    group: Group
    profiles: tuple[tuple[Segment, ...], ...]
    translation: GroupElement
    alphabet: int | None = None

    def __post_init__(self):
        self.group._check(self.translation)
        for prof in self.profiles:
            prev = -1
            for lo, hi, v in prof:
                if lo <= prev or hi < lo:
                    raise UsageError("profile segments must be sorted, disjoint and nonempty")
                _check_symbol(v, self.alphabet)
                prev = hi

    def shift(self, g: GroupElement) -> "RadialConfiguration":
        return RadialConfiguration(self.group, self.profiles, g * self.translation, self.alphabet)

    def _profile_value(self, k: int, length: int) -> int | None:
        prof = self.profiles[k]
        i = bisect.bisect_right(prof, (length, math.inf, math.inf)) - 1
        if i >= 0 and prof[i][0] <= length <= prof[i][1]:
            return prof[i][2]
        return None

    def _base(self, partition: PlayerPartition, k: int) -> tuple[int, GroupElement]:
        # t^-1 g_k = g_k' u  with u in H
        return partition.decompose(self.translation.inverse() * partition.coset_reps[k])

    def value_at(self, partition: PlayerPartition, g: GroupElement) -> int | None:
        k, h = partition.decompose(self.translation.inverse() * g)
        return self._profile_value(k, partition.subgroup.word_length(h))

    def class_info(self, partition: PlayerPartition, k: int, r: int) -> ClassInfo:
        kk, u = self._base(partition, k)
        vals = [self._profile_value(kk, ell) for ell in partition.subgroup.translate_lengths(u, r)]
        return frozenset(v for v in vals if v is not None), None in vals

    def class_profile(self, partition: PlayerPartition, k: int, lo: int, hi: int) -> Counter:
        H = partition.subgroup
        kk, u = self._base(partition, k)
        offsets = H.stable_offsets(u)
        out: Counter = Counter()
        if offsets is None:
            if hi - lo > 10**5:
                raise BudgetExceeded(f"{H.name}: ring of {hi - lo} classes needs a closed-form group")
            for r in range(lo + 1, hi + 1):
                out[self.class_info(partition, k, r)] += 1
            return out
        ulen = H.word_length(u)
        for r in range(lo + 1, min(hi, ulen) + 1):
            out[self.class_info(partition, k, r)] += 1
        start = max(lo, ulen) + 1
        if start > hi:
            return out
        # the signature only changes where some r + d crosses a segment boundary
        cuts = {start}
        for seg_lo, seg_hi, _ in self.profiles[kk]:
            for b in (seg_lo, seg_hi + 1):
                for d in offsets:
                    if start < b - d <= hi:
                        cuts.add(b - d)
        points = sorted(cuts) + [hi + 1]
        for a, b in zip(points, points[1:]):
            vals = [self._profile_value(kk, a + d) for d in offsets]
            out[(frozenset(v for v in vals if v is not None), None in vals)] += b - a
        return out

    def covered_radius(self) -> int:
        return max((prof[-1][1] for prof in self.profiles if prof), default=-1)

    def materialize(self, partition: PlayerPartition) -> Configuration:
        """Explicit configuration on the translated domain (small radii only)."""
        H = partition.subgroup
        values = {}
        for k, prof in enumerate(self.profiles):
            for lo, hi, v in prof:
                for r in range(lo, hi + 1):
                    for h in H.sphere(r):
                        values[self.translation * partition.compose(k, h)] = v
        return Configuration(self.group, values, self.alphabet)

    def to_json(self) -> str:
        return json.dumps({
            "group": self.group.name,
            "alphabet": self.alphabet,
            "translation": self.group.format_key(self.translation.key),
            "profiles": [[list(s) for s in prof] for prof in self.profiles],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str, group: Group) -> "RadialConfiguration":
        doc = json.loads(text)
        if doc["group"] != group.name:
            raise UsageError(f"configuration is over {doc['group']}, not {group.name}")
        profiles = tuple(tuple(tuple(int(x) for x in s) for s in prof) for prof in doc["profiles"])
        return cls(group, profiles, group.parse(doc["translation"]), doc.get("alphabet"))


AnyConfiguration = Configuration | RadialConfiguration


def shift(x: AnyConfiguration, g: GroupElement) -> AnyConfiguration:
    return x.shift(g)


def class_status(x: AnyConfiguration, partition: PlayerPartition, k: int, r: int) -> ClassStatus:
    return ClassStatus.of(x.class_info(partition, k, r)[0])


def ring_status(x: AnyConfiguration, layout: RingLayout, partition: PlayerPartition,
                player: str, n: int, j: int, k: int = 0) -> RingStatus:
    lo, hi = layout.ring_radii(player, n, j)
    return RingStatus.from_profile(x.class_profile(partition, k, lo, hi))


def _player_of_move(i: int) -> tuple[str, int]:
    return (PLAYER_I, i // 2) if i % 2 == 0 else (PLAYER_II, i // 2)


def encode_moves(moves: Sequence[int], J: int, layout: RingLayout, partition: PlayerPartition,
                 alphabet: int | None = None) -> RadialConfiguration:
    """Fully compliant encoding: move i fills every class of rings (i's player, i // 2, j), j <= J.

    Everything else inside the covered ball (including the core A'_0) is 0.
    """
    if J < 0:
        raise UsageError("J must be >= 0")
    if partition.layers is not layout.layers and partition.layers.group != layout.group:
        raise UsageError("partition and layout use different subgroups")
    segments = []
    for i, m in enumerate(moves):
        player, n = _player_of_move(i)
        for j in range(J + 1):
            try:
                lo, hi = layout.ring_radii(player, n, j)
            except (UsageError, BudgetExceeded) as exc:
                raise CodecError(f"layout exhausted at ring ({player}, {n}, {j}): {exc}") from exc
            segments.append((lo + 1, hi, m))
    segments.sort()
    top = max((s[1] for s in segments), default=layout.layers.k(0))
    prof: list[Segment] = []
    cursor = 0
    for lo, hi, m in segments:
        if lo < cursor:
            raise CodecError("rings overlap; pairing is not injective")
        if lo > cursor:
            prof.append((cursor, lo - 1, 0))
        prof.append((lo, hi, m))
        cursor = hi + 1
    if cursor <= top:
        prof.append((cursor, top, 0))
    merged: list[Segment] = []
    for seg in prof:
        if merged and merged[-1][2] == seg[2] and merged[-1][1] + 1 == seg[0]:
            merged[-1] = (merged[-1][0], seg[1], seg[2])
        else:
            merged.append(seg)
    profiles = tuple(tuple(merged) for _ in partition.coset_reps)
    return RadialConfiguration(partition.group, profiles, partition.group.identity(), alphabet)


def default_window(J: int) -> tuple[int, int]:
    return (J + 1) // 2, J


def decode(x: AnyConfiguration, layout: RingLayout, partition: PlayerPartition, n: int,
           player: str, window: tuple[int, int]) -> int | None:
    """Finite decoder: m if every ring (player, n, j), j in window, is an m-ring in every coset.

    Returns None for conflicting evidence; raises InsufficientData when a
    ring in the window is not declared.
    """
    j_lo, j_hi = window
    if j_lo > j_hi or j_lo < 0:
        raise UsageError(f"empty window {window}")
    common: frozenset | None = None
    for k in range(len(partition.coset_reps)):
        for j in range(j_lo, j_hi + 1):
            st = ring_status(x, layout, partition, player, n, j, k)
            if not st.declared:
                raise InsufficientData(f"ring ({player}, {n}, {j}) in coset {k} is not declared")
            common = st.m_values if common is None else common & st.m_values
    if common is not None and len(common) == 1:
        return next(iter(common))
    return None


def decode_moves(x: AnyConfiguration, layout: RingLayout, partition: PlayerPartition,
                 count: int, window: tuple[int, int]) -> list[int | None]:
    out = []
    for i in range(count):
        player, n = _player_of_move(i)
        out.append(decode(x, layout, partition, n, player, window))
    return out


# --- invariance bound ---------------------------------------------------------


def global_spread(H: Group, u: GroupElement, up_to: int) -> int:
    """Spread of u over all classes; exact when the group has stable offsets."""
    offsets = H.stable_offsets(u)
    if offsets is None:
        return appropriate_spread(H, u, up_to)
    ulen = H.word_length(u)
    return max(len(offsets), appropriate_spread(H, u, ulen))


def _outward_count(H: Group, u: GroupElement, lo: int, hi: int) -> int:
    """|{r in (lo, hi] : u S_r leaves the ball of radius hi}|."""
    offsets = H.stable_offsets(u)
    ulen = H.word_length(u)
    if offsets is None:
        return sum(1 for r in range(lo + 1, hi + 1) if max(H.translate_lengths(u, r)) > hi)
    count = sum(1 for r in range(lo + 1, min(hi, ulen) + 1) if max(H.translate_lengths(u, r)) > hi)
    first = max(lo, ulen, hi - max(offsets))
    return count + max(0, hi - first)


@dataclass(frozen=True)
class InvarianceReport:
    coset: int
    t_size: int
    bound: int
    inner_term: int
    outer_term: int
    corrupt_term: int
    ring_size: int

    @property
    def passed(self) -> bool:
        return self.t_size <= self.bound


def _not_fully(profile: Counter, m: int) -> int:
    return sum(c for (vals, partial), c in profile.items() if partial or vals != frozenset({m}))


def invariance_bound_check(x: AnyConfiguration, layout: RingLayout, partition: PlayerPartition,
                           g: GroupElement, n: int, j: int, player: str = PLAYER_I,
                           m: int | None = None) -> list[InvarianceReport]:
    """Count T_j for g . x on ring B = B^player_{n,j} and compare with the three-part bound.

    For each coset k write g^-1 g_k = g_l h'.  Then
    |T_j| <= spread(h') |A'_{c-1}| + |{C in B : h'C not inside A'_c}| + spread(h'^-1) |T'_j|.
    """
    H = partition.subgroup
    lo, hi = layout.ring_radii(player, n, j)
    if m is None:
        st = ring_status(x, layout, partition, player, n, j, 0)
        if len(st.m_values) != 1:
            raise PreconditionError(f"ring ({player}, {n}, {j}) does not encode a single move")
        m = next(iter(st.m_values))
    for k in range(len(partition.coset_reps)):
        if m not in ring_status(x, layout, partition, player, n, j, k).m_values:
            raise PreconditionError(f"ring ({player}, {n}, {j}) is not an {m}-ring in coset {k}")
    inner = layout.inner_size(player, n, j)
    gx = x.shift(g)
    reports = []
    for k, gk in enumerate(partition.coset_reps):
        ell, h_prime = partition.decompose(g.inverse() * gk)
        t_size = _not_fully(gx.class_profile(partition, k, lo, hi), m)
        t_prime = _not_fully(x.class_profile(partition, ell, lo, hi), m)
        inner_term = global_spread(H, h_prime, hi) * inner
        outer_term = _outward_count(H, h_prime, lo, hi)
        corrupt_term = global_spread(H, h_prime.inverse(), hi) * t_prime
        reports.append(InvarianceReport(k, t_size, inner_term + outer_term + corrupt_term,
                                        inner_term, outer_term, corrupt_term, hi - lo))
    return reports


# --- randomized suites ----------------------------------------------------------


def random_moves(rng: random.Random, max_len: int = 6, alphabet: int = 3) -> tuple[int, ...]:
    return tuple(rng.randrange(alphabet) for _ in range(rng.randint(0, max_len)))


def roundtrip_case(moves: Sequence[int], J: int, layout: RingLayout,
                   partition: PlayerPartition, window: tuple[int, int] | None = None) -> bool:
    x = encode_moves(moves, J, layout, partition)
    got = decode_moves(x, layout, partition, len(moves), window or (0, J))
    return got == list(moves)


def shifted_decode_agrees(moves: Sequence[int], J: int, layout: RingLayout,
                          partition: PlayerPartition, g: GroupElement) -> bool:
    """Decode over [j0, J] after shifting by g, j0 the least j whose ring index exceeds |g| + 1."""
    x = encode_moves(moves, J, layout, partition)
    y = x.shift(g)
    glen = partition.group.word_length(g)
    for i in range(len(moves)):
        player, n = _player_of_move(i)
        j0 = next((j for j in range(J + 1) if layout.ring_index(player, n, j) > glen + 1), None)
        if j0 is None:
            continue
        if decode(y, layout, partition, n, player, (j0, J)) != decode(x, layout, partition, n, player, (j0, J)):
            return False
    return True


def replay(x: Configuration, order: Iterable[GroupElement] | None = None) -> Iterable[Configuration]:
    """Yield the configurations obtained by adding x's assignments one at a time."""
    cur = Configuration(x.group, {}, x.alphabet)
    yield cur
    for g in order if order is not None else list(x.values):
        cur = cur.extend(g, x.values[g])
        yield cur

