"""Coding game moves into points of a binary shift of finite type.

Positions of Z are cut into blocks ``A_i = [b_{i-1}, b_i)`` and their mirrors
``A_{-i} = -A_i - 1``. A move is written into a block by tracing a double
loop of the de Bruijn graph: the loop followed most often is the move.

Windows are finite pieces of a point, stored as runs ``(word, repeats)`` from
an origin, so blocks of 4^48 symbols cost a handful of runs.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .amenability import PLAYER_I, PLAYER_II, DyadicPairing
from .sft_graph import (
    DeBruijnGraph,
    DoubleLoop,
    Vertex,
    classify_good,
    double_loops,
    epsilon_max,
    find_double_loop,
)

log = logging.getLogger(__name__)

STRICT_STAGES = 6
TEXT_LIMIT = 10**6


class SFTError(RuntimeError):
    pass


class ScheduleError(SFTError):
    pass


class CapacityError(SFTError):
    def __init__(self, msg: str, required: int | None = None):
        super().__init__(msg)
        self.required = required


class WitnessConflict(SFTError):
    """Both loop indices qualified in one ring."""


# --- block schedule -------------------------------------------------------------


@dataclass(frozen=True)
class BlockSchedule:
    N: int
    b: tuple[int, ...]
    growth: str = "desk"
    K: int | None = None

    @property
    def stages(self) -> int:
        return len(self.b) - 1

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.stages:
            raise ScheduleError(f"block {i} is beyond the materialized schedule (1..{self.stages})")

    def block(self, i: int) -> tuple[int, int]:
        """A_i as a half-open interval; negative i gives the mirror -A_|i| - 1."""
        if i == 0:
            raise ScheduleError("there is no block A_0")
        k = abs(i)
        self._check(k)
        lo, hi = self.b[k - 1], self.b[k]
        return (lo, hi) if i > 0 else (-hi, -lo)

    def block_of(self, pos: int) -> int:
        if pos >= 0:
            i = bisect.bisect_right(self.b, pos)
        else:
            i = -bisect.bisect_right(self.b, -pos - 1)
        self._check(abs(i))
        return i

    def primed(self, i: int, all_good_right: bool) -> tuple[int, int]:
        """A'_i: A_i when every word is good to the right, else A_{-i-1}."""
        if i < 1:
            raise ScheduleError("primed blocks are indexed by i >= 1")
        return self.block(i) if all_good_right else self.block(-i - 1)

    def ratio(self, i: int) -> Fraction:
        self._check(i)
        return Fraction(sum(self.b[:i]), self.b[i])

    def ring_index(self, player: str, n: int, j: int) -> int:
        # player I owns the odd blocks, player II the even ones
        c = DyadicPairing().c(n, j)
        if player == PLAYER_I:
            return c - 1
        if player == PLAYER_II:
            return c
        raise ScheduleError(f"unknown player {player!r}")

    def ring(self, player: str, n: int, j: int, all_good_right: bool = True) -> tuple[int, int]:
        return self.primed(self.ring_index(player, n, j), all_good_right)

    def to_json(self) -> dict:
        return {"N": self.N, "growth": self.growth, "K": self.K, "b": [str(v) for v in self.b]}


def block_schedule(N: int, growth: str = "desk", K: int = 4, stages: int = 64) -> BlockSchedule:
    """desk: gaps N*K^i (bounded ratio only). strict: b_i = N*2^(i^2), i <= 6."""
    if N < 1:
        raise ScheduleError("N must be positive")
    if stages < 1:
        raise ScheduleError("need at least one block")
    if growth == "desk":
        if K < 4:
            raise ScheduleError("desk growth needs K >= 4")
        b = [0]
        for i in range(1, stages + 1):
            b.append(b[-1] + N * K**i)
        return BlockSchedule(N, tuple(b), "desk", K)
    if growth == "strict":
        if stages > STRICT_STAGES:
            raise ScheduleError(f"strict growth overflows past i={STRICT_STAGES} (b_7 = N*2^49)")
        return BlockSchedule(N, tuple([0] + [N * 2 ** (i * i) for i in range(1, stages + 1)]), "strict", None)
    raise ScheduleError(f"unknown growth {growth!r}")


# --- windows ---------------------------------------------------------------------


Run = tuple[str, int]


def _merge_runs(runs: Iterable[Run]) -> tuple[Run, ...]:
    out: list[Run] = []
    for w, c in runs:
        if not w or c <= 0:
            continue
        if out and out[-1][0] == w:
            out[-1] = (w, out[-1][1] + c)
        else:
            out.append((w, c))
    return tuple(out)


@dataclass(frozen=True)
class Window:
    """y restricted to [origin, origin + length), as runs of repeated words."""

    origin: int
    runs: tuple[Run, ...]
    _starts: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        runs = _merge_runs(self.runs)
        if any(set(w) - {"0", "1"} for w, _ in runs):
            raise ValueError("windows are binary")
        object.__setattr__(self, "runs", runs)
        starts, pos = [], self.origin
        for w, c in runs:
            starts.append(pos)
            pos += len(w) * c
        object.__setattr__(self, "_starts", tuple(starts + [pos]))

    @classmethod
    def from_string(cls, word: str, origin: int = 0) -> "Window":
        return cls(origin, ((word, 1),))

    @property
    def end(self) -> int:
        return self._starts[-1]

    @property
    def size(self) -> int:
        return self.end - self.origin

    def shift(self, m: int) -> "Window":
        """m . y, i.e. (m . y)(k) = y(k - m)."""
        return Window(self.origin + m, self.runs)

    def _locate(self, pos: int) -> int:
        return bisect.bisect_right(self._starts, pos) - 1

    def pieces(self, lo: int, hi: int) -> Iterator[Run]:
        """Runs covering [lo, hi) clipped to the window, partial copies as literals."""
        lo, hi = max(lo, self.origin), min(hi, self.end)
        if lo >= hi:
            return
        k = self._locate(lo)
        while k < len(self.runs) and self._starts[k] < hi:
            w, c = self.runs[k]
            start = self._starts[k]
            a, b = max(lo, start) - start, min(hi, self._starts[k + 1]) - start
            L = len(w)
            first, last = -(-a // L), b // L  # whole copies [first, last)
            if first > last:
                yield (w[a % L: a % L + (b - a)], 1)
            else:
                if a % L:
                    yield (w[a % L:], 1)
                if last > first:
                    yield (w, last - first)
                if b % L:
                    yield (w[: b % L], 1)
            k += 1

    def text(self, lo: int | None = None, hi: int | None = None) -> str:
        lo = self.origin if lo is None else lo
        hi = self.end if hi is None else hi
        if hi - lo > TEXT_LIMIT:
            raise SFTError(f"refusing to materialize {hi - lo} symbols")
        return "".join(w * c for w, c in self.pieces(lo, hi))

    def ngrams(self, N: int) -> set[str]:
        """Distinct length-N subwords; long runs are cut to a few periods first."""
        short = "".join(w * min(c, N // len(w) + 2) for w, c in self.runs)
        return {short[i:i + N] for i in range(len(short) - N + 1)}

    def occurrences(self, word: str, lo: int, hi: int) -> list[int]:
        """Start positions in [lo, hi] of ``word``, keeping only the first period of each run."""
        N = len(word)
        lo, hi = max(lo, self.origin), min(hi, self.end - N)
        out = set()
        if lo > hi:
            return []
        k = self._locate(lo)
        while k < len(self.runs) and self._starts[k] <= hi:
            w, _ = self.runs[k]
            a, b = max(lo, self._starts[k]), min(hi, self._starts[k + 1] - 1)
            cand = set(range(a, min(b, a + len(w) + N) + 1)) | set(range(max(a, b - N), b + 1))
            out |= {x for x in cand if self.text(x, x + N) == word}
            k += 1
        return sorted(out)

    def to_json(self) -> str:
        if self.size <= 4096:
            return json.dumps({"origin": self.origin, "word": self.text()})
        return json.dumps({"origin": self.origin, "runs": [[w, str(c)] for w, c in self.runs]})

    @classmethod
    def from_json(cls, text: str) -> "Window":
        doc = json.loads(text)
        if "word" in doc:
            return cls.from_string(doc["word"], int(doc["origin"]))
        return cls(int(doc["origin"]), tuple((w, int(c)) for w, c in doc["runs"]))


def legal_window(y: Window, G: DeBruijnGraph) -> bool:
    if y.size < G.N:
        return G.is_legal(y.text())
    return all(v in G.succ for v in y.ngrams(G.N))


def window_goodness(y: Window, G: DeBruijnGraph) -> tuple[bool, bool]:
    """(every subword good right, every subword good left)."""
    good = classify_good(G)
    words = y.ngrams(G.N)
    if not all(w in good for w in words):
        return False, False
    return all(good[w].right for w in words), all(good[w].left for w in words)


# --- pi' and pi ----------------------------------------------------------------------


def dictionary(N: int):
    """The onto map k -> u_k: k mod 2^N written in N binary digits."""
    return lambda k: format(k % 2**N, f"0{N}b")


def _chunks(x: Sequence[int], schedule: BlockSchedule, u) -> Iterator[tuple[int, str, str]]:
    """Per step n: (n, word placed right at [nN,(n+1)N), word placed left at [-(n+1)N,-nN))."""
    N = schedule.N
    for n in range(len(x) // 2):
        i = schedule.block_of(n * N)
        a, b = u(x[2 * n]), u(x[2 * n + 1])
        yield (n, a, b) if i % 2 else (n, b, a)


def _assemble(right: list[str], left: list[str]) -> Window:
    N = len(right[0]) if right else (len(left[0]) if left else 0)
    return Window(-len(left) * N, (("".join(reversed(left)) + "".join(right), 1),))


def pi_prime(x: Sequence[int], schedule: BlockSchedule, u=None) -> Window:
    if len(x) % 2:
        raise SFTError("pi' reads pairs of digits")
    u = u or dictionary(schedule.N)
    right, left = [], []
    for _, r, l in _chunks(x, schedule, u):
        right.append(r)
        left.append(l)
    return _assemble(right, left)


@dataclass(frozen=True)
class PiResult:
    window: Window
    branch: str  # "all-good", "first-bad", "redirect-I" or "redirect-II"
    n0: int | None = None


def pi(x: Sequence[int], G: DeBruijnGraph, schedule: BlockSchedule, u=None) -> PiResult:
    """pi' with control handed to the other player once a word is not good both ways.

    From step n0 on, the offending player's words (including the offending one)
    are dropped and the other player's words alternate right and left, starting
    on the side that player's word had at step n0.
    """
    if len(x) % 2:
        raise SFTError("pi reads pairs of digits")
    u = u or dictionary(schedule.N)
    good = classify_good(G)

    def both(k):
        g = good.get(u(k))
        return g is not None and g.both

    def bad_both(k):
        g = good.get(u(k))
        return g is None or g.neither

    if not x or bad_both(x[0]):
        branch = "first-bad" if x else "all-good"
        log.debug("pi: %s, pi = pi'", branch)
        return PiResult(pi_prime(x, schedule, u), branch)
    n0 = next((n for n in range(len(x) // 2) if not (both(x[2 * n]) and both(x[2 * n + 1]))), None)
    if n0 is None:
        log.debug("pi: all words good both ways")
        return PiResult(pi_prime(x, schedule, u), "all-good")
    right, left = [], []
    steps = list(_chunks(x, schedule, u))
    for n, r, l in steps[:n0]:
        right.append(r)
        left.append(l)
    offender = PLAYER_I if not both(x[2 * n0]) else PLAYER_II
    keep = [x[2 * n + 1] for n in range(n0, len(x) // 2)] if offender == PLAYER_I else \
        [x[2 * n] for n in range(n0, len(x) // 2)]
    own_right = (schedule.block_of(n0 * schedule.N) % 2 == 1) == (offender == PLAYER_II)
    for t, k in enumerate(keep):
        (right if (t % 2 == 0) == own_right else left).append(u(k))
    log.debug("pi: redirect at n0=%d, %s's later words ignored", n0, offender)
    return PiResult(_assemble(right, left), f"redirect-{offender}", n0)


def legal(x: Sequence[int], G: DeBruijnGraph, schedule: BlockSchedule, u=None) -> bool:
    """Membership in the rule tree: the played window pi(x) has no forbidden word."""
    if len(x) % 2:
        x = list(x) + [0]
        return any(legal(list(x[:-1]) + [k], G, schedule, u) for k in range(2**schedule.N))
    return legal_window(pi(x, G, schedule, u).window, G)


def legal_moves(x: Sequence[int], G: DeBruijnGraph, schedule: BlockSchedule, u=None) -> list[int]:
    """Digits k < 2^N that keep x legal (one-step extension search)."""
    out = []
    for k in range(2**schedule.N):
        y = list(x) + [k]
        if len(y) % 2 == 0:
            ok = legal(y, G, schedule, u)
        else:
            ok = any(legal(y + [m], G, schedule, u) for m in range(2**schedule.N))
        if ok:
            out.append(k)
    return out


# --- tracing ------------------------------------------------------------------------


def codewords(dl: DoubleLoop, v0: Vertex) -> tuple[str, str]:
    """Symbols appended while following C'_0 and C'_1 once from v0 back to v0."""
    out = []
    for i in (0, 1):
        c = dl.circuit(i, v0)
        out.append("".join(v[-1] for v in c[1:] + [v0]))
    return out[0], out[1]


PatternRun = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class TracePattern:
    loop: DoubleLoop
    start: Vertex
    a: int
    b: int
    runs: tuple[PatternRun, ...]

    def count(self, i: int) -> int:
        return sum(p.count(i) * c for p, c in self.runs)

    def __len__(self) -> int:
        return sum(len(p) * c for p, c in self.runs)

    @property
    def word(self) -> str:
        if len(self) > TEXT_LIMIT:
            raise SFTError("pattern too long to spell out")
        return "".join("".join(map(str, p)) * c for p, c in self.runs)

    @property
    def majority(self) -> int | None:
        n0, n1 = self.count(0), self.count(1)
        return None if n0 == n1 else int(n1 > n0)


def _step_word(buf: str, w: str, codes: tuple[str, str]) -> tuple[str, tuple[int, ...], bool]:
    bits = []
    for ch in w:
        buf += ch
        if buf == codes[0]:
            bits.append(0)
            buf = ""
        elif buf == codes[1]:
            bits.append(1)
            buf = ""
        elif not (codes[0].startswith(buf) or codes[1].startswith(buf)):
            return buf, tuple(bits), True
    return buf, tuple(bits), False


def _parse(y: Window, lo: int, hi: int, codes: tuple[str, str]) -> tuple[list[PatternRun], str, bool]:
    """Greedy codeword parse of y[lo, hi). Returns (pattern runs, pending buffer, failed)."""
    out: list[PatternRun] = []

    def emit(p, c=1):
        if not p or c == 0:
            return
        if out and out[-1][0] == p:
            out[-1] = (p, out[-1][1] + c)
        else:
            out.append((p, c))

    buf = ""
    covered = lo
    for w, c in y.pieces(lo, hi):
        covered += len(w) * c
        seen = {buf: 0}
        history: list[tuple[int, ...]] = []
        k = 0
        while k < c:
            buf, bits, failed = _step_word(buf, w, codes)
            emit(bits)
            if failed:
                return out, buf, True
            history.append(bits)
            k += 1
            if buf in seen:
                period = k - seen[buf]
                reps = (c - k) // period
                if reps:
                    cyc = tuple(b for h in history[seen[buf]:] for b in h)
                    emit(cyc, reps)
                    k += reps * period
                seen = {}
            else:
                seen[buf] = k
    if covered < hi:  # window ends before hi
        return out, buf, True
    return out, buf, False


def trace_pattern(y: Window, dl: DoubleLoop, a: int, b: int, N: int) -> TracePattern | None:
    """Pattern s when y[a, b) follows C'_{s(0)} .. C'_{s(-1)} from a vertex of C0 and C1."""
    if b - a < N or a < y.origin or b > y.end:
        return None
    v0 = y.text(a, a + N)
    if v0 not in set(dl.C0) & set(dl.C1):
        return None
    runs, buf, failed = _parse(y, a + N, b, codewords(dl, v0))
    if failed or buf:
        return None
    return TracePattern(dl, v0, a, b, tuple(runs))


# --- the rule ------------------------------------------------------------------------


def _k_range(alpha: int, beta: int, lo: int, hi: int) -> tuple[int, int]:
    """Integers k in [lo, hi] with alpha + beta*k >= 0."""
    if beta == 0:
        return (lo, hi) if alpha >= 0 else (1, 0)
    if beta > 0:
        return max(lo, -(alpha // beta)), hi
    return lo, min(hi, alpha // -beta)


def _thresholds(eps: Fraction) -> tuple[int, int]:
    eps = Fraction(eps)
    return eps.denominator, eps.denominator - eps.numerator  # q and q(1 - eps)


def qualifies(counts: tuple[int, int], length: int, size: int, eps: Fraction) -> set[int]:
    """Witnesses i for a trace with the given loop counts over ``length`` of a ring of ``size``."""
    q, keep = _thresholds(eps)
    n = counts[0] + counts[1]
    if n == 0 or q * length <= keep * size:
        return set()
    return {i for i in (0, 1)
            if 3 * q * counts[i] >= 2 * keep * n and 10 * q * counts[1 - i] >= keep * n}


def _prefix_witnesses(runs: Sequence[PatternRun], lens: tuple[int, int], N: int,
                      size: int, eps: Fraction) -> set[int]:
    """Witnesses over every prefix of the pattern (each prefix is a candidate interval).

    Inside a run of k copies every constraint is linear in k, so each run is
    settled by intersecting integer ranges instead of walking its copies.
    """
    q, keep = _thresholds(eps)
    found: set[int] = set()
    base = [0, 0, 0]  # n0, n1, symbols
    for piece, c in runs:
        d = (piece.count(0), piece.count(1), sum(lens[t] for t in piece))
        pre = [0, 0, 0]
        for r in range(len(piece)):
            if r:
                t = piece[r - 1]
                pre[t] += 1
                pre[2] += lens[t]
            n0, n1, S = base[0] + pre[0], base[1] + pre[1], base[2] + pre[2]
            for i in (0, 1):
                if i in found:
                    continue
                ni, nj = (n0, n1) if i == 0 else (n1, n0)
                di, dj = (d[0], d[1]) if i == 0 else (d[1], d[0])
                lo, hi = (1, c) if r == 0 else (0, c - 1)
                for alpha, beta in (
                    (q * (N + S) - keep * size - 1, q * d[2]),  # strict length bound
                    (3 * q * ni - 2 * keep * (ni + nj), 3 * q * di - 2 * keep * (di + dj)),
                    (10 * q * nj - keep * (ni + nj), 10 * q * dj - keep * (di + dj)),
                    (ni + nj - 1, di + dj),
                ):
                    lo, hi = _k_range(alpha, beta, lo, hi)
                    if lo > hi:
                        break
                else:
                    found.add(i)
        for t in range(3):
            base[t] += c * d[t]
    return found


_LOOPS: dict = {}


def _loops_with_starts(G: DeBruijnGraph) -> tuple[tuple[DoubleLoop, Vertex], ...]:
    key = (G.vertices, tuple(G.edges()))
    if key not in _LOOPS:
        _LOOPS[key] = tuple((dl, v) for dl in double_loops(G) for v in sorted(set(dl.C0) & set(dl.C1)))
    return _LOOPS[key]


def ring_witnesses(y: Window, G: DeBruijnGraph, lo: int, hi: int, eps: Fraction) -> set[int]:
    """All i such that some double loop is traced over [a, b) within [lo, hi) meeting the rule."""
    size = hi - lo
    N = G.N
    eps = Fraction(eps)
    # b <= hi and b - a > (1 - eps) size force a < hi - (1 - eps) size
    q, keep = _thresholds(eps)
    a_max = hi - (keep * size) // q - 1
    found: set[int] = set()
    for dl, v0 in _loops_with_starts(G):
        codes = codewords(dl, v0)
        lens = (len(codes[0]), len(codes[1]))
        for a in y.occurrences(v0, lo, min(a_max, hi - N)):
            runs, _, _ = _parse(y, a + N, hi, codes)
            found |= _prefix_witnesses(runs, lens, N, size, eps)
    return found


def rule_check(y: Window, G: DeBruijnGraph, schedule: BlockSchedule, n: int, player: str,
               eps: Fraction, j_range: tuple[int, int]) -> int | None:
    """The witness i if every ring (player, n, j), j in j_range, yields i and only i."""
    eps = Fraction(eps)
    if eps > epsilon_max(len(G)):
        raise SFTError(f"eps={eps} exceeds epsilon_max={epsilon_max(len(G))}")
    right, left = window_goodness(y, G)
    if not right:
        log.debug("rule: not every subword is good to the right, using A_{-i-1} (left good: %s)", left)
    common = None
    for j in range(j_range[0], j_range[1] + 1):
        lo, hi = schedule.ring(player, n, j, right)
        ws = ring_witnesses(y, G, lo, hi, eps)
        if len(ws) > 1:
            raise WitnessConflict(f"ring ({player}, {n}, {j}) has witnesses {sorted(ws)} at eps={eps}")
        if not ws:
            return None
        common = ws if common is None else common & ws
        if not common:
            return None
    return next(iter(common)) if common else None


# --- encoder / decoder ------------------------------------------------------------------


def _player_of_move(i: int) -> tuple[str, int]:
    return (PLAYER_I if i % 2 == 0 else PLAYER_II), i // 2


def default_window(J: int) -> tuple[int, int]:
    return (J + 1) // 2, J


def default_eps(G: DeBruijnGraph) -> Fraction:
    return epsilon_max(len(G)) / 2


def _approach(G: DeBruijnGraph, cur: Vertex, v0: Vertex) -> list:
    """Shortest walk from cur to v0 of at least N steps, so v0 lands inside the new block."""
    N = G.N
    start = (cur, 0)
    prev = {start: None}
    todo = [start]
    while todo:
        nxt = []
        for state in todo:
            v, s = state
            if v == v0 and s >= N:
                path = []
                while state is not None:
                    path.append(state[0])
                    state = prev[state]
                return path[::-1]
            for w in G.successors(v):
                t = (w, min(s + 1, N))
                if t not in prev:
                    prev[t] = state
                    nxt.append(t)
        todo = nxt
    raise SFTError(f"{v0} is not reachable from {cur}")


def _suffix(runs: Sequence[Run], k: int) -> str:
    out = ""
    for w, c in reversed(runs):
        if len(out) >= k:
            break
        out = w * min(c, k // max(len(w), 1) + 1) + out
    return out[-k:]


def _body(avail: int, p: int, q: int) -> tuple[int, int]:
    """(minority m, majority M) with m = ceil((m + M)/10) + 1 and m p + M q <= avail, M maximal."""
    def m_of(M):
        return -(-(M + 10) // 9)

    if m_of(0) * p > avail:
        return 0, 0
    lo, hi = 0, avail // q
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if m_of(mid) * p + mid * q <= avail:
            lo = mid
        else:
            hi = mid - 1
    return m_of(lo), lo


def _plan(L: int, approach: str, codes: tuple[str, str], bit: int | None) -> tuple[list[Run], tuple[int, int], int]:
    """Runs filling L symbols, the traced loop counts, and the traced length b - a."""
    N_path = len(approach)
    if N_path >= L:
        return [(approach[:L], 1)], (0, 0), 0
    avail = L - N_path
    if bit is None:  # pure tracing of C0
        q = len(codes[0])
        M = avail // q
        runs = [(approach, 1), (codes[0], M), (codes[0][: avail - M * q], 1)]
        return runs, (M, 0), M * q
    maj, mino = codes[bit], codes[1 - bit]
    m, M = _body(avail, len(mino), len(maj))
    if m == 0:
        M = avail // len(maj)
    # one more majority circuit may not fit its extra minority circuit, so the
    # remainder can hold whole majority circuits; they are traced and counted
    rest = avail - m * len(mino) - M * len(maj)
    M += rest // len(maj)
    runs = [(approach, 1), (mino, m), (maj, M), (maj[: rest % len(maj)], 1)]
    counts = (M, m) if bit == 0 else (m, M)
    return runs, counts, m * len(mino) + M * len(maj)


def required_ring_length(G: DeBruijnGraph, dl: DoubleLoop, bit: int, eps: Fraction,
                         approach_len: int, cap: int = 10**7) -> int | None:
    """Least ring length whose plan passes the rule, for a connecting walk of approach_len symbols."""
    codes = codewords(dl, dl.shared)
    fake = "0" * approach_len
    for L in range(approach_len + 1, cap):
        _, counts, traced = _plan(L, fake, codes, bit)
        if bit in qualifies(counts, traced + G.N, L, eps):
            return L
    return None


def sft_encode(bits: Sequence[int], G: DeBruijnGraph, schedule: BlockSchedule, J: int = 1,
               eps: Fraction | None = None, window: tuple[int, int] | None = None,
               loop: DoubleLoop | None = None) -> Window:
    """Window over [0, b_top) writing bit i into every ring of move i, j <= J.

    Each block starts with a shortest walk to the shared vertex; ring blocks then trace
    ceil(|s|/10)+1 minority circuits and majority circuits, other blocks trace C0 only.
    Blocks up to the rings of move len(bits) are written, when the schedule has them, so the
    decoder sees where play stops.
    """
    if any(b not in (0, 1) for b in bits):
        raise SFTError("bits must be 0/1")
    eps = default_eps(G) if eps is None else Fraction(eps)
    window = window or default_window(J)
    dl = loop or find_double_loop(G)
    if dl is None:
        raise SFTError("the graph has no double loop")
    good = classify_good(G)
    if not all(good[v].both for v in dl.vertices()):
        raise SFTError("loop vertices must be good in both directions")
    v0 = dl.shared
    codes = codewords(dl, v0)
    assignment: dict[int, tuple[int, bool]] = {}
    top = 0
    for i in range(len(bits) + 1):
        player, n = _player_of_move(i)
        for j in range(J + 1):
            idx = schedule.ring_index(player, n, j)
            if idx > schedule.stages and i == len(bits):
                break  # the schedule ends before the next move; nothing to mark
            if idx > schedule.stages:
                raise ScheduleError(f"ring ({player}, {n}, {j}) needs block {idx} > {schedule.stages}")
            top = max(top, idx)
            if i < len(bits):
                assignment[idx] = (bits[i], window[0] <= j <= window[1])
    runs: list[Run] = []
    cur = v0  # the vertex just left of position 0
    for idx in range(1, top + 1):
        lo, hi = schedule.block(idx)
        walk = _approach(G, cur, v0)
        approach = "".join(v[-1] for v in walk[1:])
        bit, checked = assignment.get(idx, (None, False))
        block_runs, counts, traced = _plan(hi - lo, approach, codes, bit)
        if checked and bit not in qualifies(counts, traced + G.N, hi - lo, eps):
            need = required_ring_length(G, dl, bit, eps, len(approach))
            raise CapacityError(f"block {idx} of length {hi - lo} cannot carry bit {bit} at eps={eps}; "
                                f"minimal ring length {need}", need)
        assert sum(len(w) * c for w, c in block_runs) == hi - lo, f"block {idx} misfilled"
        runs.extend(block_runs)
        cur = _suffix([(cur, 1)] + block_runs, G.N)
    return Window(0, tuple(runs))


def sft_decode(y: Window, G: DeBruijnGraph, schedule: BlockSchedule, count: int,
               eps: Fraction | None = None, window: tuple[int, int] = (1, 1)) -> list[int | None]:
    """Witness (or None) for each of the first ``count`` moves."""
    eps = default_eps(G) if eps is None else Fraction(eps)
    out = []
    for i in range(count):
        player, n = _player_of_move(i)
        out.append(rule_check(y, G, schedule, n, player, eps, window))
    return out


def decode_bits(y: Window, G: DeBruijnGraph, schedule: BlockSchedule,
                eps: Fraction | None = None, window: tuple[int, int] = (1, 1)) -> tuple[int, ...]:
    """Moves read in order until the first move without a witness or outside the window."""
    eps = default_eps(G) if eps is None else Fraction(eps)
    out = []
    i = 0
    while True:
        player, n = _player_of_move(i)
        idx = max(schedule.ring_index(player, n, j) for j in range(window[0], window[1] + 1))
        if idx > schedule.stages or schedule.block(idx)[1] > y.end:
            break
        w = rule_check(y, G, schedule, n, player, eps, window)
        if w is None:
            break
        out.append(w)
        i += 1
    return tuple(out)
