import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftdet.amenability import PLAYER_I, PLAYER_II
from shiftdet.sft_codec import (
    CapacityError,
    ScheduleError,
    SFTError,
    Window,
    block_schedule,
    codewords,
    decode_bits,
    default_eps,
    dictionary,
    legal,
    legal_moves,
    legal_window,
    pi,
    pi_prime,
    qualifies,
    required_ring_length,
    ring_witnesses,
    rule_check,
    sft_decode,
    sft_encode,
    trace_pattern,
)
from shiftdet.sft_graph import build_debruijn, double_loops, epsilon_max, find_double_loop

GOLDEN = build_debruijn(["11"], 2)
LOOP = find_double_loop(GOLDEN)
DESK = block_schedule(2)
C0, C1 = codewords(LOOP, "00")


def spell(pattern):
    return "00" + "".join((C0, C1)[int(b)] for b in pattern)


def brute_witnesses(word, G, lo, hi, eps, origin=0):
    """Every interval [a, b) of the ring, every double loop: the rule by definition."""
    y = Window.from_string(word, origin)
    found = set()
    for dl in double_loops(G):
        for a in range(lo, hi - G.N + 1):
            for b in range(a + G.N, hi + 1):
                tp = trace_pattern(y, dl, a, b, G.N)
                if tp is not None:
                    found |= qualifies((tp.count(0), tp.count(1)), b - a, hi - lo, eps)
    return found


# --- schedule -----------------------------------------------------------------------


def test_desk_schedule():
    S = block_schedule(2, "desk", K=4, stages=20)
    assert S.b[:4] == (0, 8, 40, 168)
    assert all((S.b[i] - S.b[i - 1]) % 2 == 0 for i in range(1, 21))
    ratios = [S.ratio(i) for i in range(1, 21)]
    assert ratios[:2] == [0, Fraction(1, 5)]
    # geometric gaps: the ratio climbs toward 1/(K-1) and stays below it
    assert ratios == sorted(ratios) and all(r < Fraction(1, 3) for r in ratios)


def test_strict_schedule():
    S = block_schedule(2, "strict", stages=6)
    assert S.b[:3] == (0, 4, 32)
    for i in range(1, 7):
        assert S.ratio(i) <= Fraction(i, 2 ** (2 * i - 1))
        assert (S.b[i] - S.b[i - 1]) % 2 == 0
    ratios = [S.ratio(i) for i in range(2, 7)]
    assert ratios == sorted(ratios, reverse=True) and ratios[0] < Fraction(1, 2)
    with pytest.raises(ScheduleError):
        block_schedule(2, "strict", stages=7)


def test_blocks_and_rings():
    S = block_schedule(2, stages=10)
    assert S.block(1) == (0, 8) and S.block(-1) == (-8, 0) and S.block(-2) == (-40, -8)
    for pos in range(-170, 170):
        lo, hi = S.block(S.block_of(pos))
        assert lo <= pos < hi
    assert S.primed(3, True) == S.block(3) and S.primed(3, False) == S.block(-4)
    assert S.ring_index(PLAYER_I, 0, 0) == 1 and S.ring_index(PLAYER_II, 0, 0) == 2
    indices = [S.ring_index(p, n, j) for p in (PLAYER_I, PLAYER_II) for n in range(4) for j in range(4)]
    assert len(set(indices)) == len(indices)
    assert all(i % 2 == 1 for i in indices[:16]) and all(i % 2 == 0 for i in indices[16:])
    with pytest.raises(ScheduleError):
        S.block(11)


# --- windows ------------------------------------------------------------------------


def random_window(rng):
    runs = tuple(("".join(rng.choice("01") for _ in range(rng.randint(1, 4))), rng.randint(1, 6))
                 for _ in range(rng.randint(1, 5)))
    return Window(rng.randint(-20, 20), runs)


def test_window_access_matches_string():
    rng = random.Random(4)
    for _ in range(200):
        y = random_window(rng)
        s = "".join(w * c for w, c in y.runs)
        assert y.text() == s and y.size == len(s)
        lo = rng.randint(y.origin - 3, y.end)
        hi = rng.randint(lo, y.end + 3)
        a, b = max(lo, y.origin), min(hi, y.end)
        assert y.text(lo, hi) == s[a - y.origin: max(a, b) - y.origin]
        assert y.ngrams(2) == {s[i:i + 2] for i in range(len(s) - 1)}
        assert y.shift(5).text() == s and y.shift(5).origin == y.origin + 5
        word = rng.choice(["00", "01", "10", "11"])
        every = [y.origin + i for i in range(len(s) - 1) if s[i:i + 2] == word]
        # the first occurrence in each run is always kept
        assert set(y.occurrences(word, y.origin, y.end)) <= set(every)
        if every:
            assert y.occurrences(word, y.origin, y.end)[0] == every[0]


def test_window_json():
    y = Window.from_string("0100", -2)
    assert Window.from_json(y.to_json()) == y and json.loads(y.to_json())["word"] == "0100"
    z = Window(3, (("0", 10**30), ("100", 7)))
    assert Window.from_json(z.to_json()) == z and z.size == 10**30 + 21


# --- pi' and pi ----------------------------------------------------------------------


def test_pi_prime_examples():
    u = dictionary(2)
    y = pi_prime((1, 2), DESK)
    assert y.text(0, 2) == u(1) and y.text(-2, 0) == u(2)
    assert pi_prime((), DESK).size == 0
    # steps 0..3 fill A_1 = [0, 8); step 4 starts A_2, an even block, so the digits swap
    x = (0, 0) * 4 + (1, 2)
    y = pi_prime(x, DESK)
    assert y.text(8, 10) == u(2) and y.text(-10, -8) == u(1)


def test_legal_examples():
    assert legal_window(Window.from_string("0101"), GOLDEN)
    assert not legal_window(Window.from_string("0110"), GOLDEN)
    assert legal((1, 2), GOLDEN, DESK)  # "10" | "01" reads 1001
    assert legal((1, 1), GOLDEN, DESK)  # 0101
    assert not legal((2, 1), GOLDEN, DESK)  # 01 | 10 reads 0110
    # u_3 = 11 is bad both ways as player I's first word, so pi = pi' and 11 is forbidden
    assert not legal((3, 0), GOLDEN, DESK)


BAD_RIGHT = build_debruijn(["110"], 3)  # 011 and 111 are good to the left only
BAD_BOTH = build_debruijn(["011", "110"], 3)  # 111 is bad both ways
S3 = block_schedule(3, stages=12)


def test_pi_all_good_is_pi_prime():
    rng = random.Random(8)
    for _ in range(30):
        x = random_legal(GOLDEN, DESK, rng, 8, digits=(0, 1, 2))
        res = pi(x, GOLDEN, DESK)
        assert res.branch == "all-good" and res.window == pi_prime(x, DESK)


def test_pi_first_bad_is_pi_prime():
    x = (7, 0, 0, 0)
    res = pi(x, BAD_BOTH, S3)
    assert res.branch == "first-bad" and res.window == pi_prime(x, S3)


def test_pi_redirect_to_player_two():
    u = dictionary(3)
    x = (0, 0, 3, 0, 1, 2)  # I's word at step 1 is 011, good to the left only
    res = pi(x, BAD_RIGHT, S3)
    assert res.branch == "redirect-I" and res.n0 == 1
    # step 0 as in pi'; then II's words 0, 2 alternate, starting on II's own (left) side
    assert res.window.origin == -6
    assert res.window.text() == u(0) + u(0) + u(0) + u(2)


def test_pi_redirect_to_player_one():
    u = dictionary(3)
    x = (0, 0, 1, 7, 2, 5)
    res = pi(x, BAD_RIGHT, S3)
    assert res.branch == "redirect-II" and res.n0 == 1
    # I's words 1, 2 from step 1 on, first on I's own (right) side, then left
    assert res.window.origin == -6
    assert res.window.text() == u(2) + u(0) + u(0) + u(1)


def random_legal(G, S, rng, length, digits=None):
    x = []
    while len(x) < length:
        moves = [k for k in legal_moves(x, G, S) if digits is None or k in digits]
        assert moves, f"dead end at {x}"  # pruned: every legal position extends
        x.append(rng.choice(moves))
    return tuple(x)


@pytest.mark.parametrize("G", [GOLDEN, BAD_RIGHT, BAD_BOTH], ids=["golden", "bad-right", "bad-both"])
def test_pi_outputs_legal(G):
    S = DESK if G is GOLDEN else S3
    rng = random.Random(13)
    branches = set()
    for _ in range(40):
        x = random_legal(G, S, rng, 8)
        res = pi(x, G, S)
        branches.add(res.branch)
        assert legal_window(res.window, G)
        steps = len(x) // 2
        # a redirected step places one word instead of two
        assert res.window.size == G.N * (steps + (steps if res.n0 is None else res.n0))
    if G is BAD_RIGHT:
        assert {"all-good", "redirect-I"} <= branches or {"all-good", "redirect-II"} <= branches


# --- tracing and the rule ------------------------------------------------------------------


def test_trace_examples():
    y = Window.from_string("00000")
    tp = trace_pattern(y, LOOP, 0, 5, 2)
    assert tp.word == "000" and tp.majority == 0
    w = spell("10010")
    tp = trace_pattern(Window.from_string(w), LOOP, 0, len(w), 2)
    assert tp.word == "10010" and tp.majority == 0
    assert trace_pattern(Window.from_string("0010"), LOOP, 0, 4, 2) is None
    assert trace_pattern(Window.from_string("01000"), LOOP, 0, 5, 2) is None  # 01 is not on C0


def test_trace_vertices_follow_circuits():
    rng = random.Random(1)
    for _ in range(50):
        s = "".join(rng.choice("01") for _ in range(rng.randint(1, 12)))
        w = spell(s)
        tp = trace_pattern(Window.from_string(w), LOOP, 0, len(w), 2)
        walk = GOLDEN.walk_of_word(w)
        expected = ["00"]
        for b in s:
            expected += LOOP.circuit(int(b))[1:] + ["00"]
        assert tp.word == s and walk == expected


def test_rule_examples():
    eps = epsilon_max(3)
    assert ring_witnesses(Window.from_string(spell("1" * 30)), GOLDEN, 0, 92, eps) == set()
    w = spell("0" * 4 + "1" * 36)
    assert ring_witnesses(Window.from_string(w), GOLDEN, 0, len(w), eps) == {1}
    with pytest.raises(SFTError):
        rule_check(Window.from_string(w), GOLDEN, DESK, 0, PLAYER_I, Fraction(1, 10), (1, 1))


def test_witnesses_match_definition():
    rng = random.Random(21)
    codes = [C0, C1]
    for trial in range(120):
        parts = ["00"]
        for _ in range(rng.randint(1, 9)):
            if rng.random() < 0.15:
                parts.append(rng.choice(["1", "01", "010"]))
            else:
                parts.append(codes[rng.random() < 0.7])
        word = "".join(parts).replace("11", "10")
        lo = rng.randint(0, 2)
        hi = len(word) - rng.randint(0, 2)
        if hi - lo < 2:
            continue
        for eps in (epsilon_max(3), Fraction(1, 5)):
            got = ring_witnesses(Window.from_string(word), GOLDEN, lo, hi, eps)
            assert got == brute_witnesses(word, GOLDEN, lo, hi, eps), (word, lo, hi, eps)


def test_witness_uniqueness_counts():
    eps = epsilon_max(3)
    for n0 in range(61):
        for n1 in range(61 - n0):
            assert len(qualifies((n0, n1), 10**6, 10**6, eps)) <= 1


def test_witness_uniqueness_windows():
    eps = epsilon_max(3)
    for L in range(1, 11):
        for s in itertools.product("01", repeat=L):
            w = spell("".join(s))
            assert len(ring_witnesses(Window.from_string(w), GOLDEN, 0, len(w), eps)) <= 1
    rng = random.Random(9)
    for _ in range(300):
        w = spell("".join(rng.choice("0111") for _ in range(rng.randint(11, 60))))
        assert len(ring_witnesses(Window.from_string(w), GOLDEN, 0, len(w), eps)) <= 1


# --- encoder / decoder ------------------------------------------------------------------


def test_encode_empty_is_pure_tracing():
    y = sft_encode((), GOLDEN, DESK)
    assert set(y.text()) == {"0"}
    assert decode_bits(y, GOLDEN, DESK) == ()
    assert sft_decode(y, GOLDEN, DESK, 2) == [None, None]


def test_encode_bit_one_gives_witness_one():
    y = sft_encode((1,), GOLDEN, DESK)
    assert rule_check(y, GOLDEN, DESK, 0, PLAYER_I, default_eps(GOLDEN), (1, 1)) == 1
    assert legal_window(y, GOLDEN)


def test_ring_contents():
    eps = default_eps(GOLDEN)
    y = sft_encode((0, 1), GOLDEN, DESK)
    for player, bit in ((PLAYER_I, 0), (PLAYER_II, 1)):
        lo, hi = DESK.ring(player, 0, 1)
        assert ring_witnesses(y, GOLDEN, lo, hi, eps) == {bit}
        # the trace starts right at the ring: v0 is reached by an N-step walk
        assert y.text(lo, lo + 2) == "00"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=8), st.sampled_from([4, 5]))
def test_roundtrip_property(bits, K):
    S = block_schedule(2, K=K)
    y = sft_encode(tuple(bits), GOLDEN, S)
    assert decode_bits(y, GOLDEN, S) == tuple(bits)
    assert sft_decode(y, GOLDEN, S, len(bits)) == list(bits)


def test_roundtrip_other_graphs():
    for forbidden, N in ((["111"], 3), (["00"], 2), (["110"], 3)):
        G = build_debruijn(forbidden, N)
        S = block_schedule(N)
        for bits in ((), (1,), (0, 1, 1), (1, 0, 0, 1)):
            assert decode_bits(sft_encode(bits, G, S), G, S) == bits


def test_capacity_error():
    with pytest.raises(CapacityError) as err:
        sft_encode((1,), GOLDEN, DESK, window=(0, 1))
    assert err.value.required == required_ring_length(GOLDEN, LOOP, 1, default_eps(GOLDEN), 2)
    assert err.value.required > 8  # block 1 has 8 symbols
    # the reported length is enough
    S = block_schedule(2, K=err.value.required // 2)
    assert decode_bits(sft_encode((1,), GOLDEN, S, window=(0, 1)), GOLDEN, S, window=(0, 1)) == (1,)


def test_no_double_loop():
    G = build_debruijn(["00", "11"], 2)
    with pytest.raises(SFTError):
        sft_encode((1,), G, block_schedule(2))


def test_shift_covariance():
    # the minority loop is traced ceil(|s|/10)+1 times at the front of each ring, so a
    # left shift can only eat about one tenth of eps |s| minority symbols; rings deep in
    # the schedule tolerate any fixed m
    eps = default_eps(GOLDEN)
    window = (2, 3)
    rng = random.Random(6)
    for _ in range(6):
        bits = tuple(rng.randrange(2) for _ in range(rng.randint(1, 4)))
        y = sft_encode(bits, GOLDEN, DESK, J=3, window=window)
        for m in (-1000, -37, -1, 1, 5, 1000):
            assert sft_decode(y.shift(m), GOLDEN, DESK, len(bits), eps, window) == list(bits)


def _ring_size(S, i):
    player, n = (PLAYER_I if i % 2 == 0 else PLAYER_II), i // 2
    lo, hi = S.ring(player, n, 1)
    return hi - lo


def test_right_shifts_up_to_half_eps():
    eps = default_eps(GOLDEN)
    for bits in itertools.product((0, 1), repeat=4):
        y = sft_encode(bits, GOLDEN, DESK)
        m = int(eps / 2 * min(_ring_size(DESK, i) for i in range(4)))
        assert sft_decode(y.shift(m), GOLDEN, DESK, 4, eps) == list(bits)


@pytest.mark.xfail(strict=True, reason="ceil(|s|/10)+1 minority circuits leave only about "
                                        "eps|s|/10 of them to lose on a left shift")
def test_left_shift_by_half_eps():
    eps = default_eps(GOLDEN)
    y = sft_encode((1, 0), GOLDEN, DESK)
    m = int(eps / 2 * _ring_size(DESK, 0))
    assert sft_decode(y.shift(-m), GOLDEN, DESK, 2, eps) == [1, 0]


def test_compressed_matches_literal():
    S = block_schedule(2, K=16, stages=3)
    y = sft_encode((1, 0), GOLDEN, S, J=0, window=(0, 0))
    flat = Window.from_string(y.text(), y.origin)
    eps = default_eps(GOLDEN)
    for i in range(1, S.stages + 1):
        lo, hi = S.block(i)
        assert ring_witnesses(y, GOLDEN, lo, hi, eps) == ring_witnesses(flat, GOLDEN, lo, hi, eps)
