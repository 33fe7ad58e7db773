import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftdet.groups import (
    BudgetExceeded,
    DirectProduct,
    FiniteGroup,
    FreeAbelianGroup,
    FreeGroup,
    UsageError,
    cyclic_group,
    load_group_config,
    parse_group,
)

from .conftest import brute_lengths


def test_multiply_examples(Z, F2):
    assert Z.parse("2") * Z.parse("3") == Z.parse("5")
    assert F2.parse("a") * F2.parse("a'") == F2.identity()
    C3 = cyclic_group(3)
    # table row 1, column 2 of the addition table mod 3
    assert C3.element(1) * C3.element(2) == C3.element(0)


def test_mixed_groups_rejected(Z, F2):
    with pytest.raises(UsageError):
        Z.identity() * F2.identity()


def test_word_length_examples(Z, F2):
    assert Z.word_length(Z.parse("5")) == 5
    assert F2.word_length(F2.parse("aba'")) == 3
    Z2 = FreeAbelianGroup(2)
    g = Z2.parse("2,-3")
    assert Z2.word_length(g) == 5
    assert Z2.bfs_word_length(g) == 5


def test_identity_is_empty_word(F2, ZC2):
    assert F2.identity().word == ()
    assert ZC2.identity().word == ()
    assert len(F2.identity()) == 0


@pytest.mark.parametrize("name", ["Z", "F2", "Z2", "ZxC2", "F2xC3"])
def test_closed_form_length_matches_bfs(name):
    g = parse_group(name)
    for r in range(4):
        for x in g.bfs_sphere(r):
            assert g.word_length(x) == r
            assert g.from_word(x.word) == x


def test_ball_examples(Z, F2):
    assert sorted(x.key[0] for x in Z.ball(2)) == [-2, -1, 0, 1, 2]
    assert len(F2.ball(1)) == 5
    assert len(F2.ball(2)) == 17
    assert F2.ball(0) == [F2.identity()]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_free_ball_closed_form(k):
    g = FreeGroup(k)
    for r in range(5):
        size = len(g.ball(r))
        if k == 1:
            assert size == 2 * r + 1
        else:
            assert size == 1 + 2 * k * ((2 * k - 1) ** r - 1) // (2 * k - 2)
        assert len(g.bfs_sphere(r)) == g.sphere_size(r)


def test_ball_monotone(ZC2):
    for r in range(6):
        assert set(ZC2.ball(r)) <= set(ZC2.ball(r + 1))


def test_budget_guard(monkeypatch):
    monkeypatch.setenv("SHIFTDET_BUDGET", "100")
    with pytest.raises(BudgetExceeded):
        FreeGroup(2).ball(6)


def test_finite_table_validation():
    with pytest.raises(UsageError):
        FiniteGroup([[0, 1], [1, 1]])
    # Latin square that is not associative (a quasigroup of order 3 without identity structure)
    with pytest.raises(UsageError):
        FiniteGroup([[0, 2, 1], [2, 1, 0], [1, 0, 2]])


def test_finite_group_axioms_exhaustive():
    # S3 as permutations of (0,1,2)
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    table = [[idx[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
    S3 = FiniteGroup(table, name="S3")
    els = S3.ball(3)
    assert len(els) == 6
    e = S3.identity()
    for a in els:
        assert a * e == a == e * a
        assert a * a.inverse() == e
        for b in els:
            for c in els:
                assert (a * b) * c == a * (b * c)


def _random_word(rng, letters, n):
    return [rng.choice(letters) for _ in range(n)]


@pytest.mark.parametrize("name", ["Z", "F2", "Z2", "ZxC2"])
def test_axioms_on_random_words(name):
    g = parse_group(name)
    rng = random.Random(7)
    letters = list(g.generator_letters())
    e = g.identity()
    for _ in range(200):
        a, b, c = (g.from_word(_random_word(rng, letters, rng.randint(0, 6))) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert a * e == a
        assert a * a.inverse() == e
        # triangle inequality and symmetric lengths
        assert len(a * b) <= len(a) + len(b)
        assert len(a) == len(a.inverse())


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12))
def test_free_reduction_canonical(word):
    F2 = FreeGroup(2)
    g = F2.from_word(word)
    # canonical form is freely reduced and unique
    assert all(g.key[i] != -g.key[i + 1] for i in range(len(g.key) - 1))
    assert F2.from_word(g.word) == g


@pytest.mark.parametrize("name,u,radii", [
    ("F2", "ab", range(0, 6)),
    ("F2", "ab'a", range(0, 6)),
    ("F2", "a", range(0, 6)),
    ("Z", "3", range(0, 8)),
    ("Z2", "1,-1", range(0, 5)),
])
def test_translate_lengths_match_brute_force(name, u, radii):
    g = parse_group(name)
    x = g.parse(u)
    for r in radii:
        assert g.translate_lengths(x, r) == brute_lengths(g, x, r)


def test_parse_and_config(tmp_path):
    assert parse_group("ZxC2") == DirectProduct(FreeAbelianGroup(1), cyclic_group(2))
    (tmp_path / "c3.csv").write_text("0,1,2\n1,2,0\n2,0,1\n")
    cfg = tmp_path / "g.txt"
    cfg.write_text("kind: finite-table\ntable: c3.csv\nname: C3\n")
    g = load_group_config(cfg)
    assert g.order == 3
    assert load_group_config("kind: free\nrank: 3") == FreeGroup(3)
    assert load_group_config("kind: free-abelian\ndimension: 2") == FreeAbelianGroup(2)
    with pytest.raises(UsageError):
        parse_group("Q8")
