import pytest

from shiftdet.groups import parse_group


@pytest.fixture(scope="session")
def Z():
    return parse_group("Z")


@pytest.fixture(scope="session")
def F2():
    return parse_group("F2")


@pytest.fixture(scope="session")
def ZC2():
    return parse_group("ZxC2")


def brute_lengths(group, u, r):
    """{|u c| : |c| = r} by explicit multiplication and BFS word length."""
    return {group.bfs_word_length(u * c) for c in group.bfs_sphere(r)}


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import OUTCOMES

    if OUTCOMES:
        terminalreporter.section("acceptance criteria")
        for o in sorted(OUTCOMES, key=lambda o: o.number):
            terminalreporter.write_line(o.line())
