from itertools import product

import pytest
from hypothesis import given, strategies as st

from sicqta.model import (
    DomainError,
    Outcome,
    TreeParams,
    cancel,
    matches,
    observe,
    sibling,
)

from conftest import A, B, C, D, answering


def test_tree_params():
    p = TreeParams(3)
    assert p.N == 8
    assert p.bits(5) == "101"
    assert p.parse("001") == 1
    with pytest.raises(DomainError):
        TreeParams(0)
    with pytest.raises(DomainError):
        p.parse("0011")
    with pytest.raises(DomainError):
        p.check_id(8)


@pytest.mark.parametrize(
    "device, q, expected",
    [
        (0b000, "", True),
        (0b101, "10", True),  # D answers 10x
        (0b001, "01", False),  # 01x is idle in the QTA example
        (0b101, "101", True),
        (0b101, "100", False),
    ],
)
def test_matches(u3, device, q, expected):
    assert matches(device, q, u3) is expected


def test_matches_rejects_long_query(u3):
    with pytest.raises(DomainError):
        matches(0, "0000", u3)


@pytest.mark.parametrize("u", [1, 2, 3, 4])
def test_answering_set_exhaustive(u):
    p = TreeParams(u)
    queries = [""] + ["".join(b) for n in range(1, u + 1) for b in product("01", repeat=n)]
    for q in queries:
        expected = answering(range(p.N), q, u)
        assert {d for d in range(p.N) if matches(d, q, p)} == expected
        lo, hi = p.query_range(q)
        assert set(range(lo, hi)) == expected


@given(st.integers(0, 15), st.text("01", max_size=4), st.text("01", max_size=4))
def test_matching_queries_are_nested(device, q1, q2):
    p = TreeParams(4)
    if matches(device, q1, p) and matches(device, q2, p) and len(q1) <= len(q2):
        assert q2.startswith(q1)


def test_observe():
    assert observe(set()).kind is Outcome.IDLE
    out = observe({A})
    assert out.kind is Outcome.SUCCESS and out.device == A
    assert observe({A, B}).kind is Outcome.COLLISION
    assert observe({A, B, C, D}).kind is Outcome.COLLISION


@given(st.sets(st.integers(0, 63)), st.sets(st.integers(0, 63)))
def test_observe_depends_on_cardinality_only(s1, s2):
    if len(s1) == len(s2):
        assert observe(s1).kind is observe(s2).kind


def test_cancel():
    assert cancel({A, B}, {A}) == {B}
    assert cancel({A, B}, set()) == {A, B}
    assert cancel({A, B, C}, {A, B, C}) == frozenset()


@given(st.sets(st.integers(0, 31)), st.sets(st.integers(0, 31)), st.sets(st.integers(0, 31)))
def test_cancel_monotone(residual, known, extra):
    assert cancel(residual, known | extra) <= cancel(residual, known)


def test_sibling():
    assert sibling("0") == "1"
    assert sibling("101") == "100"
    with pytest.raises(DomainError):
        sibling("")
