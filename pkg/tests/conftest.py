from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Optional

import pytest

from sicqta.model import Outcome, ResolutionTrace, TreeParams

# four-device worked example: A, B, C, D
A, B, C, D = 0b000, 0b001, 0b100, 0b101
QUAD = (A, B, C, D)


@pytest.fixture
def u3():
    return TreeParams(3)


def all_subsets(u: int):
    N = 1 << u
    for M in range(N + 1):
        yield from combinations(range(N), M)


def answering(participants, q: str, u: int) -> set[int]:
    """Devices whose id string starts with q (string based, independent of query_range)."""
    return {d for d in participants if format(d, f"0{u}b").startswith(q)}


@lru_cache(maxsize=None)
def collision_node_distribution(h: int, m: int) -> dict[int, Fraction]:
    """Exact law of the number of nodes holding >= 2 devices in a height-h
    subtree with m uniformly placed devices.  Under perfect SIC the latency
    is one plus this count (for m >= 2)."""
    if m < 2 or h == 0:
        return {0: Fraction(1)}
    half = 1 << (h - 1)
    total = comb(2 * half, m)
    out: dict[int, Fraction] = {}
    for k in range(max(0, m - half), min(m, half) + 1):
        p = Fraction(comb(half, k) * comb(half, m - k), total)
        for a, pa in collision_node_distribution(h - 1, k).items():
            for b, pb in collision_node_distribution(h - 1, m - k).items():
                out[a + b + 1] = out.get(a + b + 1, 0) + p * pa * pb
    return out


def exact_mean_throughput(M: int, u: int) -> float:
    return float(sum(p * Fraction(M, 1 + c) for c, p in collision_node_distribution(u, M).items()))


def reference_decode(trace: ResolutionTrace, max_cancel_depth: Optional[int] = None) -> dict[int, int]:
    """Replay the query sequence and peel every stored signal to a fixpoint after each slot.

    Uses only the ground truth and the queries of the trace, none of the
    gateway's pending-query bookkeeping.
    """
    u = trace.params.u
    decoded: dict[int, int] = {}
    signals: list[set[int]] = []
    for s in trace.slots:
        tx = answering(trace.participants, s.query, u) - set(decoded)
        if max_cancel_depth is None or len(tx) <= max_cancel_depth or len(tx) == 1:
            signals.append(set(tx))
        changed = True
        while changed:
            changed = False
            for sig in signals:
                sig -= set(decoded)
                if len(sig) == 1:
                    (d,) = sig
                    decoded[d] = s.index
                    changed = True
    return decoded


def check_sic_trace(trace: ResolutionTrace, max_cancel_depth: Optional[int] = None) -> None:
    u = trace.params.u
    parts = trace.participants
    assert set(trace.decoded) == set(parts)
    assert [s.index for s in trace.slots] == list(range(1, trace.latency + 1))
    assert trace.slots[0].query == ""
    decoded_before: set[int] = set()
    first_tx: dict[int, int] = {}
    for s in trace.slots:
        match = answering(parts, s.query, u)
        assert s.transmitters == frozenset(match - decoded_before)
        if max_cancel_depth is None:
            # skip soundness
            assert not (match and match <= decoded_before), (sorted(parts), s.query)
        for d in s.transmitters:
            first_tx.setdefault(d, s.index)
        decoded_before |= {d for d, k in trace.decoded.items() if k == s.index}
        if s.outcome.kind is Outcome.SUCCESS:
            assert trace.decoded[s.outcome.device] == s.index
    for d, k in trace.decoded.items():
        assert k >= first_tx.get(d, 1)
    assert reference_decode(trace, max_cancel_depth) == dict(trace.decoded)


# acceptance lines collected by test_acceptance, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
