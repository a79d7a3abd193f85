"""Gateway side of the plain Query Tree Algorithm.

The gateway opens with the empty (root) query and, on every collision,
schedules the two one-bit extensions of the collided prefix.  Siblings are
always queried back to back and the children of a sibling pair are served
before any pending shallower query, which reproduces the slot order of the
M=4, u=3 worst-case example (C,C,C,C,I,S,S,C,I,S,S).
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .model import (
    Outcome,
    ResolutionTrace,
    SlotOutcome,
    SlotRecord,
    TreeParams,
    observe,
    validate_participants,
)


class StateError(RuntimeError):
    pass


@dataclass
class QtaState:
    queue: list[str] = field(default_factory=list)
    terminated: bool = False


def _insert_at(queue: list[str], current: str) -> int:
    # children go after the pending sibling of `current` and after the
    # children already scheduled for the same sibling pair
    i = 0
    if current.endswith("0") and queue and queue[0] == current[:-1] + "1":
        i = 1
    depth = len(current) + 1
    while i < len(queue) and len(queue[i]) == depth:
        i += 1
    return i


def qta_step(state: QtaState, outcome: SlotOutcome, current: str) -> Optional[str]:
    """Advance the query schedule after observing ``outcome`` for ``current``.

    Returns the next query, or ``None`` once the schedule is exhausted.
    """
    if state.terminated:
        raise StateError("qta_step called after termination")
    if outcome.kind is Outcome.COLLISION:
        i = _insert_at(state.queue, current)
        state.queue[i:i] = [current + "0", current + "1"]
    if not state.queue:
        state.terminated = True
        return None
    return state.queue.pop(0)


def qta_latency(ids: list[int], u: int) -> int:
    """Slot count of a QTA run; ``ids`` must be sorted and distinct."""
    slots = 0
    stack = [(0, 0)]  # (prefix value, prefix length); same node set as run_qta
    while stack:
        value, length = stack.pop()
        slots += 1
        shift = u - length
        lo = bisect_left(ids, value << shift)
        hi = bisect_left(ids, (value + 1) << shift)
        if hi - lo > 1:
            stack.append((value << 1 | 1, length + 1))
            stack.append((value << 1, length + 1))
    return slots


def run_qta(participants: Iterable[int], params: TreeParams) -> ResolutionTrace:
    ids = validate_participants(participants, params)
    state = QtaState()
    decoded: dict[int, int] = {}
    records = []
    q: Optional[str] = ""
    while q is not None:
        lo, hi = params.query_range(q)
        tx = frozenset(ids[bisect_left(ids, lo):bisect_left(ids, hi)])
        out = observe(tx)
        index = len(records) + 1
        if out.kind is Outcome.SUCCESS:
            decoded[out.device] = index
        records.append(SlotRecord(index, q, out, tx, tx))
        q = qta_step(state, out, q)
    return ResolutionTrace(params, frozenset(ids), tuple(records), decoded, "qta")
