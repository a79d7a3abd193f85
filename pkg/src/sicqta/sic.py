"""Query tree resolution with successive interference cancellation (SICQTA).

The gateway walks the query tree depth first, always descending into the
``0`` child.  Every usable collision is stored; once a clean packet is
received it is cancelled from all stored signals, and any stored signal
left with a single packet releases that packet too (chain cancellation).

Each pending sibling query remembers which stored slot carries the signal
of its parent.  When the walk returns to it, the sibling subtree is fully
resolved, so the pending query's own signal equals that slot's residual:

* empty residual  -> nothing left below, the query is skipped;
* residual >= 2   -> known collision, the gateway descends without asking;
* signal unusable -> the query has to be transmitted.

An idle ``0`` child under a collision means the ``1`` child holds the whole
collision, so it is skipped as well and the walk descends into it.
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
    sibling,
    validate_participants,
)


class InvariantError(AssertionError):
    """Internal bookkeeping went inconsistent; indicates a bug."""


@dataclass
class SicqtaState:
    params: TreeParams
    max_cancel_depth: Optional[int] = None
    # stack of (query, slot holding the parent's signal or None for unusable)
    pending: list[tuple[str, Optional[int]]] = field(default_factory=list)
    query: Optional[str] = ""
    # slot holding the signal of the current query's parent
    source: Optional[int] = None
    # usable stored collisions: slot -> undecoded ids
    store: dict[int, set[int]] = field(default_factory=dict)
    store_query: dict[int, str] = field(default_factory=dict)
    decoded: dict[int, int] = field(default_factory=dict)
    slot: int = 0
    k: int = 1
    skipped: int = 0

    def usable(self, n_transmitters: int) -> bool:
        return self.max_cancel_depth is None or n_transmitters <= self.max_cancel_depth


def chain_cancel(state: SicqtaState, clean: int, slot: Optional[int] = None) -> set[int]:
    """Cancel ``clean`` everywhere and peel stored collisions to a fixpoint.

    Returns the ids released by the chain (not including ``clean``) and sets
    ``state.k`` to one plus the number of stored slots drained by it.
    """
    slot = state.slot if slot is None else slot
    state.decoded.setdefault(clean, slot)
    released: set[int] = set()
    drained = 0
    todo = [clean]
    while todo:
        d = todo.pop()
        for r in state.store.values():
            if d not in r:
                continue
            r.discard(d)
            if not r:
                drained += 1
            elif len(r) == 1:
                (y,) = r
                if y not in state.decoded:
                    state.decoded[y] = slot
                    released.add(y)
                    todo.append(y)
    state.k = 1 + drained
    return released


def _known_empty(state: SicqtaState, q: str, source: Optional[int]) -> bool:
    if source is not None:
        return not state.store[source]
    # parent signal unusable: fall back on any drained usable ancestor slot
    return any(not r and q.startswith(state.store_query[t]) for t, r in state.store.items())


def _pop_pending(state: SicqtaState) -> Optional[str]:
    skipped = 0
    while state.pending and _known_empty(state, *state.pending[-1]):
        state.pending.pop()
        skipped += 1
    state.skipped = skipped
    if not state.pending:
        state.query = None
        return None
    q, source = state.pending.pop()
    state.source = source
    if source is not None:
        # signal known to hold >= 2 packets: descend without querying
        if len(state.store[source]) < 2:
            raise InvariantError(f"pending query {q!r} has residual {state.store[source]}")
        state.query = q + "0"
    else:
        state.query = q
    return state.query


def sicqta_step(
    state: SicqtaState, outcome: SlotOutcome, transmitters: Iterable[int] = ()
) -> Optional[str]:
    """Consume the outcome of ``state.query`` and return the next query.

    ``transmitters`` is the ground-truth signal of the slot; the gateway only
    stores it (for later cancellation), it never inspects it directly.
    """
    q = state.query
    if q is None:
        raise InvariantError("sicqta_step called after termination")
    state.slot += 1
    left = q.endswith("0")
    kind = outcome.kind
    if kind is Outcome.IDLE:
        if not left:
            return _pop_pending(state)
        # the sibling carries the whole parent collision
        nxt = sibling(q)
        state.query = nxt + "0" if len(nxt) < state.params.u else nxt
        return state.query
    if left:
        state.pending.append((sibling(q), state.source))
    if kind is Outcome.COLLISION:
        tx = set(transmitters)
        if state.usable(len(tx)):
            state.store[state.slot] = tx
            state.store_query[state.slot] = q
            state.source = state.slot
        else:
            state.source = None
        state.query = q + "0"
        return state.query
    chain_cancel(state, outcome.device)
    nxt = _pop_pending(state)
    if state.max_cancel_depth is None and left and state.skipped != state.k - 1:
        raise InvariantError(f"skipped {state.skipped} pending queries but k={state.k}")
    return nxt


def run_sicqta(
    participants: Iterable[int],
    params: TreeParams,
    max_cancel_depth: Optional[int] = None,
    *,
    record: bool = True,
) -> ResolutionTrace:
    if max_cancel_depth is not None and max_cancel_depth < 1:
        raise ValueError("max_cancel_depth must be >= 1")
    ids = validate_participants(participants, params)
    state = SicqtaState(params, max_cancel_depth)
    records = []
    while state.query is not None:
        q = state.query
        lo, hi = params.query_range(q)
        tx = frozenset(
            d for d in ids[bisect_left(ids, lo):bisect_left(ids, hi)] if d not in state.decoded
        )
        out = observe(tx)
        before = len(state.decoded)
        sicqta_step(state, out, tx)
        if record:
            slot = state.slot
            cancelled = tuple(
                sorted(d for d, t in list(state.decoded.items())[before:] if t == slot and d != out.device)
            )
            residual = frozenset(state.store[slot]) if slot in state.store else (
                tx if out.kind is Outcome.COLLISION else frozenset()
            )
            records.append(SlotRecord(slot, q, out, tx, residual, cancelled))
    if len(state.decoded) != len(ids):
        raise InvariantError("terminated with undecoded participants")
    if not record:
        records = [None] * state.slot
    return ResolutionTrace(params, frozenset(ids), tuple(records), dict(state.decoded), "sicqta")


def sicqta_latency(ids: list[int], u: int, max_cancel_depth: Optional[int] = None) -> int:
    """Slot count only; ``ids`` sorted and distinct.

    With perfect SIC the walk depends only on how many devices sit in each
    subtree, so the count is computed from subtree sizes directly.
    """
    if max_cancel_depth is not None:
        return run_sicqta(ids, TreeParams(u), max_cancel_depth, record=False).latency
    if len(ids) < 2:
        return 1
    slots = 1
    # nodes whose signal is known to hold >= 2 packets, as (lo, hi, depth)
    stack = [(0, len(ids), 0)]
    while stack:
        lo, hi, depth = stack.pop()
        slots += 1  # query the 0 child
        mid = bisect_left(ids, (ids[lo] >> (u - depth) << 1 | 1) << (u - depth - 1), lo, hi)
        a, b = mid - lo, hi - mid
        if b >= 2:
            stack.append((mid, hi, depth + 1))
        if a >= 2:
            stack.append((lo, mid, depth + 1))
    return slots
