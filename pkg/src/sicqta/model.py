"""Addresses, queries and slot observations shared by the tree algorithms.

Device ids are plain ``int`` values in ``[0, 2**u)``.  A query is a bit
string prefix; the leftmost (most significant) id bit is split first, so
id ``0b101`` with ``u=3`` renders as ``"101"`` and answers queries ``""``,
``"1"``, ``"10"`` and ``"101"``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional


class DomainError(ValueError):
    """Raised for ids, queries or parameters outside their valid range."""


@dataclass(frozen=True)
class TreeParams:
    u: int

    def __post_init__(self):
        if not isinstance(self.u, int) or self.u < 1:
            raise DomainError(f"u must be an integer >= 1, got {self.u!r}")

    @property
    def N(self) -> int:
        return 1 << self.u

    def bits(self, device: int) -> str:
        self.check_id(device)
        return format(device, f"0{self.u}b")

    def parse(self, text: str) -> int:
        text = text.strip()
        if len(text) != self.u or set(text) - {"0", "1"}:
            raise DomainError(f"id {text!r} is not a {self.u}-bit string")
        return int(text, 2)

    def check_id(self, device: int) -> None:
        if not 0 <= device < self.N:
            raise DomainError(f"id {device} outside [0, {self.N}) for u={self.u}")

    def check_query(self, q: str) -> None:
        if len(q) > self.u or set(q) - {"0", "1"}:
            raise DomainError(f"query {q!r} invalid for u={self.u}")

    def query_range(self, q: str) -> tuple[int, int]:
        """Half-open id interval addressed by prefix ``q``."""
        shift = self.u - len(q)
        base = int(q, 2) if q else 0
        return base << shift, (base + 1) << shift


def matches(device: int, q: str, params: TreeParams) -> bool:
    """True iff the first ``len(q)`` bits of ``device`` equal ``q``."""
    params.check_id(device)
    params.check_query(q)
    lo, hi = params.query_range(q)
    return lo <= device < hi


def sibling(q: str) -> str:
    if not q:
        raise DomainError("the root query has no sibling")
    return q[:-1] + ("1" if q[-1] == "0" else "0")


class Outcome(enum.Enum):
    IDLE = "I"
    SUCCESS = "S"
    COLLISION = "C"


@dataclass(frozen=True)
class SlotOutcome:
    kind: Outcome
    device: Optional[int] = None

    def __str__(self):
        return self.kind.value


def observe(transmitters: Iterable[int]) -> SlotOutcome:
    """Collision-channel observation: depends only on the number of transmitters."""
    tx = frozenset(transmitters)
    if not tx:
        return SlotOutcome(Outcome.IDLE)
    if len(tx) == 1:
        return SlotOutcome(Outcome.SUCCESS, next(iter(tx)))
    return SlotOutcome(Outcome.COLLISION)


def cancel(residual: Iterable[int], known: Iterable[int]) -> frozenset[int]:
    """Subtract already-decoded packets from a stored signal.

    A result of cardinality one exposes a clean, decodable packet.
    """
    return frozenset(residual) - frozenset(known)


@dataclass(frozen=True)
class SlotRecord:
    index: int
    query: str
    outcome: SlotOutcome
    transmitters: frozenset[int]
    # undecoded part of this slot's signal right after the slot was processed
    residual: frozenset[int]
    cancelled: tuple[int, ...] = ()


@dataclass(frozen=True)
class ResolutionTrace:
    params: TreeParams
    participants: frozenset[int]
    slots: tuple[SlotRecord, ...]
    decoded: Mapping[int, int] = field(default_factory=dict)
    algorithm: str = ""

    @property
    def latency(self) -> int:
        return len(self.slots)

    @property
    def M(self) -> int:
        return len(self.participants)

    @property
    def throughput(self) -> float:
        return self.M / self.latency

    def outcomes(self) -> str:
        return "".join(str(s.outcome) for s in self.slots)

    def queries(self) -> list[str]:
        return [s.query for s in self.slots]


def validate_participants(participants: Iterable[int], params: TreeParams) -> list[int]:
    ids = list(participants)
    for d in ids:
        params.check_id(d)
    if len(set(ids)) != len(ids):
        raise DomainError("duplicate device ids")
    return sorted(ids)
