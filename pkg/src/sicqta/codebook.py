"""Frame-level view of access decisions: codebooks, activity and outcomes.

A codebook is an ``N x d`` binary matrix, row ``j`` being the slots device
``j`` transmits in.  For an activity vector ``n`` the per-slot packet count
is ``f = n @ C``; the collision channel succeeds exactly where ``f == 1``.
With SIC, clean packets are cancelled everywhere they appear and the frame
is peeled until no slot holds exactly one undecoded packet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .bounds import BudgetExceeded, ENUMERATION_LIMIT, qta_upper, sicqta_upper, worst_case_oracle
from .model import DomainError, ResolutionTrace


@dataclass(frozen=True, eq=False)
class Codebook:
    rows: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=np.int64))
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise DomainError("codebook needs N rows of length d >= 1")
        if np.any((rows != 0) & (rows != 1)):
            raise DomainError("codebook entries must be 0/1")
        object.__setattr__(self, "rows", rows)

    @property
    def N(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def row_strings(self) -> list[str]:
        return ["".join(map(str, r)) for r in self.rows]

    @classmethod
    def from_strings(cls, rows: Iterable[str], labels=None) -> "Codebook":
        return cls(np.array([[int(c) for c in r] for r in rows]), labels)

    def dumps(self) -> str:
        return "\n".join([f"d={self.d} N={self.N}", *self.row_strings()]) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "Codebook":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise DomainError("empty codebook file")
        header = dict(tok.split("=") for tok in lines[0].split())
        d, N = int(header["d"]), int(header["N"])
        body = lines[1:]
        if len(body) != N or any(len(r) != d for r in body):
            raise DomainError(f"codebook body does not match header d={d} N={N}")
        return cls.from_strings(body)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Codebook":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _activity(n, C: Codebook) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    if n.shape != (C.N,):
        raise DomainError(f"activity vector of length {n.shape} does not match N={C.N}")
    if np.any((n != 0) & (n != 1)):
        raise DomainError("activity entries must be 0/1")
    return n


def frame_outcome(n, C: Codebook) -> np.ndarray:
    """Packets per slot, ``f = n . C``."""
    return _activity(n, C) @ C.rows


def success_collision(f) -> np.ndarray:
    return (np.asarray(f) == 1).astype(np.int64)


def decode_collision_frame(n, C: Codebook) -> set[int]:
    """Devices owning at least one singleton slot."""
    n = _activity(n, C)
    f = n @ C.rows
    single = f == 1
    return {int(j) for j in np.flatnonzero(n) if np.any(single & (C.rows[j] == 1))}


def decode_sic_frame(n, C: Codebook) -> tuple[set[int], list[tuple[int, int]]]:
    """Peeling decoder.

    Returns the decoded device indices and the resolution order as
    ``(slot, device)`` pairs (0-based).
    """
    n = _activity(n, C)
    active = set(np.flatnonzero(n).tolist())
    cols = [set(np.flatnonzero(C.rows[:, i]).tolist()) & active for i in range(C.d)]
    decoded: set[int] = set()
    order = []
    progress = True
    while progress:
        progress = False
        for i, col in enumerate(cols):
            if len(col) == 1:
                (j,) = col
                decoded.add(j)
                order.append((i, j))
                for other in cols:
                    other.discard(j)
                progress = True
    return decoded, order


def trace_to_codebook(trace: ResolutionTrace) -> Codebook:
    """Participation matrix of a resolution, rows in ascending id order."""
    if any(s is None for s in trace.slots):
        raise DomainError("trace has no slot records")
    if set(trace.decoded) != set(trace.participants):
        raise DomainError("incomplete trace: not every participant was decoded")
    ids = sorted(trace.participants)
    pos = {d: i for i, d in enumerate(ids)}
    rows = np.zeros((len(ids), trace.latency), dtype=np.int64)
    for k, s in enumerate(trace.slots):
        for d in s.transmitters:
            rows[pos[d], k] = 1
    return Codebook(rows, tuple(trace.params.bits(d) for d in ids))


@dataclass(frozen=True)
class CodebookEvaluation:
    channel: str
    samples: int
    exhaustive: bool
    min_successes: int
    mean_successes: float
    reliability: float
    worst_activity: tuple[int, ...]


def evaluate_codebook(
    C: Codebook,
    activity: Union[int, Sequence[int], None] = None,
    channel: str = "collision",
    *,
    samples: int = 10_000,
    seed: int = 0,
) -> CodebookEvaluation:
    """Successes over an activity ensemble.

    ``activity`` is a single 0/1 vector, an integer M (every M-subset, or a
    seeded sample when there are more than ENUMERATION_LIMIT of them), or
    ``None`` for all nonempty activity patterns.  Successes count devices,
    not slots, so a device with several clean slots counts once.
    Reliability is ``E[successes] / E[active]``.
    """
    if channel not in ("collision", "sic"):
        raise ValueError(f"unknown channel {channel!r}")
    exhaustive = True
    if activity is None:
        sets = (c for M in range(1, C.N + 1) for c in combinations(range(C.N), M))
    elif isinstance(activity, (int, np.integer)):
        M = int(activity)
        if math.comb(C.N, M) <= ENUMERATION_LIMIT:
            sets = combinations(range(C.N), M)
        else:
            rng = np.random.default_rng(seed)
            sets = (tuple(sorted(rng.choice(C.N, M, replace=False).tolist())) for _ in range(samples))
            exhaustive = False
    else:
        n = _activity(activity, C)
        sets = [tuple(np.flatnonzero(n).tolist())]

    total_s = total_n = count = 0
    worst = None
    worst_set: tuple[int, ...] = ()
    for c in sets:
        n = np.zeros(C.N, dtype=np.int64)
        n[list(c)] = 1
        if channel == "collision":
            s = len(decode_collision_frame(n, C))
        else:
            s = len(decode_sic_frame(n, C)[0])
        count += 1
        total_s += s
        total_n += len(c)
        if worst is None or s < worst:
            worst, worst_set = s, tuple(c)
    return CodebookEvaluation(
        channel,
        count,
        exhaustive,
        int(worst or 0),
        total_s / count if count else 0.0,
        total_s / total_n if total_n else 1.0,
        worst_set,
    )


# -- supported population under a latency constraint ----------------------

# devices supported by the CAC-SIC access codes at M=3 (L=4, 5); reference only
CAC_SIC_REFERENCE = {4: 7, 5: 11}
# published SICQTA rows, L = 4..7
PUBLISHED_TABLE = {3: {4: 8, 5: 16, 6: 32, 7: 64}, 4: {4: 4, 5: 8, 6: 8, 7: 16}}


def max_supported_devices(
    M: int, L: int, algorithm: str = "sicqta", mode: str = "formula", max_u: int = 40
) -> int:
    """Largest N = 2^u whose worst-case latency for M active devices is <= L.

    Worst-case latency grows with u, so the scan stops at the first failing
    u.  Oracle mode stops early (returning what it certified) when the next
    enumeration would exceed the budget.  Returns 0 if no u qualifies.
    """
    if M < 2 or L < 1:
        raise DomainError("need M >= 2 and L >= 1")
    algorithm = algorithm.lower()
    bound = qta_upper if algorithm == "qta" else sicqta_upper
    best = 0
    u = max(1, (M - 1).bit_length())
    while u <= max_u:
        if mode == "formula":
            y = bound(M, u)
        elif mode == "oracle":
            try:
                y = worst_case_oracle(algorithm, M, u).latency
            except BudgetExceeded:
                break
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if y > L:
            break
        best = 1 << u
        u += 1
    return best


TABLE1_COLUMNS = ["M", "L", "algorithm", "mode", "N_supported", "paper_reference_value", "mismatch"]


def table1_rows(mode: str = "formula") -> list[dict]:
    rows = []
    for L, n in CAC_SIC_REFERENCE.items():
        rows.append(dict(M=3, L=L, algorithm="CAC-SIC", mode="reference", N_supported=n,
                         paper_reference_value=n, mismatch=False))
    for M, ref in PUBLISHED_TABLE.items():
        for L, published in ref.items():
            got = max_supported_devices(M, L, "sicqta", mode)
            rows.append(dict(M=M, L=L, algorithm="SICQTA", mode=mode, N_supported=got,
                             paper_reference_value=published, mismatch=got != published))
    return rows
