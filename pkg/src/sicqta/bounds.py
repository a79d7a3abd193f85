"""Closed-form latency bounds for QTA / SICQTA and brute-force oracles.

All logarithms are base 2.  For integer ``M >= 2``,
``floor(log2(M / 2)) == floor(log2(M)) - 1 == M.bit_length() - 2``, which
keeps every formula in exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .model import DomainError
from .qta import qta_latency
from .sic import sicqta_latency

ENUMERATION_LIMIT = 10**6


def _check(M: int, u: int, minimum: int) -> None:
    if M < minimum:
        raise DomainError(f"M must be >= {minimum}, got {M}")
    if M > 1 << u:
        raise DomainError(f"M={M} exceeds N=2^{u}")


def _flog2(M: int) -> int:
    return M.bit_length() - 1


def qta_upper_loose(M: int, u: int) -> int:
    """M * (u + 2 - log2 M), rounded down to whole slots."""
    _check(M, u, 1)
    if M & (M - 1) == 0:
        return M * (u + 2 - _flog2(M))
    return math.floor(M * (u + 2) - M * math.log2(M))


def qta_upper(M: int, u: int) -> int:
    _check(M, u, 2)
    return (M // 2) * 2 * (u + 1 - (_flog2(M) - 1)) - 1


def qta_lower(M: int) -> int:
    if M < 1:
        raise DomainError("M must be >= 1")
    return 2 * M - 1


def cancelled_slots(M: int) -> int:
    """Sum of floor(M / 2^i) for i = 1 .. floor(log2 M)."""
    return sum(M >> i for i in range(1, _flog2(M) + 1))


def skipped_slots(M: int, u: int) -> tuple[int, int, int]:
    """Slots SICQTA saves over the QTA worst case: (total, idle part, cancel part)."""
    _check(M, u, 2)
    idle = (M // 2) * (u - 1 - (_flog2(M) - 1))
    cancel = cancelled_slots(M)
    return idle + cancel, idle, cancel


def sicqta_upper(M: int, u: int) -> int:
    _check(M, u, 2)
    return (M // 2) * (u + 4 - _flog2(M)) - 1 - cancelled_slots(M)


def sicqta_lower(M: int) -> int:
    return max(M, 1)


@dataclass(frozen=True)
class BoundsRow:
    M: int
    u: int
    qta_lower: int
    qta_upper_loose: int
    qta_upper: int
    sic_lower: int
    sic_upper: int
    skip_total: int
    skip_idle: int
    skip_cancel: int

    def as_dict(self) -> dict:
        return asdict(self)


BOUNDS_COLUMNS = list(BoundsRow.__dataclass_fields__)


def bounds_row(M: int, u: int) -> BoundsRow:
    total, idle, cancel = skipped_slots(M, u)
    return BoundsRow(
        M, u, qta_lower(M), qta_upper_loose(M, u), qta_upper(M, u),
        sicqta_lower(M), sicqta_upper(M, u), total, idle, cancel,
    )


def upper_bound(algorithm: str, M: int, u: int) -> int:
    if M < 2:
        return 1
    return qta_upper(M, u) if _algo(algorithm) == "qta" else sicqta_upper(M, u)


def lower_bound(algorithm: str, M: int) -> int:
    if M < 2:
        return 1
    return qta_lower(M) if _algo(algorithm) == "qta" else sicqta_lower(M)


# -- brute-force oracles ---------------------------------------------------

class BudgetExceeded(ValueError):
    pass


def _algo(name: str) -> str:
    name = name.lower()
    if name not in ("qta", "sicqta"):
        raise ValueError(f"unknown algorithm {name!r}")
    return name


def latency_function(algorithm: str) -> Callable[[list[int], int], int]:
    return qta_latency if _algo(algorithm) == "qta" else sicqta_latency


@dataclass(frozen=True)
class OracleResult:
    latency: int
    witness: tuple[int, ...]
    exact: bool
    evaluated: int


def _search(algorithm, M, u, budget, seed, better) -> OracleResult:
    if not 0 <= M <= 1 << u:
        raise DomainError(f"M={M} outside [0, 2^{u}]")
    f = latency_function(algorithm)
    N = 1 << u
    if budget == "enumeration":
        if math.comb(N, M) > ENUMERATION_LIMIT:
            raise BudgetExceeded(
                f"C({N},{M}) = {math.comb(N, M)} subsets exceeds {ENUMERATION_LIMIT}; use sampled mode"
            )
        subsets = combinations(range(N), M)
        exact = True
    else:
        n = int(budget)
        rng = np.random.default_rng(seed)
        subsets = (tuple(sorted(rng.choice(N, M, replace=False).tolist())) for _ in range(n))
        exact = False
    best = None
    witness: tuple[int, ...] = ()
    count = 0
    for c in subsets:
        count += 1
        y = f(list(c), u)
        # ties keep the lexicographically smallest id set
        if best is None or better(y, best) or (y == best and c < witness):
            best, witness = y, c
    return OracleResult(best, witness, exact, count)


def worst_case_oracle(
    algorithm: str, M: int, u: int, budget="enumeration", seed: Optional[int] = None
) -> OracleResult:
    """Maximum latency over id sets of size M.

    ``budget`` is ``"enumeration"`` (exact) or a sample count; sampled
    results are only a lower estimate of the true maximum.
    """
    return _search(algorithm, M, u, budget, seed, lambda y, b: y > b)


def best_case_oracle(
    algorithm: str, M: int, u: int, budget="enumeration", seed: Optional[int] = None
) -> OracleResult:
    return _search(algorithm, M, u, budget, seed, lambda y, b: y < b)
