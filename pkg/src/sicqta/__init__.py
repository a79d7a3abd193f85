"""Query tree random access with successive interference cancellation."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DomainError,
    Outcome,
    ResolutionTrace,
    SlotOutcome,
    SlotRecord,
    TreeParams,
    cancel,
    matches,
    observe,
)
from .qta import QtaState, qta_latency, qta_step, run_qta  # noqa: E402
from .sic import SicqtaState, chain_cancel, run_sicqta, sicqta_latency, sicqta_step  # noqa: E402
from .bounds import (  # noqa: E402
    BoundsRow,
    best_case_oracle,
    bounds_row,
    qta_lower,
    qta_upper,
    qta_upper_loose,
    sicqta_lower,
    sicqta_upper,
    skipped_slots,
    worst_case_oracle,
)

__all__ = [
    "BoundsRow", "DomainError", "Outcome", "QtaState", "ResolutionTrace", "SicqtaState",
    "SlotOutcome", "SlotRecord", "TreeParams", "best_case_oracle", "bounds_row", "cancel",
    "chain_cancel", "matches", "observe", "qta_latency", "qta_lower", "qta_step", "qta_upper",
    "qta_upper_loose", "run_qta", "run_sicqta", "sicqta_latency", "sicqta_lower", "sicqta_step",
    "sicqta_upper", "skipped_slots", "worst_case_oracle",
]
