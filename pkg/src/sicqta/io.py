"""JSON / CSV emission and run manifests."""
from __future__ import annotations

import csv
import io
import json
import platform
import time
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .model import DomainError, ResolutionTrace, TreeParams

BATCH_COLUMNS = ["u", "M", "trial", "latency", "throughput"]
ARRIVAL_COLUMNS = ["u", "lambda", "mean_delay", "throughput", "mean_cri", "stable_flag"]
BATCH_SUMMARY_COLUMNS = [
    "u", "M", "algorithm", "trials", "mean_latency", "p1_latency", "p50_latency",
    "p99_latency", "min_latency", "max_latency", "mean_throughput", "min_throughput",
    "lower_bound", "upper_bound", "violations",
]


def trace_to_dict(trace: ResolutionTrace) -> dict:
    bits = trace.params.bits
    if any(s is None for s in trace.slots):
        raise DomainError("trace was run without slot records")
    return {
        "algorithm": trace.algorithm,
        "params": {"u": trace.params.u},
        "participants": [bits(d) for d in sorted(trace.participants)],
        "slots": [
            {
                "index": s.index,
                "query": s.query,
                "outcome": s.outcome.kind.value,
                "decoded": bits(s.outcome.device) if s.outcome.device is not None else None,
                "decoded_by_cancellation": [bits(d) for d in s.cancelled],
            }
            for s in trace.slots
        ],
        "decoded": {bits(d): k for d, k in sorted(trace.decoded.items())},
        "latency": trace.latency,
    }


def trace_to_json(trace: ResolutionTrace, indent: Optional[int] = 2) -> str:
    return json.dumps(trace_to_dict(trace), indent=indent)


def trace_summary_from_json(text: str) -> tuple[TreeParams, list[int], dict[int, int]]:
    data = json.loads(text)
    params = TreeParams(int(data["params"]["u"]))
    ids = [params.parse(b) for b in data["participants"]]
    decoded = {params.parse(b): int(k) for b, k in data["decoded"].items()}
    return params, ids, decoded


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6f}"
    return v


def csv_text(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def write_output(text: str, out: Optional[str], manifest: Optional[dict] = None) -> None:
    """Write to ``out`` (plus ``<out>.manifest.json``) or to stdout."""
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8")
    if manifest is not None:
        manifest = dict(manifest, outputs=[str(path)])
        Path(str(path) + ".manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def manifest(subcommand: str, params: Mapping, started: float, version: str) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": dict(params),
        "seed": params.get("seed"),
        "version": version,
        "python": platform.python_version(),
        "wall_clock_seconds": round(time.time() - started, 3),
    }
