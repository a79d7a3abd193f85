"""Command line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import BOUNDS_COLUMNS, bounds_row
from .codebook import TABLE1_COLUMNS, table1_rows
from .io import (
    ARRIVAL_COLUMNS,
    BATCH_COLUMNS,
    BATCH_SUMMARY_COLUMNS,
    csv_text,
    manifest,
    trace_to_json,
    write_output,
)
from .model import DomainError, TreeParams
from .qta import run_qta
from .sic import InvariantError, run_sicqta
from .simulator import ArrivalConfig, BatchConfig, parse_range, run_arrivals, run_batch, sweep


class UsageError(Exception):
    pass


def _ids(text: str, params: TreeParams) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(params.parse(tok) if len(tok) == params.u and set(tok) <= {"0", "1"} else int(tok))
    if len(set(out)) != len(out):
        raise UsageError("duplicate ids")
    for d in out:
        params.check_id(d)
    return out


def cmd_resolve(a) -> str:
    params = TreeParams(a.u)
    if (a.ids is None) == (a.random is None):
        raise UsageError("give exactly one of --ids or --random")
    if a.ids is not None:
        ids = _ids(a.ids, params)
    else:
        if not 0 <= a.random <= params.N:
            raise UsageError(f"--random must be in [0, {params.N}]")
        rng = np.random.default_rng(a.seed)
        ids = sorted(rng.choice(params.N, a.random, replace=False).tolist())
    if a.algorithm == "qta":
        trace = run_qta(ids, params)
    else:
        trace = run_sicqta(ids, params, a.max_cancel_depth)
    return trace_to_json(trace) + "\n"


def _m_range(text: str, u: int) -> list[int]:
    try:
        ms = parse_range(text)
    except ValueError as e:
        raise UsageError(f"bad range {text!r}") from e
    if not ms or ms[0] < 2 or ms[-1] > 1 << u or ms != sorted(ms):
        raise UsageError(f"M range must satisfy 2 <= A <= B <= {1 << u}")
    return ms


def cmd_bounds(a) -> str:
    TreeParams(a.u)
    return csv_text(BOUNDS_COLUMNS, (bounds_row(M, a.u).as_dict() for M in _m_range(a.m_range, a.u)))


def _batch_rows(stats):
    for st in stats:
        for i, (y, tp) in enumerate(zip(st.latency.tolist(), st.throughput.tolist())):
            yield dict(u=st.config.u, M=st.config.M, trial=i, latency=y, throughput=float(tp))


def cmd_batch(a) -> str:
    cfg = BatchConfig(a.u, a.m, a.trials, a.seed, a.algorithm, a.max_cancel_depth)
    st = run_batch(cfg)
    s = st.summary()
    print(
        f"u={cfg.u} M={cfg.M} trials={cfg.trials} mean_latency={s['mean_latency']:.6f} "
        f"mean_throughput={s['mean_throughput']:.6f} bounds=[{st.lower},{st.upper}] "
        f"violations={st.violations}",
        file=sys.stderr,
    )
    if a.summary:
        return csv_text(BATCH_SUMMARY_COLUMNS, [s])
    return csv_text(BATCH_COLUMNS, _batch_rows([st]))


def cmd_arrivals(a) -> str:
    cfg = ArrivalConfig(a.u, a.lam, a.horizon, a.seed, a.algorithm, a.warmup, a.max_cancel_depth)
    return csv_text(ARRIVAL_COLUMNS, [run_arrivals(cfg).row()])


def cmd_sweep(a) -> str:
    name, _, values = a.axis.partition("=")
    if name == "m":
        if a.u is None:
            raise UsageError("--u is required")
        axis = parse_range(values)
        stats = sweep(BatchConfig(a.u, 1, a.trials, a.seed, a.algorithm, a.max_cancel_depth), axis)
        if a.per_trial:
            return csv_text(BATCH_COLUMNS, _batch_rows(stats))
        return csv_text(BATCH_SUMMARY_COLUMNS, (s.summary() for s in stats))
    if name == "lambda":
        axis = parse_range(values, float)
        us = [a.u] if a.u is not None else []
        us += parse_range(a.us) if a.us else []
        if not us:
            raise UsageError("give --u or --us")
        rows = []
        for u in us:
            t = ArrivalConfig(u, 0.0, a.horizon, a.seed, a.algorithm, a.warmup, a.max_cancel_depth)
            rows += [s.row() for s in sweep(t, axis)]
        return csv_text(ARRIVAL_COLUMNS, rows)
    raise UsageError("--axis must be m=A..B or lambda=A..B[:step]")


def cmd_table1(a) -> str:
    return csv_text(TABLE1_COLUMNS, table1_rows(a.mode))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sicqta", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_required=False):
        sp.add_argument("--algorithm", choices=["qta", "sicqta"], default="sicqta")
        sp.add_argument("--max-cancel-depth", type=int, default=None)
        sp.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)
        sp.add_argument("--out", default=None, help="output file (a manifest is written next to it)")

    r = sub.add_parser("resolve", help="run one contention resolution and print its trace")
    common(r)
    r.add_argument("--u", type=int, required=True)
    r.add_argument("--ids", help="comma separated u-bit strings or integers")
    r.add_argument("--random", type=int, metavar="M", help="draw M distinct ids")
    r.set_defaults(func=cmd_resolve)

    b = sub.add_parser("bounds", help="closed-form bounds as CSV")
    b.add_argument("--u", type=int, required=True)
    b.add_argument("--m-range", required=True, help="A..B")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bounds)

    bt = sub.add_parser("batch", help="Monte Carlo batch resolution")
    common(bt, seed_required=True)
    bt.add_argument("--u", type=int, required=True)
    bt.add_argument("--m", type=int, required=True)
    bt.add_argument("--trials", type=int, default=10_000)
    bt.add_argument("--summary", action="store_true", help="one summary row instead of per-trial rows")
    bt.set_defaults(func=cmd_batch)

    ar = sub.add_parser("arrivals", help="gated Poisson arrivals")
    common(ar, seed_required=True)
    ar.add_argument("--u", type=int, required=True)
    ar.add_argument("--lambda", dest="lam", type=float, required=True)
    ar.add_argument("--horizon", type=int, default=200_000)
    ar.add_argument("--warmup", type=int, default=None)
    ar.set_defaults(func=cmd_arrivals)

    sw = sub.add_parser("sweep", help="sweep M (batch) or lambda (arrivals)")
    common(sw, seed_required=True)
    sw.add_argument("--axis", required=True, help="m=A..B or lambda=A..B:step")
    sw.add_argument("--u", type=int, default=None)
    sw.add_argument("--us", default=None, help="several u values for lambda sweeps, e.g. 4,6,10")
    sw.add_argument("--trials", type=int, default=10_000)
    sw.add_argument("--horizon", type=int, default=200_000)
    sw.add_argument("--warmup", type=int, default=None)
    sw.add_argument("--per-trial", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    t = sub.add_parser("table1", help="supported population vs latency constraint")
    t.add_argument("--mode", choices=["formula", "oracle"], default="formula")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_table1)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    started = time.time()
    try:
        text = a.func(a)
    except (UsageError, DomainError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"internal invariant violated: {e}", file=sys.stderr)
        return 3
    params = {k: v for k, v in vars(a).items() if k not in ("func", "out")}
    write_output(text, a.out, manifest(a.command, params, started, __version__))
    return 0


if __name__ == "__main__":
    sys.exit(main())
