"""Monte Carlo harnesses: batch resolution and gated continuous arrivals.

Randomness is organised in fixed-size chunks, each with its own generator
seeded from ``(seed, point, chunk)``, so results do not depend on how the
chunks are spread over worker processes.
"""
from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .bounds import lower_bound, upper_bound
from .model import DomainError, TreeParams
from .qta import qta_latency, run_qta
from .sic import run_sicqta, sicqta_latency

CHUNK = 1000
WORKERS_ENV = "SICQTA_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# -- batch resolution ------------------------------------------------------

@dataclass(frozen=True)
class BatchConfig:
    u: int
    M: int
    trials: int = 10_000
    seed: int = 0
    algorithm: str = "sicqta"
    max_cancel_depth: Optional[int] = None
    point: int = 0

    def validate(self):
        TreeParams(self.u)
        if not 0 <= self.M <= 1 << self.u:
            raise DomainError(f"M={self.M} outside [0, 2^{self.u}]")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.algorithm not in ("qta", "sicqta"):
            raise DomainError(f"unknown algorithm {self.algorithm!r}")
        if self.max_cancel_depth is not None and self.max_cancel_depth < 1:
            raise DomainError("max_cancel_depth must be >= 1")


@dataclass
class BatchStats:
    config: BatchConfig
    latency: np.ndarray
    lower: int
    upper: int
    violations: int

    @property
    def throughput(self) -> np.ndarray:
        return self.config.M / self.latency

    def summary(self) -> dict:
        y, tp = self.latency, self.throughput
        p1, p50, p99 = np.percentile(y, [1, 50, 99])
        return dict(
            u=self.config.u, M=self.config.M, algorithm=self.config.algorithm,
            trials=len(y), mean_latency=float(y.mean()), p1_latency=float(p1),
            p50_latency=float(p50), p99_latency=float(p99), min_latency=int(y.min()),
            max_latency=int(y.max()), mean_throughput=float(tp.mean()),
            min_throughput=float(tp.min()), lower_bound=self.lower,
            upper_bound=self.upper, violations=self.violations,
        )


def _draw_ids(rng: np.random.Generator, n: int, N: int, M: int) -> np.ndarray:
    # M distinct ids per row, uniform over all M-subsets
    if M == N:
        return np.broadcast_to(np.arange(N), (n, N))
    return np.sort(np.argsort(rng.random((n, N)), axis=1)[:, :M], axis=1)


def _batch_chunk(job) -> np.ndarray:
    cfg, chunk, n = job
    rng = np.random.default_rng([cfg.seed, cfg.point, chunk])
    ids = _draw_ids(rng, n, 1 << cfg.u, cfg.M)
    if cfg.algorithm == "sicqta":
        f = lambda c: sicqta_latency(c, cfg.u, cfg.max_cancel_depth)  # noqa: E731
    else:
        f = lambda c: qta_latency(c, cfg.u)  # noqa: E731
    return np.fromiter((f(row) for row in ids.tolist()), dtype=np.int64, count=n)


def _chunks(cfg: BatchConfig):
    return [(cfg, i, min(CHUNK, cfg.trials - i * CHUNK)) for i in range(-(-cfg.trials // CHUNK))]


def run_batch(cfg: BatchConfig, workers: Optional[int] = None) -> BatchStats:
    """Resolve ``trials`` independent batches of M uniformly drawn distinct ids."""
    cfg.validate()
    workers = default_workers() if workers is None else workers
    y = np.concatenate(_map(_batch_chunk, _chunks(cfg), workers))
    lo, hi = lower_bound(cfg.algorithm, cfg.M), upper_bound(cfg.algorithm, cfg.M, cfg.u)
    violations = 0
    if cfg.max_cancel_depth is None:
        violations = int(np.count_nonzero((y < lo) | (y > hi)))
    return BatchStats(cfg, y, lo, hi, violations)


# -- gated continuous arrivals --------------------------------------------

@dataclass(frozen=True)
class ArrivalConfig:
    u: int
    lam: float
    horizon: int = 200_000
    seed: int = 0
    algorithm: str = "sicqta"
    warmup: Optional[int] = None
    max_cancel_depth: Optional[int] = None
    point: int = 0

    @property
    def warmup_slots(self) -> int:
        return self.horizon // 10 if self.warmup is None else self.warmup

    def validate(self):
        TreeParams(self.u)
        if self.lam < 0:
            raise DomainError("lambda must be >= 0")
        if self.horizon <= self.warmup_slots:
            raise DomainError("horizon must exceed warmup")
        if self.algorithm not in ("qta", "sicqta"):
            raise DomainError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class ArrivalStats:
    config: ArrivalConfig
    mean_delay: float
    throughput: float
    mean_cri: float
    arrivals: int
    decoded: int
    queued: int
    in_flight: int
    cris: int
    # mean delay of packets decoded in each quarter of the horizon
    quarter_delay: tuple[float, float, float, float]
    backlog_mean: float
    backlog_max: int
    stable: bool

    def row(self) -> dict:
        return dict(
            u=self.config.u, **{"lambda": self.config.lam}, mean_delay=self.mean_delay,
            throughput=self.throughput, mean_cri=self.mean_cri, stable_flag=self.stable,
        )


def _resolver(cfg):
    params = TreeParams(cfg.u)
    if cfg.algorithm == "qta":
        return lambda ids: run_qta(ids, params)
    return lambda ids: run_sicqta(ids, params, cfg.max_cancel_depth, record=False)


def run_arrivals(cfg: ArrivalConfig) -> ArrivalStats:
    """Gated access with Poisson arrivals spread uniformly over the N devices.

    Packets arriving during a contention resolution interval (CRI) wait for
    the next one; each backlogged device enters a CRI with its head-of-line
    packet.  A slot with no backlog is a one-slot idle CRI.  Delay runs from
    the arrival slot to the slot in which the packet is decoded.
    """
    cfg.validate()
    rng = np.random.default_rng([cfg.seed, cfg.point])
    N = 1 << cfg.u
    resolve = _resolver(cfg)
    queues = [deque() for _ in range(N)]
    backlogged: set[int] = set()
    quarter = cfg.horizon / 4
    q_sum = [0.0] * 4
    q_cnt = [0] * 4
    delay_sum = 0.0
    n_delay = 0
    decoded_total = 0
    arrivals_total = 0
    cri_lengths = []
    backlog_sum = 0.0
    backlog_samples = 0
    backlog_max = 0
    backlog = 0
    in_flight = 0
    t = 0  # slots elapsed; slot t+1 is the next one to be used

    def arrive(start: int, length: int):
        # Poisson batches for slots start+1 .. start+length, uniform device choice
        nonlocal arrivals_total, backlog
        counts = rng.poisson(cfg.lam, length)
        total = int(counts.sum())
        if not total:
            return
        slots = np.repeat(np.arange(start + 1, start + length + 1), counts)
        devices = rng.integers(0, N, total)
        for s, d in zip(slots.tolist(), devices.tolist()):
            queues[d].append(s)
            backlogged.add(d)
        arrivals_total += total
        backlog += total

    while t < cfg.horizon:
        if not backlogged:
            arrive(t, 1)
            t += 1
            cri_lengths.append(1)
            continue
        contenders = sorted(backlogged)
        heads = {d: queues[d].popleft() for d in contenders}
        for d in contenders:
            if not queues[d]:
                backlogged.discard(d)
        in_flight = len(contenders)
        backlog -= in_flight
        trace = resolve(contenders)
        y = trace.latency
        if t + y > cfg.horizon:
            arrive(t, cfg.horizon - t)
            t = cfg.horizon
            break
        arrive(t, y)
        for d, k in trace.decoded.items():
            done = t + k
            if done > cfg.warmup_slots:
                delay = done - heads[d]
                delay_sum += delay
                n_delay += 1
                qi = min(3, int((done - 1) // quarter))
                q_sum[qi] += delay
                q_cnt[qi] += 1
        decoded_total += len(contenders)
        in_flight = 0
        t += y
        cri_lengths.append(y)
        backlog_sum += backlog
        backlog_samples += 1
        backlog_max = max(backlog_max, backlog)

    qd = tuple(q_sum[i] / q_cnt[i] if q_cnt[i] else float("nan") for i in range(4))
    mean_delay = delay_sum / n_delay if n_delay else 0.0
    stable = _is_stable(qd)
    return ArrivalStats(
        cfg, mean_delay, decoded_total / cfg.horizon,
        float(np.mean(cri_lengths)) if cri_lengths else 0.0,
        arrivals_total, decoded_total, backlog, in_flight, len(cri_lengths),
        qd, backlog_sum / backlog_samples if backlog_samples else 0.0, backlog_max, stable,
    )


def _is_stable(quarter_delay) -> bool:
    second, last = quarter_delay[1], quarter_delay[3]
    if np.isnan(last):
        # nothing decoded late in the run: either no traffic or a stuck backlog
        return np.isnan(second)
    if np.isnan(second):
        return False
    return last <= 2 * second


# -- sweeps ----------------------------------------------------------------

def _batch_job(job):
    cfg, = job
    return run_batch(cfg, workers=1)


def _arrival_job(job):
    cfg, = job
    return run_arrivals(cfg)


def parse_range(text: str, kind=int) -> list:
    """``"a..b"`` (inclusive), ``"a..b:step"`` or a comma list."""
    text = text.strip()
    if ".." in text:
        span, _, step = text.partition(":")
        a, b = span.split("..")
        if kind is int:
            return list(range(int(a), int(b) + 1, int(step or 1)))
        a, b, s = float(a), float(b), float(step or 0.01)
        n = int(round((b - a) / s))
        return [round(a + i * s, 10) for i in range(n + 1)]
    return [kind(x) for x in text.split(",") if x.strip()]


def sweep(
    template: Union[BatchConfig, ArrivalConfig],
    axis: Sequence,
    workers: Optional[int] = None,
) -> list:
    """One stats object per axis value (M for batches, lambda for arrivals).

    Points are seeded from ``(template.seed, point index)``.
    """
    axis = list(axis)
    if not axis:
        raise DomainError("sweep axis is empty")
    workers = default_workers() if workers is None else workers
    if isinstance(template, BatchConfig):
        cfgs = [replace(template, M=int(m), point=i) for i, m in enumerate(axis)]
        for c in cfgs:
            c.validate()
        if workers <= 1:
            return [run_batch(c, workers=1) for c in cfgs]
        # split on chunk level so a single large point still spreads out
        jobs = [j for c in cfgs for j in _chunks(c)]
        parts = _map(_batch_chunk, jobs, workers)
        out, pos = [], 0
        for c in cfgs:
            n = len(_chunks(c))
            y = np.concatenate(parts[pos:pos + n])
            pos += n
            lo, hi = lower_bound(c.algorithm, c.M), upper_bound(c.algorithm, c.M, c.u)
            bad = 0 if c.max_cancel_depth is not None else int(np.count_nonzero((y < lo) | (y > hi)))
            out.append(BatchStats(c, y, lo, hi, bad))
        return out
    cfgs = [replace(template, lam=float(x), point=i) for i, x in enumerate(axis)]
    for c in cfgs:
        c.validate()
    return _map(_arrival_job, [(c,) for c in cfgs], workers)


def stability_threshold(
    u: int,
    lo: float = 0.5,
    hi: float = 1.1,
    coarse: float = 0.04,
    fine: float = 0.01,
    horizon: int = 200_000,
    seed: int = 0,
    algorithm: str = "sicqta",
    workers: Optional[int] = None,
) -> tuple[float, list[ArrivalStats]]:
    """Largest lambda judged stable before the first unstable one.

    A coarse ascending scan brackets the first unstable rate, then the
    bracket is rescanned with the fine step.  If nothing is flagged the
    last grid point is returned.  Each lambda gets its own random stream,
    so the result does not depend on the worker count.
    """
    workers = default_workers() if workers is None else max(1, workers)
    template = ArrivalConfig(u, 0.0, horizon, seed, algorithm)

    def run(lams, offset):
        cfgs = [replace(template, lam=x, point=offset + i) for i, x in enumerate(lams)]
        return _map(_arrival_job, [(c,) for c in cfgs], workers)

    n = int(round((hi - lo) / coarse))
    grid = [round(lo + i * coarse, 10) for i in range(n + 1)]
    seen: list[ArrivalStats] = []
    best = None
    bad = None
    for start in range(0, len(grid), workers):
        stats = run(grid[start:start + workers], start)
        seen.extend(stats)
        for s in stats:
            if not s.stable:
                bad = s.config.lam
                break
            best = s.config.lam
        if bad is not None:
            break
    if bad is None:
        return best, seen
    base = best if best is not None else lo - fine
    m = int(round((bad - base) / fine))
    refine = [round(base + i * fine, 10) for i in range(1, m)]
    if refine:
        # fine points get their own streams
        stats = run(refine, len(grid))
        seen.extend(stats)
        for s in stats:
            if not s.stable:
                break
            best = s.config.lam
    return (best if best is not None else 0.0), seen
