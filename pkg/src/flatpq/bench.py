"""Workload harness: throughput runs, stress checking, simulation sweeps.

Workloads draw from SplitMix64 streams only, so any two runs with the same
seed issue the same operations per thread.  Timed runs measure throughput
over a wall-clock window; fixed-op runs issue an exact operation count,
which makes everything except the timing columns reproducible.
"""

from __future__ import annotations

import math
import threading
import time
from collections import Counter
from dataclasses import dataclass, field

from .bulk import bulk_extract, bulk_insert
from .executor import StepTrace, check_wait_direction, run_deterministic
from .heap import EMPTY, BinaryHeap
from .queues import make_queue
from .rng import SplitMix64, spawn_seeds

CSV_HEADER = "impl,threads,init_size,key_range,ratio,run,ops,mops"

# Operation mix draws compare 53 uniform bits against ratio * 2**53, so the
# extract/insert decision is identical in any language with the same rng.
_RATIO_ONE = 1 << 53


@dataclass
class WorkloadConfig:
    impl: str = "flat-parallel"
    threads: int = 1
    init_size: int = 100_000
    key_range: int = 10_000
    ratio: float = 0.5            # fraction of extract_min operations
    duration_s: float = 1.0
    warmup_s: float = 1.0
    runs: int = 3
    seed: int = 1
    ops_per_run: int | None = None   # fixed-op mode when set

    def validate(self) -> None:
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must lie in [0, 1]")
        if self.key_range < 1:
            raise ValueError("key_range must be >= 1")
        if self.init_size < 0 or self.runs < 1:
            raise ValueError("bad workload sizes")


@dataclass
class RunReport:
    config: WorkloadConfig
    ops: list[int] = field(default_factory=list)
    durations: list[float] = field(default_factory=list)

    @property
    def mops(self) -> list[float]:
        return [o / d / 1e6 for o, d in zip(self.ops, self.durations)]

    def mean_mops(self) -> float:
        m = self.mops
        return sum(m) / len(m) if m else 0.0

    def csv_rows(self) -> list[str]:
        cfg = self.config
        return [
            f"{cfg.impl},{cfg.threads},{cfg.init_size},{cfg.key_range},"
            f"{cfg.ratio:g},{i},{o},{m:.6f}"
            for i, (o, m) in enumerate(zip(self.ops, self.mops))
        ]


def _mix_threshold(ratio: float) -> int:
    return int(ratio * _RATIO_ONE)


def _worker_timed(q, seed, key_range, thresh, stop, out, idx, barrier):
    q.register_thread()
    rng = SplitMix64(seed)
    nxt = rng.next_u64
    insert = q.insert
    extract = q.extract_min
    ops = 0
    barrier.wait()
    while not stop[0]:
        if (nxt() >> 11) < thresh:
            extract()
        else:
            insert(nxt() % key_range)
        ops += 1
    out[idx] = ops
    q.deregister_thread()


def _worker_counted(q, seed, key_range, thresh, count, out, idx, barrier,
                    ledger=None):
    q.register_thread()
    rng = SplitMix64(seed)
    nxt = rng.next_u64
    insert = q.insert
    extract = q.extract_min
    inserted = []
    extracted = []
    empties = 0
    barrier.wait()
    for _ in range(count):
        if (nxt() >> 11) < thresh:
            got = extract()
            if got is EMPTY:
                empties += 1
            else:
                extracted.append(got)
        else:
            key = nxt() % key_range
            insert(key)
            inserted.append(key)
    out[idx] = count
    if ledger is not None:
        ledger[idx] = (inserted, extracted, empties)
    q.deregister_thread()


def _run_once(q, cfg: WorkloadConfig, seeds: list[int], timed: bool,
              ledger=None) -> tuple[int, float]:
    thresh = _mix_threshold(cfg.ratio)
    out = [0] * cfg.threads
    barrier = threading.Barrier(cfg.threads + 1)
    threads = []
    stop = [False]
    for i in range(cfg.threads):
        if timed:
            args = (q, seeds[i], cfg.key_range, thresh, stop, out, i, barrier)
            t = threading.Thread(target=_worker_timed, args=args)
        else:
            per = cfg.ops_per_run // cfg.threads
            if i < cfg.ops_per_run % cfg.threads:
                per += 1
            args = (q, seeds[i], cfg.key_range, thresh, per, out, i, barrier,
                    ledger)
            t = threading.Thread(target=_worker_counted, args=args)
        threads.append(t)
        t.start()
    barrier.wait()
    t0 = time.perf_counter()
    if timed:
        time.sleep(cfg.duration_s)
        stop[0] = True
    for t in threads:
        t.join()
    elapsed = time.perf_counter() - t0
    return sum(out), elapsed


def run_bench(cfg: WorkloadConfig) -> RunReport:
    """Prepopulate once, warm up once, then measure cfg.runs runs."""
    cfg.validate()
    q = make_queue(cfg.impl, capacity=max(cfg.init_size, 1024),
                   max_threads=cfg.threads + 8)
    q.prepopulate(cfg.init_size, cfg.key_range, cfg.seed)
    timed = cfg.ops_per_run is None
    all_seeds = spawn_seeds(cfg.seed, cfg.threads * (cfg.runs + 1))
    report = RunReport(cfg)
    for phase in range(cfg.runs + 1):
        seeds = all_seeds[phase * cfg.threads:(phase + 1) * cfg.threads]
        if phase == 0:
            if timed:
                warm = WorkloadConfig(**{**cfg.__dict__,
                                         "duration_s": cfg.warmup_s})
                if cfg.warmup_s > 0:
                    _run_once(q, warm, seeds, True)
            else:
                _run_once(q, cfg, seeds, False)
            continue
        ops, elapsed = _run_once(q, cfg, seeds, timed)
        report.ops.append(ops)
        report.durations.append(cfg.duration_s if timed else elapsed)
    return report


def write_csv(path: str, reports: list[RunReport], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode) as f:
        if not append:
            f.write(CSV_HEADER + "\n")
        for r in reports:
            for row in r.csv_rows():
                f.write(row + "\n")


# -- stress ------------------------------------------------------------------


@dataclass
class StressVerdict:
    passed: bool
    messages: list[str]
    total_ops: int
    empties: int

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        head = f"{state}: {self.total_ops} ops, {self.empties} empty extracts"
        return head if self.passed else head + "; " + "; ".join(self.messages)


def run_stress(cfg: WorkloadConfig, total_ops: int = 1_000_000) -> StressVerdict:
    """Hammer one queue, then reconcile the key ledger against a quiesced
    snapshot: prepopulated + inserted keys must equal extracted + remaining
    keys exactly, the heap must satisfy heap order, and no flag may be left
    set."""
    cfg.validate()
    cfg = WorkloadConfig(**{**cfg.__dict__, "ops_per_run": total_ops})
    q = make_queue(cfg.impl, capacity=max(cfg.init_size, 1024),
                   max_threads=cfg.threads + 8)
    prepop = q.prepopulate(cfg.init_size, cfg.key_range, cfg.seed)
    seeds = spawn_seeds(cfg.seed, cfg.threads)
    ledger: dict[int, tuple[list, list, int]] = {}
    ops, _ = _run_once(q, cfg, seeds, timed=False, ledger=ledger)
    report = q.quiesce()

    expected = Counter(prepop)
    extracted = Counter()
    empties = 0
    for inserted, got, emp in ledger.values():
        expected.update(inserted)
        extracted.update(got)
        empties += emp
    expected.subtract(extracted)
    remaining = report.multiset()

    messages = []
    if not report.heap_property:
        messages.append("final heap violates heap order")
    if not report.flags_clear:
        messages.append("flags left set after quiesce")
    diff = expected - remaining
    if diff:
        some = dict(list(diff.items())[:5])
        messages.append(f"keys lost: {some}")
    diff = remaining - expected
    if diff:
        some = dict(list(diff.items())[:5])
        messages.append(f"keys duplicated or invented: {some}")
    return StressVerdict(not messages, messages, ops, empties)


# -- simulation --------------------------------------------------------------


@dataclass
class SimRow:
    op: str
    n: int
    k: int
    seed: int
    work: int
    span: int
    max_remote: int
    tasks: int

    def csv_row(self) -> str:
        return (f"{self.op},{self.n},{self.k},{self.seed},"
                f"{self.work},{self.span},{self.max_remote},{self.tasks}")


SIM_CSV_HEADER = "op,n,k,seed,work,span,max_remote,tasks"


@dataclass
class SimReport:
    rows: list[SimRow] = field(default_factory=list)

    def constants(self) -> dict[str, float]:
        """Largest observed cost over its bound denominator, per metric.

        work is compared against k * (log2 n + 1), span against
        k + log2 n, and per-task remote accesses against P + log2 n with
        P equal to the task count."""
        c_work = c_span = c_remote = 0.0
        for r in self.rows:
            log_n = math.log2(r.n) if r.n > 1 else 1.0
            c_work = max(c_work, r.work / (r.k * (log_n + 1)))
            c_span = max(c_span, r.span / (r.k + log_n))
            c_remote = max(c_remote, r.max_remote / (r.tasks + log_n))
        return {"work": c_work, "span": c_span, "remote": c_remote}


def simulate_batch(heap: BinaryHeap, op: str, k: int, seed: int,
                   key_range: int = 1 << 31) -> StepTrace:
    """Run one bulk operation on a clone of heap under a seeded schedule."""
    h = heap.clone()
    rng = SplitMix64(seed ^ 0x5EED)
    if op == "extract":
        def program(ex):
            bulk_extract(h, k, [], ex)
    elif op == "insert":
        vals = [rng.below(key_range) for _ in range(k)]

        def program(ex):
            bulk_insert(h, vals, ex)
    else:
        raise ValueError(f"unknown op {op!r}")
    trace = run_deterministic(program, seed)
    assert h.check_valid(), f"{op} k={k} seed={seed} left the heap invalid"
    check_wait_direction(trace)
    return trace


def run_simulate(ns: list[int], ks: list[int], seeds: int,
                 ops: tuple[str, ...] = ("extract", "insert"),
                 key_range: int = 1 << 31) -> SimReport:
    """Sweep bulk operations over heap sizes, batch sizes, and schedule
    seeds; every trace is validated before it lands in the report."""
    report = SimReport()
    for n in ns:
        rng_vals = SplitMix64(n ^ 0xB0B)
        base = BinaryHeap.from_values(
            [rng_vals.below(key_range) for _ in range(n)],
            capacity=n + max(ks, default=1))
        for k in ks:
            if k > n:
                continue
            for seed in range(seeds):
                for op in ops:
                    trace = simulate_batch(base, op, k, seed,
                                           key_range=key_range)
                    assert trace.work >= k
                    report.rows.append(SimRow(
                        op, n, k, seed, trace.work, trace.span,
                        trace.max_remote(), len(trace.task_remote)))
    return report
