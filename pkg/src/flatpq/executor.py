"""Task execution for bulk heap updates, deterministic or threaded.

A bulk update is expressed as a set of tasks, each a generator that yields
one event per scheduling step:

    ("visit", slot)    processed one node; all reads and writes since the
                       previous yield belong to this step
    ("wait", slot)     polled a LOCKED flag at slot and found it set
    ("mwait", slot)    polled the handoff mailbox at slot and found it empty
    ("handoff", slot)  marker following the visit that posted a mailbox

The same generators run under two executors.  DeterministicExecutor
interleaves them on a virtual step clock with a seeded schedule and records
a StepTrace; ThreadExecutor runs each on its own OS thread and turns failed
polls into GIL yields.  Task code never blocks the scheduler: every retry
loop yields a wait event and re-polls, so a stuck schedule is detected as
deadlock instead of hanging.

Accounting in the deterministic executor:

    work    number of visit events
    span    length of the critical path through visits, where a visit
            depends on the issuing task's previous visit and on the last
            writer of every location it read
    remote  per-task count of coherence misses, in a model where each task
            caches the version of every location it touched and pays one
            remote access when the cached version is stale (first touches
            and reads after a foreign write are remote, repeat accesses are
            local, each failed poll of an invalidated flag pays again)
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .rng import SplitMix64


@dataclass
class Task:
    """One schedulable unit of a bulk update."""

    kind: str          # "sift" | "root" | "station"
    slot: int          # start slot, or the split slot for a station
    gen: object        # generator yielding step events


class DeadlockError(RuntimeError):
    def __init__(self, edges: list[tuple[int, str, int]]):
        desc = ", ".join(f"task {t} {k} on slot {s}" for t, k, s in edges)
        super().__init__(f"all live tasks blocked: {desc}")
        self.edges = edges


@dataclass
class StepTrace:
    """Events and cost accounting from one deterministic run."""

    events: list[tuple[int, int, str, int]] = field(default_factory=list)
    work: int = 0
    span: int = 0
    task_remote: list[int] = field(default_factory=list)

    def serialize(self) -> str:
        """One event per line: task id, per-task step index, kind, slot."""
        return "".join(f"{t} {i} {k} {s}\n" for t, i, k, s in self.events)

    def max_remote(self) -> int:
        return max(self.task_remote, default=0)


class _CoherenceProbe:
    """Tracks location versions, per-task caches, and write times."""

    __slots__ = ("version", "caches", "remote", "last_write_time",
                 "window_gate", "window_writes", "current")

    def __init__(self):
        self.version: dict = {}
        self.caches: list[dict] = []
        self.remote: list[int] = []
        self.last_write_time: dict = {}
        self.window_gate = 0
        self.window_writes: list = []
        self.current = 0

    def ensure_tasks(self, n: int) -> None:
        while len(self.caches) < n:
            self.caches.append({})
            self.remote.append(0)

    def begin(self, tid: int) -> None:
        self.current = tid
        self.window_gate = 0
        self.window_writes.clear()

    def on_read(self, loc) -> None:
        t = self.last_write_time.get(loc, 0)
        if t > self.window_gate:
            self.window_gate = t
        ver = self.version.get(loc, 0)
        cache = self.caches[self.current]
        if cache.get(loc) != ver:
            self.remote[self.current] += 1
            cache[loc] = ver

    def on_write(self, loc) -> None:
        old = self.version.get(loc, 0)
        self.version[loc] = old + 1
        cache = self.caches[self.current]
        if cache.get(loc) != old:
            self.remote[self.current] += 1
        cache[loc] = old + 1
        self.window_writes.append(loc)


class DeterministicExecutor:
    """Runs tasks to completion on a virtual step clock.

    The schedule is round-robin with seeded jitter: most steps go to the
    next live task in order, and roughly one step in four goes to a task
    picked by the seeded generator.  Identical heap, tasks, and seed give
    an identical schedule, hence an identical trace.

    One executor may run several task sets in sequence (the phases of a
    combine round); the trace accumulates and task ids keep counting up.
    """

    def __init__(self, seed: int = 0, record: bool = True):
        self._rng = SplitMix64(seed)
        self.record = record
        self._probe = _CoherenceProbe() if record else None
        self._events: list[tuple[int, int, str, int]] = []
        self._steps: dict[int, int] = {}
        self._clocks: dict[int, int] = {}
        self._work = 0
        self._span = 0
        self._tid_base = 0

    def run(self, heap, tasks: list[Task]) -> None:
        if not tasks:
            return
        gens = [t.gen for t in tasks]
        n = len(gens)
        base = self._tid_base
        self._tid_base += n
        live = set(range(n))
        blocked: set[int] = set()
        last_wait: dict[int, tuple[str, int]] = {}
        probe = self._probe
        if probe is not None:
            probe.ensure_tasks(base + n)
            heap.probe = probe
        rng = self._rng
        pointer = 0
        try:
            while live:
                if rng.next_u64() & 3 == 0:
                    order = sorted(live)
                    idx = order[rng.below(len(order))]
                else:
                    while pointer not in live:
                        pointer = (pointer + 1) % n
                    idx = pointer
                    pointer = (pointer + 1) % n
                tid = base + idx
                if probe is not None:
                    probe.begin(tid)
                try:
                    ev = next(gens[idx])
                except StopIteration:
                    live.discard(idx)
                    blocked.discard(idx)
                    continue
                kind, slot = ev
                if kind == "visit":
                    if probe is not None:
                        t = max(self._clocks.get(tid, 0), probe.window_gate) + 1
                        self._clocks[tid] = t
                        wt = probe.last_write_time
                        for loc in probe.window_writes:
                            wt[loc] = t
                        if t > self._span:
                            self._span = t
                    self._work += 1
                    blocked.clear()
                elif kind == "handoff":
                    pass
                else:
                    blocked.add(idx)
                    last_wait[idx] = (kind, slot)
                    if blocked >= live:
                        raise DeadlockError(
                            [(base + i, *last_wait[i]) for i in sorted(blocked)])
                if self.record:
                    step = self._steps.get(tid, 0)
                    self._steps[tid] = step + 1
                    self._events.append((tid, step, kind, slot))
        finally:
            heap.probe = None

    def take_trace(self) -> StepTrace:
        remote = list(self._probe.remote) if self._probe is not None else []
        trace = StepTrace(self._events, self._work, self._span, remote)
        assert trace.span <= trace.work
        return trace


def run_deterministic(program, seed: int, record: bool = True) -> StepTrace:
    """Run program(executor) under a fresh seeded executor, return its trace."""
    ex = DeterministicExecutor(seed, record=record)
    program(ex)
    return ex.take_trace()


def pause(misses: int, spin: int = 4) -> None:
    """Backoff for a failed poll: spin briefly, then sleep for real.

    A positive sleep blocks in the kernel and hands the core to whichever
    thread has actual work; bare sched_yield tends to reacquire the
    interpreter lock immediately on a saturated core, leaving handoffs to
    the slow preemption timer.
    """
    if misses <= spin:
        return
    time.sleep(0 if misses <= 2 * spin else 0.000001)


def drive(gen, spin: int = 4) -> None:
    """Run one task generator to completion on the calling thread.

    Failed polls back off with pause(), so progress never depends on the
    preemption timer when peers run on the same core.
    """
    misses = 0
    for ev in gen:
        k = ev[0]
        if k == "wait" or k == "mwait":
            misses += 1
            pause(misses, spin)
        else:
            misses = 0


class ThreadExecutor:
    """Runs each task on its own OS thread.

    With a single task the calling thread drives it directly.  Exceptions
    from task threads are re-raised on the caller.
    """

    def __init__(self, spin: int = 4):
        self.spin = spin

    def run(self, heap, tasks: list[Task]) -> None:
        if not tasks:
            return
        if len(tasks) == 1:
            drive(tasks[0].gen, self.spin)
            return
        import threading

        errors: list[BaseException] = []

        def body(gen):
            try:
                drive(gen, self.spin)
            except BaseException as exc:
                errors.append(exc)

        threads = [threading.Thread(target=body, args=(t.gen,)) for t in tasks]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]


def check_wait_direction(trace: StepTrace) -> None:
    """Assert that every flag wait targets a strict descendant.

    A task's position when it waits is the slot of its next visit; a wait
    on slot w from position v is legal only if w lies strictly inside the
    subtree of v.  Mailbox waits are handoffs between tasks and are not
    constrained.  Raises AssertionError with the offending edge.
    """
    pending: dict[int, list[int]] = {}
    for tid, _, kind, slot in trace.events:
        if kind == "wait":
            pending.setdefault(tid, []).append(slot)
        elif kind == "visit" and tid in pending:
            v = slot
            for w in pending.pop(tid):
                d = w.bit_length() - v.bit_length()
                ok = d > 0 and (w >> d) == v
                assert ok, f"task {tid} at {v} waited on non-descendant {w}"
    assert not pending, f"waits with no following visit: {sorted(pending)}"


def enumerate_interleavings(make_state, max_outcomes: int = 100_000) -> set:
    """Explore every productive interleaving of a small task set.

    make_state() must deterministically rebuild the heap and its tasks.
    The exploration replays a prefix of scheduling choices from scratch for
    each branch, and only branches on steps that change state (visits,
    handoffs, completions); failed polls are no-ops, so schedules differing
    only in them collapse into one branch.  Returns the set of outcomes,
    each a tuple (final values, flags all clear).
    """
    outcomes: set = set()

    def replay(prefix):
        heap, tasks = make_state()
        gens = [t.gen for t in tasks]
        done = [False] * len(gens)
        for c in prefix:
            try:
                next(gens[c])
            except StopIteration:
                done[c] = True
        return heap, gens, done

    def explore(prefix):
        if len(outcomes) >= max_outcomes:
            raise RuntimeError("interleaving explosion")
        heap, gens, done = replay(prefix)
        live = [i for i in range(len(gens)) if not done[i]]
        if not live:
            outcomes.add((tuple(heap.values[1:heap.size + 1]), heap.flags_clear()))
            return
        progressed = False
        for c in live:
            h2, g2, d2 = replay(prefix)
            try:
                ev = next(g2[c])
                kind = ev[0]
            except StopIteration:
                kind = "done"
            if kind in ("wait", "mwait"):
                continue
            progressed = True
            explore(prefix + (c,))
        if not progressed:
            raise DeadlockError([(i, "wait", -1) for i in live])

    explore(())
    return outcomes
