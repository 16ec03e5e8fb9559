"""Combining engine: batch published requests into bulk rounds.

Life of an operation: the owner publishes a Request (status PUSHED) in its
publication slot and spins.  Whoever holds the combiner lock is the leader
for one round.  The leader drains every PUSHED request, sorts the inserts
by key, and plans the round:

  * up to min(E, S) extracts succeed; the rest get EMPTY immediately
  * the min(E', I) smallest inserts are eliminated against victim slots,
    never touching a traversal, and finish at planning time
  * ascending victim values go to the extract requests in drain order
  * surviving extracts become sift tasks, surviving inserts become one
    root traversal plus split-node helpers

The leader hands each task to the request owner that is already spinning
for it (status PUSHED -> SIFT, assignment carries the task), keeps one task
for itself, and waits for FINISHED on the whole batch before the next
phase.  A phase with a single task skips the flag machinery and runs the
plain sequential operation instead.  Owners whose request finished early
(eliminated, EMPTY, or absorbed into a neighbouring traversal) never wake
for work at all.

Statuses only move forward (PUSHED -> SIFT -> FINISHED), results are
written before the status that publishes them, and requests are drained
exactly once because draining requires the lock.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from enum import IntEnum

from .bulk import (compute_split_nodes, extract_tasks, insert_tasks,
                   plan_extract_batch, plan_insert_batch)
from .executor import drive, pause
from .heap import EMPTY, BinaryHeap


class Status(IntEnum):
    PUSHED = 0
    SIFT = 1
    FINISHED = 2


KIND_EXTRACT = 0
KIND_INSERT = 1


class Request:
    """One published operation.

    For inserts, value is the key to insert.  For extracts, value starts as
    None and the leader stores the result there (a key or EMPTY) before
    finishing the request.  assignment, when set, is the Task the owner
    must drive.
    """

    __slots__ = ("kind", "value", "status", "assignment", "owner")

    def __init__(self, kind: int, value=None, owner: int = -1):
        self.kind = kind
        self.value = value
        self.status = Status.PUSHED
        self.assignment = None
        self.owner = owner

    def advance(self, status: Status) -> None:
        assert status > self.status, \
            f"status moved backwards: {self.status!r} -> {status!r}"
        self.status = status


class CombinerLock:
    """try-lock wrapper; the holder is the round leader."""

    __slots__ = ("_lock",)

    def __init__(self):
        self._lock = threading.Lock()

    def try_acquire(self) -> bool:
        return self._lock.acquire(False)

    def acquire(self) -> None:
        self._lock.acquire()

    def release(self) -> None:
        self._lock.release()


class PublicationList:
    """Fixed per-thread slots plus an overflow queue for guests.

    Publishing is lock-free for slot owners (one writer per slot) and a
    plain append for guests.  drain() runs only under the combiner lock;
    slot entries stay in place and are skipped once finished, overflow
    entries are consumed on drain.
    """

    __slots__ = ("slots", "overflow")

    def __init__(self, capacity: int):
        self.slots: list[Request | None] = [None] * capacity
        self.overflow: deque[Request] = deque()

    def publish(self, slot_index: int, request: Request) -> None:
        if slot_index >= 0:
            self.slots[slot_index] = request
        else:
            self.overflow.append(request)

    def drain(self) -> list[Request]:
        out = []
        for r in self.slots:
            if r is not None and r.status == Status.PUSHED:
                out.append(r)
        ov = self.overflow
        while True:
            try:
                out.append(ov.popleft())
            except IndexError:
                break
        return out


def collect_and_sort(drained: list[Request]) -> tuple[list[Request], list[Request]]:
    """Split a drained batch into extracts (drain order) and inserts
    (ascending by key, owner breaking ties)."""
    extracts = [r for r in drained if r.kind == KIND_EXTRACT]
    inserts = [r for r in drained if r.kind == KIND_INSERT]
    inserts.sort(key=lambda r: (r.value, r.owner))
    return extracts, inserts


@dataclass
class BatchPlan:
    extracts: list[Request]
    inserts: list[Request]
    eliminated: list[Request]
    remaining: list[Request]
    extract_plan: object        # ExtractPlan | None (None when 0 or 1 extracts ran)
    split_map: object           # SplitMap | None
    successful_extracts: int


def plan_round(heap: BinaryHeap, extracts: list[Request],
               inserts: list[Request]) -> BatchPlan:
    """Decide the whole round and finish everything that needs no task.

    inserts must already be sorted ascending.  On return: every eliminated
    insert and every EMPTY extract is FINISHED, victim values are assigned
    to the surviving extract requests, locked victim slots and the refills
    are in place (when two or more extracts survive), the split map for the
    surviving inserts is computed, and capacity for them is reserved.
    """
    n_extract = len(extracts)
    n_avail = heap.size
    e_ok = min(n_extract, n_avail)
    n_elim = min(e_ok, len(inserts))
    replacements = [r.value for r in inserts[:n_elim]]

    for r in extracts[e_ok:]:
        r.value = EMPTY
        r.advance(Status.FINISHED)

    extract_plan = None
    if e_ok == 1:
        victim = heap.values[1]
        if n_elim:
            heap.values[1] = replacements[0]
            heap.sift_down(1)
        else:
            heap.extract_min()
        extracts[0].value = victim
        extracts[0].advance(Status.FINISHED)
    elif e_ok > 1:
        extract_plan = plan_extract_batch(heap, e_ok, replacements)
        for req, (_, val) in zip(extracts, extract_plan.victims):
            req.value = val

    for r in inserts[:n_elim]:
        r.advance(Status.FINISHED)

    remaining = inserts[n_elim:]
    split_map = None
    if len(remaining) > 1:
        split_map = compute_split_nodes(heap.size, len(remaining))
    heap.ensure_capacity(heap.size + len(remaining))
    return BatchPlan(extracts, inserts, inserts[:n_elim], remaining,
                     extract_plan, split_map, e_ok)


class DirectDispatch:
    """Phase runner for simulation and recovery: one executor runs every
    task, requests are finished afterwards."""

    def __init__(self, executor):
        self.executor = executor

    def run_phase(self, heap: BinaryHeap, tasks, requests) -> None:
        self.executor.run(heap, tasks)
        for r in requests:
            r.advance(Status.FINISHED)


class LeaderDispatch:
    """Phase runner for live combining: request owners drive the tasks.

    Task i belongs to requests[i].  The leader keeps its own request's task
    (or the first one when it has none in the batch), publishes the rest
    through assignment + SIFT, drives its task, and spin-waits for the
    stragglers, yielding the GIL so owners can run on a saturated machine.
    """

    def __init__(self, self_request: Request | None = None, spin: int = 4):
        self.self_request = self_request
        self.spin = spin

    def run_phase(self, heap: BinaryHeap, tasks, requests) -> None:
        assert len(tasks) == len(requests)
        claim = 0
        if self.self_request is not None and self.self_request in requests:
            claim = requests.index(self.self_request)
        for i, (task, req) in enumerate(zip(tasks, requests)):
            if i == claim:
                continue
            req.assignment = task
            req.advance(Status.SIFT)
        drive(tasks[claim].gen, self.spin)
        requests[claim].advance(Status.FINISHED)
        misses = 0
        while any(r.status != Status.FINISHED for r in requests):
            misses += 1
            pause(misses, self.spin)


def execute_round(heap: BinaryHeap, extracts: list[Request],
                  inserts: list[Request], dispatch) -> BatchPlan:
    """Run one combine round: plan, extract phase, then insert phase.

    Single-task phases bypass the flag machinery via the sequential
    operations, which produce byte-identical arrays.  When a round has more
    surviving inserts than traversal tasks (a batch larger than the heap),
    the extras ride along in the carried key sets and finish here.
    """
    plan = plan_round(heap, extracts, inserts)
    if plan.extract_plan is not None:
        tasks = extract_tasks(heap, plan.extract_plan)
        dispatch.run_phase(heap, tasks, plan.extracts[:plan.successful_extracts])
    remaining = plan.remaining
    if len(remaining) == 1:
        heap.insert_path(remaining[0].value)
        remaining[0].advance(Status.FINISHED)
    elif remaining:
        iplan = plan_insert_batch(heap, [r.value for r in remaining],
                                  split_map=plan.split_map)
        tasks = insert_tasks(heap, iplan)
        for r in remaining[len(tasks):]:
            r.advance(Status.FINISHED)
        dispatch.run_phase(heap, tasks, remaining[:len(tasks)])
    return plan
