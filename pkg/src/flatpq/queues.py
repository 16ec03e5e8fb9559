"""Concurrent priority queues sharing one interface.

Three implementations, one heap each:

  coarse-lock    every operation takes a global lock and runs the
                 sequential heap code (classic append-and-sift-up insert)
  fc-sequential  operations are published; the lock holder drains the
                 batch and executes every request itself, one at a time
  flat-parallel  operations are published; the lock holder plans a bulk
                 round with elimination and hands parallel tasks back to
                 the waiting owners

Threads that plan to operate concurrently should call register_thread()
once to claim a publication slot; unregistered threads still work through
the overflow queue.  extract_min on an empty queue returns EMPTY rather
than blocking.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass

from .executor import DeterministicExecutor, drive, pause
from .fc import (KIND_EXTRACT, KIND_INSERT, CombinerLock, PublicationList,
                 Request, Status, collect_and_sort, execute_round,
                 DirectDispatch, LeaderDispatch)
from .heap import BinaryHeap


@dataclass
class QuiesceReport:
    """Snapshot taken with the queue locked and no request pending."""

    values: list
    size: int
    heap_property: bool
    flags_clear: bool

    @property
    def ok(self) -> bool:
        return self.heap_property and self.flags_clear

    def multiset(self) -> Counter:
        return Counter(self.values)


class ConcurrentPriorityQueue:
    """Shared interface: insert(key), extract_min() -> key | EMPTY."""

    impl_id = "base"

    def __init__(self, capacity: int = 1024, max_threads: int = 128):
        self._heap = BinaryHeap(capacity)
        self._tls = threading.local()
        self._reg_lock = threading.Lock()
        self._free = list(range(max_threads - 1, -1, -1))
        self.max_threads = max_threads

    def register_thread(self) -> int:
        with self._reg_lock:
            if not self._free:
                raise RuntimeError(f"all {self.max_threads} thread slots taken")
            idx = self._free.pop()
        self._tls.slot = idx
        return idx

    def deregister_thread(self) -> None:
        idx = getattr(self._tls, "slot", None)
        if idx is None:
            return
        self._tls.slot = None
        with self._reg_lock:
            self._free.append(idx)

    def _slot_index(self) -> int:
        idx = getattr(self._tls, "slot", None)
        return -1 if idx is None else idx

    def insert(self, key) -> None:
        raise NotImplementedError

    def extract_min(self):
        raise NotImplementedError

    def prepopulate(self, n: int, key_range: int, seed: int) -> list:
        """Fill an empty queue with n seeded uniform keys; returns them."""
        import heapq

        from .rng import SplitMix64

        if len(self._heap):
            raise ValueError("prepopulate requires an empty queue")
        rng = SplitMix64(seed)
        vals = [rng.below(key_range) for _ in range(n)]
        laid_out = list(vals)
        heapq.heapify(laid_out)
        with self._exclusive():
            h = self._heap
            h.ensure_capacity(n)
            h.values[1:n + 1] = laid_out
            h.size = n
        return vals

    def quiesce(self) -> QuiesceReport:
        raise NotImplementedError

    def _exclusive(self):
        raise NotImplementedError

    def _report(self) -> QuiesceReport:
        h = self._heap
        return QuiesceReport(h.values[1:h.size + 1], h.size,
                             h.heap_property_holds(), h.flags_clear())


class _ExclusiveLockMixin:
    def _exclusive(self):
        return self._lock


class CoarseLockQueue(_ExclusiveLockMixin, ConcurrentPriorityQueue):
    impl_id = "coarse-lock"

    def __init__(self, capacity: int = 1024, max_threads: int = 128):
        super().__init__(capacity, max_threads)
        self._lock = threading.Lock()

    def insert(self, key) -> None:
        with self._lock:
            self._heap.insert_classic(key)

    def extract_min(self):
        with self._lock:
            return self._heap.extract_min()

    def quiesce(self) -> QuiesceReport:
        with self._lock:
            return self._report()


class _CombiningQueue(ConcurrentPriorityQueue):
    """Publication list + combiner lock; subclasses define one round."""

    def __init__(self, capacity: int = 1024, max_threads: int = 128, spin: int = 4):
        super().__init__(capacity, max_threads)
        self._pub = PublicationList(max_threads)
        self._lock = CombinerLock()
        self._spin = spin

    def insert(self, key) -> None:
        self._run_op(Request(KIND_INSERT, key, owner=self._slot_index()))

    def extract_min(self):
        req = Request(KIND_EXTRACT, owner=self._slot_index())
        self._run_op(req)
        return req.value

    def _run_op(self, req: Request) -> None:
        self._pub.publish(self._slot_index(), req)
        misses = 0
        while True:
            status = req.status
            if status == Status.FINISHED:
                return
            if status == Status.SIFT:
                # The leader handed this request its share of the round.
                drive(req.assignment.gen, self._spin)
                req.advance(Status.FINISHED)
                return
            if self._lock.try_acquire():
                try:
                    if req.status != Status.FINISHED:
                        self._combine(req)
                finally:
                    self._lock.release()
                assert req.status == Status.FINISHED
                return
            misses += 1
            pause(misses, self._spin)

    def _combine(self, self_request: Request | None) -> None:
        raise NotImplementedError

    class _Exclusive:
        def __init__(self, lock):
            self._lock = lock

        def __enter__(self):
            self._lock.acquire()

        def __exit__(self, *exc):
            self._lock.release()

    def _exclusive(self):
        return self._Exclusive(self._lock)

    def quiesce(self) -> QuiesceReport:
        with self._exclusive():
            # Leftover requests belong to threads that are still spinning;
            # finish them here so nobody waits on a silent queue.
            while True:
                drained = self._pub.drain()
                if not drained:
                    break
                extracts, inserts = collect_and_sort(drained)
                execute_round(self._heap, extracts, inserts,
                              DirectDispatch(DeterministicExecutor(0, record=False)))
            return self._report()


class FCSequentialQueue(_CombiningQueue):
    """The leader executes every drained request itself, in drain order."""

    impl_id = "fc-sequential"

    def _combine(self, self_request) -> None:
        heap = self._heap
        for r in self._pub.drain():
            if r.kind == KIND_EXTRACT:
                r.value = heap.extract_min()
            else:
                heap.insert_path(r.value)
            r.advance(Status.FINISHED)


class FlatParallelQueue(_CombiningQueue):
    """The leader plans a bulk round and the owners work in parallel."""

    impl_id = "flat-parallel"

    def _combine(self, self_request) -> None:
        extracts, inserts = collect_and_sort(self._pub.drain())
        execute_round(self._heap, extracts, inserts,
                      LeaderDispatch(self_request, spin=self._spin))


IMPLEMENTATIONS: dict[str, type[ConcurrentPriorityQueue]] = {
    CoarseLockQueue.impl_id: CoarseLockQueue,
    FCSequentialQueue.impl_id: FCSequentialQueue,
    FlatParallelQueue.impl_id: FlatParallelQueue,
}


def make_queue(impl: str, capacity: int = 1024,
               max_threads: int = 128) -> ConcurrentPriorityQueue:
    try:
        cls = IMPLEMENTATIONS[impl]
    except KeyError:
        raise ValueError(f"unknown implementation {impl!r}; "
                         f"choose from {sorted(IMPLEMENTATIONS)}") from None
    return cls(capacity=capacity, max_threads=max_threads)
