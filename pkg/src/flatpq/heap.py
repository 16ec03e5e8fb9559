"""Array-based binary min-heap with per-slot coordination flags.

The heap is 1-indexed: slot v has children 2v and 2v+1 and parent v // 2;
slot 0 is a dead pad so the index arithmetic stays branch-free.  Sequential
operations assume exclusive access.  The per-slot flag byte (LOCKED, SPLIT)
exists for the bulk kernel, which coordinates several workers inside one
exclusive region; sequential code never sets flags.

Keys are integers compared with <.  The intended domain is the signed
64-bit range, which every supported platform reproduces exactly.
"""

from __future__ import annotations

import heapq
from collections import Counter

LOCKED = 1
SPLIT = 2


class CapacityError(RuntimeError):
    """Raised when a fixed-capacity heap runs out of slots."""


class _Empty:
    """Result marker for extract_min on an empty heap."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = _Empty()


class BinaryHeap:
    def __init__(self, capacity: int = 16, growable: bool = True):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.values: list = [0] * (capacity + 1)
        self.flags = bytearray(capacity + 1)
        self.size = 0
        self.capacity = capacity
        self.growable = growable
        # Set by the deterministic executor while it runs; accessor methods
        # report shared-location traffic to it.
        self.probe = None
        self.last_insert_visits = 0

    @classmethod
    def from_values(cls, vals, capacity: int | None = None) -> "BinaryHeap":
        """Build a heap holding vals, laid out by heapq.heapify.

        heapq uses 0-indexed slots with children 2i+1 and 2i+2; shifting the
        whole array up by one preserves every parent/child pair, so the
        result is a valid layout here as well.
        """
        a = list(vals)
        n = len(a)
        heapq.heapify(a)
        h = cls(capacity=max(capacity or n, n, 1))
        h.values[1:n + 1] = a
        h.size = n
        return h

    def clone(self) -> "BinaryHeap":
        h = BinaryHeap.__new__(BinaryHeap)
        h.values = self.values[:]
        h.flags = bytearray(self.flags)
        h.size = self.size
        h.capacity = self.capacity
        h.growable = self.growable
        h.probe = None
        h.last_insert_visits = 0
        return h

    def ensure_capacity(self, need: int) -> None:
        if need <= self.capacity:
            return
        if not self.growable:
            raise CapacityError(f"need {need} slots, capacity {self.capacity} is fixed")
        cap = self.capacity
        while cap < need:
            cap *= 2
        self.values.extend([0] * (cap - self.capacity))
        self.flags.extend(b"\x00" * (cap - self.capacity))
        self.capacity = cap

    # -- sequential operations ------------------------------------------

    def extract_min(self):
        """Pop the root, or return EMPTY if there is nothing to pop."""
        if self.size == 0:
            return EMPTY
        vals = self.values
        top = vals[1]
        last = vals[self.size]
        self.size -= 1
        if self.size:
            vals[1] = last
            self.sift_down(1)
        return top

    def sift_down(self, v: int) -> None:
        """Restore heap order below v; both subtrees of v must be valid."""
        if not 1 <= v <= self.size:
            raise ValueError(f"slot {v} outside [1, {self.size}]")
        vals = self.values
        size = self.size
        while True:
            c = 2 * v
            if c > size:
                return
            if c + 1 <= size and vals[c + 1] < vals[c]:
                c += 1
            if vals[v] <= vals[c]:
                return
            vals[v], vals[c] = vals[c], vals[v]
            v = c

    def insert_path(self, key) -> None:
        """Insert by walking the root-to-new-slot path carrying key.

        At each node on the path the carried value swaps with the stored
        value whenever it is smaller, so larger path values shift one level
        down and the walk touches exactly the path nodes.
        """
        target = self.size + 1
        self.ensure_capacity(target)
        vals = self.values
        val = key
        for shift in range(target.bit_length() - 1, 0, -1):
            v = target >> shift
            if val < vals[v]:
                val, vals[v] = vals[v], val
        vals[target] = val
        self.size = target
        self.last_insert_visits = target.bit_length()

    def insert_classic(self, key) -> None:
        """Insert by appending at the end and sifting up."""
        target = self.size + 1
        self.ensure_capacity(target)
        vals = self.values
        vals[target] = key
        self.size = target
        v = target
        visits = 1
        while v > 1:
            p = v >> 1
            if vals[p] <= vals[v]:
                break
            vals[p], vals[v] = vals[v], vals[p]
            v = p
            visits += 1
        self.last_insert_visits = visits

    def find_k_smallest(self, k: int) -> list[tuple[int, object]]:
        """Return the k smallest entries as (slot, value), ascending by
        (value, slot).

        Runs a best-first search over the heap structure with a candidate
        heap seeded at the root, so the cost is O(k log k) regardless of
        size.  Ties break toward the smaller slot, which makes the victim
        choice deterministic.
        """
        if not 0 <= k <= self.size:
            raise ValueError(f"k {k} outside [0, {self.size}]")
        out: list[tuple[int, object]] = []
        if k == 0:
            return out
        vals = self.values
        size = self.size
        cand = [(vals[1], 1)]
        for _ in range(k):
            val, v = heapq.heappop(cand)
            out.append((v, val))
            c = 2 * v
            if c <= size:
                heapq.heappush(cand, (vals[c], c))
                if c + 1 <= size:
                    heapq.heappush(cand, (vals[c + 1], c + 1))
        return out

    # -- inspection ------------------------------------------------------

    def heap_property_holds(self) -> bool:
        vals = self.values
        return all(vals[v >> 1] <= vals[v] for v in range(2, self.size + 1))

    def flags_clear(self) -> bool:
        return not any(self.flags)

    def check_valid(self) -> bool:
        """Heap order everywhere and no flag left set."""
        return self.heap_property_holds() and self.flags_clear()

    def multiset(self) -> Counter:
        return Counter(self.values[1:self.size + 1])

    def __len__(self) -> int:
        return self.size

    # -- instrumented slot access (bulk-kernel tasks only) ---------------
    #
    # Task code must touch shared slots through these so the deterministic
    # executor can account for reads and writes.  Planning code runs before
    # tasks are dispatched and uses the arrays directly.

    def get(self, v: int):
        p = self.probe
        if p is not None:
            p.on_read(("v", v))
        return self.values[v]

    def put(self, v: int, key) -> None:
        p = self.probe
        if p is not None:
            p.on_write(("v", v))
        self.values[v] = key

    def is_locked(self, v: int) -> bool:
        p = self.probe
        if p is not None:
            p.on_read(("f", v))
        return bool(self.flags[v] & LOCKED)

    def lock(self, v: int) -> None:
        p = self.probe
        if p is not None:
            p.on_write(("f", v))
        self.flags[v] |= LOCKED

    def unlock(self, v: int) -> None:
        p = self.probe
        if p is not None:
            p.on_write(("f", v))
        self.flags[v] &= ~LOCKED

    def is_split(self, v: int) -> bool:
        p = self.probe
        if p is not None:
            p.on_read(("f", v))
        return bool(self.flags[v] & SPLIT)

    def clear_split(self, v: int) -> None:
        p = self.probe
        if p is not None:
            p.on_write(("f", v))
        self.flags[v] &= ~SPLIT
