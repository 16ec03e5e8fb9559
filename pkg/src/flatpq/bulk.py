"""Parallel bulk updates on the shared heap.

Both bulk operations run inside one exclusive region (the combiner holds
the global lock) but fan the heavy traversals out to parallel tasks that
coordinate through per-slot flags, so correctness never depends on which
thread runs which task or how their steps interleave.

Bulk extract of the k smallest keys:  planning finds the k victims, marks
every victim slot LOCKED, refills the surviving victim slots from the
replacement keys and the untouched tail of the array, and truncates the
heap.  One sift task then starts at each victim slot.  A sift at v waits
until neither child is LOCKED, picks the smaller child c, and if a[v] is
larger it sets LOCKED(c), swaps, clears LOCKED(v), and continues at c;
otherwise it clears LOCKED(v) and stops.  Waits only ever point at strict
descendants, so the tasks cannot cycle.

Bulk insert of k keys:  planning appends k fresh slots, computes the split
nodes (nodes whose subtree on both sides contains fresh slots), and marks
them SPLIT.  One traversal starts at the root carrying the sorted key set;
helper tasks park at the split nodes.  At each node the traversal swaps its
smallest carried key into a[v] when that improves a[v] (returning the old
a[v] to the carried set, which keeps the set no smaller than everything on
the path above).  At a SPLIT node it partitions the carried keys by count,
keeps the left part, posts the right part to the split node's mailbox for
the parked helper, and clears SPLIT.  Fresh slots consume the smallest
remaining carried key on arrival.

Planning runs before any task is dispatched and touches the arrays
directly; only task-side accesses go through the instrumented accessors
and appear in traces.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field

from .executor import Task, drive
from .heap import LOCKED, SPLIT, BinaryHeap


def slot_in_subtree(slot: int, root: int) -> bool:
    d = slot.bit_length() - root.bit_length()
    return d >= 0 and (slot >> d) == root


class OrderedKeySet:
    """Sorted multiset of carried keys; k stays small, so a list is fine."""

    __slots__ = ("_keys",)

    def __init__(self, keys=(), presorted: bool = False):
        self._keys = list(keys) if presorted else sorted(keys)

    def min(self):
        return self._keys[0]

    def pop_min(self):
        return self._keys.pop(0)

    def insert(self, key) -> None:
        insort(self._keys, key)

    def split_at(self, count: int) -> tuple["OrderedKeySet", "OrderedKeySet"]:
        """Smallest count keys and the rest, as two new sets."""
        return (OrderedKeySet(self._keys[:count], presorted=True),
                OrderedKeySet(self._keys[count:], presorted=True))

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self):
        return iter(self._keys)


class Mailbox:
    """Single-shot handoff of (start slot, keys, targets) to a parked task.

    post() fills the payload and only then raises the ready flag, so a
    reader that observes ready always sees the full payload.
    """

    __slots__ = ("_heap", "_slot", "_ready", "_payload")

    def __init__(self, heap: BinaryHeap, slot: int):
        self._heap = heap
        self._slot = slot
        self._ready = False
        self._payload = None

    def post(self, child: int, keys: OrderedKeySet, targets: list[int]) -> None:
        self._payload = (child, keys, targets)
        p = self._heap.probe
        if p is not None:
            p.on_write(("m", self._slot))
        self._ready = True

    def try_take(self):
        p = self._heap.probe
        if p is not None:
            p.on_read(("m", self._slot))
        if not self._ready:
            return None
        return self._payload


# -- extract ---------------------------------------------------------------


@dataclass
class ExtractPlan:
    victims: list[tuple[int, object]]   # (slot, value) ascending by (value, slot)
    sift_starts: list[int]
    refill_sources: list
    new_size: int


def plan_extract_batch(heap: BinaryHeap, k: int, replacements) -> ExtractPlan:
    """Lock the k victim slots, refill the survivors, truncate the heap.

    The i-th smallest victim that survives truncation receives the i-th
    refill source; sources are the replacements in ascending order followed
    by the values of tail slots that are not themselves victims, in slot
    order.  Victim slots beyond the new size are simply abandoned, and
    their sift tasks only clear the flag.  Every replacement lands in some
    surviving slot because exactly k - len(replacements) slots disappear.
    """
    if not 0 <= k <= heap.size:
        raise ValueError(f"batch size {k} outside [0, {heap.size}]")
    if len(replacements) > k:
        raise ValueError("more replacements than extracted keys")
    if k == 0:
        return ExtractPlan([], [], [], heap.size)
    victims = heap.find_k_smallest(k)
    old_size = heap.size
    new_size = old_size - (k - len(replacements))
    vals = heap.values
    flags = heap.flags
    for slot, _ in victims:
        flags[slot] |= LOCKED
    victim_slots = {slot for slot, _ in victims}
    retained = [vals[t] for t in range(new_size + 1, old_size + 1)
                if t not in victim_slots]
    sources = sorted(replacements) + retained
    targets = [slot for slot, _ in victims if slot <= new_size]
    assert len(targets) == len(sources)
    for slot, val in zip(targets, sources):
        vals[slot] = val
    heap.size = new_size
    return ExtractPlan(victims, [s for s, _ in victims], sources, new_size)


def sift_down_locked_task(heap: BinaryHeap, v: int):
    """Sift task starting at v; LOCKED(v) must already be set for it.

    The loop never reads a child value while that child is LOCKED, and it
    hands its own lock down the path one level at a time, so concurrent
    sifts stay strictly ordered along any root-to-leaf path.
    """
    assert heap.flags[v] & LOCKED, f"sift at {v} without its lock"
    size = heap.size
    while True:
        left = 2 * v
        if left > size:
            heap.unlock(v)
            yield ("visit", v)
            return
        right = left + 1 if left + 1 <= size else 0
        while True:
            if heap.is_locked(left):
                yield ("wait", left)
                continue
            if right and heap.is_locked(right):
                yield ("wait", right)
                continue
            break
        child = left
        cval = heap.get(left)
        if right:
            rval = heap.get(right)
            if rval < cval:
                child = right
                cval = rval
        own = heap.get(v)
        if own <= cval:
            heap.unlock(v)
            yield ("visit", v)
            return
        heap.lock(child)
        heap.put(v, cval)
        heap.put(child, own)
        heap.unlock(v)
        yield ("visit", v)
        v = child


def extract_tasks(heap: BinaryHeap, plan: ExtractPlan) -> list[Task]:
    return [Task("sift", s, sift_down_locked_task(heap, s))
            for s in plan.sift_starts]


def bulk_extract(heap: BinaryHeap, k: int, replacements, executor) -> list:
    """Remove the k smallest keys (reinserting the replacements) and return
    them in ascending order."""
    plan = plan_extract_batch(heap, k, replacements)
    executor.run(heap, extract_tasks(heap, plan))
    return [val for _, val in plan.victims]


# -- insert ----------------------------------------------------------------


@dataclass
class SplitMap:
    """Split nodes for one batch: slot -> (targets going left, going right)."""

    entries: dict[int, tuple[int, int]] = field(default_factory=dict)
    targets: list[int] = field(default_factory=list)


def compute_split_nodes(size: int, k: int) -> SplitMap:
    """Walk the paths to the k fresh slots and record where they diverge.

    A node is a split node when fresh slots lie in both of its subtrees.
    While k <= size + 1 no fresh slot is an ancestor of another, and the
    walk finds exactly k - 1 split nodes; with a batch that outgrows the
    heap several fresh slots share a path and fewer splits exist.
    """
    if k < 1:
        raise ValueError("empty insert batch")
    targets = list(range(size + 1, size + k + 1))
    smap = SplitMap(targets=targets)
    stack = [(1, targets)]
    while stack:
        v, ts = stack.pop()
        if ts[0] == v:
            ts = ts[1:]
            if not ts:
                continue
        if len(ts) == 1 and ts[0] != v:
            if not slot_in_subtree(ts[0], v):
                raise AssertionError(f"target {ts[0]} escaped subtree {v}")
            continue
        left_child = 2 * v
        # Membership is not contiguous in slot order (left and right
        # subtree slots interleave across levels), so partition by subtree.
        left = [t for t in ts if slot_in_subtree(t, left_child)]
        if len(left) == len(ts):
            stack.append((left_child, ts))
        elif not left:
            stack.append((left_child + 1, ts))
        else:
            right = [t for t in ts if not slot_in_subtree(t, left_child)]
            smap.entries[v] = (len(left), len(right))
            stack.append((left_child, left))
            stack.append((left_child + 1, right))
    return smap


@dataclass
class InsertPlan:
    base_size: int
    keys: OrderedKeySet
    split_map: SplitMap
    mailboxes: dict[int, Mailbox]


def plan_insert_batch(heap: BinaryHeap, values,
                      split_map: SplitMap | None = None) -> InsertPlan:
    """Reserve the fresh slots, mark the split nodes, park the mailboxes."""
    if not values:
        raise ValueError("empty insert batch")
    k = len(values)
    heap.ensure_capacity(heap.size + k)
    base = heap.size
    smap = split_map if split_map is not None else compute_split_nodes(base, k)
    flags = heap.flags
    for slot in smap.entries:
        flags[slot] |= SPLIT
    mailboxes = {slot: Mailbox(heap, slot) for slot in smap.entries}
    heap.size = base + k
    return InsertPlan(base, OrderedKeySet(values), smap, mailboxes)


def insert_traversal_task(heap: BinaryHeap, plan: InsertPlan, v: int,
                          keys: OrderedKeySet, targets: list[int]):
    """Carry keys down from v toward targets, splitting off helpers.

    Invariants along the way: the carried keys and remaining targets stay
    equal in number, every target lies in the subtree of the current node,
    and after the value step at v nothing carried is smaller than a[v].
    """
    while True:
        assert len(keys) == len(targets)
        if v > plan.base_size:
            assert targets[0] == v
            heap.put(v, keys.pop_min())
            targets.pop(0)
            if not keys:
                yield ("visit", v)
                return
        else:
            stored = heap.get(v)
            if keys.min() < stored:
                heap.put(v, keys.pop_min())
                keys.insert(stored)
        if __debug__ and keys:
            assert keys.min() >= heap.values[v], \
                f"carried key {keys.min()} below a[{v}]={heap.values[v]}"
        if heap.is_split(v):
            left_child = 2 * v
            left_targets = [t for t in targets if slot_in_subtree(t, left_child)]
            right_targets = [t for t in targets
                             if not slot_in_subtree(t, left_child)]
            keys, right_keys = keys.split_at(len(left_targets))
            targets = left_targets
            plan.mailboxes[v].post(left_child + 1, right_keys, right_targets)
            heap.clear_split(v)
            yield ("visit", v)
            yield ("handoff", v)
            v = left_child
        else:
            yield ("visit", v)
            v = 2 * v if slot_in_subtree(targets[0], 2 * v) else 2 * v + 1


def station_task(heap: BinaryHeap, plan: InsertPlan, split_slot: int):
    """Helper parked at a split node; resumes the handed-off right part."""
    mailbox = plan.mailboxes[split_slot]
    while True:
        got = mailbox.try_take()
        if got is not None:
            break
        yield ("mwait", split_slot)
    child, keys, targets = got
    yield from insert_traversal_task(heap, plan, child, keys, targets)


def insert_tasks(heap: BinaryHeap, plan: InsertPlan) -> list[Task]:
    tasks = [Task("root", 1,
                  insert_traversal_task(heap, plan, 1, plan.keys,
                                        list(plan.split_map.targets)))]
    for slot in sorted(plan.mailboxes):
        tasks.append(Task("station", slot, station_task(heap, plan, slot)))
    return tasks


def bulk_insert(heap: BinaryHeap, values, executor) -> None:
    """Insert all values with one root traversal plus one helper per split."""
    plan = plan_insert_batch(heap, values)
    executor.run(heap, insert_tasks(heap, plan))


def sift_down_locked(heap: BinaryHeap, v: int) -> None:
    """Drive one sift task to completion on the calling thread.

    Only valid when no other task holds a flag below v, otherwise the wait
    loop would spin on the caller.
    """
    drive(sift_down_locked_task(heap, v))
