"""Sequential binary heap operations and invariants."""

import heapq
import random

import pytest

from flatpq.heap import EMPTY, BinaryHeap, CapacityError, LOCKED
from helpers import layout


def test_empty_heap_extract_returns_marker():
    h = BinaryHeap()
    assert h.extract_min() is EMPTY
    assert len(h) == 0
    assert repr(EMPTY) == "EMPTY"


def test_extract_min_example():
    h = BinaryHeap.from_values([1, 5, 3, 8, 6])
    assert h.extract_min() == 1
    assert h.values[1:h.size + 1] == [3, 5, 6, 8]
    assert h.size == 4


def test_extract_min_drains_in_sorted_order():
    rnd = random.Random(7)
    for trial in range(50):
        vals = [rnd.randrange(1000) for _ in range(rnd.randrange(0, 60))]
        h = BinaryHeap.from_values(vals)
        drained = []
        while True:
            got = h.extract_min()
            if got is EMPTY:
                break
            drained.append(got)
        assert drained == sorted(vals)


def test_from_values_matches_heapq_layout():
    rnd = random.Random(3)
    for trial in range(30):
        vals = [rnd.randrange(100) for _ in range(rnd.randrange(1, 40))]
        expect = list(vals)
        heapq.heapify(expect)
        h = BinaryHeap.from_values(vals)
        assert h.values[1:h.size + 1] == expect
        assert h.heap_property_holds()


def test_sift_down_example():
    h = layout([9, 2, 3, 4])
    h.sift_down(1)
    assert h.values[1:5] == [2, 4, 3, 9]


def test_sift_down_prefers_left_child_on_ties():
    h = layout([5, 2, 2])
    h.sift_down(1)
    assert h.values[1:4] == [2, 5, 2]


def test_sift_down_rejects_slot_outside_heap():
    h = BinaryHeap.from_values([1, 2, 3])
    with pytest.raises(ValueError):
        h.sift_down(0)
    with pytest.raises(ValueError):
        h.sift_down(4)


def test_insert_path_example():
    h = layout([1, 5, 3, 8], capacity=8)
    h.insert_path(2)
    assert h.values[1:6] == [1, 2, 3, 8, 5]
    assert h.last_insert_visits == 3


def test_insert_variants_agree_on_contents():
    rnd = random.Random(11)
    for trial in range(40):
        keys = [rnd.randrange(50) for _ in range(rnd.randrange(1, 40))]
        a = BinaryHeap(capacity=1)
        b = BinaryHeap(capacity=1)
        for k in keys:
            a.insert_path(k)
            b.insert_classic(k)
            assert a.heap_property_holds()
            assert b.heap_property_holds()
        assert a.multiset() == b.multiset()
        assert sorted(keys) == sorted(a.values[1:a.size + 1])


def test_insert_path_touches_only_the_path():
    h = layout([0, 10, 20, 30, 40, 50, 60], capacity=16)
    before = h.values[:]
    h.insert_path(5)
    target = 8
    path = {target >> s for s in range(target.bit_length())}
    for v in range(1, h.size):
        if v not in path:
            assert h.values[v] == before[v], f"slot {v} off the path moved"


def test_find_k_smallest_example():
    h = layout([1, 3, 2, 7, 8, 4, 9])
    assert h.find_k_smallest(3) == [(1, 1), (3, 2), (2, 3)]


def test_find_k_smallest_matches_sorted_prefix():
    rnd = random.Random(23)
    for trial in range(60):
        vals = [rnd.randrange(30) for _ in range(rnd.randrange(1, 80))]
        h = BinaryHeap.from_values(vals)
        k = rnd.randrange(0, len(vals) + 1)
        got = h.find_k_smallest(k)
        assert [val for _, val in got] == sorted(vals)[:k]
        slots = [slot for slot, _ in got]
        assert len(set(slots)) == len(slots)
        for slot, val in got:
            assert h.values[slot] == val


def test_find_k_smallest_breaks_value_ties_by_slot():
    h = layout([2, 2, 2, 5, 6, 7, 8])
    assert h.find_k_smallest(3) == [(1, 2), (2, 2), (3, 2)]


def test_find_k_smallest_rejects_bad_k():
    h = BinaryHeap.from_values([1, 2, 3])
    with pytest.raises(ValueError):
        h.find_k_smallest(4)
    with pytest.raises(ValueError):
        h.find_k_smallest(-1)


def test_capacity_doubles_on_demand():
    h = BinaryHeap(capacity=2)
    for k in range(20):
        h.insert_path(k)
    assert h.size == 20
    assert h.capacity >= 20
    assert h.heap_property_holds()


def test_fixed_capacity_overflow_raises():
    h = BinaryHeap(capacity=2, growable=False)
    h.insert_path(1)
    h.insert_path(2)
    with pytest.raises(CapacityError):
        h.insert_path(3)


def test_capacity_must_be_positive():
    with pytest.raises(ValueError):
        BinaryHeap(capacity=0)


def test_clone_is_independent():
    h = BinaryHeap.from_values([4, 1, 3])
    c = h.clone()
    c.extract_min()
    c.flags[1] |= LOCKED
    assert h.size == 3
    assert h.multiset() == {1: 1, 3: 1, 4: 1}
    assert h.flags_clear()
    assert not c.flags_clear()


def test_check_valid_spots_flag_leaks_and_disorder():
    h = BinaryHeap.from_values([1, 2, 3])
    assert h.check_valid()
    h.flags[2] |= LOCKED
    assert not h.check_valid()
    h.flags[2] = 0
    bad = layout([5, 1, 2])
    assert not bad.heap_property_holds()
    assert not bad.check_valid()


def test_multiset_counts_duplicates():
    h = BinaryHeap.from_values([2, 2, 7])
    assert h.multiset() == {2: 2, 7: 1}
