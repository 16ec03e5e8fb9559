"""Concurrent binary-heap priority queues with combining and bulk updates.

The package provides three queue implementations behind one interface
(make_queue), the bulk-update kernel they share, a deterministic executor
that replays bulk updates on a virtual step clock with cost accounting,
and a workload harness (bench, stress, simulate) exposed through the
flatpq console script.
"""

from .bulk import (OrderedKeySet, bulk_extract, bulk_insert,
                   compute_split_nodes, plan_extract_batch, plan_insert_batch)
from .executor import (DeadlockError, DeterministicExecutor, StepTrace, Task,
                       ThreadExecutor, check_wait_direction, run_deterministic)
from .fc import (Request, Status, collect_and_sort, execute_round, plan_round)
from .heap import EMPTY, BinaryHeap, CapacityError
from .queues import (ConcurrentPriorityQueue, CoarseLockQueue,
                     FCSequentialQueue, FlatParallelQueue, IMPLEMENTATIONS,
                     make_queue)
from .rng import SplitMix64, spawn_seeds

__all__ = [
    "EMPTY", "BinaryHeap", "CapacityError",
    "OrderedKeySet", "bulk_extract", "bulk_insert", "compute_split_nodes",
    "plan_extract_batch", "plan_insert_batch",
    "DeadlockError", "DeterministicExecutor", "StepTrace", "Task",
    "ThreadExecutor", "check_wait_direction", "run_deterministic",
    "Request", "Status", "collect_and_sort", "execute_round", "plan_round",
    "ConcurrentPriorityQueue", "CoarseLockQueue", "FCSequentialQueue",
    "FlatParallelQueue", "IMPLEMENTATIONS", "make_queue",
    "SplitMix64", "spawn_seeds",
]
