"""Shared helpers for the test suite."""

from flatpq.heap import BinaryHeap


def layout(vals, capacity=None):
    """Build a heap with exactly this slot layout (values[1:] = vals).

    Bypasses from_values so tests can pin fixtures whose slot order
    matters; the caller promises vals already satisfies heap order unless
    the test is specifically about violating it.
    """
    n = len(vals)
    h = BinaryHeap(capacity=max(capacity or n, n, 1))
    h.values[1:n + 1] = list(vals)
    h.size = n
    return h
