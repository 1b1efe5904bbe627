"""Brute-force reference solver for small instances.

Everything else in the package is checked against this module, so it is kept
deliberately naive: enumerate every row partition and every column partition
with the requested block counts and evaluate the cost directly.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .core import CoClustering, Instance, InstanceTooLarge, IntMatrix, Partition

DEFAULT_GUARD = 10**7


def restricted_growth_strings(n: int, max_blocks: int | None = None) -> Iterator[tuple[int, ...]]:
    """Label strings ``a`` with ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``, lexicographically.

    Each string encodes one set partition of ``range(n)``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    cap = n if max_blocks is None else min(max_blocks, n)
    if cap < 1:
        return
    a = [0] * n
    mx = [0] * n  # mx[i] = max(a[:i+1])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and (a[i] > mx[i - 1] or a[i] + 1 >= cap):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        mx[i] = max(mx[i - 1], a[i])
        for t in range(i + 1, n):
            a[t] = 0
            mx[t] = mx[i]


def enumerate_partitions(n: int, max_blocks: int | None = None) -> Iterator[Partition]:
    """Every partition of ``range(n)`` into 1..max_blocks blocks, once each."""
    for rgs in restricted_growth_strings(n, max_blocks):
        yield Partition.from_labels(rgs)


def partitions_with_blocks(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings with exactly ``k`` distinct labels."""
    for rgs in restricted_growth_strings(n, k):
        if max(rgs) == k - 1:
            yield rgs


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def bell(n: int) -> int:
    return sum(stirling2(n, k) for k in range(n + 1))


def _guard(m: int, n: int, k: int, l: int, guard: int) -> None:
    size = stirling2(m, k) * stirling2(n, l)
    if size > guard:
        raise InstanceTooLarge(f"oracle would examine {size} partition pairs (guard {guard})")


def _search(matrix: IntMatrix, k: int, l: int, budget: int | None, guard: int):
    """Yield (cost, row labels, column labels) for every exact-count co-clustering.

    Stops early once a cost ``<= budget`` is produced, when a budget is given.
    """
    m, n = matrix.shape
    _guard(m, n, k, l, guard)
    rows = matrix.rows
    col_parts = list(partitions_with_blocks(n, l))
    for rlab in partitions_with_blocks(m, k):
        # per (row block, column) extremes
        lo = [[None] * n for _ in range(k)]
        hi = [[None] * n for _ in range(k)]
        for i, r in enumerate(rlab):
            lo_r, hi_r = lo[r], hi[r]
            for j, v in enumerate(rows[i]):
                if lo_r[j] is None or v < lo_r[j]:
                    lo_r[j] = v
                if hi_r[j] is None or v > hi_r[j]:
                    hi_r[j] = v
        for clab in col_parts:
            worst = 0
            for r in range(k):
                cl_lo = [None] * l
                cl_hi = [None] * l
                lo_r, hi_r = lo[r], hi[r]
                for j, s in enumerate(clab):
                    if cl_lo[s] is None or lo_r[j] < cl_lo[s]:
                        cl_lo[s] = lo_r[j]
                    if cl_hi[s] is None or hi_r[j] > cl_hi[s]:
                        cl_hi[s] = hi_r[j]
                for s in range(l):
                    if cl_hi[s] - cl_lo[s] > worst:
                        worst = cl_hi[s] - cl_lo[s]
                if budget is not None and worst > budget:
                    break
            yield worst, rlab, clab
            if budget is not None and worst <= budget:
                return


def brute_force_decide(instance: Instance, guard: int = DEFAULT_GUARD) -> CoClustering | None:
    """First co-clustering (in enumeration order) with cost at most ``c``."""
    for worst, rlab, clab in _search(instance.matrix, instance.k, instance.l, instance.c, guard):
        if worst <= instance.c:
            return CoClustering(Partition.from_labels(rlab), Partition.from_labels(clab))
    return None


def brute_force_optimal(matrix: IntMatrix, k: int, l: int, guard: int = DEFAULT_GUARD) -> int:
    """Minimum cost over all (k, l)-co-clusterings."""
    Instance(matrix, k, l, 0)  # validates block counts
    best = None
    for worst, _, _ in _search(matrix, k, l, None, guard):
        if best is None or worst < best:
            best = worst
            if best == 0:
                break
    return best
