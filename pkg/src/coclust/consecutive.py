"""Co-clustering where every row block and column block is a contiguous range."""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .core import BudgetExhausted, CoClustering, Instance, IntMatrix, Partition, candidate_costs

DEFAULT_MAX_CUTSETS = 10**7


@dataclass(frozen=True)
class CutSet:
    """Block start positions, 0-based: row cut ``r`` starts a new row block at row ``r``.

    Valid row cuts lie in ``1..m-1``.  One-based cuts (``2..m``) are what
    :meth:`one_based` and :meth:`from_one_based` speak.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        for name, cuts in (("row", self.rows), ("column", self.cols)):
            if any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise ValueError(f"{name} cuts must be strictly increasing")
            if cuts and cuts[0] < 1:
                raise ValueError(f"{name} cuts must be at least 1")

    def validate(self, m: int, n: int) -> None:
        if self.rows and self.rows[-1] > m - 1:
            raise ValueError(f"row cut {self.rows[-1]} out of range for m={m}")
        if self.cols and self.cols[-1] > n - 1:
            raise ValueError(f"column cut {self.cols[-1]} out of range for n={n}")

    def one_based(self) -> dict[str, list[int]]:
        return {"rows": [r + 1 for r in self.rows], "cols": [c + 1 for c in self.cols]}

    @classmethod
    def from_one_based(cls, rows, cols) -> CutSet:
        return cls(tuple(r - 1 for r in rows), tuple(c - 1 for c in cols))


def _ranges(cuts, size: int) -> Partition:
    bounds = (0, *cuts, size)
    return Partition(size, tuple(tuple(range(a, b)) for a, b in zip(bounds, bounds[1:])))


def cutset_to_coclustering(cuts: CutSet, m: int, n: int) -> CoClustering:
    cuts.validate(m, n)
    return CoClustering(_ranges(cuts.rows, m), _ranges(cuts.cols, n))


class RectangleExtrema:
    """O(1) max and min over any axis-aligned rectangle, via a 2D sparse table."""

    def __init__(self, matrix: IntMatrix):
        a = matrix.array
        m, n = a.shape
        self.shape = (m, n)
        self._log = [0] * (max(m, n) + 1)
        for x in range(2, len(self._log)):
            self._log[x] = self._log[x // 2] + 1
        self._max = self._build(a, np.maximum)
        self._min = self._build(a, np.minimum)

    def _build(self, a: np.ndarray, op) -> list[list[np.ndarray]]:
        m, n = a.shape
        # table[p][q][i, j] covers rows i..i+2^p-1 and columns j..j+2^q-1
        by_rows = [a]
        p = 1
        while (1 << p) <= m:
            prev = by_rows[-1]
            half = 1 << (p - 1)
            by_rows.append(op(prev[:-half], prev[half:]))
            p += 1
        table = []
        for level in by_rows:
            cols = [level]
            q = 1
            while (1 << q) <= n:
                prev = cols[-1]
                half = 1 << (q - 1)
                cols.append(op(prev[:, :-half], prev[:, half:]))
                q += 1
            table.append(cols)
        return table

    def _query(self, table, op, r0: int, r1: int, c0: int, c1: int) -> int:
        if not (0 <= r0 < r1 <= self.shape[0] and 0 <= c0 < c1 <= self.shape[1]):
            raise IndexError(f"empty or out-of-range rectangle [{r0},{r1})x[{c0},{c1})")
        p = self._log[r1 - r0]
        q = self._log[c1 - c0]
        t = table[p][q]
        r2 = r1 - (1 << p)
        c2 = c1 - (1 << q)
        return int(op(op(t[r0, c0], t[r0, c2]), op(t[r2, c0], t[r2, c2])))

    def max(self, r0: int, r1: int, c0: int, c1: int) -> int:
        """Maximum over rows ``[r0, r1)`` and columns ``[c0, c1)``."""
        return self._query(self._max, max, r0, r1, c0, c1)

    def min(self, r0: int, r1: int, c0: int, c1: int) -> int:
        return self._query(self._min, min, r0, r1, c0, c1)

    def spread(self, r0: int, r1: int, c0: int, c1: int) -> int:
        return self.max(r0, r1, c0, c1) - self.min(r0, r1, c0, c1)


@dataclass
class ConsecutiveStats:
    row_cutsets: int = 0
    cutsets: int = 0


def cutset_count(m: int, n: int, k: int, l: int) -> int:
    return comb(m - 1, k - 1) * comb(n - 1, l - 1)


def solve_consecutive(
    matrix: IntMatrix,
    k: int,
    l: int,
    c: int,
    *,
    max_cutsets: int = DEFAULT_MAX_CUTSETS,
    stats: ConsecutiveStats | None = None,
    extrema: RectangleExtrema | None = None,
) -> CutSet | None:
    """First cut set (row cuts outer, column cuts inner, both lexicographic) of cost at most ``c``."""
    inst = Instance(matrix, k, l, c)
    m, n = matrix.shape
    total = cutset_count(m, n, k, l)
    if total > max_cutsets:
        raise BudgetExhausted(f"{total} cut sets exceed the cap of {max_cutsets}")
    rect = extrema if extrema is not None else RectangleExtrema(matrix)
    stats = stats if stats is not None else ConsecutiveStats()
    col_cutsets = list(itertools.combinations(range(1, n), l - 1))
    for row_cuts in itertools.combinations(range(1, m), k - 1):
        stats.row_cutsets += 1
        strips = list(zip((0, *row_cuts), (*row_cuts, m)))
        # ok[a][b]: columns [a, b) fit within cost c in every row strip
        ok = {}

        def fits(a, b):
            key = (a, b)
            if key not in ok:
                ok[key] = all(rect.spread(r0, r1, a, b) <= inst.c for r0, r1 in strips)
            return ok[key]

        for col_cuts in col_cutsets:
            stats.cutsets += 1
            bounds = (0, *col_cuts, n)
            if all(fits(a, b) for a, b in zip(bounds, bounds[1:])):
                return CutSet(row_cuts, col_cuts)
    return None


def optimize_consecutive(
    matrix: IntMatrix, k: int, l: int, *, max_cutsets: int = DEFAULT_MAX_CUTSETS
) -> tuple[int, CutSet]:
    """Smallest achievable cost and a witness, by binary search over the candidate costs."""
    Instance(matrix, k, l, 0)
    candidates = candidate_costs(matrix)
    rect = RectangleExtrema(matrix)
    cache: dict[int, CutSet | None] = {}

    def feasible(idx: int) -> bool:
        if idx not in cache:
            cache[idx] = solve_consecutive(matrix, k, l, candidates[idx], max_cutsets=max_cutsets, extrema=rect)
        return cache[idx] is not None

    # the largest candidate is the full spread, always feasible
    lo = bisect.bisect_left(range(len(candidates)), True, key=feasible)
    feasible(lo)
    return candidates[lo], cache[lo]
