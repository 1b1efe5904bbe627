"""Exact algorithms for two row blocks and cost one.

The search follows the induction on the number of column blocks: a block
whose two row windows coincide can be split off and handled recursively; a
block whose windows are disjoint pins down the row partition; if every block
has partially overlapping windows, each column has at most two useful blocks
and the boundary formula shrinks to 2-SAT.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from math import comb

from .core import (
    BudgetExhausted,
    CoClustering,
    Instance,
    IntMatrix,
    Partition,
    alphabet,
    balanced_partition,
    split_to,
)
from .exact_special import solve_one_row_block
from .oracle import partitions_with_blocks
from .sat import (
    DEFAULT_MAX_BOUNDARIES,
    ClusterBoundary,
    Cnf,
    SatStats,
    VarMap,
    decode_assignment,
    solve_two_sat,
)

log = logging.getLogger(__name__)


@dataclass
class FptStats:
    boundaries: int = 0
    row_partitions: int = 0
    branch: str | None = None
    sat: SatStats = field(default_factory=SatStats)


@dataclass(frozen=True)
class FitWitness:
    """Why column ``column`` may or may not go to each column block (cost one, two row blocks)."""

    column: int
    fits: tuple[bool, ...]
    occurrences: dict[int, int]

    def __post_init__(self):
        if not self.occurrences or min(self.occurrences.values()) < 1:
            raise ValueError("occurrence counts must be positive")

    @property
    def m(self) -> int:
        return sum(self.occurrences.values())


def solve_fixed_row_partition(
    matrix: IntMatrix,
    rows: Partition,
    l: int,
    c: int,
    *,
    max_boundaries: int = DEFAULT_MAX_BOUNDARIES,
    stats: FptStats | None = None,
) -> Partition | None:
    """Best column partition once the row partition is fixed.

    A boundary column ("window") ``w`` assigns each row block ``r`` the
    interval ``[w[r], w[r] + c]``; column ``j`` fits ``w`` when every entry
    lies in its row block's interval.  The instance is feasible iff ``l``
    windows cover all columns.  Window order within a boundary is irrelevant,
    so windows are drawn as multisets, and windows that fit no column are
    skipped.  Each column goes to its lowest-index fitting window.
    """
    if rows.ground_size != matrix.m:
        raise ValueError("row partition does not match the matrix")
    if not 1 <= l <= matrix.n:
        raise ValueError(f"l={l} must satisfy 1 <= l <= n={matrix.n}")
    k = len(rows)
    sigma = alphabet(matrix)
    cols = matrix.columns
    # per (row block, column): entries must fit [w, w + c], i.e. max - c <= w <= min
    lo_need = [[max(cols[j][i] for i in rb) - c for j in range(matrix.n)] for rb in rows.blocks]
    hi_need = [[min(cols[j][i] for i in rb) for j in range(matrix.n)] for rb in rows.blocks]
    if any(lo_need[r][j] > hi_need[r][j] for r in range(k) for j in range(matrix.n)):
        return None

    windows = []
    for w in itertools.product(sigma, repeat=k):
        mask = 0
        for j in range(matrix.n):
            if all(lo_need[r][j] <= w[r] <= hi_need[r][j] for r in range(k)):
                mask |= 1 << j
        if mask:
            windows.append(mask)
    if not windows:
        return None
    size = comb(len(windows) + l - 1, l)
    if size > max_boundaries:
        raise BudgetExhausted(f"{size} window combinations exceed the cap of {max_boundaries}")
    full = (1 << matrix.n) - 1
    for combo in itertools.combinations_with_replacement(range(len(windows)), l):
        if stats is not None:
            stats.boundaries += 1
        covered = 0
        for w in combo:
            covered |= windows[w]
        if covered != full:
            continue
        labels = [next(s for s, w in enumerate(combo) if windows[w] >> j & 1) for j in range(matrix.n)]
        return split_to(Partition.from_labels(labels), l)
    return None


def _window_values(u1: int, u2: int) -> tuple[int, int, int]:
    """(only-first, shared, only-second) values of windows [u1, u1+1] and [u2, u2+1], |u1-u2| = 1."""
    if u2 == u1 + 1:
        return u1, u1 + 1, u1 + 2
    return u1 + 1, u1, u1 - 1


def column_fits(occ: Counter, u1: int, u2: int, h1: int, h2: int) -> bool:
    """Fit test for one column against one block with properly overlapping windows.

    The column may only hold the three window values, at most ``h1`` entries
    can be first-window-only and at most ``h2`` second-window-only.
    """
    only1, shared, only2 = _window_values(u1, u2)
    if any(v not in (only1, shared, only2) for v in occ):
        return False
    return occ[only1] <= h1 and occ[only2] <= h2


def fit_witness(matrix: IntMatrix, j: int, boundary: ClusterBoundary, h1: int) -> FitWitness:
    occ = Counter(matrix.columns[j])
    h2 = matrix.m - h1
    fits = tuple(
        column_fits(occ, boundary.values[0][s], boundary.values[1][s], h1, h2)
        for s in range(boundary.l)
    )
    return FitWitness(j, fits, dict(occ))


def _check_overlap_boundary(boundary: ClusterBoundary) -> None:
    if boundary.k != 2:
        raise ValueError("boundary must have two rows")
    pairs = list(zip(*boundary.values))
    if len(set(pairs)) != len(pairs):
        raise ValueError("boundary columns must be pairwise different")
    if any(abs(u1 - u2) != 1 for u1, u2 in pairs):
        raise ValueError("boundary windows must overlap properly (|u1 - u2| = 1)")


def two_candidate_blocks(
    matrix: IntMatrix, j: int, boundary: ClusterBoundary, h1: int, *, _checked: bool = False
) -> tuple[int, int] | None:
    """At most two column blocks column ``j`` ever needs (cost one, ``|I_1| = h1``).

    Returns ``(s1, s2)`` (possibly equal) or ``None`` if ``j`` fits nowhere.
    With column minimum ``a`` and maximum ``b``:

    * ``b - a >= 3``: nothing fits;
    * ``b - a == 2``: only blocks with window pair ``{a, a+1}``;
    * ``b == a``: only blocks whose shared value is ``a``;
    * ``b == a + 1``: among pairs ``(a-1, a), (a, a-1), (a, b), (b, a)``
      (blocks s1..s4) take s1 if it fits, else s3; and s2 if it fits, else
      s4.  If both s1 and s3 fit, the column splits rows the same way in
      either, so a solution using s3 can use s1 instead (same for s2/s4).
    """
    if not _checked:
        _check_overlap_boundary(boundary)
        if not 0 < h1 < matrix.m:
            raise ValueError(f"h1={h1} must satisfy 0 < h1 < m={matrix.m}")
    col = matrix.columns[j]
    occ = Counter(col)
    h2 = matrix.m - h1
    a, b = min(col), max(col)
    pairs = list(zip(*boundary.values))
    where = {p: s for s, p in enumerate(pairs)}

    def fitting(candidates):
        return [where[p] for p in candidates if p in where and column_fits(occ, *p, h1, h2)]

    if b - a >= 3:
        return None
    if b - a == 2:
        found = fitting([(a, a + 1), (a + 1, a)])
    elif b == a:
        found = fitting([(a - 1, a), (a, a - 1)])
    else:
        first = fitting([(a - 1, a)]) or fitting([(a, b)])
        second = fitting([(a, a - 1)]) or fitting([(b, a)])
        found = first + second
    if not found:
        return None
    return (found[0], found[-1])


def overlap_pairs(sigma) -> list[tuple[int, int]]:
    """All window pairs ``(u1, u2)`` over the alphabet with ``|u1 - u2| = 1``, sorted."""
    present = set(sigma)
    return sorted((u, u + d) for u in sigma for d in (-1, 1) if u + d in present)


def _reduced_formula(matrix: IntMatrix, boundary: ClusterBoundary, candidates) -> tuple[Cnf, VarMap]:
    m, n = matrix.shape
    l = boundary.l
    vm = VarMap(m, n, 2, l)
    clauses = [(vm.x(i, 0), vm.x(i, 1)) for i in range(m)]
    clauses += [tuple(dict.fromkeys((vm.y(j, s1), vm.y(j, s2)))) for j, (s1, s2) in enumerate(candidates)]
    U = boundary.values
    for i, row in enumerate(matrix.rows):
        for r in range(2):
            for j, v in enumerate(row):
                for s in range(l):
                    if not U[r][s] <= v <= U[r][s] + 1:
                        clauses.append((-vm.x(i, r), -vm.y(j, s)))
    return Cnf(vm.num_vars, tuple(clauses)), vm


def solve_k2_cost1(
    matrix: IntMatrix,
    l: int,
    *,
    max_boundaries: int = DEFAULT_MAX_BOUNDARIES,
    stats: FptStats | None = None,
) -> CoClustering | None:
    """Decide and construct a (2, l)-co-clustering of cost at most one."""
    if matrix.m < 2:
        raise ValueError("two row blocks need at least two rows")
    if not 1 <= l <= matrix.n:
        raise ValueError(f"l={l} must satisfy 1 <= l <= n={matrix.n}")
    stats = stats if stats is not None else FptStats()
    q = len(alphabet(matrix))
    if l >= q * q or q >= 4 * l:
        # identical boundary columns merge, so only l < q^2 and q < 4l carry new structure
        log.info("cost-one search with l=%d outside the reduced range for %d values", l, q)
    budget = _Budget(max_boundaries, stats)
    return _k2_cost1(matrix, l, budget)


class _Budget:
    def __init__(self, cap: int, stats: FptStats):
        self.cap = cap
        self.stats = stats

    def spend(self, amount: int = 1) -> None:
        self.stats.boundaries += amount
        if self.stats.boundaries > self.cap:
            raise BudgetExhausted(f"cost-one search exceeded {self.cap} boundaries")


def _k2_cost1(A: IntMatrix, l: int, budget: _Budget) -> CoClustering | None:
    m, n = A.shape
    stats = budget.stats
    if l == 1:
        res = solve_one_row_block(A.transpose(), 2, 1)
        stats.branch = stats.branch or "one-column-block"
        if res is None:
            return None
        return CoClustering(res[0], Partition(n, (tuple(range(n)),)))

    sigma = alphabet(A)

    if 2**m < len(sigma) ** l:
        for rlab in partitions_with_blocks(m, 2):
            stats.row_partitions += 1
            rows = Partition.from_labels(rlab)
            sub = FptStats()
            cols = solve_fixed_row_partition(A, rows, l, 1, max_boundaries=budget.cap, stats=sub)
            budget.spend(sub.boundaries)
            if cols is not None:
                stats.branch = "row-partitions"
                return CoClustering(rows, cols)
        return None

    # (1) a column block whose two windows coincide
    for u in sigma:
        strip = [j for j, col in enumerate(A.columns) if u <= min(col) and max(col) <= u + 1]
        if not strip:
            continue
        budget.spend()
        rest = [j for j in range(n) if j not in strip]
        if not rest:
            stats.branch = "equal-bounds"
            return CoClustering(balanced_partition(m, 2), split_to(Partition(n, (tuple(strip),)), l))
        l_sub = min(l - 1, len(rest))
        sub = _k2_cost1(A.submatrix(range(m), rest), l_sub, budget)
        if sub is not None:
            labels = [l_sub] * n
            for s, block in enumerate(sub.cols.blocks):
                for jj in block:
                    labels[rest[jj]] = s
            stats.branch = "equal-bounds"
            return CoClustering(sub.rows, split_to(Partition.from_labels(labels), l))

    # (2) a column block with disjoint windows fixes the row partition
    tried = set()
    for u in sigma:
        for col in A.columns:
            low = frozenset(i for i, v in enumerate(col) if v < u)
            if not 0 < len(low) < m or low in tried:
                continue
            tried.add(low)
            stats.row_partitions += 1
            rows = Partition(m, (tuple(sorted(low)), tuple(i for i in range(m) if i not in low)))
            sub = FptStats()
            cols = solve_fixed_row_partition(A, rows, l, 1, max_boundaries=budget.cap, stats=sub)
            budget.spend(sub.boundaries)
            if cols is not None:
                stats.branch = "non-overlapping"
                return CoClustering(rows, cols)

    # (3) every block has properly overlapping windows
    found = search_overlapping(A, l, budget)
    if found is not None:
        stats.branch = "properly-overlapping"
    return found


def search_overlapping(A: IntMatrix, l: int, budget: _Budget) -> CoClustering | None:
    """Cost-one solutions in which every column block has windows ``|u1 - u2| = 1``.

    Blocks sharing a window pair can be merged, so boundaries with
    ``l' <= l`` distinct pairs cover all cases.
    """
    m, n = A.shape
    pairs = overlap_pairs(alphabet(A))
    for l_used in range(1, min(l, len(pairs)) + 1):
        for combo in itertools.combinations(pairs, l_used):
            boundary = ClusterBoundary((tuple(p[0] for p in combo), tuple(p[1] for p in combo)))
            for h1 in range(1, m):
                budget.spend()
                candidates = []
                for j in range(n):
                    cand = two_candidate_blocks(A, j, boundary, h1, _checked=True)
                    if cand is None:
                        break
                    candidates.append(cand)
                else:
                    cnf, vm = _reduced_formula(A, boundary, candidates)
                    model = solve_two_sat(cnf, stats=budget.stats.sat)
                    if model is not None:
                        cc = decode_assignment(model, vm, Instance(A, 2, l_used, 1))
                        return CoClustering(cc.rows, split_to(cc.cols, l))
    return None
