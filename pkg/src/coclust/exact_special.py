"""Polynomial-time solvers for special cases.

Covered: cost zero, alphabets of size two, a single row block, two row and
two column blocks, and two row blocks over a three-letter alphabet.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

from .core import (
    CoClustering,
    Instance,
    IntMatrix,
    Partition,
    alphabet,
    balanced_partition,
    split_to,
)
from .sat import (
    BoundarySearchStats,
    ClusterBoundary,
    Cnf,
    arc_consistent,
    build_boundary_cnf,
    decode_assignment,
    solve_two_sat,
)


def trivial_coclustering(matrix: IntMatrix, k: int, l: int) -> CoClustering:
    """Balanced consecutive blocks; optimal whenever c >= max - min."""
    return CoClustering(balanced_partition(matrix.m, k), balanced_partition(matrix.n, l))


def _group_identical(vectors) -> Partition:
    first: dict[tuple, int] = {}
    labels = [first.setdefault(tuple(v), len(first)) for v in vectors]
    return Partition.from_labels(labels)


def solve_cost_zero(matrix: IntMatrix, k: int, l: int) -> CoClustering | None:
    """Cost-0 co-clustering, which exists iff there are at most k distinct rows and l distinct columns."""
    Instance(matrix, k, l, 0)
    rows = _group_identical(matrix.rows)
    if len(rows) > k:
        return None
    cols = _group_identical(matrix.columns)
    if len(cols) > l:
        return None
    return CoClustering(split_to(rows, k), split_to(cols, l))


def solve_binary(instance: Instance) -> CoClustering | None:
    A = instance.matrix
    sigma = alphabet(A)
    if len(sigma) > 2:
        raise ValueError(f"solve_binary needs at most two distinct values, got {len(sigma)}")
    if instance.c >= sigma[-1] - sigma[0]:
        return trivial_coclustering(A, instance.k, instance.l)
    return solve_cost_zero(A, instance.k, instance.l)


def solve_one_row_block(matrix: IntMatrix, l: int, c: int) -> tuple[Partition, int] | None:
    """Column partition for a single row block, or ``None``.

    Greedy sweep over columns ordered by their minimum: the unassigned column
    with the smallest minimum (lowest index on ties) opens a block that takes
    every unassigned column whose maximum is within ``c`` of that minimum.
    The number of blocks opened, ``l_min``, is the fewest possible; the
    partition is refined to exactly ``l`` blocks and returned with ``l_min``.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    if l > matrix.n:
        raise ValueError(f"cannot form {l} column blocks from {matrix.n} columns")
    alpha = [min(col) for col in matrix.columns]
    beta = [max(col) for col in matrix.columns]
    if any(b - a > c for a, b in zip(alpha, beta)):
        return None
    order = sorted(range(matrix.n), key=lambda j: (alpha[j], j))
    # with columns in alpha order, the opener is always the first unassigned one
    assigned = [False] * matrix.n
    blocks = []
    for opener in order:
        if assigned[opener]:
            continue
        if len(blocks) == l:
            return None
        limit = alpha[opener] + c
        block = [j for j in order if not assigned[j] and beta[j] <= limit]
        for j in block:
            assigned[j] = True
        blocks.append(tuple(block))
    l_min = len(blocks)
    return split_to(Partition(matrix.n, tuple(blocks)), l), l_min


def forced_boundary_values(sigma, c: int) -> tuple[int, int]:
    """The two values every satisfiable boundary can be assumed to contain.

    The cluster holding ``min(sigma)`` has that lower bound.  The cluster
    holding ``max(sigma)`` can always use the smallest alphabet value that is
    at least ``max(sigma) - c``.
    """
    lo = sigma[0]
    hi = min(a for a in sigma if a >= sigma[-1] - c)
    return lo, hi


def boundaries_2x2(sigma, c: int):
    """Candidate 2x2 boundaries, forced values placed first, then free cells in alphabet order."""
    lo, hi = forced_boundary_values(sigma, c)
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    seen = set()
    placements = []
    for p in cells:
        if lo == hi:
            placements.append({p: lo})
            continue
        for q in cells:
            if q != p:
                placements.append({p: lo, q: hi})
    for fixed in placements:
        free = [cell for cell in cells if cell not in fixed]
        for values in itertools.product(sigma, repeat=len(free)):
            U = [[0, 0], [0, 0]]
            for (r, s), v in fixed.items():
                U[r][s] = v
            for (r, s), v in zip(free, values):
                U[r][s] = v
            key = (U[0][0], U[0][1], U[1][0], U[1][1])
            if key not in seen:
                seen.add(key)
                yield ClusterBoundary(((U[0][0], U[0][1]), (U[1][0], U[1][1])))


@functools.lru_cache(maxsize=256)
def _candidates_2x2(sigma: tuple[int, ...], c: int) -> tuple[tuple[ClusterBoundary, ...], np.ndarray]:
    candidates = tuple(boundaries_2x2(sigma, c))
    values = np.array([U.values for U in candidates])
    values.flags.writeable = False  # shared through the cache
    return candidates, values


def solve_2x2(matrix: IntMatrix, c: int, stats: BoundarySearchStats | None = None) -> CoClustering | None:
    """(2, 2)-co-clustering of cost at most ``c``: O(|Sigma|^2) boundaries, one 2-SAT each."""
    if matrix.m < 2 or matrix.n < 2:
        raise ValueError("solve_2x2 needs at least two rows and two columns")
    inst = Instance(matrix, 2, 2, c)
    candidates, values = _candidates_2x2(alphabet(matrix), c)
    viable = arc_consistent(matrix.array, values, c)
    for U, ok in zip(candidates, viable):
        if stats is not None:
            stats.boundaries += 1
        if not ok:
            if stats is not None:
                stats.filtered += 1
            continue
        cnf, vm = build_boundary_cnf(inst, U)
        model = solve_two_sat(cnf, stats=stats.sat if stats is not None else None)
        if model is not None:
            if stats is not None:
                stats.boundary = U.tolist()
            return decode_assignment(model, vm, inst)
    return None


def solve_k2_ternary(matrix: IntMatrix, l: int, c: int) -> CoClustering | None:
    """Two row blocks over a three-value alphabet ``a < b < g``.

    Regimes by cost:

    * ``c >= g - a``: anything works;
    * ``c`` below both gaps: only cost zero;
    * ``c`` at least both gaps: only ``(a, g)`` must be separated; see
      :func:`solve_avoiding_extremes`;
    * otherwise the pair with the larger gap must be separated as well; the
      middle value joins the other side and a cost-zero test decides.
    """
    sigma = alphabet(matrix)
    if len(sigma) != 3:
        raise ValueError(f"solve_k2_ternary needs exactly three distinct values, got {len(sigma)}")
    if matrix.m < 2:
        raise ValueError("two row blocks need at least two rows")
    if not 1 <= l <= matrix.n:
        raise ValueError(f"l={l} must satisfy 1 <= l <= n={matrix.n}")
    a, b, g = sigma
    low_gap, high_gap = b - a, g - b
    if c >= g - a:
        return trivial_coclustering(matrix, 2, l)
    if c < min(low_gap, high_gap):
        return solve_cost_zero(matrix, 2, l)
    if c >= max(low_gap, high_gap):
        if l == 1:
            res = solve_one_row_block(matrix.transpose(), 2, c)
            if res is None:
                return None
            return CoClustering(res[0], Partition(matrix.n, (tuple(range(matrix.n)),)))
        if l == 2:
            return solve_2x2(matrix, c)
        return solve_avoiding_extremes(matrix, l)
    # exactly one of the gaps exceeds c
    middle = 1 if low_gap > c else 0
    relabel = {a: 0, b: middle, g: 1}
    binary = IntMatrix([[relabel[v] for v in row] for row in matrix.rows])
    return solve_cost_zero(binary, 2, l)


LOW, HIGH = 0, 1
PATTERNS = tuple(itertools.product((LOW, HIGH), repeat=2))


def solve_avoiding_extremes(matrix: IntMatrix, l: int) -> CoClustering | None:
    """Two row blocks, ``l`` column blocks, no cluster holding both the smallest and largest value.

    Every cluster is then "low" (no largest value) or "high" (no smallest
    value), so a column block is described by one of four low/high
    patterns over the two row blocks.  Blocks with equal patterns merge, so
    only the set of patterns in use matters; for each set of at most ``l``
    patterns, the row assignment is a 2-SAT problem.
    """
    sigma = alphabet(matrix)
    m, n = matrix.shape
    if m < 2:
        raise ValueError("two row blocks need at least two rows")
    if not 1 <= l <= n:
        raise ValueError(f"l={l} must satisfy 1 <= l <= n={n}")
    lo_val, hi_val = sigma[0], sigma[-1]
    # rows of each column needing a low (holds the minimum) or high (holds the maximum) cluster
    needs = [
        ([i for i in range(m) if col[i] == lo_val], [i for i in range(m) if col[i] == hi_val])
        for col in matrix.columns
    ]
    for size in range(1, min(l, len(PATTERNS)) + 1):
        for allowed in itertools.combinations(PATTERNS, size):
            row_labels = _rows_for_patterns(m, needs, allowed)
            if row_labels is None:
                continue
            labels = [_first_fit(row_labels, need, allowed) for need in needs]
            # splitting off a row from a lone row block never raises the cost
            rows = split_to(Partition.from_labels(row_labels), 2)
            return CoClustering(rows, split_to(Partition.from_labels(labels), l))
    return None


def _forbidden(allowed) -> list[tuple[tuple[int, int], ...]]:
    """Minimal requirement sets (block, kind) that no allowed pattern meets."""
    singles = [((r, q),) for r in range(2) for q in (LOW, HIGH)
               if not any(p[r] == q for p in allowed)]
    pairs = [((0, q0), (1, q1)) for q0 in (LOW, HIGH) for q1 in (LOW, HIGH)
             if (q0, q1) not in allowed
             and ((0, q0),) not in singles and ((1, q1),) not in singles]
    return singles + pairs


def _rows_for_patterns(m: int, needs, allowed) -> list[int] | None:
    # variable i+1 true: row i in block 0
    def in_block(i, r):
        return i + 1 if r == 0 else -(i + 1)

    clauses = []
    num_vars = m
    forbidden = _forbidden(allowed)
    for low_rows, high_rows in needs:
        by_kind = {LOW: low_rows, HIGH: high_rows}
        # a low and a high row never share a block within this column
        if low_rows and high_rows:
            for r in range(2):
                num_vars += 1
                aux = num_vars
                clauses += [(-in_block(i, r), aux) for i in low_rows]
                clauses += [(-in_block(i, r), -aux) for i in high_rows]
        for req in forbidden:
            if len(req) == 1:
                (r, q), = req
                clauses += [(-in_block(i, r),) for i in by_kind[q]]
                continue
            (r0, q0), (r1, q1) = req
            if not by_kind[q0] or not by_kind[q1]:
                continue
            num_vars += 1
            aux = num_vars
            clauses += [(-in_block(i, r0), aux) for i in by_kind[q0]]
            clauses += [(-in_block(i, r1), -aux) for i in by_kind[q1]]
    model = solve_two_sat(Cnf(num_vars, tuple(clauses)))
    if model is None:
        return None
    return [0 if model[i + 1] else 1 for i in range(m)]


def _first_fit(labels, need, allowed) -> int:
    low_rows, high_rows = need
    for s, pattern in enumerate(allowed):
        if all(pattern[labels[i]] == LOW for i in low_rows) and all(pattern[labels[i]] == HIGH for i in high_rows):
            return s
    raise AssertionError("row assignment leaves a column without a fitting pattern")
