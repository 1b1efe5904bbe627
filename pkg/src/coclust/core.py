"""Domain types, cost evaluation, alphabets and integer rescaling.

Indices are 0-based everywhere in this package.  The JSON/CLI layer converts
to 1-based indices on the way out.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Real
from typing import Iterable, Sequence

import numpy as np


class CoclustError(Exception):
    """Base class for errors raised by this package."""


class BudgetExhausted(CoclustError):
    """A configured search budget ran out before the search could finish.

    This is not an answer: the instance may be feasible or infeasible.
    """


class InstanceTooLarge(CoclustError):
    """The instance exceeds a size guard (full CNF encoding, brute-force oracle)."""


class MatrixParseError(ValueError):
    def __init__(self, message: str, line: int, column: int | None = None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class IntMatrix:
    """Rectangular integer matrix, stored row-major as nested tuples."""

    rows: tuple[tuple[int, ...], ...]

    def __init__(self, rows: Iterable[Iterable[int]]):
        data = tuple(tuple(_as_int(v) for v in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        width = len(data[0])
        for i, row in enumerate(data):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} entries, expected {width}")
        object.__setattr__(self, "rows", data)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    @cached_property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.rows))

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.rows, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.columns)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> IntMatrix:
        return IntMatrix([[self.rows[i][j] for j in col_idx] for i in row_idx])

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @classmethod
    def from_array(cls, arr) -> IntMatrix:
        return cls(np.asarray(arr).tolist())


def _as_int(v) -> int:
    if isinstance(v, bool):
        raise TypeError("boolean matrix entries are not accepted")
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, (Fraction, float)) and v == int(v):
        return int(v)
    raise TypeError(f"matrix entry {v!r} is not an integer")


@dataclass(frozen=True)
class Partition:
    """An ordered list of disjoint, non-empty blocks covering ``range(ground_size)``."""

    ground_size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if self.ground_size < 1:
            raise ValueError("ground_size must be at least 1")
        seen = [False] * self.ground_size
        for b in blocks:
            if not b:
                raise ValueError("partition blocks must be non-empty")
            for x in b:
                if not 0 <= x < self.ground_size:
                    raise ValueError(f"index {x} outside [0, {self.ground_size})")
                if seen[x]:
                    raise ValueError(f"index {x} occurs in two blocks")
                seen[x] = True
        if not all(seen):
            missing = seen.index(False)
            raise ValueError(f"index {missing} is not covered")

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> Partition:
        """Blocks ordered by label value; unused labels are dropped."""
        groups: dict[int, list[int]] = {}
        for idx, lab in enumerate(labels):
            groups.setdefault(lab, []).append(idx)
        return cls(len(labels), tuple(tuple(groups[lab]) for lab in sorted(groups)))

    @classmethod
    def from_one_based(cls, ground_size: int, blocks: Iterable[Iterable[int]]) -> Partition:
        return cls(ground_size, tuple(tuple(x - 1 for x in b) for b in blocks))

    @cached_property
    def labels(self) -> tuple[int, ...]:
        lab = [0] * self.ground_size
        for r, b in enumerate(self.blocks):
            for x in b:
                lab[x] = r
        return tuple(lab)

    def one_based(self) -> list[list[int]]:
        return [[x + 1 for x in b] for b in self.blocks]

    def as_set(self) -> frozenset[frozenset[int]]:
        """Order-free view, for comparing partitions up to block relabeling."""
        return frozenset(frozenset(b) for b in self.blocks)


def split_to(partition: Partition, count: int) -> Partition:
    """Refine ``partition`` to exactly ``count`` blocks.

    Repeatedly takes the largest block (first one on ties) and moves its
    highest index into a new singleton block.  Refining never increases the
    cost of a co-clustering.
    """
    if count > partition.ground_size:
        raise ValueError(f"cannot form {count} non-empty blocks over {partition.ground_size} indices")
    if count < len(partition):
        raise ValueError(f"partition already has {len(partition)} > {count} blocks")
    blocks = [list(b) for b in partition.blocks]
    while len(blocks) < count:
        big = max(range(len(blocks)), key=lambda t: (len(blocks[t]), -t))
        blocks.append([blocks[big].pop()])
    return Partition(partition.ground_size, tuple(tuple(b) for b in blocks))


def balanced_partition(size: int, count: int) -> Partition:
    """``count`` consecutive blocks whose sizes differ by at most one."""
    if not 1 <= count <= size:
        raise ValueError(f"need 1 <= count <= size, got count={count}, size={size}")
    q, r = divmod(size, count)
    blocks, start = [], 0
    for t in range(count):
        width = q + (1 if t < r else 0)
        blocks.append(tuple(range(start, start + width)))
        start += width
    return Partition(size, tuple(blocks))


def drop_empty_and_split(labels: Sequence[int], count: int) -> Partition:
    """Partition from per-index block labels, repaired to exactly ``count`` blocks."""
    return split_to(Partition.from_labels(labels), count)


@dataclass(frozen=True)
class CoClustering:
    rows: Partition
    cols: Partition

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.cols)

    def transpose(self) -> CoClustering:
        return CoClustering(self.cols, self.rows)

    def check_shape(self, matrix: IntMatrix) -> None:
        if self.rows.ground_size != matrix.m or self.cols.ground_size != matrix.n:
            raise ValueError(
                f"co-clustering over {self.rows.ground_size}x{self.cols.ground_size} "
                f"does not match a {matrix.m}x{matrix.n} matrix"
            )


@dataclass(frozen=True)
class Instance:
    """Decision instance: is there a (k, l)-co-clustering of cost at most c?"""

    matrix: IntMatrix
    k: int
    l: int  # noqa: E741
    c: int

    def __post_init__(self):
        if not isinstance(self.matrix, IntMatrix):
            object.__setattr__(self, "matrix", IntMatrix(self.matrix))
        object.__setattr__(self, "c", _as_int(self.c))
        if not 1 <= self.k <= self.matrix.m:
            raise ValueError(f"k={self.k} must satisfy 1 <= k <= m={self.matrix.m}")
        if not 1 <= self.l <= self.matrix.n:
            raise ValueError(f"l={self.l} must satisfy 1 <= l <= n={self.matrix.n}")
        if self.c < 0:
            raise ValueError("cost c must be non-negative")

    def transpose(self) -> Instance:
        return Instance(self.matrix.transpose(), self.l, self.k, self.c)

    def with_cost(self, c: int) -> Instance:
        return Instance(self.matrix, self.k, self.l, c)


@dataclass(frozen=True)
class RealInstance:
    """Like :class:`Instance` but with arbitrary real entries and cost."""

    entries: tuple[tuple[Real, ...], ...]
    k: int
    l: int  # noqa: E741
    c: Real

    def __post_init__(self):
        data = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", data)
        if not data or not data[0] or any(len(r) != len(data[0]) for r in data):
            raise ValueError("entries must form a non-empty rectangular matrix")
        m, n = len(data), len(data[0])
        if not 1 <= self.k <= m or not 1 <= self.l <= n:
            raise ValueError(f"need 1 <= k <= {m} and 1 <= l <= {n}")
        if self.c < 0:
            raise ValueError("cost c must be non-negative")


def cost(matrix: IntMatrix, cc: CoClustering) -> int:
    """Largest max-minus-min spread over all clusters of ``cc``."""
    cc.check_shape(matrix)
    rlab = cc.rows.labels
    clab = cc.cols.labels
    k, l = cc.k, cc.l
    lo = [[None] * l for _ in range(k)]
    hi = [[None] * l for _ in range(k)]
    for i, row in enumerate(matrix.rows):
        lo_r, hi_r = lo[rlab[i]], hi[rlab[i]]
        for j, v in enumerate(row):
            s = clab[j]
            if lo_r[s] is None or v < lo_r[s]:
                lo_r[s] = v
            if hi_r[s] is None or v > hi_r[s]:
                hi_r[s] = v
    return max(hi[r][s] - lo[r][s] for r in range(k) for s in range(l))


def cluster_minima(matrix: IntMatrix, cc: CoClustering) -> list[list[int]]:
    """Per-cluster minimum; the tightest cluster boundary ``cc`` satisfies."""
    cc.check_shape(matrix)
    return [
        [min(matrix.rows[i][j] for i in rb for j in cb) for cb in cc.cols.blocks]
        for rb in cc.rows.blocks
    ]


def alphabet(matrix: IntMatrix) -> tuple[int, ...]:
    """Sorted distinct entries."""
    return tuple(sorted({v for row in matrix.rows for v in row}))


def span(matrix: IntMatrix) -> int:
    sigma = alphabet(matrix)
    return sigma[-1] - sigma[0]


def candidate_costs(matrix: IntMatrix) -> list[int]:
    """All values the optimal cost can take: 0 and every positive gap in the alphabet."""
    sigma = alphabet(matrix)
    gaps = {0}
    for a_idx, a in enumerate(sigma):
        for b in sigma[a_idx + 1:]:
            gaps.add(b - a)
    return sorted(gaps)


def rescale(instance: RealInstance) -> tuple[Instance, dict]:
    """Equivalent integer instance over alphabet values in ``[0, |Sigma|^2]``.

    Two values conflict (may not share a cluster) iff their distance exceeds
    the cost.  The new values and cost preserve that relation exactly.
    Comparisons are exact: floats are taken at their binary value and other
    reals are converted with :class:`fractions.Fraction`.

    Integer input with an integer cost is returned unchanged.
    """
    flat = [v for row in instance.entries for v in row]
    if all(_is_integral(v) for v in flat) and _is_integral(instance.c):
        inst = Instance(IntMatrix(instance.entries), instance.k, instance.l, int(instance.c))
        return inst, {int(v): int(v) for v in set(flat)}

    values = sorted({Fraction(v) for v in flat})
    c = Fraction(instance.c)
    positions, c_new = _interval_embedding(values, c)
    mapping_exact = dict(zip(values, positions))
    _check_embedding(values, c, positions, c_new)
    matrix = IntMatrix([[mapping_exact[Fraction(v)] for v in row] for row in instance.entries])
    mapping = {v: mapping_exact[Fraction(v)] for v in set(flat)}
    return Instance(matrix, instance.k, instance.l, c_new), mapping


def _is_integral(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, Integral):
        return True
    if isinstance(v, float):
        return v.is_integer()
    return isinstance(v, Fraction) and v.denominator == 1


def _interval_embedding(values: list[Fraction], c: Fraction) -> tuple[list[int], int]:
    """Integer positions with the same ``distance <= c`` relation, budget ``len(values)``.

    Sorted values make the compatible partners of each value a contiguous run
    ending at ``reach[i]``.  The target relation is then a system of difference
    constraints::

        p[i+1] - p[i] >= 1
        p[reach[i]] - p[i] <= c'
        p[reach[i] + 1] - p[i] >= c' + 1

    whose least non-negative solution is found by longest-path relaxation.
    """
    q = len(values)
    c_new = q
    reach = [bisect.bisect_right(values, values[i] + c) - 1 for i in range(q)]
    # edges (src, dst, w) meaning p[dst] >= p[src] + w
    edges = []
    for i in range(q - 1):
        edges.append((i, i + 1, 1))
    for i in range(q):
        if reach[i] > i:
            edges.append((reach[i], i, -c_new))
        if reach[i] + 1 < q:
            edges.append((i, reach[i] + 1, c_new + 1))
    p = [0] * q
    for _ in range(q + 1):
        changed = False
        for src, dst, w in edges:
            if p[src] + w > p[dst]:
                p[dst] = p[src] + w
                changed = True
        if not changed:
            break
    else:
        raise ArithmeticError("interval embedding constraints are infeasible")
    return p, c_new


def _check_embedding(values, c, positions, c_new) -> None:
    q = len(values)
    if any(p < 0 or p > q * q for p in positions) or c_new > q:
        raise ArithmeticError("rescaled alphabet exceeds the [0, |Sigma|^2] range")
    for i in range(q):
        for j in range(i + 1, q):
            if positions[j] <= positions[i]:
                raise ArithmeticError("rescaling is not order preserving")
            if (values[j] - values[i] <= c) != (positions[j] - positions[i] <= c_new):
                raise ArithmeticError(f"conflict relation differs for {values[i]} and {values[j]}")


# --- matrix text I/O -------------------------------------------------------

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$|^[+-]?\d+/\d+$")


def parse_matrix(text: str) -> list[list[Fraction]]:
    """Parse header-less CSV/TSV (or whitespace separated) numeric text.

    Entries are parsed exactly as :class:`~fractions.Fraction`.
    """
    lines = [(no, ln.strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixParseError("no matrix rows found", 1)
    sample = lines[0][1]
    if "\t" in sample:
        splitter = lambda s: s.split("\t")  # noqa: E731
    elif "," in sample:
        splitter = lambda s: s.split(",")  # noqa: E731
    elif ";" in sample:
        splitter = lambda s: s.split(";")  # noqa: E731
    else:
        splitter = str.split
    rows = []
    width = None
    for no, ln in lines:
        fields = [f.strip() for f in splitter(ln)]
        row = []
        for col, f in enumerate(fields, start=1):
            if not _NUMBER.match(f):
                raise MatrixParseError(f"not a number: {f!r}", no, col)
            row.append(Fraction(f))
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError(f"expected {width} fields, found {len(row)}", no)
        rows.append(row)
    return rows


def read_matrix(path) -> list[list[Fraction]]:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def format_matrix(matrix: IntMatrix, delimiter: str = ",") -> str:
    return "".join(delimiter.join(str(v) for v in row) + "\n" for row in matrix.rows)
