"""CNF encodings of the co-clustering problem and a small complete SAT solver.

Two encodings are provided:

* the *full* encoding, one formula per instance, with a 4-literal clause per
  conflicting entry pair and cluster;
* the *boundary* encoding, one formula per cluster boundary ``U``, whose
  clauses have at most ``max(k, l, 2)`` literals.

Formulas with clauses of at most two literals are decided through the
implication graph; everything else goes to a DPLL search with watched
literals and chronological backtracking.
"""

from __future__ import annotations

import bisect
import functools
import itertools
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core import (
    BudgetExhausted,
    CoClustering,
    Instance,
    InstanceTooLarge,
    alphabet,
    drop_empty_and_split,
)

DEFAULT_MAX_CLAUSES = 10**7
DEFAULT_MAX_BOUNDARIES = 10**6


@dataclass(frozen=True)
class VarMap:
    """Numbering of the row-assignment and column-assignment variables.

    ``x(i, r)`` is true when row ``i`` may go to row block ``r``; ``y(j, s)``
    likewise for columns.  Variables are numbered from 1 as in DIMACS, rows
    first: ``x(i, r) = i*k + r + 1`` and ``y(j, s) = m*k + j*l + s + 1``.
    """

    m: int
    n: int
    k: int
    l: int  # noqa: E741

    @property
    def num_vars(self) -> int:
        return self.m * self.k + self.n * self.l

    def x(self, i: int, r: int) -> int:
        return i * self.k + r + 1

    def y(self, j: int, s: int) -> int:
        return self.m * self.k + j * self.l + s + 1

    def lookup(self, var: int) -> tuple[str, int, int]:
        """Inverse map: ``('x', i, r)`` or ``('y', j, s)``."""
        if not 1 <= var <= self.num_vars:
            raise ValueError(f"variable {var} out of range")
        v = var - 1
        if v < self.m * self.k:
            return ("x", *divmod(v, self.k))
        return ("y", *divmod(v - self.m * self.k, self.l))


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")

    @classmethod
    def _trusted(cls, num_vars: int, clauses: tuple) -> Cnf:
        """Skip validation for formulas built by this module."""
        cnf = object.__new__(cls)
        object.__setattr__(cnf, "num_vars", num_vars)
        object.__setattr__(cnf, "clauses", clauses)
        # literals within each clause are distinct and never complementary
        object.__setattr__(cnf, "_normalized", True)
        return cnf

    @property
    def max_clause_len(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def is_satisfied_by(self, assignment: dict[int, bool]) -> bool:
        return all(any(assignment.get(abs(l), False) == (l > 0) for l in c) for c in self.clauses)


@dataclass(frozen=True)
class ClusterBoundary:
    """Per-cluster lower bounds; cluster (r, s) must lie in ``[u[r][s], u[r][s] + c]``."""

    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        vals = tuple(tuple(int(v) for v in row) for row in self.values)
        if not vals or not vals[0] or any(len(r) != len(vals[0]) for r in vals):
            raise ValueError("boundary must be a non-empty rectangular matrix")
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.values[0])

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.values]


@dataclass
class SatStats:
    calls: int = 0
    two_sat_calls: int = 0
    decisions: int = 0
    propagations: int = 0


# --- encodings -------------------------------------------------------------


def coverage_clauses(vm: VarMap) -> list[tuple[int, ...]]:
    rows = [tuple(vm.x(i, r) for r in range(vm.k)) for i in range(vm.m)]
    cols = [tuple(vm.y(j, s) for s in range(vm.l)) for j in range(vm.n)]
    return rows + cols


def count_conflicting_pairs(instance: Instance) -> int:
    """Number of unordered entry pairs whose values differ by more than ``c``."""
    vals = sorted(v for row in instance.matrix.rows for v in row)
    total = 0
    for idx, v in enumerate(vals):
        total += len(vals) - bisect.bisect_right(vals, v + instance.c, lo=idx)
    return total


def build_full_cnf(instance: Instance, max_clauses: int = DEFAULT_MAX_CLAUSES) -> tuple[Cnf, VarMap]:
    """Single formula that is satisfiable iff the instance is a yes-instance."""
    A, k, l, c = instance.matrix, instance.k, instance.l, instance.c
    vm = VarMap(A.m, A.n, k, l)
    estimate = count_conflicting_pairs(instance) * k * l + A.m + A.n
    if estimate > max_clauses:
        raise InstanceTooLarge(
            f"full encoding needs about {estimate} clauses (cap {max_clauses})"
        )
    clauses = coverage_clauses(vm)
    entries = [(i, j, v) for i, row in enumerate(A.rows) for j, v in enumerate(row)]
    clauses.extend(_conflict_clauses(entries, vm, c))
    return Cnf._trusted(vm.num_vars, tuple(clauses)), vm


def _conflict_clauses(entries, vm: VarMap, c: int) -> Iterator[tuple[int, ...]]:
    neg_x = [[-vm.x(i, r) for r in range(vm.k)] for i in range(vm.m)]
    neg_y = [[-vm.y(j, s) for s in range(vm.l)] for j in range(vm.n)]
    for a_idx, (i, j, v) in enumerate(entries):
        for i2, j2, v2 in entries[a_idx + 1:]:
            if abs(v - v2) <= c:
                continue
            pairs_x = [(xr,) if i == i2 else (xr, xr2) for xr, xr2 in zip(neg_x[i], neg_x[i2])]
            pairs_y = [(ys,) if j == j2 else (ys, ys2) for ys, ys2 in zip(neg_y[j], neg_y[j2])]
            # entries sharing a row or column repeat a literal; keep it once
            for px in pairs_x:
                for py in pairs_y:
                    yield px + py


def build_boundary_cnf(instance: Instance, boundary: ClusterBoundary) -> tuple[Cnf, VarMap]:
    """Formula satisfiable iff some (k, l)-co-clustering satisfies ``boundary``."""
    A, k, l, c = instance.matrix, instance.k, instance.l, instance.c
    if (boundary.k, boundary.l) != (k, l):
        raise ValueError(f"boundary is {boundary.k}x{boundary.l}, instance needs {k}x{l}")
    vm = VarMap(A.m, A.n, k, l)
    clauses = coverage_clauses(vm)
    clauses.extend(_boundary_clauses(A.rows, boundary.values, c, vm))
    return Cnf._trusted(vm.num_vars, tuple(clauses)), vm


def _boundary_clauses(rows, U, c, vm: VarMap) -> list[tuple[int, int]]:
    out = []
    k, l = vm.k, vm.l
    neg_y = [[-vm.y(j, s) for s in range(l)] for j in range(vm.n)]
    for i, row in enumerate(rows):
        for r in range(k):
            xr = -vm.x(i, r)
            Ur = U[r]
            for j, a in enumerate(row):
                ny = neg_y[j]
                for s in range(l):
                    u = Ur[s]
                    if a < u or a > u + c:
                        out.append((xr, ny[s]))
    return out


# --- solving ---------------------------------------------------------------


def solve_cnf(
    cnf: Cnf, *, max_decisions: int | None = None, stats: SatStats | None = None
) -> dict[int, bool] | None:
    """Satisfying assignment ``{var: value}`` or ``None`` if unsatisfiable.

    Raises :class:`BudgetExhausted` when the DPLL search exceeds
    ``max_decisions`` branching decisions.
    """
    if all(len(c) <= 2 for c in cnf.clauses):
        return solve_two_sat(cnf, stats=stats)
    return solve_dpll(cnf, max_decisions=max_decisions, stats=stats)


def solve_two_sat(cnf: Cnf, stats: SatStats | None = None) -> dict[int, bool] | None:
    """Linear-time 2-SAT through strongly connected components of the implication graph."""
    if any(len(c) > 2 for c in cnf.clauses):
        raise ValueError("solve_two_sat needs clauses with at most two literals")
    if stats is not None:
        stats.calls += 1
        stats.two_sat_calls += 1
    nv = cnf.num_vars
    top = 2 * nv
    # literal lit -> node lit + nv (node nv unused); negation maps node x to top - x
    graph: list[list[int]] = [[] for _ in range(top + 1)]
    for clause in cnf.clauses:
        a = clause[0] + nv
        if len(clause) == 2:
            b = clause[1] + nv
            graph[top - a].append(b)
            if b != a:
                graph[top - b].append(a)
        else:
            graph[top - a].append(a)
    comp = _tarjan(graph)
    model = {}
    for v in range(1, nv + 1):
        p, q = comp[nv + v], comp[nv - v]
        if p == q:
            return None
        # Tarjan numbers components in reverse topological order
        model[v] = p < q
    return model


def _tarjan(graph: list[list[int]]) -> list[int]:
    n = len(graph)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            edges = graph[v]
            if pos < len(edges):
                work[-1] = (v, pos + 1)
                w = edges[pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


def solve_dpll(
    cnf: Cnf, *, max_decisions: int | None = None, stats: SatStats | None = None
) -> dict[int, bool] | None:
    """Backtracking search with unit propagation over two watched literals.

    Branches on the lowest-numbered unassigned variable, true first.
    """
    nv = cnf.num_vars
    top = 2 * nv
    if stats is not None:
        stats.calls += 1
    # literals are stored shifted by nv, so -lit sits at top - (lit + nv)
    # truth[idx]: 1 true, -1 false, 0 unassigned; kept in sync for idx and top - idx
    truth = [0] * (top + 1)
    watches: list[list[list[int]]] = [[] for _ in range(top + 1)]
    units = []
    trusted = getattr(cnf, "_normalized", False)
    for clause in cnf.clauses:
        if not trusted:
            clause = tuple(dict.fromkeys(clause))
            if any(-lit in clause for lit in clause):
                continue
        if len(clause) == 1:
            units.append(clause[0] + nv)
        else:
            cl = [lit + nv for lit in clause]
            watches[cl[0]].append(cl)
            watches[cl[1]].append(cl)

    trail: list[int] = []
    for idx in units:
        cur = truth[idx]
        if cur == 0:
            truth[idx] = 1
            truth[top - idx] = -1
            trail.append(idx)
        elif cur < 0:
            return None

    decisions = propagations = 0
    levels: list[tuple[int, int, bool]] = []  # (trail length before decision, literal index, flipped)
    qhead = 0
    next_var = 1

    while True:
        conflict = False
        while qhead < len(trail):
            false_idx = top - trail[qhead]
            qhead += 1
            propagations += 1
            old = watches[false_idx]
            kept: list[list[int]] = []
            watches[false_idx] = kept
            for pos, cl in enumerate(old):
                if cl[0] == false_idx:
                    cl[0] = cl[1]
                    cl[1] = false_idx
                first = cl[0]
                fv = truth[first]
                if fv > 0:
                    kept.append(cl)
                    continue
                for p in range(2, len(cl)):
                    other = cl[p]
                    if truth[other] >= 0:
                        cl[1] = other
                        cl[p] = false_idx
                        watches[other].append(cl)
                        break
                else:
                    kept.append(cl)
                    if fv < 0:
                        kept.extend(old[pos + 1:])
                        conflict = True
                        break
                    truth[first] = 1
                    truth[top - first] = -1
                    trail.append(first)
            if conflict:
                break

        if conflict:
            while levels:
                start, idx, flipped = levels.pop()
                for undo in trail[start:]:
                    truth[undo] = truth[top - undo] = 0
                    var = undo - nv if undo > nv else nv - undo
                    if var < next_var:
                        next_var = var
                del trail[start:]
                if not flipped:
                    idx = top - idx
                    levels.append((start, idx, True))
                    truth[idx] = 1
                    truth[top - idx] = -1
                    trail.append(idx)
                    break
            else:
                _record(stats, decisions, propagations)
                return None
            qhead = start
            continue

        while next_var <= nv and truth[next_var + nv] != 0:
            next_var += 1
        if next_var > nv:
            _record(stats, decisions, propagations)
            return {v: truth[v + nv] > 0 for v in range(1, nv + 1)}
        decisions += 1
        if max_decisions is not None and decisions > max_decisions:
            _record(stats, decisions, propagations)
            raise BudgetExhausted(f"SAT search exceeded {max_decisions} decisions")
        idx = next_var + nv
        levels.append((len(trail), idx, False))
        truth[idx] = 1
        truth[top - idx] = -1
        trail.append(idx)


def _record(stats, decisions, propagations):
    if stats is not None:
        stats.decisions += decisions
        stats.propagations += propagations


# --- DIMACS ----------------------------------------------------------------


class DimacsParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def export_dimacs(cnf: Cnf, varmap: VarMap | None = None) -> str:
    if varmap is not None and varmap.num_vars != cnf.num_vars:
        raise ValueError("variable map does not match the formula")
    out = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}\n"]
    out.extend(" ".join(map(str, c)) + " 0\n" for c in cnf.clauses)
    return "".join(out)


def parse_dimacs(text: str) -> Cnf:
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError("bad problem line", no)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsParseError("bad problem line", no) from None
            continue
        if header is None:
            raise DimacsParseError("clause before problem line", no)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsParseError(f"not an integer literal: {tok!r}", no) from None
            if abs(lit) > header[0]:
                raise DimacsParseError(f"literal {lit} exceeds {header[0]} variables", no)
            if lit == 0:
                if not current:
                    raise DimacsParseError("empty clause", no)
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise DimacsParseError("missing problem line", 1)
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise DimacsParseError(f"header announces {header[1]} clauses, found {len(clauses)}", 1)
    return Cnf(header[0], tuple(clauses))


def export_model(assignment: dict[int, bool]) -> str:
    lits = [v if assignment[v] else -v for v in sorted(assignment)]
    return "s SATISFIABLE\nv " + " ".join(map(str, lits)) + " 0\n"


def import_model(text: str, varmap: VarMap | int) -> dict[int, bool] | None:
    """Read a solver model.

    Accepts competition output (``s``/``v`` lines) as well as bare literal
    lines (MiniSat result files).  Returns ``None`` for an UNSAT verdict.
    Variables not mentioned default to false.
    """
    nv = varmap.num_vars if isinstance(varmap, VarMap) else int(varmap)
    model = {v: False for v in range(1, nv + 1)}
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("s ") or line in ("SAT", "UNSAT", "UNSATISFIABLE", "SATISFIABLE"):
            if "UNSAT" in line:
                return None
            continue
        body = line[1:] if line.startswith("v") else line
        for tok in body.split():
            if not re.fullmatch(r"-?\d+", tok):
                raise DimacsParseError(f"not a literal: {tok!r}", no)
            lit = int(tok)
            if lit == 0:
                continue
            if abs(lit) > nv:
                raise DimacsParseError(f"literal {lit} exceeds {nv} variables", no)
            model[abs(lit)] = lit > 0
    return model


# --- decoding and boundary enumeration -------------------------------------


def decode_assignment(assignment: dict[int, bool], varmap: VarMap, instance: Instance) -> CoClustering:
    """Each row/column goes to its lowest block with a true variable; empty blocks are repaired."""
    vm = varmap
    if (vm.m, vm.n) != instance.matrix.shape:
        raise ValueError("variable map does not match the instance")
    rlab = []
    for i in range(vm.m):
        r = next((r for r in range(vm.k) if assignment.get(vm.x(i, r))), None)
        if r is None:
            raise ValueError(f"assignment puts row {i} in no block")
        rlab.append(r)
    clab = []
    for j in range(vm.n):
        s = next((s for s in range(vm.l) if assignment.get(vm.y(j, s))), None)
        if s is None:
            raise ValueError(f"assignment puts column {j} in no block")
        clab.append(s)
    return CoClustering(drop_empty_and_split(rlab, instance.k), drop_empty_and_split(clab, instance.l))


@dataclass
class BoundarySearchStats:
    boundaries: int = 0  # boundaries enumerated, filtered ones included
    filtered: int = 0
    sat: SatStats = field(default_factory=SatStats)
    boundary: list[list[int]] | None = None  # the satisfiable boundary, if any


def boundary_count(sigma_size: int, k: int, l: int) -> int:
    return sigma_size ** (k * l)


def boundary_at(index: int, sigma: Sequence[int], k: int, l: int) -> ClusterBoundary:
    """The ``index``-th boundary in row-major order with the alphabet ascending."""
    q = len(sigma)
    digits = []
    for _ in range(k * l):
        index, d = divmod(index, q)
        digits.append(sigma[d])
    digits.reverse()
    return ClusterBoundary(tuple(tuple(digits[r * l:(r + 1) * l]) for r in range(k)))


def iter_boundaries(sigma: Sequence[int], k: int, l: int) -> Iterator[ClusterBoundary]:
    for flat in itertools.product(sigma, repeat=k * l):
        yield ClusterBoundary(tuple(flat[r * l:(r + 1) * l] for r in range(k)))


def is_doubly_lexical(U: Sequence[Sequence[int]]) -> bool:
    """Rows and columns both in non-decreasing lexicographic order."""
    rows = [tuple(r) for r in U]
    cols = list(zip(*rows))
    return all(a <= b for a, b in zip(rows, rows[1:])) and all(a <= b for a, b in zip(cols, cols[1:]))


def _boundary_block(start: int, stop: int, sigma: np.ndarray, k: int, l: int) -> np.ndarray:
    q = len(sigma)
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, k * l), dtype=np.int64)
    for p in range(k * l - 1, -1, -1):
        digits[:, p] = idx % q
        idx //= q
    return sigma[digits].reshape(-1, k, l)


def arc_consistent(A: np.ndarray, U: np.ndarray, c: int, max_rounds: int | None = None) -> np.ndarray:
    """Mask of boundaries that survive arc-consistency; the rest are unsatisfiable.

    A row may stay in row block ``r`` only if every column still has some
    allowed column block ``s`` whose window at ``(r, s)`` holds the entry,
    and symmetrically for columns.  Domains shrink until nothing changes;
    an empty domain rules the boundary out.
    """
    # boundaries sit on the last axis so each reduction runs over contiguous rows
    u = np.ascontiguousarray(np.moveaxis(U, 0, -1))  # (k, l, N)
    a = A[:, :, None, None, None]
    fit = (a >= u) & (a <= u + c)  # (m, n, k, l, N)
    row_dom = fit.any(axis=3).all(axis=1)  # (m, k, N)
    col_dom = fit.any(axis=2).all(axis=0)  # (n, l, N)
    alive = np.arange(len(U))
    rounds = 0
    while True:
        ok = row_dom.any(axis=1).all(axis=0) & col_dom.any(axis=1).all(axis=0)
        if np.count_nonzero(ok) < len(ok):
            alive = alive[ok]
            # compress keeps the result contiguous, unlike boolean indexing on the last axis
            fit, row_dom, col_dom = (np.compress(ok, x, axis=-1) for x in (fit, row_dom, col_dom))
        if not len(alive) or rounds == max_rounds:
            break
        rounds += 1
        new_rows = row_dom & (fit & col_dom[None, :, None, :, :]).any(axis=3).all(axis=1)
        new_cols = col_dom & (fit & new_rows[:, None, :, None, :]).any(axis=2).all(axis=0)
        # domains only shrink, so equal counts mean nothing changed
        if rounds != max_rounds and (
            np.count_nonzero(new_rows) == np.count_nonzero(row_dom)
            and np.count_nonzero(new_cols) == np.count_nonzero(col_dom)
        ):
            break
        row_dom, col_dom = new_rows, new_cols
    result = np.zeros(len(U), dtype=bool)
    result[alive] = True
    return result


def _lex_le(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``a <= b`` in lexicographic order, for two ``(N, d)`` arrays."""
    diff = a != b
    first = diff.argmax(axis=1)
    idx = np.arange(len(a))
    return ~diff.any(axis=1) | (a[idx, first] < b[idx, first])


def _doubly_lexical_mask(U: np.ndarray) -> np.ndarray:
    mask = np.ones(len(U), dtype=bool)
    for r in range(U.shape[1] - 1):
        mask &= _lex_le(U[:, r, :], U[:, r + 1, :])
    for s in range(U.shape[2] - 1):
        mask &= _lex_le(U[:, :, s], U[:, :, s + 1])
    return mask


@functools.lru_cache(maxsize=64)
def _boundary_digits(q: int, k: int, l: int, doubly_lexical: bool) -> tuple[np.ndarray, np.ndarray]:
    """Indices and alphabet-position digits of the boundaries to visit, in index order."""
    total = q ** (k * l)
    digit_range = np.arange(q, dtype=np.int8)
    indices, digits = [], []
    step = 1 << 16
    for lo in range(0, total, step):
        hi = min(total, lo + step)
        block = _boundary_block(lo, hi, digit_range, k, l)
        idx = np.arange(lo, hi, dtype=np.int64)
        if doubly_lexical:
            keep = _doubly_lexical_mask(block)
            block, idx = block[keep], idx[keep]
        indices.append(idx)
        digits.append(block)
    return np.concatenate(indices), np.concatenate(digits)


_CACHE_LIMIT = 1 << 22


def _candidates(q: int, k: int, l: int, doubly_lexical: bool, start: int, stop: int, chunk: int):
    """Chunks of (indices, digits) for the boundaries in ``[start, stop)``."""
    if q ** (k * l) <= _CACHE_LIMIT:
        indices, digits = _boundary_digits(q, k, l, doubly_lexical)
        lo, last = np.searchsorted(indices, [start, stop])
        # small chunks first: satisfiable boundaries often come early
        size = min(16, chunk)
        while lo < last:
            hi = min(last, lo + size)
            yield indices[lo:hi], digits[lo:hi]
            lo, size = hi, min(chunk, size * 2)
        return
    digit_range = np.arange(q, dtype=np.int64)
    for lo in range(start, stop, chunk):
        hi = min(stop, lo + chunk)
        block = _boundary_block(lo, hi, digit_range, k, l)
        idx = np.arange(lo, hi, dtype=np.int64)
        if doubly_lexical:
            keep = _doubly_lexical_mask(block)
            block, idx = block[keep], idx[keep]
        yield idx, block


def _scan_range(instance: Instance, start: int, stop: int, prefilter: bool, doubly_lexical: bool,
                max_decisions: int | None):
    """First satisfiable boundary index in ``[start, stop)`` with its model."""
    A = instance.matrix
    k, l, c = instance.k, instance.l, instance.c
    sigma = np.array(alphabet(A), dtype=np.int64)
    stats = BoundarySearchStats()
    chunk = max(1, (1 << 20) // (A.m * A.n * k * l))
    arr = A.array
    tried = 0
    for indices, digits in _candidates(len(sigma), k, l, doubly_lexical, start, stop, chunk):
        block = sigma[digits]
        keep = arc_consistent(arr, block, c, max_rounds=2) if prefilter else np.ones(len(block), dtype=bool)
        for off in np.flatnonzero(keep):
            U = block[off].tolist()
            tried += 1
            cnf, vm = build_boundary_cnf(instance, ClusterBoundary(U))
            model = solve_cnf(cnf, max_decisions=max_decisions, stats=stats.sat)
            if model is not None:
                found = int(indices[off])
                stats.boundaries = found - start + 1
                stats.filtered = stats.boundaries - tried
                stats.boundary = U
                return found, model, stats
    stats.boundaries = stop - start
    stats.filtered = stats.boundaries - tried
    return None, None, stats


def solve_via_boundary_enumeration(
    instance: Instance,
    *,
    max_boundaries: int = DEFAULT_MAX_BOUNDARIES,
    prefilter: bool = True,
    doubly_lexical: bool = False,
    max_decisions: int | None = None,
    jobs: int = 1,
    stats: BoundarySearchStats | None = None,
) -> CoClustering | None:
    """Try every boundary in ``Sigma^(k x l)``; decode the first satisfiable one.

    ``prefilter`` skips boundaries that fail cheap necessary conditions (the
    result is unchanged).  ``doubly_lexical`` additionally restricts to
    boundaries whose rows and columns are lexicographically sorted; every
    boundary can be permuted into that form, so feasibility is unchanged but
    the returned witness may differ.  With ``jobs > 1`` the index range is
    scanned in parallel waves and the lowest satisfiable index still wins.
    """
    sigma = alphabet(instance.matrix)
    total = boundary_count(len(sigma), instance.k, instance.l)
    if total > max_boundaries:
        raise BudgetExhausted(f"{total} cluster boundaries exceed the cap of {max_boundaries}")
    stats = stats if stats is not None else BoundarySearchStats()

    if jobs <= 1:
        found, model, sub = _scan_range(instance, 0, total, prefilter, doubly_lexical, max_decisions)
        _merge(stats, sub)
    else:
        found, model = None, None
        span = max(1, -(-total // (jobs * 4)))
        ranges = [(lo, min(total, lo + span)) for lo in range(0, total, span)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for w in range(0, len(ranges), jobs):
                wave = ranges[w:w + jobs]
                results = list(pool.map(_scan_range, *zip(*[
                    (instance, lo, hi, prefilter, doubly_lexical, max_decisions) for lo, hi in wave
                ])))
                for idx, mdl, sub in results:
                    _merge(stats, sub)
                hits = [(idx, mdl, sub) for idx, mdl, sub in results if idx is not None]
                if hits:
                    found, model, sub = min(hits, key=lambda h: h[0])
                    stats.boundary = sub.boundary
                    break
    if found is None:
        return None
    vm = VarMap(instance.matrix.m, instance.matrix.n, instance.k, instance.l)
    return decode_assignment(model, vm, instance)


def _merge(into: BoundarySearchStats, sub: BoundarySearchStats) -> None:
    into.boundaries += sub.boundaries
    into.filtered += sub.filtered
    into.sat.calls += sub.sat.calls
    into.sat.two_sat_calls += sub.sat.two_sat_calls
    into.sat.decisions += sub.sat.decisions
    into.sat.propagations += sub.sat.propagations
    if sub.boundary is not None:
        into.boundary = sub.boundary


def solve_via_full_cnf(
    instance: Instance,
    *,
    max_clauses: int = DEFAULT_MAX_CLAUSES,
    max_decisions: int | None = None,
    stats: SatStats | None = None,
) -> CoClustering | None:
    """Solve the full encoding, with block-relabelling symmetry broken by unit clauses."""
    cnf, vm = build_full_cnf(instance, max_clauses=max_clauses)
    cnf = Cnf._trusted(cnf.num_vars, cnf.clauses + symmetry_units(vm))
    model = solve_cnf(cnf, max_decisions=max_decisions, stats=stats)
    return None if model is None else decode_assignment(model, vm, instance)


def symmetry_units(vm: VarMap) -> tuple[tuple[int], ...]:
    """Unit clauses keeping row ``i`` out of blocks above ``i`` (same for columns).

    Sound for the full encoding: keep one true block per row and column,
    then renumber blocks by first appearance.  Conflict clauses are
    symmetric in the block labels, so the result still satisfies them.
    """
    rows = [(-vm.x(i, r),) for i in range(min(vm.m, vm.k)) for r in range(i + 1, vm.k)]
    cols = [(-vm.y(j, s),) for j in range(min(vm.n, vm.l)) for s in range(j + 1, vm.l)]
    return tuple(rows + cols)
