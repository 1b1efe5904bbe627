"""Solver dispatch, cost optimisation and cheap lower/upper bounds.

Every solver in the package is registered here as a named *route*.  A route
knows when it applies and how to run; :func:`decide` with the default
``"auto"`` strategy picks the cheapest applicable one.
"""

from __future__ import annotations

import bisect
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable

import numpy as np

from .core import (
    BudgetExhausted,
    CoClustering,
    Instance,
    InstanceTooLarge,
    IntMatrix,
    Partition,
    alphabet,
    candidate_costs,
    cost,
    span,
    split_to,
)
from .exact_special import (
    solve_2x2,
    solve_binary,
    solve_cost_zero,
    solve_k2_ternary,
    solve_one_row_block,
    trivial_coclustering,
)
from .fpt import FptStats, solve_k2_cost1
from .oracle import DEFAULT_GUARD, brute_force_decide
from .sat import (
    DEFAULT_MAX_BOUNDARIES,
    DEFAULT_MAX_CLAUSES,
    BoundarySearchStats,
    SatStats,
    solve_via_boundary_enumeration,
    solve_via_full_cnf,
)

log = logging.getLogger(__name__)

BUDGET_ENV = "COCLUST_BUDGET"


@dataclass(frozen=True)
class EngineConfig:
    max_boundaries: int = DEFAULT_MAX_BOUNDARIES
    max_clauses: int = DEFAULT_MAX_CLAUSES
    max_decisions: int | None = 10**6
    oracle_guard: int = DEFAULT_GUARD
    coloring_nodes: int = 10**6
    jobs: int = 1
    prefilter: bool = True
    symmetry: bool = True  # only doubly-lexical boundaries

    @classmethod
    def from_env(cls, **overrides) -> EngineConfig:
        """Defaults, with enumeration caps replaced by ``$COCLUST_BUDGET`` when set."""
        raw = os.environ.get(BUDGET_ENV)
        if raw:
            try:
                cap = int(raw)
            except ValueError:
                raise ValueError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
            if cap < 1:
                raise ValueError(f"{BUDGET_ENV} must be positive")
            for name in ("max_boundaries", "oracle_guard", "coloring_nodes"):
                overrides.setdefault(name, cap)
        return cls(**overrides)


@dataclass
class Trace:
    route: str | None = None
    transposed: bool = False
    stats: dict = field(default_factory=dict)
    fallbacks: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Route:
    name: str
    applies: Callable[[Instance], bool]
    run: Callable[[Instance, EngineConfig, Trace], CoClustering | None]


def _stats_dict(obj) -> dict:
    # shallow; Trace.to_dict converts nested records
    return dict(vars(obj))


def _with_two_row_blocks(instance: Instance, trace: Trace, solve) -> CoClustering | None:
    """Run ``solve`` on the orientation with two row blocks, mapping the answer back."""
    if instance.k == 2:
        return solve(instance)
    trace.transposed = True
    cc = solve(instance.transpose())
    return None if cc is None else cc.transpose()


def _run_trivial(inst, cfg, trace):
    return trivial_coclustering(inst.matrix, inst.k, inst.l)


def _run_cost_zero(inst, cfg, trace):
    return solve_cost_zero(inst.matrix, inst.k, inst.l)


def _run_binary(inst, cfg, trace):
    return solve_binary(inst)


def _run_one_row_block(inst, cfg, trace):
    if inst.k == 1:
        res = solve_one_row_block(inst.matrix, inst.l, inst.c)
        if res is None:
            return None
        trace.stats["min_blocks"] = res[1]
        return CoClustering(Partition(inst.matrix.m, (tuple(range(inst.matrix.m)),)), res[0])
    trace.transposed = True
    res = solve_one_row_block(inst.matrix.transpose(), inst.k, inst.c)
    if res is None:
        return None
    trace.stats["min_blocks"] = res[1]
    return CoClustering(res[0], Partition(inst.matrix.n, (tuple(range(inst.matrix.n)),)))


def _run_2x2(inst, cfg, trace):
    stats = BoundarySearchStats()
    cc = solve_2x2(inst.matrix, inst.c, stats)
    trace.stats.update(_stats_dict(stats))
    return cc


def _run_ternary(inst, cfg, trace):
    return _with_two_row_blocks(inst, trace, lambda i: solve_k2_ternary(i.matrix, i.l, i.c))


def _run_cost1(inst, cfg, trace):
    stats = FptStats()

    def solve(i):
        return solve_k2_cost1(i.matrix, i.l, max_boundaries=cfg.max_boundaries, stats=stats)

    try:
        return _with_two_row_blocks(inst, trace, solve)
    finally:
        trace.stats.update(_stats_dict(stats))


def _run_boundary(inst, cfg, trace):
    stats = BoundarySearchStats()
    try:
        return solve_via_boundary_enumeration(
            inst,
            max_boundaries=cfg.max_boundaries,
            prefilter=cfg.prefilter,
            doubly_lexical=cfg.symmetry,
            max_decisions=cfg.max_decisions,
            jobs=cfg.jobs,
            stats=stats,
        )
    finally:
        trace.stats.update(_stats_dict(stats))


def _run_full_cnf(inst, cfg, trace):
    stats = SatStats()
    try:
        return solve_via_full_cnf(
            inst, max_clauses=cfg.max_clauses, max_decisions=cfg.max_decisions, stats=stats
        )
    finally:
        trace.stats.update(_stats_dict(stats))


def _run_oracle(inst, cfg, trace):
    return brute_force_decide(inst, guard=cfg.oracle_guard)


def _has_two(inst):
    return inst.k == 2 or inst.l == 2


ROUTES: dict[str, Route] = {
    r.name: r
    for r in (
        Route("trivial", lambda i: i.c >= span(i.matrix), _run_trivial),
        Route("cost-zero", lambda i: i.c == 0, _run_cost_zero),
        Route("binary", lambda i: len(alphabet(i.matrix)) <= 2, _run_binary),
        Route("one-row-block", lambda i: i.k == 1 or i.l == 1, _run_one_row_block),
        Route("two-by-two", lambda i: i.k == 2 and i.l == 2, _run_2x2),
        Route("two-row-ternary", lambda i: _has_two(i) and len(alphabet(i.matrix)) == 3, _run_ternary),
        Route("two-row-cost-one", lambda i: _has_two(i) and i.c == 1, _run_cost1),
        Route("boundary", lambda i: True, _run_boundary),
        Route("full-cnf", lambda i: True, _run_full_cnf),
        Route("oracle", lambda i: True, _run_oracle),
    )
}

# the order "auto" tries; boundary falls back to full-cnf when over budget
AUTO_ORDER = ("trivial", "cost-zero", "binary", "one-row-block", "two-by-two",
              "two-row-ternary", "two-row-cost-one", "boundary")
STRATEGIES = ("auto", "full-cnf", "boundary", "oracle")


def applicable_routes(instance: Instance) -> list[str]:
    return [name for name, route in ROUTES.items() if route.applies(instance)]


def run_route(instance: Instance, name: str, config: EngineConfig | None = None) -> tuple[CoClustering | None, Trace]:
    """Run one named route; raises ``ValueError`` if it does not apply."""
    config = config or EngineConfig()
    route = ROUTES.get(name)
    if route is None:
        raise ValueError(f"unknown route {name!r}; choose from {sorted(ROUTES)}")
    if not route.applies(instance):
        raise ValueError(f"route {name!r} does not apply to this instance")
    trace = Trace(route=name)
    return route.run(instance, config, trace), trace


def decide(
    instance: Instance, strategy: str = "auto", config: EngineConfig | None = None
) -> tuple[CoClustering | None, Trace]:
    """A co-clustering of cost at most ``instance.c``, or ``None``, plus how it was found."""
    config = config or EngineConfig()
    if strategy != "auto":
        if strategy not in ROUTES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
        return run_route(instance, strategy, config)
    # orient so that k <= l; the specialised routes assume it
    flipped = instance.k > instance.l
    work = instance.transpose() if flipped else instance
    name = next(n for n in AUTO_ORDER if ROUTES[n].applies(work))
    trace = Trace(route=name)
    try:
        cc = ROUTES[name].run(work, config, trace)
    except BudgetExhausted as exc:
        if name != "boundary":
            raise
        log.info("boundary enumeration over budget (%s); using the full encoding", exc)
        trace.fallbacks.append(f"boundary: {exc}")
        trace.route = "full-cnf"
        try:
            cc = ROUTES["full-cnf"].run(work, config, trace)
        except InstanceTooLarge as too_large:
            raise BudgetExhausted(f"{exc}; full encoding unavailable: {too_large}") from too_large
    if flipped:
        trace.transposed = not trace.transposed
        cc = None if cc is None else cc.transpose()
    return cc, trace


# --- bounds ------------------------------------------------------------------


def _linf_distances(vectors: np.ndarray) -> np.ndarray:
    return np.abs(vectors[:, None, :] - vectors[None, :, :]).max(axis=2)


def _color(adj: list[set[int]], k: int, node_budget: int) -> list[int] | None:
    """Exact k-colouring by backtracking (most constrained vertex first)."""
    n = len(adj)
    colors = [-1] * n
    nodes = 0

    def pick():
        best, best_key = -1, None
        for v in range(n):
            if colors[v] < 0:
                used = {colors[u] for u in adj[v] if colors[u] >= 0}
                key = (len(used), len(adj[v]))
                if best_key is None or key > best_key:
                    best, best_key = v, key
        return best

    def extend(colored: int, used_colors: int) -> bool:
        nonlocal nodes
        if colored == n:
            return True
        nodes += 1
        if nodes > node_budget:
            raise BudgetExhausted(f"colouring search exceeded {node_budget} nodes")
        v = pick()
        taken = {colors[u] for u in adj[v]}
        # a fresh colour is interchangeable with any other fresh one
        for col in range(min(k, used_colors + 1)):
            if col not in taken:
                colors[v] = col
                if extend(colored + 1, max(used_colors, col + 1)):
                    return True
                colors[v] = -1
        return False

    return colors if extend(0, 0) else None


def _greedy_color(adj: list[set[int]], k: int) -> list[int] | None:
    colors = [-1] * len(adj)
    for v in range(len(adj)):
        taken = {colors[u] for u in adj[v]}
        free = next((col for col in range(k) if col not in taken), None)
        if free is None:
            return None
        colors[v] = free
    return colors


def _greedy_clique_size(adj: list[set[int]]) -> int:
    best = 0
    for start in range(len(adj)):
        clique = [start]
        for v in sorted(adj[start], key=lambda u: -len(adj[u])):
            if all(v in adj[u] for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best


def group_vectors(vectors: np.ndarray, k: int, node_budget: int, exact: bool = True) -> tuple[int, Partition]:
    """Fewest-spread partition of vectors into ``k`` groups under the max-metric.

    A group's spread over singleton columns is its largest pairwise
    max-metric distance, so a threshold ``t`` is achievable iff the graph
    joining vectors at distance above ``t`` is ``k``-colourable.  Thresholds
    are searched among the pairwise distances.  ``exact=False`` uses a
    first-fit colouring, which gives an upper bound only.
    """
    count = len(vectors)
    dist = _linf_distances(vectors)
    thresholds = sorted({0, *np.unique(dist).tolist()})

    def attempt(t):
        adj = [set(np.flatnonzero(dist[v] > t).tolist()) for v in range(count)]
        if not exact:
            return _greedy_color(adj, k)
        if _greedy_clique_size(adj) > k:
            return None
        return _greedy_color(adj, k) or _color(adj, k, node_budget)

    found = {}

    def ok(idx):
        if idx not in found:
            found[idx] = attempt(thresholds[idx])
        return found[idx] is not None

    # the largest threshold leaves no edges, so it always succeeds
    idx = bisect.bisect_left(range(len(thresholds)), True, key=ok)
    ok(idx)
    return thresholds[idx], split_to(Partition.from_labels(found[idx]), k)


@dataclass(frozen=True)
class Bounds:
    lower: int
    upper: int
    witness: CoClustering
    row_cost: int
    col_cost: int
    tight: bool  # False when the sub-problems were only solved heuristically

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "row_cost": self.row_cost,
            "col_cost": self.col_cost,
            "tight": self.tight,
        }


def bounds(matrix: IntMatrix, k: int, l: int, config: EngineConfig | None = None) -> Bounds:
    """Sandwich the optimal cost between the two one-sided optima.

    ``row_cost`` is the optimum with ``k`` row blocks and singleton columns,
    ``col_cost`` the optimum with singleton rows and ``l`` column blocks.
    Merging columns or rows can only raise the cost, so both are lower
    bounds; pairing the two optimal partitions gives a co-clustering of cost
    at most their sum.
    """
    config = config or EngineConfig()
    Instance(matrix, k, l, 0)
    arr = matrix.array
    try:
        c1, rows = group_vectors(arr, k, config.coloring_nodes)
        c2, cols = group_vectors(arr.T, l, config.coloring_nodes)
        tight = True
    except BudgetExhausted as exc:
        log.info("exact bounds unavailable (%s); using first-fit grouping", exc)
        c1, rows = group_vectors(arr, k, config.coloring_nodes, exact=False)
        c2, cols = group_vectors(arr.T, l, config.coloring_nodes, exact=False)
        tight = False
    witness = CoClustering(rows, cols)
    lower = max(c1, c2) if tight else 0
    return Bounds(lower, c1 + c2, witness, c1, c2, tight)


@dataclass
class OptimizeResult:
    cost: int
    coclustering: CoClustering
    bounds: Bounds
    traces: list[tuple[int, Trace]]


def optimize(
    matrix: IntMatrix, k: int, l: int, config: EngineConfig | None = None, strategy: str = "auto"
) -> OptimizeResult:
    """Minimum cost and a witness, binary searching the candidate costs inside the bounds."""
    config = config or EngineConfig()
    b = bounds(matrix, k, l, config)
    best_cc = b.witness
    best = cost(matrix, best_cc)
    candidates = [c for c in candidate_costs(matrix) if b.lower <= c < best]
    traces = []
    # candidates[:lo] are infeasible; every candidate kept is below the best cost found
    lo = 0
    while lo < len(candidates):
        mid = (lo + len(candidates)) // 2
        cc, trace = decide(Instance(matrix, k, l, candidates[mid]), strategy, config)
        traces.append((candidates[mid], trace))
        if cc is None:
            lo = mid + 1
        else:
            best_cc, best = cc, cost(matrix, cc)
            candidates = [c for c in candidates if c < best]
    return OptimizeResult(best, best_cc, b, traces)


# --- real-valued input -------------------------------------------------------


def scale_to_integers(rows) -> tuple[IntMatrix, int]:
    """Multiply rational entries by the least common denominator."""
    fracs = [[Fraction(v) for v in row] for row in rows]
    factor = lcm(*(v.denominator for row in fracs for v in row))
    return IntMatrix([[int(v * factor) for v in row] for row in fracs]), factor
