"""End-to-end acceptance checks with their time limits.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import itertools
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import pytest

from coclust.consecutive import optimize_consecutive
from coclust.core import (
    BudgetExhausted,
    Instance,
    IntMatrix,
    RealInstance,
    alphabet,
    cost,
    rescale,
)
from coclust.engine import AUTO_ORDER, ROUTES, EngineConfig, applicable_routes, bounds, decide, optimize, run_route
from coclust.generators import (
    ColoredPointSet,
    PointSet2D,
    SimpleGraph,
    from_3coloring,
    from_box_cover,
    from_optimal_discretization,
    has_box_cover,
    random_instance,
)
from coclust.oracle import brute_force_decide, brute_force_optimal
from coclust.sat import (
    boundary_count,
    build_boundary_cnf,
    export_dimacs,
    iter_boundaries,
    parse_dimacs,
    solve_via_boundary_enumeration,
    solve_via_full_cnf,
)

from helpers import SMALL_EXAMPLE, PRISM_EDGES, SQUARES_POINTS, GRID_BLACK, GRID_WHITE, K4_EDGES


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "first example: optimum 1 with witness, infeasible at c=0, < 1 s")
def test_first_example():
    with Stopwatch() as sw:
        result = optimize(SMALL_EXAMPLE, 2, 2)
        at_zero, _ = decide(Instance(SMALL_EXAMPLE, 2, 2, 0))
    assert result.cost == 1
    assert cost(SMALL_EXAMPLE, result.coclustering) == 1
    assert at_zero is None
    assert sw.elapsed < 1


@pytest.mark.criterion(2, "colouring reduction: prism 9x6 over {0,1,2} feasible, K4 infeasible, < 10 s")
def test_coloring_reduction():
    with Stopwatch() as sw:
        prism = from_3coloring(SimpleGraph.from_one_based(6, PRISM_EDGES))
        prism_cc, _ = decide(Instance(prism.matrix, 3, 3, 1))
        k4 = from_3coloring(SimpleGraph.from_one_based(4, K4_EDGES))
        k4_inst = Instance(k4.matrix, 3, 3, 1)
        k4_cc, _ = decide(k4_inst)
        k4_oracle = brute_force_decide(k4_inst)
    assert (prism.matrix.m, prism.matrix.n) == (9, 6)
    assert alphabet(prism.matrix) == (0, 1, 2)
    assert prism_cc is not None and cost(prism.matrix, prism_cc) <= 1
    assert k4_cc is None and k4_oracle is None
    assert sw.elapsed < 10


@pytest.mark.criterion(3, "box-cover reduction: feasible with 3 squares, 2 squares match exhaustive cover, < 5 s")
def test_box_cover_reduction():
    points = PointSet2D(tuple(SQUARES_POINTS))
    with Stopwatch() as sw:
        three, _ = decide(from_box_cover(points, 3))
        two, _ = decide(from_box_cover(points, 2))
        expected_two = has_box_cover(points, 2)
    assert three is not None
    assert (two is not None) == expected_two
    assert sw.elapsed < 5


@pytest.mark.criterion(4, "discretization reduction: 5x8 matrix, consecutive optimum 1 at (2,4), < 5 s")
def test_discretization_reduction():
    points = ColoredPointSet(frozenset(GRID_BLACK), frozenset(GRID_WHITE))
    with Stopwatch() as sw:
        inst = from_optimal_discretization(points, 1, 3, layout="grid")
        best, cuts = optimize_consecutive(inst.matrix, 2, 4)
    assert (inst.matrix.m, inst.matrix.n) == (5, 8)
    assert best == 1 and cuts is not None
    assert sw.elapsed < 5


SWEEP_SIZE = 3**9


def _three_by_three_disagreements(start: int = 0, stop: int = SWEEP_SIZE):
    """Every applicable route (and auto dispatch) against the oracle, on 3x3 ternary matrices.

    Matrices are numbered in ``itertools.product`` order; ``[start, stop)`` selects a slice.
    """
    bad = []
    for flat in itertools.islice(itertools.product(range(3), repeat=9), start, stop):
        A = IntMatrix([flat[0:3], flat[3:6], flat[6:9]])
        for k, l, c in itertools.product((1, 2, 3), (1, 2, 3), (0, 1, 2)):
            inst = Instance(A, k, l, c)
            expected = brute_force_decide(inst) is not None
            routes = [r for r in applicable_routes(inst) if r != "oracle"]
            for name in routes:
                cc, _ = run_route(inst, name)
                if (cc is not None) != expected or (cc is not None and cost(A, cc) > c):
                    bad.append((flat, k, l, c, name))
            if k > l:
                cc, _ = decide(inst)
                if (cc is not None) != expected:
                    bad.append((flat, k, l, c, "auto"))
            elif next(r for r in AUTO_ORDER if ROUTES[r].applies(inst)) not in routes:
                # auto on k <= l runs the first applicable route, already checked above
                bad.append((flat, k, l, c, "dispatch"))
    return bad


def _sweep_slice(bounds):
    return _three_by_three_disagreements(*bounds)


@pytest.mark.criterion(5, "exhaustive 3x3 sweep: every route agrees with the oracle, < 10 min")
def test_exhaustive_sweep():
    workers = min(8, os.cpu_count() or 1)
    step = -(-SWEEP_SIZE // (4 * workers))
    slices = [(lo, min(SWEEP_SIZE, lo + step)) for lo in range(0, SWEEP_SIZE, step)]
    with Stopwatch() as sw:
        if workers == 1:
            bad = _three_by_three_disagreements()
        else:
            with ProcessPoolExecutor(workers) as pool:
                bad = [item for part in pool.map(_sweep_slice, slices) for item in part]
    assert bad == []
    assert sw.elapsed < 600


@pytest.fixture(scope="module")
def random_corpus():
    rng = random.Random(20240601)
    corpus = []
    for _ in range(1000):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        q = rng.randint(1, 4)
        A = IntMatrix([[rng.randrange(q) for _ in range(n)] for _ in range(m)])
        corpus.append((A, rng.randint(1, min(3, m)), rng.randint(1, min(3, n))))
    return corpus


@pytest.fixture(scope="module")
def optima(random_corpus):
    return [brute_force_optimal(A, k, l) for A, k, l in random_corpus]


@pytest.mark.criterion(6, "random corpus: optimize equals the brute-force optimum on 1000 instances")
def test_random_optimize(random_corpus, optima):
    bad = []
    for (A, k, l), expected in zip(random_corpus, optima):
        result = optimize(A, k, l)
        if result.cost != expected or cost(A, result.coclustering) != expected:
            bad.append((A.rows, k, l, result.cost, expected))
    assert bad == []


@pytest.mark.criterion(7, "bounds sandwich the optimum and the combined witness respects the upper bound")
def test_bounds_sandwich(random_corpus, optima):
    bad = []
    for (A, k, l), optimum in zip(random_corpus, optima):
        b = bounds(A, k, l)
        ok = (
            b.tight
            and max(b.row_cost, b.col_cost) <= optimum <= b.row_cost + b.col_cost
            and cost(A, b.witness) <= b.row_cost + b.col_cost
        )
        if not ok:
            bad.append((A.rows, k, l, b.to_dict(), optimum))
    assert bad == []


def _random_real_alphabet(rng: random.Random):
    size = rng.randint(1, 8)
    while True:
        values = {Fraction(rng.randint(-400, 400), rng.choice((2, 3, 4, 5, 7, 10))) for _ in range(size)}
        c = Fraction(rng.randint(0, 300), rng.choice((3, 7, 10)))
        if any(v.denominator != 1 for v in values) or c.denominator != 1:
            return sorted(values), c


@pytest.mark.criterion(8, "rescaling: conflicts preserved, values within |alphabet|^2, cost within |alphabet|")
def test_rescale_property():
    rng = random.Random(8)
    bad = []
    for _ in range(200):
        values, c = _random_real_alphabet(rng)
        inst, mapping = rescale(RealInstance((tuple(values),), 1, 1, c))
        q = len(values)
        new = [mapping[v] for v in values]
        for a, b in itertools.combinations(range(q), 2):
            if (abs(values[a] - values[b]) > c) != (abs(new[a] - new[b]) > inst.c):
                bad.append((values, c, "conflict", a, b))
        if min(new) < 0 or max(new) > q * q or inst.c > q:
            bad.append((values, c, "range", new, inst.c))
    assert bad == []


@pytest.mark.criterion(9, "encoding parity: full CNF, boundary enumeration and oracle agree; short boundary clauses")
def test_encoding_parity():
    rng = random.Random(9)
    bad = []
    for _ in range(200):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        q = rng.randint(1, 4)
        A = IntMatrix([[rng.randrange(q) for _ in range(n)] for _ in range(m)])
        k, l = rng.randint(1, min(3, m)), rng.randint(1, min(3, n))
        inst = Instance(A, k, l, rng.randrange(q))
        expected = brute_force_decide(inst) is not None
        full = solve_via_full_cnf(inst) is not None
        by_boundary = solve_via_boundary_enumeration(inst) is not None
        if not full == by_boundary == expected:
            bad.append((A.rows, k, l, inst.c, full, by_boundary, expected))
        limit = max(k, l, 2)
        sigma = alphabet(A)
        picks = rng.sample(range(boundary_count(len(sigma), k, l)), min(20, boundary_count(len(sigma), k, l)))
        boundaries = list(iter_boundaries(sigma, k, l))
        for idx in picks:
            cnf, _ = build_boundary_cnf(inst, boundaries[idx])
            longest = max(len(clause) for clause in parse_dimacs(export_dimacs(cnf)).clauses)
            if longest > limit:
                bad.append((A.rows, k, l, inst.c, boundaries[idx].values, longest))
    assert bad == []


@pytest.mark.criterion(10, "100x100 smoke run over 4 values with 3x3 blocks finishes or reports an exhausted budget")
def test_large_smoke():
    A = random_instance(100, 100, 4, seed=2024)
    try:
        result = optimize(A, 3, 3)
    except BudgetExhausted as exc:
        assert str(exc)
    else:
        assert cost(A, result.coclustering) == result.cost
        assert result.bounds.lower <= result.cost <= result.bounds.upper
    # a decision below the optimum with a small budget must stop cleanly
    small = EngineConfig(max_boundaries=2000, max_clauses=10**5)
    with Stopwatch() as sw:
        with pytest.raises(BudgetExhausted):
            decide(Instance(A, 3, 3, 2), config=small)
    assert sw.elapsed < 60
