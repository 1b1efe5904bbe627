from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coclust.core import BudgetExhausted, Instance, IntMatrix, cost
from coclust.engine import (
    AUTO_ORDER,
    ROUTES,
    EngineConfig,
    Trace,
    applicable_routes,
    bounds,
    decide,
    group_vectors,
    optimize,
    run_route,
    scale_to_integers,
)
from coclust.oracle import brute_force_decide, brute_force_optimal

from helpers import SMALL_EXAMPLE, PRISM_MATRIX, instances, matrices


class TestRouting:
    def test_small_example_two_by_two(self):
        cc, trace = decide(Instance(SMALL_EXAMPLE, 2, 2, 1))
        assert cost(SMALL_EXAMPLE, cc) <= 1 and trace.route == "two-by-two"

    def test_prism_boundary(self):
        A = IntMatrix(PRISM_MATRIX)
        cc, trace = decide(Instance(A, 3, 3, 1))
        assert cc is not None and trace.route == "boundary"

    def test_single_row_uses_sweep(self):
        A = IntMatrix([[0, 3, 1, 4, 1]])
        _, trace = decide(Instance(A, 1, 3, 1))
        assert trace.route == "one-row-block"

    @pytest.mark.parametrize("rows,k,l,c,route", [
        (SMALL_EXAMPLE.rows, 2, 2, 4, "trivial"),
        (SMALL_EXAMPLE.rows, 2, 2, 0, "cost-zero"),
        ([[0, 5, 5], [5, 0, 0], [0, 0, 5]], 3, 3, 1, "binary"),
        ([[0, 1, 2, 0], [2, 1, 0, 1], [1, 1, 2, 2]], 2, 3, 1, "two-row-ternary"),
        ([[0, 1, 2, 3], [3, 2, 1, 0], [1, 3, 0, 2]], 2, 3, 1, "two-row-cost-one"),
        ([[0, 1, 2, 3], [3, 2, 1, 0], [1, 3, 0, 2]], 2, 3, 2, "boundary"),
    ])
    def test_routes(self, rows, k, l, c, route):
        _, trace = decide(Instance(IntMatrix(rows), k, l, c))
        assert trace.route == route

    def test_transposes_when_more_row_blocks(self):
        A = IntMatrix([[0, 1, 2, 3], [1, 2, 3, 0], [2, 3, 0, 1]])
        cc, trace = decide(Instance(A, 3, 2, 1))
        assert trace.transposed and trace.route == "two-row-cost-one"
        assert cc is None or (cc.k, cc.l) == (3, 2)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            decide(Instance(SMALL_EXAMPLE, 2, 2, 1), strategy="magic")

    def test_run_route_checks_applicability(self):
        with pytest.raises(ValueError):
            run_route(Instance(SMALL_EXAMPLE, 2, 2, 1), "cost-zero")
        with pytest.raises(ValueError):
            run_route(Instance(SMALL_EXAMPLE, 2, 2, 1), "nope")

    def test_boundary_falls_back_to_full_encoding(self):
        A = IntMatrix([[0, 1, 2, 3], [3, 1, 0, 2], [2, 3, 1, 0]])
        inst = Instance(A, 3, 3, 1)
        cc, trace = decide(inst, config=EngineConfig(max_boundaries=10))
        assert trace.route == "full-cnf" and trace.fallbacks
        assert (cc is None) == (brute_force_decide(inst) is None)

    def test_fallback_too_large_reports_budget(self):
        A = IntMatrix([[0, 1, 2, 3], [3, 1, 0, 2], [2, 3, 1, 0]])
        with pytest.raises(BudgetExhausted, match="full encoding unavailable"):
            decide(Instance(A, 3, 3, 1), config=EngineConfig(max_boundaries=10, max_clauses=5))

    def test_trace_serialises(self):
        _, trace = decide(Instance(SMALL_EXAMPLE, 2, 2, 1))
        d = trace.to_dict()
        assert d["route"] == "two-by-two" and isinstance(d["stats"]["sat"], dict)
        assert Trace().to_dict()["fallbacks"] == []

    def test_auto_order_is_registered(self):
        assert set(AUTO_ORDER) <= set(ROUTES)

    @settings(max_examples=150)
    @given(instances(max_m=4, max_n=4, max_value=3))
    def test_all_applicable_routes_agree(self, inst):
        ref = brute_force_decide(inst) is not None
        for name in applicable_routes(inst):
            cc, _ = run_route(inst, name)
            assert (cc is not None) == ref, name
            if cc is not None:
                assert cost(inst.matrix, cc) <= inst.c and (cc.k, cc.l) == (inst.k, inst.l)
        cc, _ = decide(inst)
        assert (cc is not None) == ref

    @given(instances(max_m=4, max_n=4, max_value=3))
    def test_monotone_in_cost(self, inst):
        if decide(inst)[0] is not None:
            for c in range(inst.c + 1, inst.c + 3):
                assert decide(inst.with_cost(c))[0] is not None


class TestConfig:
    def test_env_budget(self, monkeypatch):
        monkeypatch.setenv("COCLUST_BUDGET", "77")
        cfg = EngineConfig.from_env(jobs=2)
        assert (cfg.max_boundaries, cfg.oracle_guard, cfg.coloring_nodes, cfg.jobs) == (77, 77, 77, 2)

    @pytest.mark.parametrize("raw", ["x", "0"])
    def test_env_budget_invalid(self, monkeypatch, raw):
        monkeypatch.setenv("COCLUST_BUDGET", raw)
        with pytest.raises(ValueError):
            EngineConfig.from_env()


class TestBounds:
    def test_constant(self):
        b = bounds(IntMatrix([[5, 5], [5, 5]]), 1, 1)
        assert (b.lower, b.upper) == (0, 0) and cost(IntMatrix([[5, 5], [5, 5]]), b.witness) == 0

    def test_small_example(self):
        b = bounds(SMALL_EXAMPLE, 2, 2)
        assert b.lower <= 1 <= b.upper and b.tight

    def test_group_vectors_is_exact(self):
        vecs = np.array([[0], [1], [5], [6], [10]])
        threshold, part = group_vectors(vecs, 3, 10**4)
        assert threshold == 1 and len(part) == 3

    def test_greedy_fallback_flagged(self):
        A = IntMatrix([
            [2, 1, 4, 1, 3, 1, 2, 4], [0, 3, 2, 3, 3, 1, 3, 3], [2, 0, 3, 0, 4, 4, 4, 0],
            [4, 4, 2, 4, 3, 3, 0, 0], [1, 1, 2, 4, 3, 2, 2, 3], [3, 0, 3, 0, 2, 2, 4, 3],
            [0, 2, 0, 0, 2, 4, 1, 0], [4, 2, 0, 2, 1, 1, 2, 2],
        ])
        assert bounds(A, 3, 3).tight
        b = bounds(A, 3, 3, EngineConfig(coloring_nodes=1))
        assert not b.tight and b.lower == 0
        assert cost(A, b.witness) <= b.upper

    @settings(max_examples=150)
    @given(matrices(max_m=4, max_n=4, max_value=4), st.data())
    def test_sandwich(self, A, data):
        k = data.draw(st.integers(1, A.m))
        l = data.draw(st.integers(1, A.n))
        b = bounds(A, k, l)
        best = brute_force_optimal(A, k, l)
        assert b.lower == max(b.row_cost, b.col_cost) and b.upper == b.row_cost + b.col_cost
        assert b.lower <= best <= b.upper
        assert cost(A, b.witness) <= b.upper
        assert b.row_cost == brute_force_optimal(A, k, A.n)
        assert b.col_cost == brute_force_optimal(A, A.m, l)


class TestOptimize:
    def test_small_example(self):
        res = optimize(SMALL_EXAMPLE, 2, 2)
        assert res.cost == 1 and cost(SMALL_EXAMPLE, res.coclustering) == 1

    def test_constant(self):
        assert optimize(IntMatrix([[3, 3], [3, 3]]), 2, 1).cost == 0

    @settings(max_examples=200)
    @given(matrices(max_m=4, max_n=4, max_value=3), st.data())
    def test_matches_oracle(self, A, data):
        k = data.draw(st.integers(1, min(3, A.m)))
        l = data.draw(st.integers(1, min(3, A.n)))
        res = optimize(A, k, l)
        assert res.cost == brute_force_optimal(A, k, l) == cost(A, res.coclustering)

    def test_strategies_agree(self):
        A = IntMatrix([[0, 3, 1], [2, 2, 0], [3, 0, 1]])
        got = {s: optimize(A, 2, 2, strategy=s).cost for s in ("auto", "full-cnf", "boundary", "oracle")}
        assert len(set(got.values())) == 1

    def test_budget_propagates(self):
        A = IntMatrix([
            [3, 1, 0, 1, 1, 3], [1, 0, 1, 2, 3, 2], [3, 0, 3, 0, 2, 1],
            [0, 2, 1, 2, 1, 0], [2, 1, 2, 2, 3, 1], [0, 2, 3, 3, 3, 2],
        ])
        with pytest.raises(BudgetExhausted):
            optimize(A, 3, 3, EngineConfig(max_boundaries=10, max_clauses=10), strategy="boundary")


def test_scale_to_integers():
    A, factor = scale_to_integers([[Fraction(1, 2), 1], [Fraction(1, 3), 0]])
    assert factor == 6 and A.rows == ((3, 6), (2, 0))
