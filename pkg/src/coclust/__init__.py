"""Exact solvers for L-infinity co-clustering of integer matrices."""

from .consecutive import CutSet, RectangleExtrema, optimize_consecutive, solve_consecutive
from .core import (
    BudgetExhausted,
    CoclustError,
    CoClustering,
    Instance,
    InstanceTooLarge,
    IntMatrix,
    MatrixParseError,
    Partition,
    RealInstance,
    alphabet,
    candidate_costs,
    cost,
    parse_matrix,
    read_matrix,
    rescale,
)
from .engine import Bounds, EngineConfig, OptimizeResult, Trace, bounds, decide, optimize
from .oracle import brute_force_decide, brute_force_optimal
from .sat import Cnf, ClusterBoundary, build_boundary_cnf, build_full_cnf, export_dimacs, parse_dimacs

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "BudgetExhausted",
    "ClusterBoundary",
    "Cnf",
    "CoClustering",
    "CoclustError",
    "CutSet",
    "EngineConfig",
    "Instance",
    "InstanceTooLarge",
    "IntMatrix",
    "MatrixParseError",
    "OptimizeResult",
    "Partition",
    "RealInstance",
    "RectangleExtrema",
    "Trace",
    "alphabet",
    "bounds",
    "brute_force_decide",
    "brute_force_optimal",
    "build_boundary_cnf",
    "build_full_cnf",
    "candidate_costs",
    "cost",
    "decide",
    "export_dimacs",
    "optimize",
    "optimize_consecutive",
    "parse_dimacs",
    "parse_matrix",
    "read_matrix",
    "rescale",
    "solve_consecutive",
]
