"""Instance generators: hardness constructions and random matrices.

Each construction comes with a brute-force check of the source problem and a
helper that turns a co-clustering back into a solution of that problem.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .consecutive import CutSet
from .core import CoClustering, Instance, IntMatrix


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph on vertices ``0..num_vertices-1``."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.num_vertices - 1}")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", tuple(norm))

    @classmethod
    def from_one_based(cls, num_vertices: int, edges) -> SimpleGraph:
        return cls(num_vertices, tuple((u - 1, v - 1) for u, v in edges))


@dataclass(frozen=True)
class PointSet2D:
    points: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pts = tuple((int(x), int(y)) for x, y in self.points)
        if not pts:
            raise ValueError("point set is empty")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class ColoredPointSet:
    black: frozenset[tuple[int, int]]
    white: frozenset[tuple[int, int]]

    def __post_init__(self):
        black = frozenset((int(x), int(y)) for x, y in self.black)
        white = frozenset((int(x), int(y)) for x, y in self.white)
        if black & white:
            raise ValueError(f"points coloured both black and white: {sorted(black & white)}")
        object.__setattr__(self, "black", black)
        object.__setattr__(self, "white", white)

    @property
    def points(self) -> frozenset[tuple[int, int]]:
        return self.black | self.white


# graph colouring ----------------------------------------------------------


def from_3coloring(graph: SimpleGraph) -> Instance:
    """One row per edge: 0 at the smaller endpoint, 2 at the larger, 1 elsewhere.

    The target is three row and three column blocks at cost one (capped by
    the matrix shape for tiny graphs, which changes nothing since fewer
    blocks than available rows or columns are never needed there).
    """
    if not graph.edges:
        raise ValueError("graph needs at least one edge")
    rows = []
    for u, v in graph.edges:
        row = [1] * graph.num_vertices
        row[u], row[v] = 0, 2
        rows.append(row)
    matrix = IntMatrix(rows)
    return Instance(matrix, min(3, matrix.m), min(3, matrix.n), 1)


def coloring_from_coclustering(graph: SimpleGraph, cc: CoClustering) -> list[int]:
    """Column block of each vertex; a proper colouring when ``cc`` has cost at most one."""
    if cc.cols.ground_size != graph.num_vertices:
        raise ValueError("co-clustering does not match the graph")
    return list(cc.cols.labels)


def is_proper_coloring(graph: SimpleGraph, colors) -> bool:
    return all(colors[u] != colors[v] for u, v in graph.edges)


def is_k_colorable(graph: SimpleGraph, k: int = 3) -> bool:
    for colors in itertools.product(range(k), repeat=graph.num_vertices):
        if is_proper_coloring(graph, colors):
            return True
    return False


# box cover -----------------------------------------------------------------

SQUARE_SIDE = 2


def from_box_cover(points: PointSet2D, l: int) -> Instance:
    """Two rows (x and y), one column per point; two row blocks, ``l`` column blocks, cost two."""
    xs = [p[0] for p in points.points]
    ys = [p[1] for p in points.points]
    return Instance(IntMatrix([xs, ys]), 2, l, SQUARE_SIDE)


def squares_from_coclustering(points: PointSet2D, cc: CoClustering) -> list[tuple[int, int]]:
    """Lower-left corners of one side-2 square per column block."""
    if cc.cols.ground_size != len(points.points):
        raise ValueError("co-clustering does not match the point set")
    return [
        (min(points.points[j][0] for j in block), min(points.points[j][1] for j in block))
        for block in cc.cols.blocks
    ]


def covers(points: PointSet2D, corners) -> bool:
    return all(
        any(cx <= x <= cx + SQUARE_SIDE and cy <= y <= cy + SQUARE_SIDE for cx, cy in corners)
        for x, y in points.points
    )


def has_box_cover(points: PointSet2D, l: int) -> bool:
    """Whether ``l`` axis-parallel squares of side two cover every point.

    Any covering square can be slid so its left edge and bottom edge pass
    within distance two of some point, so corners at point coordinates offset
    by 0, -1 or -2 suffice.
    """
    pts = points.points
    offsets = (0, -1, -2)
    masks = set()
    for (x, _), (_, y) in itertools.product(pts, pts):
        for dx, dy in itertools.product(offsets, offsets):
            cx, cy = x + dx, y + dy
            mask = 0
            for idx, (px, py) in enumerate(pts):
                if cx <= px <= cx + SQUARE_SIDE and cy <= py <= cy + SQUARE_SIDE:
                    mask |= 1 << idx
            if mask:
                masks.add(mask)
    full = (1 << len(pts)) - 1
    masks = sorted(masks)
    for count in range(1, min(l, len(pts)) + 1):
        for combo in itertools.combinations(masks, count):
            acc = 0
            for mask in combo:
                acc |= mask
            if acc == full:
                return True
    return False


# optimal discretization -------------------------------------------------------

WHITE, NEUTRAL, BLACK = 0, 1, 2


def _axes(points: ColoredPointSet, layout: str) -> tuple[list[int], list[int]]:
    xs = sorted({x for x, _ in points.points})
    ys = sorted({y for _, y in points.points})
    if layout == "grid":
        xs = list(range(xs[0], xs[-1] + 1))
        ys = list(range(ys[0], ys[-1] + 1))
    elif layout != "distinct":
        raise ValueError(f"unknown layout {layout!r}; use 'distinct' or 'grid'")
    return xs, ys


def discretization_matrix(points: ColoredPointSet, layout: str = "distinct") -> tuple[IntMatrix, list[int], list[int]]:
    """Rows indexed by y, columns by x; 0 for white, 2 for black, 1 elsewhere.

    ``layout="distinct"`` uses only coordinates that occur; ``"grid"`` uses
    every integer between the extremes.  Empty rows and columns are all
    ones and never change the answer.
    """
    if not points.black or not points.white:
        raise ValueError("need at least one black and one white point")
    xs, ys = _axes(points, layout)
    col_of = {x: j for j, x in enumerate(xs)}
    row_of = {y: i for i, y in enumerate(ys)}
    rows = [[NEUTRAL] * len(xs) for _ in ys]
    for x, y in points.white:
        rows[row_of[y]][col_of[x]] = WHITE
    for x, y in points.black:
        rows[row_of[y]][col_of[x]] = BLACK
    return IntMatrix(rows), xs, ys


def from_optimal_discretization(
    points: ColoredPointSet, k: int, l: int, layout: str = "distinct"
) -> Instance:
    """Consecutive instance: ``k`` horizontal and ``l`` vertical lines become ``k+1`` row and ``l+1`` column blocks.

    Block counts are capped by the matrix shape, since extra lines never hurt.
    """
    if k < 0 or l < 0:
        raise ValueError("line counts must be non-negative")
    matrix, _, _ = discretization_matrix(points, layout)
    return Instance(matrix, min(k + 1, matrix.m), min(l + 1, matrix.n), 1)


def lines_from_cutset(points: ColoredPointSet, cuts: CutSet, layout: str = "distinct") -> tuple[list[float], list[float]]:
    """Horizontal and vertical line positions, halfway between the coordinates each cut separates."""
    xs, ys = _axes(points, layout)
    cuts.validate(len(ys), len(xs))
    horizontal = [(ys[r - 1] + ys[r]) / 2 for r in cuts.rows]
    vertical = [(xs[c - 1] + xs[c]) / 2 for c in cuts.cols]
    return horizontal, vertical


def lines_consistent(points: ColoredPointSet, horizontal, vertical) -> bool:
    """No grid cell holds both a black and a white point (points on a line are not allowed)."""
    if any(y in horizontal or x in vertical for x, y in points.points):
        return False
    cell_color: dict[tuple[int, int], int] = {}
    for color, group in ((BLACK, points.black), (WHITE, points.white)):
        for x, y in group:
            cell = (sum(v < x for v in vertical), sum(h < y for h in horizontal))
            if cell_color.setdefault(cell, color) != color:
                return False
    return True


def has_consistent_lines(points: ColoredPointSet, k: int, l: int) -> bool:
    """Exhaustive search over lines placed between consecutive occurring coordinates."""
    xs = sorted({x for x, _ in points.points})
    ys = sorted({y for _, y in points.points})
    h_slots = [(a + b) / 2 for a, b in zip(ys, ys[1:])]
    v_slots = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
    for horizontal in itertools.combinations(h_slots, min(k, len(h_slots))):
        for vertical in itertools.combinations(v_slots, min(l, len(v_slots))):
            if lines_consistent(points, horizontal, vertical):
                return True
    return False


# random ---------------------------------------------------------------------


def random_instance(m: int, n: int, alphabet_size: int, seed: int | None = None) -> IntMatrix:
    """Entries drawn uniformly and independently from ``0..alphabet_size-1``."""
    if m < 1 or n < 1 or alphabet_size < 1:
        raise ValueError("m, n and alphabet_size must be positive")
    rng = np.random.default_rng(seed)
    return IntMatrix.from_array(rng.integers(0, alphabet_size, size=(m, n)))


# text formats ---------------------------------------------------------------


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_edge_list(text: str, num_vertices: int | None = None) -> SimpleGraph:
    """One ``u v`` pair per line, vertices numbered from 1."""
    edges = []
    for lineno, fields in _data_lines(text):
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {' '.join(fields)!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: vertex ids must be integers") from None
        if u < 1 or v < 1:
            raise ValueError(f"line {lineno}: vertex ids start at 1")
        edges.append((u, v))
    n = num_vertices if num_vertices is not None else max((max(e) for e in edges), default=0)
    return SimpleGraph.from_one_based(n, edges)


def _parse_point_lines(text: str):
    for lineno, fields in _data_lines(text):
        if len(fields) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'x y [b|w]'")
        try:
            x, y = int(fields[0]), int(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: coordinates must be integers") from None
        color = fields[2].lower() if len(fields) == 3 else None
        if color not in (None, "b", "w"):
            raise ValueError(f"line {lineno}: colour must be 'b' or 'w', got {fields[2]!r}")
        yield lineno, (x, y), color


def parse_points(text: str) -> PointSet2D:
    """One ``x y`` point per line; a colour field, if present, is ignored."""
    return PointSet2D(tuple(p for _, p, _ in _parse_point_lines(text)))


def parse_colored_points(text: str) -> ColoredPointSet:
    """One ``x y b`` or ``x y w`` point per line."""
    black, white = [], []
    for lineno, p, color in _parse_point_lines(text):
        if color is None:
            raise ValueError(f"line {lineno}: missing colour")
        (black if color == "b" else white).append(p)
    return ColoredPointSet(frozenset(black), frozenset(white))
