"""Reference instances and hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from coclust.core import Instance, IntMatrix, Partition

SMALL_EXAMPLE = IntMatrix([[0, 4, 3, 0], [2, 2, 1, 3], [1, 3, 4, 1]])

# prism graph, vertices numbered from 1
PRISM_EDGES = [(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6), (3, 4), (1, 6), (2, 5)]
PRISM_MATRIX = [
    [1, 2, 1, 1, 1, 0], [1, 1, 1, 2, 0, 1], [1, 2, 1, 0, 1, 1],
    [1, 1, 1, 0, 1, 2], [1, 2, 0, 1, 1, 1], [1, 1, 0, 1, 2, 1],
    [2, 1, 0, 1, 1, 1], [0, 1, 1, 1, 1, 2], [0, 1, 1, 1, 2, 1],
]
K4_EDGES = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]

SQUARES_POINTS = [(1, 1), (0, 3), (2, 2), (3, 4), (4, 0), (5, 5), (5, 2)]
SQUARES_MATRIX = [[3, 1, 2, 4, 5, 0, 2], [0, 1, 2, 3, 5, 4, 5]]

GRID_WHITE = [(1, 1), (3, 1), (8, 2), (1, 3), (6, 3), (1, 5), (6, 5)]
GRID_BLACK = [(5, 2), (2, 4), (7, 4), (3, 5)]
GRID_MATRIX = IntMatrix([
    [0, 1, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 2, 1, 1, 0],
    [0, 1, 1, 1, 1, 0, 1, 1],
    [1, 2, 1, 1, 1, 1, 2, 1],
    [0, 1, 2, 1, 1, 0, 1, 1],
])


@st.composite
def matrices(draw, max_m=4, max_n=4, max_value=3, min_m=1, min_n=1):
    m = draw(st.integers(min_m, max_m))
    n = draw(st.integers(min_n, max_n))
    row = st.lists(st.integers(0, max_value), min_size=n, max_size=n)
    return IntMatrix(draw(st.lists(row, min_size=m, max_size=m)))


@st.composite
def instances(draw, max_m=4, max_n=4, max_value=3, max_k=3, max_l=3, min_k=1, min_l=1):
    A = draw(matrices(max_m, max_n, max_value, min_m=min_k, min_n=min_l))
    k = draw(st.integers(min_k, min(max_k, A.m)))
    l = draw(st.integers(min_l, min(max_l, A.n)))
    c = draw(st.integers(0, max_value))
    return Instance(A, k, l, c)


@st.composite
def partitions(draw, size, count):
    """Random partition of ``range(size)`` into exactly ``count`` blocks."""
    labels = list(range(count)) + draw(st.lists(st.integers(0, count - 1), min_size=size - count, max_size=size - count))
    order = draw(st.permutations(range(size)))
    assigned = [0] * size
    for pos, idx in enumerate(order):
        assigned[idx] = labels[pos]
    return Partition.from_labels(assigned)
