"""Pre-fractal graphs G_n of the Sierpinski gasket.

Vertices are numbered by order of first appearance: the three corners of
V_0 are 0, 1, 2 and V_m occupies the indices ``0 .. n_vertices(m) - 1`` of
every finer level.  Cells are listed in lexicographic word order, and the
i-th corner of a cell is the image of the i-th corner of V_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "CORNERS",
    "SG_MAPS",
    "GraphApprox",
    "build_graph",
    "apply_word",
    "cell_vertices",
    "n_vertices",
    "n_edges",
    "path_graph",
    "refine",
]

MAX_LEVEL = 12

CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2]])
CORNERS.setflags(write=False)

# S_i(x) = (x + p_i) / 2 fixes the corner p_i
SG_MAPS = {i + 1: CORNERS[i] for i in range(3)}


def n_vertices(n: int) -> int:
    return (3 ** (n + 1) + 3) // 2


def n_edges(n: int) -> int:
    return 3 ** (n + 1)


@dataclass(frozen=True, eq=False)
class GraphApprox:
    """An embedded graph with a distinguished boundary.

    ``level`` is the gasket level for G_n and ``None`` for auxiliary graphs
    such as the discretised interval.  ``cells`` holds the vertex triples of
    the n-cells (empty for non-gasket graphs).
    """

    level: int | None
    vertices: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    boundary: tuple[int, ...]
    cells: np.ndarray = field(repr=False, default_factory=lambda: np.empty((0, 3), dtype=np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def neighbor_table(self) -> np.ndarray:
        """(V, max_degree) neighbour indices; short rows are padded cyclically so
        that a uniform column choice is a uniform neighbour choice whenever the
        degree divides ``max_degree`` (true for G_n: degrees 2 and 4)."""
        deg = self.degrees()
        width = int(deg.max())
        order = np.argsort(np.concatenate([self.edges[:, 0], self.edges[:, 1]]), kind="stable")
        nbr = np.concatenate([self.edges[:, 1], self.edges[:, 0]])[order]
        start = np.concatenate([[0], np.cumsum(deg)[:-1]])
        cols = np.arange(width)
        idx = start[:, None] + cols[None, :] % np.maximum(deg, 1)[:, None]
        return nbr[idx]

    def interior(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[list(self.boundary)] = False
        return np.flatnonzero(mask)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "vertices": self.vertices.tolist(),
            "edges": self.edges.tolist(),
            "boundary": list(self.boundary),
        }


def refine(vertices: np.ndarray, cells: np.ndarray):
    """One subdivision step.

    Returns ``(vertices, cells, mid)`` where ``mid[c] = (ab, bc, ac)`` are the
    indices of the new midpoints of cell ``c = (a, b, c)``.
    """
    a, b, c = cells.T
    pairs = np.stack([np.stack([a, b], 1), np.stack([b, c], 1), np.stack([a, c], 1)], 1).reshape(-1, 2)
    pairs = np.sort(pairs, axis=1)
    # first-appearance order keeps the numbering independent of sort internals
    uniq, first, inv = np.unique(pairs, axis=0, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    mid = rank[inv.reshape(-1)].reshape(-1, 3) + len(vertices)
    order = np.argsort(first, kind="stable")
    new_pts = vertices[uniq[order]].mean(axis=1)
    ab, bc, ac = mid.T
    new_cells = np.stack(
        [np.stack([a, ab, ac], 1), np.stack([ab, b, bc], 1), np.stack([ac, bc, c], 1)], 1
    ).reshape(-1, 3)
    return np.vstack([vertices, new_pts]), new_cells, mid


@lru_cache(maxsize=16)
def _build(n: int):
    V = np.array(CORNERS)
    cells = np.array([[0, 1, 2]], dtype=np.int64)
    for _ in range(n):
        V, cells, _ = refine(V, cells)
    edges = np.concatenate([cells[:, [0, 1]], cells[:, [1, 2]], cells[:, [0, 2]]])
    for arr in (V, cells, edges):
        arr.setflags(write=False)
    return V, cells, edges


def build_graph(n: int) -> GraphApprox:
    """The level-n gasket graph G_n (edges join vertices of a common n-cell)."""
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_LEVEL:
        raise ValueError(f"level must be an integer in [0, {MAX_LEVEL}], got {n!r}")
    V, cells, edges = _build(int(n))
    return GraphApprox(level=int(n), vertices=V, edges=edges, boundary=(0, 1, 2), cells=cells)


def apply_word(word, p) -> np.ndarray:
    """``S_{w_1} o ... o S_{w_l}(p)``; the first letter is applied last."""
    x = np.asarray(p, dtype=float)
    for letter in reversed(tuple(word)):
        if letter not in SG_MAPS:
            raise ValueError(f"letters must be 1, 2 or 3, got {letter!r}")
        x = 0.5 * (x + SG_MAPS[letter])
    return x


def cell_vertices(word) -> np.ndarray:
    """Corners of the cell addressed by ``word`` (3 x 2 array)."""
    return np.stack([apply_word(word, q) for q in CORNERS])


def path_graph(m: int, length: float = 1.0) -> GraphApprox:
    """Uniform discretisation of [0, length] with ``m`` interior nodes.

    Boundary vertices are the two endpoints (indices 0 and m + 1).
    """
    if m < 1:
        raise ValueError("need at least one interior node")
    x = np.linspace(0.0, length, m + 2)
    verts = np.stack([x, np.zeros_like(x)], axis=1)
    edges = np.stack([np.arange(m + 1), np.arange(1, m + 2)], axis=1)
    return GraphApprox(level=None, vertices=verts, edges=edges, boundary=(0, m + 1))
