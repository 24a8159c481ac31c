import itertools

import numpy as np
import pytest
from scipy.spatial import cKDTree

from fractaldims.ifs import chaos_game, sierpinski_ifs
from fractaldims.sg import (
    CORNERS,
    apply_word,
    build_graph,
    cell_vertices,
    n_edges,
    n_vertices,
    path_graph,
)


@pytest.mark.parametrize("n,nv,ne", [(0, 3, 3), (1, 6, 9), (2, 15, 27)])
def test_small_graph_sizes(n, nv, ne):
    g = build_graph(n)
    assert (g.n_vertices, len(g.edges)) == (nv, ne)


@pytest.mark.parametrize("n", range(0, 9))
def test_counts_and_degrees(n):
    g = build_graph(n)
    assert g.n_vertices == n_vertices(n) == (3 ** (n + 1) + 3) // 2
    assert len(g.edges) == n_edges(n) == 3 ** (n + 1)
    deg = g.degrees()
    assert list(deg[:3]) == [2, 2, 2]
    assert np.all(deg[3:] == 4)
    assert g.boundary == (0, 1, 2)


def test_vertices_are_distinct_and_nested():
    for n in range(1, 7):
        V = build_graph(n).vertices
        key = np.round(V * 2**13).astype(np.int64)
        assert len(np.unique(key, axis=0)) == len(V)
        coarse = build_graph(n - 1).vertices
        assert np.array_equal(V[: len(coarse)], coarse)


def test_edges_join_same_cell_vertices():
    g = build_graph(3)
    lengths = np.linalg.norm(g.vertices[g.edges[:, 0]] - g.vertices[g.edges[:, 1]], axis=1)
    assert np.allclose(lengths, 2.0**-3)
    assert len({tuple(sorted(e)) for e in g.edges.tolist()}) == len(g.edges)


@pytest.mark.parametrize("n", [-1, 13, 2.5])
def test_level_guard(n):
    with pytest.raises(ValueError):
        build_graph(n)


def test_apply_word_examples():
    p = np.array([0.3, 0.7])
    assert np.array_equal(apply_word((), p), p)
    assert np.allclose(apply_word((1,), [1, 0]), [0.5, 0])
    assert np.allclose(apply_word((2, 2), [0, 0]), [0.75, 0])
    # the first letter is the outermost map
    assert np.allclose(apply_word((1, 2), [0, 0]), 0.5 * apply_word((2,), [0, 0]))
    with pytest.raises(ValueError):
        apply_word((4,), p)


def test_cell_vertices():
    assert np.allclose(cell_vertices(()), CORNERS)
    top = cell_vertices((3,))
    assert np.allclose(top, (CORNERS + CORNERS[2]) / 2)
    rng = np.random.default_rng(0)
    for n in range(1, 7):
        w = tuple(rng.integers(1, 4, n))
        c = cell_vertices(w)
        d = [np.linalg.norm(c[i] - c[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
        assert np.allclose(d, 2.0**-n)


def test_cells_match_words():
    g = build_graph(3)
    words = list(itertools.product((1, 2, 3), repeat=3))
    for k, w in enumerate(words):
        assert np.allclose(g.vertices[g.cells[k]], cell_vertices(w))


@pytest.mark.parametrize("n", range(1, 5))
def test_cells_meet_in_at_most_one_point(n):
    cells = [set(c) for c in build_graph(n).cells.tolist()]
    for a, b in itertools.combinations(cells, 2):
        assert len(a & b) <= 1


def test_vertex_sets_approximate_attractor():
    cloud = chaos_game(sierpinski_ifs(), 20000, seed=1)
    tree = cKDTree(cloud)
    for n in range(1, 6):
        V = build_graph(n).vertices
        hausdorff = max(cKDTree(V).query(cloud)[0].max(), tree.query(V)[0].max())
        assert hausdorff <= 2.0**-n


def test_neighbor_table_is_uniform():
    g = build_graph(3)
    tab = g.neighbor_table()
    assert tab.shape == (g.n_vertices, 4)
    adj = {i: set() for i in range(g.n_vertices)}
    for i, j in g.edges.tolist():
        adj[i].add(j)
        adj[j].add(i)
    for v, row in enumerate(tab.tolist()):
        vals, counts = np.unique(row, return_counts=True)
        assert set(vals) == adj[v]
        assert len(set(counts)) == 1


def test_graph_json_schema():
    d = build_graph(1).to_dict()
    assert set(d) == {"level", "vertices", "edges", "boundary"}
    assert d["boundary"] == [0, 1, 2] and len(d["vertices"]) == 6


def test_path_graph():
    g = path_graph(4, 2.0)
    assert g.n_vertices == 6 and g.boundary == (0, 5)
    assert np.allclose(np.diff(g.vertices[:, 0]), 0.4)
    with pytest.raises(ValueError):
        path_graph(0)
