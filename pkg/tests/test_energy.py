import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fractaldims.energy import (
    SpectrumResult,
    VertexFunction,
    dirichlet_spectrum,
    eigenvalue_counting,
    energy,
    energy_form,
    harmonic_extension,
    laplacian_matrix,
    spectral_dimension_fit,
)
from fractaldims.sg import build_graph, path_graph

SG_DIM_S = math.log(3) / math.log(5)


def extend(u, n):
    """n-fold harmonic extension of u from V_0."""
    f = VertexFunction(0, np.asarray(u, dtype=float))
    for k in range(n):
        f = harmonic_extension(build_graph(k), f)
    return f


def test_energy_examples():
    g0 = build_graph(0)
    assert energy(g0, [1, 0, 0]) == 2.0
    for n in range(4):
        g = build_graph(n)
        assert energy(g, np.full(g.n_vertices, 3.7)) == 0.0
    assert energy(build_graph(1), extend([1, 0, 0], 1)) == pytest.approx(6 / 5, abs=1e-15)


def test_extension_golden_values():
    g1 = build_graph(1)
    v = extend([1, 0, 0], 1).values
    # vertex 3 + k is the midpoint opposite corner k: ab -> c, bc -> a, ac -> b
    mid = {tuple(sorted(e)) for e in g1.edges.tolist()}
    assert len(mid) == 9
    opposite_a = 4  # midpoint of corners 1 and 2
    assert np.allclose(g1.vertices[opposite_a], (g1.vertices[1] + g1.vertices[2]) / 2)
    assert v[opposite_a] == 1 / 5
    assert v[3] == 2 / 5 and v[5] == 2 / 5
    assert list(v[:3]) == [1, 0, 0]


def test_extension_of_constant_is_constant():
    assert np.all(extend([2.5, 2.5, 2.5], 3).values == 2.5)


@pytest.mark.parametrize("n", range(1, 7))
def test_energy_decays_by_three_fifths(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        u = rng.normal(size=3)
        e0 = energy(build_graph(0), u)
        f = extend(u, n)
        assert energy(build_graph(n), f) == pytest.approx((3 / 5) ** n * e0, rel=1e-12, abs=1e-12)
        prev = extend(u, n - 1)
        assert energy(build_graph(n), f) == pytest.approx(0.6 * energy(build_graph(n - 1), prev), rel=1e-12)


def test_renormalized_energy_is_constant_along_extensions():
    u = np.random.default_rng(7).normal(size=3)
    vals = [energy(build_graph(n), extend(u, n), renormalized=True) for n in range(7)]
    assert np.allclose(vals, vals[0], rtol=0, atol=1e-10)


def test_extension_minimises_energy():
    rng = np.random.default_rng(11)
    g1 = build_graph(1)
    for _ in range(200):
        ext = extend(rng.normal(size=3), 1).values
        v = ext.copy()
        v[3:] += rng.normal(scale=rng.uniform(1e-3, 1), size=3)
        assert energy(g1, ext) <= energy(g1, v)


def test_level_mismatch_rejected():
    with pytest.raises(ValueError):
        energy(build_graph(1), VertexFunction(0, np.zeros(3)))
    with pytest.raises(ValueError):
        energy(build_graph(1), np.zeros(5))
    with pytest.raises(ValueError):
        harmonic_extension(build_graph(1), VertexFunction(2, np.zeros(6)))


def test_g1_laplacian():
    L, interior = laplacian_matrix(build_graph(1))
    assert list(interior) == [3, 4, 5]
    assert np.array_equal(L, np.array([[20, -5, -5], [-5, 20, -5], [-5, -5, 20]]))


def test_laplacian_rejects_empty_interior():
    with pytest.raises(ValueError):
        laplacian_matrix(build_graph(0))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_quadratic_form_identity(n):
    g = build_graph(n)
    L, interior = laplacian_matrix(g)
    rng = np.random.default_rng(n)
    u = np.zeros(g.n_vertices)
    u[interior] = rng.normal(size=len(interior))
    assert u[interior] @ L @ u[interior] == pytest.approx(5.0**n * energy(g, u), rel=1e-10)
    assert np.allclose(L, L.T)
    assert np.linalg.eigvalsh(L).min() > 0
    Ls, _ = laplacian_matrix(g, sparse=True)
    assert np.allclose(Ls.toarray(), L)


def test_energy_form_is_bilinear():
    g = build_graph(2)
    rng = np.random.default_rng(0)
    u, v, w = rng.normal(size=(3, g.n_vertices))
    assert energy_form(g, u, 2 * v + w) == pytest.approx(2 * energy_form(g, u, v) + energy_form(g, u, w))


def test_path_spectrum_closed_form():
    m = 50
    h = 1 / (m + 1)
    spec = dirichlet_spectrum(path_graph(m))
    k = np.arange(1, m + 1)
    assert np.allclose(spec.eigenvalues, (2 / h**2) * (1 - np.cos(k * np.pi / (m + 1))), rtol=1e-10)


def test_eigenvalue_counting():
    spec = dirichlet_spectrum(path_graph(40))
    ev = spec.eigenvalues
    assert eigenvalue_counting(spec, 0.5 * ev[0]) == 0
    for k in (0, 7, 39):
        assert eigenvalue_counting(spec, ev[k]) == k + 1
    x = 0.5 * (ev[10] + ev[11])
    assert eigenvalue_counting(spec, x) == sum(1 for lam in ev if lam <= x) == 11
    with pytest.raises(ValueError):
        eigenvalue_counting(spec, -1.0)


def test_counting_closes_numerically_split_multiplicities():
    spec = SpectrumResult(np.array([1.0, 2.0, 2.0 * (1 + 1e-13), 3.0]), None, 1.0)
    assert eigenvalue_counting(spec, 2.0) == 3


def test_spectrum_invariants():
    with pytest.raises(ValueError):
        SpectrumResult(np.array([2.0, 1.0]), 0, 1.0)
    with pytest.raises(ValueError):
        SpectrumResult(np.array([-1.0, 1.0]), 0, 1.0)


def test_fit_of_exact_square_spectrum():
    k = np.arange(1, 2001, dtype=float)
    fit = spectral_dimension_fit(SpectrumResult(k**2, None, 1.0), (0.0, 1.0))
    assert fit.slope == pytest.approx(0.5, abs=1e-6)


def test_interval_spectral_dimension():
    t0 = time.perf_counter()
    fit = spectral_dimension_fit(dirichlet_spectrum(path_graph(2000)))
    assert time.perf_counter() - t0 < 30
    assert fit.slope == pytest.approx(0.5, abs=0.02)
    assert 0 <= fit.r2 <= 1


def test_sg_spectral_dimension():
    fit = spectral_dimension_fit(dirichlet_spectrum(build_graph(6)))
    assert fit.slope == pytest.approx(SG_DIM_S, abs=0.05)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_fit_slope_ignores_normalization(c):
    base = dirichlet_spectrum(build_graph(5))
    a = spectral_dimension_fit(base)
    b = spectral_dimension_fit(SpectrumResult(base.eigenvalues * c, 5, base.normalization * c))
    assert b.slope == pytest.approx(a.slope, abs=1e-9)


def test_fit_guards():
    spec = dirichlet_spectrum(path_graph(50))
    with pytest.raises(ValueError, match="eigenvalues"):
        spectral_dimension_fit(spec, (0.0, 0.1))
    with pytest.raises(ValueError):
        spectral_dimension_fit(spec, (0.5, 0.2))
