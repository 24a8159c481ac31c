import numpy as np
import pytest
from scipy import stats

from fractaldims.stoch import (
    PathSample,
    RngSpec,
    fbm_covariance,
    sample_fbm,
    sample_fbm_paths,
)
from fractaldims.stoch.fbm import _circulant_sqrt


def z_cov(P, i, j, expected):
    prod = P[:, i] * P[:, j]
    return (prod.mean() - expected) / (prod.std(ddof=1) / np.sqrt(len(prod)))


def test_path_sample_shape_and_origin():
    p = sample_fbm(0.3, 512, 2.0, RngSpec(1))
    assert p.values[0] == 0.0 and p.n == 512 and p.hurst == 0.3
    assert p.dt == pytest.approx(2.0 / 512)
    assert np.allclose(np.diff(p.times), p.dt)


def test_bm_increments_uncorrelated():
    n = 256
    P = sample_fbm_paths(0.5, n, 1.0, 500, RngSpec(2))
    inc = np.diff(P, axis=1)
    rho = np.mean(inc[:, 1:] * inc[:, :-1]) / np.mean(inc * inc)
    assert abs(rho) < 3 / np.sqrt(500 * n)


def test_variance_at_one():
    P = sample_fbm_paths(0.7, 256, 1.0, 2000, RngSpec(3))
    v = P[:, -1].var(ddof=1)
    assert abs(v - 1.0) < 3 * np.sqrt(2 / 1999)


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("method,n", [("cholesky", 512), ("circulant", 8192)])
def test_covariance_formula(H, method, n):
    P = sample_fbm_paths(H, n, 1.0, 2000, RngSpec(4, 1), method=method)
    i, j = n // 4, 3 * n // 4
    assert abs(z_cov(P, i, j, fbm_covariance(0.25, 0.75, H))) < 3


@pytest.mark.parametrize("H", [0.3, 0.5, 0.7])
def test_self_similarity(H):
    # xi^-H B(xi t) against B(t) from an independent ensemble, xi = 2
    n = 256
    A = sample_fbm_paths(H, n, 1.0, 1000, RngSpec(5, 0))
    B = sample_fbm_paths(H, n, 2.0, 1000, RngSpec(5, 1))
    for k in (16, 64, 100, 180, 256):
        # on [0, 2] with n steps, grid point k sits at time 2k/n
        res = stats.ks_2samp(A[:, k], 2.0**-H * B[:, k])
        assert res.pvalue > 0.01


def test_determinism_and_blocking():
    a = sample_fbm_paths(0.4, 1024, 1.0, 10, RngSpec(7), block_size=4)
    b = sample_fbm_paths(0.4, 1024, 1.0, 10, RngSpec(7), block_size=4)
    assert np.array_equal(a, b)
    c = sample_fbm_paths(0.4, 1024, 1.0, 10, RngSpec(8), block_size=4)
    assert not np.array_equal(a, c)


def test_auto_method_and_guards():
    sample_fbm(0.5, 2**13, 1.0, RngSpec(0))
    with pytest.raises(ValueError):
        sample_fbm(1.0, 10)
    with pytest.raises(ValueError):
        sample_fbm(0.5, 2**15, method="cholesky")
    with pytest.raises(ValueError):
        sample_fbm(0.5, 2**23, method="circulant")
    with pytest.raises(ValueError):
        sample_fbm(0.5, 16, method="spectral")


def test_circulant_embedding_is_nonnegative_for_fbm():
    for H in (0.1, 0.5, 0.9):
        assert _circulant_sqrt(H, 1024) is not None


def test_fallback_to_cholesky_warns(monkeypatch):
    import fractaldims.stoch.fbm as fbm

    monkeypatch.setattr(fbm, "_circulant_sqrt", lambda H, n: None)
    with pytest.warns(RuntimeWarning, match="falling back"):
        p = fbm.sample_fbm(0.5, 64, 1.0, RngSpec(0), method="circulant")
    assert p.n == 64


def test_path_sample_validation():
    with pytest.raises(ValueError):
        PathSample(np.array([0.0, 1.0, 3.0]), np.zeros(3))
    with pytest.raises(ValueError):
        PathSample(np.arange(3.0), np.zeros(2))
    p = PathSample.from_function(np.sqrt, 100)
    assert p.values[-1] == 1.0 and p.hurst is None
