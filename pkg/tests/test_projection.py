import numpy as np
import pytest

from semscape.dataset import EmbeddingStore
from semscape.errors import InputError
from semscape.projection import (
    LandscapeProjection,
    ProjectionParams,
    kl_divergence,
    pairwise_affinities,
    pca_project,
    project,
    tsne_gradient,
)


def make_store(matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    return EmbeddingStore(
        sample_matrix=matrix,
        token_matrices=tuple(matrix[i : i + 1] for i in range(matrix.shape[0])),
        dim=matrix.shape[1],
    )


def finite_difference_gradient(p, y, h=1e-5):
    fd = np.zeros_like(y)
    for i in range(y.shape[0]):
        for k in range(y.shape[1]):
            plus = y.copy()
            plus[i, k] += h
            minus = y.copy()
            minus[i, k] -= h
            fd[i, k] = (kl_divergence(p, plus) - kl_divergence(p, minus)) / (2 * h)
    return fd


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(10, 5))
    p = pairwise_affinities(x, 3.0)
    y = rng.normal(size=(10, 2))
    analytic = tsne_gradient(p, y)
    fd = finite_difference_gradient(p, y)
    rel = np.abs(analytic - fd).max() / np.abs(fd).max()
    assert rel <= 1e-4


def test_gradient_zero_at_found_minimum():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(3, 4))
    p = pairwise_affinities(x, 1.8)
    y = rng.normal(size=(3, 2))
    # Long plain gradient descent to a stationary point, then check the
    # analytic gradient agrees that it is one.
    for _ in range(30000):
        grad = tsne_gradient(p, y)
        y -= 0.5 * grad
        if np.linalg.norm(grad) < 1e-9:
            break
    assert np.linalg.norm(tsne_gradient(p, y)) < 1e-6


def test_uniform_p_equilateral_triangle_zero_gradient():
    p = np.full((3, 3), 1.0 / 6.0)
    np.fill_diagonal(p, 0.0)
    y = np.array(
        [[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]]
    )
    grad = tsne_gradient(p, y)
    assert np.abs(grad).max() < 1e-12


def test_gradient_rejects_asymmetric_p():
    p = np.array([[0.0, 0.6], [0.4, 0.0]])
    with pytest.raises(InputError, match="symmetric"):
        tsne_gradient(p, np.zeros((2, 2)))


def test_affinities_are_symmetric_and_normalized():
    rng = np.random.default_rng(0)
    p = pairwise_affinities(rng.normal(size=(20, 6)), 5.0)
    assert np.allclose(p, p.T)
    assert abs(p.sum() - 1.0) < 1e-12
    assert np.all(np.diag(p) == 0.0)


def test_two_samples_symmetric_about_origin():
    layout = project(make_store([[0.0, 0.0], [1.0, 1.0]]), seed=42)
    assert layout.positions.shape == (2, 2)
    assert np.abs(layout.positions.sum(axis=0)).max() < 1e-12
    assert np.abs(layout.positions[0] + layout.positions[1]).max() < 1e-12


def test_kl_improves_and_output_centered():
    rng = np.random.default_rng(7)
    est = LandscapeProjection(seed=7, iterations=500)
    y = est.fit_transform(rng.normal(size=(12, 5)))
    assert est.kl_final_ <= est.kl_initial_
    assert np.abs(y.mean(axis=0)).max() < 1e-9


def test_determinism_bitwise():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(15, 4))
    a = LandscapeProjection(seed=42).fit_transform(x)
    b = LandscapeProjection(seed=42).fit_transform(x)
    assert np.array_equal(a, b)
    c = LandscapeProjection(seed=43).fit_transform(x)
    assert not np.array_equal(a, c)


def test_perplexity_clamped():
    rng = np.random.default_rng(1)
    est = LandscapeProjection(seed=1, perplexity=30.0, iterations=10)
    est.fit(rng.normal(size=(10, 3)))
    assert est.effective_perplexity_ == pytest.approx(3.0)


def test_degenerate_identical_embeddings_fall_back_to_pca():
    x = np.ones((8, 5))
    est = LandscapeProjection(seed=0)
    with pytest.warns(UserWarning, match="identical"):
        est.fit(x)
    assert est.method_ == "pca"
    assert est.embedding_.shape == (8, 2)


def test_fewer_than_two_samples_rejected():
    with pytest.raises(InputError, match="at least 2"):
        LandscapeProjection().fit(np.ones((1, 3)))


def test_params_must_be_positive():
    with pytest.raises(InputError):
        ProjectionParams(perplexity=0.0)
    with pytest.raises(InputError):
        ProjectionParams(iterations=-5)


def test_pca_method_and_1d_padding():
    x = np.random.default_rng(3).normal(size=(6, 1))
    layout = project(make_store(x), seed=0, method="pca")
    assert layout.method == "pca"
    assert layout.positions.shape == (6, 2)
    assert np.allclose(layout.positions[:, 1], 0.0)


def test_pca_deterministic_sign():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(20, 6))
    assert np.array_equal(pca_project(x, 3), pca_project(x, 3))


def test_estimator_get_params_roundtrip():
    est = LandscapeProjection(perplexity=12.0, seed=5)
    params = est.get_params()
    assert params["perplexity"] == 12.0
    clone = LandscapeProjection(**params)
    assert clone.get_params() == params
