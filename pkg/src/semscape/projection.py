"""Deterministic 2-D projection of sample embeddings.

Pipeline: PCA down to ``pca_dims``, then exact t-SNE (full O(M^2) pairwise
affinities) minimizing KL(P||Q) with the Student-t kernel. Gradient descent
uses momentum 0.5 switching to 0.8 at iteration 250 and early exaggeration
for the first 250 iterations. Fixed seed + fixed inputs reproduce the layout
bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array

from .errors import InputError

EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250
INITIAL_MOMENTUM = 0.5
FINAL_MOMENTUM = 0.8
MIN_GAIN = 0.01
_EPS = 1e-12


@dataclass(frozen=True)
class ProjectionParams:
    """Projection hyperparameters. Perplexity is clamped to (M-1)/3 before use."""

    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    learning_rate: float = 200.0
    pca_dims: int = 50

    def __post_init__(self):
        for name in ("perplexity", "iterations", "early_exaggeration", "learning_rate", "pca_dims"):
            if getattr(self, name) <= 0:
                raise InputError(f"projection parameter {name!r} must be positive")

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "iterations": self.iterations,
            "early_exaggeration": self.early_exaggeration,
            "learning_rate": self.learning_rate,
            "pca_dims": self.pca_dims,
        }


@dataclass(frozen=True)
class ProjectedLayout:
    """Deterministic 2-D coordinates for every sample, centered at the origin."""

    positions: np.ndarray
    method: str
    seed: int
    params: ProjectionParams

    def __post_init__(self):
        self.positions.setflags(write=False)

    def __len__(self) -> int:
        return self.positions.shape[0]


def pca_project(x: np.ndarray, dims: int) -> np.ndarray:
    """Center and project onto the top principal components.

    Component signs follow the largest-absolute-loading convention so the
    result is reproducible across runs.
    """
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    anchor = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), anchor])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]
    k = min(dims, vt.shape[0])
    return centered @ vt[:k].T


def pairwise_affinities(x: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized Gaussian affinities with per-point precision calibrated by
    binary search so each conditional distribution hits the target perplexity.
    """
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if m < 2:
        raise InputError("affinities need at least 2 points")
    sq_norms = (x * x).sum(axis=1)
    d2 = np.maximum(sq_norms[:, None] + sq_norms[None, :] - 2.0 * (x @ x.T), 0.0)
    target_entropy = np.log(perplexity)
    cond = np.zeros((m, m))
    for i in range(m):
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        row = d2[i]
        for _ in range(50):
            p = np.exp(-row * beta)
            p[i] = 0.0
            total = p.sum()
            if total <= 0.0:
                entropy = 0.0
            else:
                entropy = np.log(total) + beta * float((row * p).sum()) / total
            diff = entropy - target_entropy
            if abs(diff) < 1e-7:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        total = p.sum()
        if total > 0.0:
            cond[i] = p / total
        else:
            # Beta ran off to infinity (tiny perplexity target): the Gaussian
            # limit is all mass on the nearest neighbor.
            masked = row.copy()
            masked[i] = np.inf
            cond[i, int(np.argmin(masked))] = 1.0
    sym = cond + cond.T
    return sym / sym.sum()


def _student_t_q(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sq_norms = (y * y).sum(axis=1)
    d2 = sq_norms[:, None] + sq_norms[None, :] - 2.0 * (y @ y.T)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    return w, w / w.sum()


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    """KL(P||Q) of the layout under the Student-t kernel."""
    _, q = _student_t_q(np.asarray(y, dtype=np.float64))
    p = np.asarray(p, dtype=np.float64)
    mask = p > 0
    return float((p[mask] * np.log(p[mask] / np.maximum(q[mask], _EPS))).sum())


def _gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    w, q = _student_t_q(y)
    pqw = (p - q) * w
    return 4.0 * (pqw.sum(axis=1)[:, None] * y - pqw @ y)


def tsne_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P||Q) with respect to the 2-D positions."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape[0] != p.shape[1] or not np.allclose(p, p.T, atol=1e-10):
        raise InputError("affinity matrix must be symmetric")
    return _gradient(p, y)


class LandscapeProjection(BaseEstimator):
    """PCA + exact t-SNE dimension reduction with a fixed random seed.

    sklearn-compatible: parameters live on the estimator, ``fit_transform``
    returns the 2-D embedding, and fitted state lands in trailing-underscore
    attributes (``embedding_``, ``kl_initial_``, ``kl_final_``, ``method_``).
    """

    def __init__(
        self,
        method: str = "tsne",
        perplexity: float = 30.0,
        iterations: int = 1000,
        early_exaggeration: float = 12.0,
        learning_rate: float = 200.0,
        pca_dims: int = 50,
        seed: int = 42,
    ):
        self.method = method
        self.perplexity = perplexity
        self.iterations = iterations
        self.early_exaggeration = early_exaggeration
        self.learning_rate = learning_rate
        self.pca_dims = pca_dims
        self.seed = seed

    def _params(self) -> ProjectionParams:
        return ProjectionParams(
            perplexity=self.perplexity,
            iterations=self.iterations,
            early_exaggeration=self.early_exaggeration,
            learning_rate=self.learning_rate,
            pca_dims=self.pca_dims,
        )

    def fit(self, X, y=None):
        params = self._params()
        if self.method not in ("tsne", "pca"):
            raise InputError(f"unknown projection method {self.method!r}")
        X = check_array(X, dtype=np.float64)
        m = X.shape[0]
        if m < 2:
            raise InputError("projection requires at least 2 samples")

        reduced = pca_project(X, params.pca_dims)
        degenerate = reduced.shape[0] > 0 and not np.ptp(reduced, axis=0).any()
        if self.method == "pca" or degenerate:
            if degenerate and self.method == "tsne":
                warnings.warn(
                    "all embeddings are identical; falling back to a PCA-only layout",
                    stacklevel=2,
                )
            planar = pca_project(X, 2)
            if planar.shape[1] < 2:
                planar = np.hstack([planar, np.zeros((m, 2 - planar.shape[1]))])
            self.embedding_ = planar - planar.mean(axis=0)
            self.kl_initial_ = None
            self.kl_final_ = None
            self.method_ = "pca"
            return self

        effective_perplexity = min(params.perplexity, (m - 1) / 3.0)
        p = pairwise_affinities(reduced, effective_perplexity)

        rng = np.random.Generator(np.random.PCG64(self.seed))
        y_cur = 1e-4 * rng.standard_normal((m, 2))
        y_cur -= y_cur.mean(axis=0)
        self.kl_initial_ = kl_divergence(p, y_cur)

        update = np.zeros_like(y_cur)
        gains = np.ones_like(y_cur)
        for iteration in range(params.iterations):
            p_eff = p * params.early_exaggeration if iteration < EXAGGERATION_ITERS else p
            grad = _gradient(p_eff, y_cur)
            momentum = INITIAL_MOMENTUM if iteration < MOMENTUM_SWITCH_ITER else FINAL_MOMENTUM
            # Adaptive per-coordinate gains keep the fixed learning rate stable.
            same_sign = (grad > 0.0) == (update > 0.0)
            gains = np.where(same_sign, gains * 0.8, gains + 0.2)
            np.clip(gains, MIN_GAIN, None, out=gains)
            update = momentum * update - params.learning_rate * gains * grad
            y_cur = y_cur + update
            y_cur = y_cur - y_cur.mean(axis=0)

        self.embedding_ = y_cur
        self.kl_final_ = kl_divergence(p, y_cur)
        self.effective_perplexity_ = effective_perplexity
        self.method_ = "tsne"
        return self

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).embedding_


def project(
    store,
    params: Optional[ProjectionParams] = None,
    seed: int = 42,
    method: str = "tsne",
) -> ProjectedLayout:
    """Project an embedding store's sample matrix to a reproducible 2-D layout."""
    params = params or ProjectionParams()
    estimator = LandscapeProjection(method=method, seed=seed, **params.to_dict())
    positions = estimator.fit_transform(store.sample_matrix)
    return ProjectedLayout(positions=positions, method=estimator.method_, seed=seed, params=params)
