"""Seeded k-means and light/dark labelling of the resulting clusters."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DARK, LIGHT = 0, 1


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; its stream for a given seed is fixed across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class KMeansResult:
    assignments: np.ndarray  # (n,) int
    centroids: np.ndarray    # (k, F)
    iterations: int
    inertia: float
    inertia_history: list[float]

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # direct differences rather than the |x|^2 - 2xc + |c|^2 expansion; exact zeros stay zero
    out = np.empty((x.shape[0], centroids.shape[0]))
    for j, c in enumerate(centroids):
        d = x - c
        out[:, j] = np.einsum("ij,ij->i", d, d)
    return out


def kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding.  When all remaining D^2 weights are zero the next
    centre is drawn uniformly."""
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    closest = _sq_dists(x, centers[0][None])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            cdf = np.cumsum(closest)
            idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers.append(x[idx])
        closest = np.minimum(closest, _sq_dists(x, x[idx][None])[:, 0])
    return np.array(centers)


def _assign(x, centroids):
    d2 = _sq_dists(x, centroids)
    labels = np.argmin(d2, axis=1)  # ties -> lowest index
    return labels, d2[np.arange(x.shape[0]), labels]


def kmeans(vectors, k: int = 2, seed: int = 0, max_iter: int = 300, tol: float = 1e-6,
           init=None) -> KMeansResult:
    """Lloyd's algorithm with k-means++ initialisation.

    Parameters
    ----------
    vectors : array_like, shape (n, F)
    k : int
        Number of clusters.
    seed : int
        Seed for the PCG64 generator driving the initialisation.
    max_iter : int
        Upper bound on Lloyd iterations.
    tol : float
        Stop once no centroid moves by ``tol`` or more (Euclidean).
    init : array_like, shape (k, F), optional
        Explicit initial centroids; skips k-means++.

    Notes
    -----
    A cluster that loses all its members is re-seeded with the point lying
    farthest from its current centroid.  The returned assignments are
    recomputed from the final centroids, so they are a fixed point.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if x.shape[0] < k:
        raise ValueError(f"need at least k={k} vectors, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature vectors contain NaN or Inf")

    if init is None:
        centroids = kmeans_plus_plus(x, k, make_rng(seed))
    else:
        centroids = np.array(init, dtype=np.float64)
        if centroids.shape != (k, x.shape[1]):
            raise ValueError(f"init must have shape {(k, x.shape[1])}, got {centroids.shape}")

    labels, d2 = _assign(x, centroids)
    history = [float(d2.sum())]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new = np.empty_like(centroids)
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = x[members].mean(axis=0)
            else:
                far = int(np.argmax(d2))
                new[j] = x[far]
                d2[far] = 0.0  # don't hand the same point to a second empty cluster
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        labels, d2 = _assign(x, centroids)
        history.append(float(d2.sum()))
        if shift < tol:
            break
    return KMeansResult(labels, centroids, iterations, history[-1], history)


def merge_clusters(result: KMeansResult, merge_map) -> KMeansResult:
    """Collapse a k > 2 clustering onto two domains.

    ``merge_map[j]`` is the domain (0 or 1) that cluster ``j`` joins.  Each
    merged centroid is the mean of all vectors in its domain.
    """
    merge_map = np.asarray(merge_map, dtype=int)
    if merge_map.shape != (result.k,) or not np.isin(merge_map, (0, 1)).all():
        raise ValueError(f"merge map must assign each of the {result.k} clusters to 0 or 1")
    labels = merge_map[result.assignments]
    counts = np.bincount(result.assignments, minlength=result.k).astype(float)
    cents = np.zeros((2, result.centroids.shape[1]))
    for dom in (0, 1):
        w = counts * (merge_map == dom)
        if w.sum() > 0:
            cents[dom] = (w[:, None] * result.centroids).sum(axis=0) / w.sum()
    return KMeansResult(labels, cents, result.iterations, result.inertia,
                        list(result.inertia_history))


@dataclass
class IndexMap:
    """Binary domain map on the tile-centre grid (0 = dark, 1 = light)."""

    labels: np.ndarray  # (grid_h, grid_w) uint8
    offset: tuple[int, int]
    stride: int
    nm_per_pixel: float

    def mask(self, domain: int) -> np.ndarray:
        return self.labels == domain


def label_domains(result: KMeansResult, cube, image) -> IndexMap:
    """Turn a two-cluster result into a light/dark index map.

    The cluster whose tile centres are brighter on average in the source
    image becomes light (1).  Equal means make cluster 0 dark.
    """
    if result.k != 2:
        raise ValueError(f"label_domains needs k = 2, got k = {result.k}")
    grid = cube.grid
    pixels = getattr(image, "pixels", image)
    centre_vals = grid.sample(pixels).ravel()
    assign = np.asarray(result.assignments).ravel()
    if assign.shape[0] != centre_vals.shape[0]:
        raise ValueError("cluster assignments do not match the feature-cube grid")
    means = []
    for j in (0, 1):
        members = assign == j
        means.append(centre_vals[members].mean() if members.any() else -np.inf)
    light = 0 if means[0] > means[1] else 1
    labels = (assign == light).astype(np.uint8).reshape(grid.shape)
    return IndexMap(labels, grid.offset, grid.stride, float(getattr(image, "nm_per_pixel", 1.0)))
