"""Low-dimensional layout of embeddings via a fuzzy neighbor-graph method.

Builds a cosine k-nearest-neighbor graph, converts it to fuzzy edge weights
with a per-point bandwidth search, and optimizes coordinates by seeded
stochastic descent on the fuzzy cross-entropy (attraction along edges,
negative-sampled repulsion).  Fully deterministic for a fixed (input, seed):
brute-force neighbor search, one RNG, batched updates in fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import curve_fit

from .errors import TooFewNodes

SMOOTH_K_TOLERANCE = 1e-5
MIN_DIST_SCALE = 1e-3


@dataclass
class ManifoldConfig:
    metric: str = "cosine"
    n_neighbors: int = 30
    min_dist: float = 0.1
    components: int = 2
    seed: int = 0
    spread: float = 1.0
    n_epochs: int = 300
    negative_sample_rate: int = 5
    initial_alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.components not in (2, 3):
            raise ValueError("components must be 2 or 3")
        if self.n_neighbors < 2:
            raise ValueError("n_neighbors must be >= 2")


def _cosine_distances(H: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(H, axis=1, keepdims=True)
    unit = H / np.maximum(norms, 1e-30)
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    return 1.0 - sims


def _knn(distances: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    n = distances.shape[0]
    order = np.argsort(distances, axis=1, kind="stable")
    indices = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        row = order[i][order[i] != i][:k]
        indices[i] = row
        dists[i] = distances[i, row]
    return indices, dists


def _smooth_knn_dist(dists: np.ndarray, k: int, n_iter: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidth sigma and connectivity offset rho such that the
    fuzzy neighborhood has cardinality log2(k)."""
    n = dists.shape[0]
    target = np.log2(k)
    rho = np.zeros(n)
    sigma = np.zeros(n)
    mean_all = float(np.mean(dists)) or 1.0
    for i in range(n):
        row = dists[i]
        nonzero = row[row > 0.0]
        rho[i] = nonzero[0] if nonzero.size else 0.0
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(n_iter):
            psum = float(np.sum(np.exp(-np.maximum(row - rho[i], 0.0) / mid)))
            if abs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid
        mean_row = float(np.mean(row))
        if rho[i] > 0.0:
            if sigma[i] < MIN_DIST_SCALE * mean_row:
                sigma[i] = MIN_DIST_SCALE * mean_row
        elif sigma[i] < MIN_DIST_SCALE * mean_all:
            sigma[i] = MIN_DIST_SCALE * mean_all
    return sigma, rho


def _fuzzy_graph(H: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetrized fuzzy edge list (heads, tails, weights) with heads < tails."""
    distances = _cosine_distances(H)
    indices, dists = _knn(distances, k)
    sigma, rho = _smooth_knn_dist(dists, k)
    n = H.shape[0]
    weights: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j_pos in range(k):
            j = int(indices[i, j_pos])
            d = dists[i, j_pos]
            w = 1.0 if d <= rho[i] else float(np.exp(-(d - rho[i]) / sigma[i]))
            key = (i, j) if i < j else (j, i)
            # fuzzy union of the two directed memberships: u + v - u*v
            prev = weights.get(key, 0.0)
            weights[key] = prev + w - prev * w
    heads = np.array([k[0] for k in sorted(weights)], dtype=np.int64)
    tails = np.array([k[1] for k in sorted(weights)], dtype=np.int64)
    vals = np.array([weights[k] for k in sorted(weights)], dtype=np.float64)
    return heads, tails, vals


def find_ab_params(spread: float, min_dist: float) -> tuple[float, float]:
    """Fit the differentiable curve 1/(1 + a x^{2b}) to the target membership
    function determined by min_dist and spread."""

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros(xv.shape)
    yv[xv < min_dist] = 1.0
    yv[xv >= min_dist] = np.exp(-(xv[xv >= min_dist] - min_dist) / spread)
    params, _ = curve_fit(curve, xv, yv)
    return float(params[0]), float(params[1])


def project(H: np.ndarray, config: Optional[ManifoldConfig] = None) -> np.ndarray:
    """Project embedding rows to 2D/3D coordinates."""
    config = config or ManifoldConfig()
    H = np.asarray(H, dtype=np.float64)
    n = H.shape[0]
    if n <= config.n_neighbors:
        raise TooFewNodes(f"{n} nodes but n_neighbors={config.n_neighbors}")

    heads, tails, weights = _fuzzy_graph(H, config.n_neighbors)
    a, b = find_ab_params(config.spread, config.min_dist)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    Y = rng.uniform(-10.0, 10.0, (n, config.components))

    n_epochs = config.n_epochs
    w_max = float(weights.max()) if weights.size else 1.0
    keep = weights >= w_max / max(n_epochs, 1)
    heads, tails, weights = heads[keep], tails[keep], weights[keep]
    epochs_per_sample = w_max / weights
    epoch_of_next = epochs_per_sample.copy()
    nneg = config.negative_sample_rate

    for epoch in range(1, n_epochs + 1):
        alpha = config.initial_alpha * (1.0 - (epoch - 1) / n_epochs)
        due = epoch_of_next <= epoch
        if np.any(due):
            ih, it = heads[due], tails[due]
            diff = Y[ih] - Y[it]
            d2 = np.sum(diff * diff, axis=1)
            coef = np.zeros_like(d2)
            pos = d2 > 0.0
            coef[pos] = (-2.0 * a * b * d2[pos] ** (b - 1.0)) / (a * d2[pos] ** b + 1.0)
            grad = np.clip(coef[:, None] * diff, -4.0, 4.0) * alpha
            np.add.at(Y, ih, grad)
            np.add.at(Y, it, -grad)
            for anchors in (ih, it):
                negs = rng.integers(0, n, size=(anchors.size, nneg))
                ya = Y[anchors][:, None, :]
                yn = Y[negs]
                ndiff = ya - yn
                nd2 = np.sum(ndiff * ndiff, axis=2)
                ncoef = (2.0 * b) / ((0.001 + nd2) * (a * nd2**b + 1.0))
                ngrad = np.clip(ncoef[:, :, None] * ndiff, -4.0, 4.0)
                ngrad = np.where(nd2[:, :, None] > 0.0, ngrad, 4.0)
                ngrad = np.where((negs != anchors[:, None])[:, :, None], ngrad, 0.0)
                np.add.at(Y, anchors, ngrad.sum(axis=1) * alpha)
            epoch_of_next[due] += epochs_per_sample[due]

    if not np.all(np.isfinite(Y)):
        raise FloatingPointError("layout diverged to non-finite coordinates")
    return Y
