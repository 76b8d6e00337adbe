"""Higher-order embedding refinement over the relational graph.

Node vectors are smoothed by a fixed (seeded, untrained) operator: each layer
combines a self term, a relation/domain-gated mean over incoming edges, and a
triangle term aggregated over 2-simplex motifs.  Each aggregate is normalized
to unit length before the pointwise tanh, so outputs stay finite under
heavy-tailed degrees.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import graph as graph_mod
from .encoder import HashedNGramEncoder, PhraseEncoder
from .errors import DimensionMismatch, EncoderFailure
from .graph import RelGraph, TwoSimplex

DOMAIN_BUCKETS = 8


@dataclass
class GTConfig:
    dim: int = 128
    layers: int = 2
    gamma: float = 1.0
    seed: int = 0
    triangle_mode: str = graph_mod.CHAIN_SAME_DOMAIN
    multiplicity_weighted: bool = False

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError("hidden dimension must be >= 2")
        if self.layers < 0:
            raise ValueError("layer count must be >= 0")
        if self.gamma < 0:
            raise ValueError("triangle weight must be >= 0")


def _seeded_rng(seed: int, *tags: str) -> np.random.Generator:
    key = "|".join((str(seed),) + tags).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))


class RefinementWeights:
    """Fixed random weight matrices and per-label gate tables.

    Tables are keyed by label name, so an unseen relation or domain extends
    the table deterministically instead of erroring.
    """

    def __init__(self, config: GTConfig) -> None:
        self.config = config
        d = config.dim
        scale = 1.0 / np.sqrt(d)
        self.w_self = _seeded_rng(config.seed, "w_self").normal(0.0, scale, (d, d))
        self.w_edge = _seeded_rng(config.seed, "w_edge").normal(0.0, scale, (d, d))
        self.w_tri = _seeded_rng(config.seed, "w_tri").normal(0.0, scale, (d, d))
        self._tables: dict[tuple[str, str], np.ndarray] = {}

    def _table_vec(self, kind: str, name: str) -> np.ndarray:
        key = (kind, name)
        vec = self._tables.get(key)
        if vec is None:
            vec = _seeded_rng(self.config.seed, kind, name).normal(0.0, 1.0, self.config.dim)
            self._tables[key] = vec
        return vec

    def gate(self, relation: str, domain: str) -> np.ndarray:
        """Elementwise (0, 1) gate from the relation and domain embeddings."""
        pre = self._table_vec("rel", relation) + self._table_vec("dom", domain)
        return 1.0 / (1.0 + np.exp(-pre))


def init_embeddings(
    graph: RelGraph,
    encoder: Optional[PhraseEncoder] = None,
    config: Optional[GTConfig] = None,
) -> np.ndarray:
    """Phrase encoding concatenated with structural features (normalized
    degree, bucketed domain indicator), projected or padded to the hidden
    dimension."""
    config = config or GTConfig()
    encoder = encoder or HashedNGramEncoder(dim=config.dim, seed=config.seed)
    n = graph.node_count
    und = graph_mod.symmetrize(graph)
    max_degree = max((und.degree(v) for v in range(n)), default=1) or 1

    feat_dim = encoder.dim + 1 + DOMAIN_BUCKETS
    features = np.zeros((n, feat_dim), dtype=np.float64)
    for v in range(n):
        phrase = graph.phrases[v]
        try:
            vec = np.asarray(encoder.encode(phrase), dtype=np.float64)
        except EncoderFailure:
            raise
        except Exception as exc:
            raise EncoderFailure(v, phrase, str(exc)) from exc
        if vec.shape != (encoder.dim,):
            raise EncoderFailure(v, phrase, f"encoder returned shape {vec.shape}")
        features[v, : encoder.dim] = vec
        features[v, encoder.dim] = und.degree(v) / max_degree
        bucket = _domain_bucket(graph.node_domain(v))
        features[v, encoder.dim + 1 + bucket] = 1.0

    if feat_dim == config.dim:
        out = features
    elif feat_dim < config.dim:
        out = np.zeros((n, config.dim), dtype=np.float64)
        out[:, :feat_dim] = features
    else:
        projection = _seeded_rng(config.seed, "init_proj", str(feat_dim)).normal(
            0.0, 1.0 / np.sqrt(feat_dim), (feat_dim, config.dim)
        )
        out = features @ projection
    if not np.all(np.isfinite(out)):
        raise DimensionMismatch("initial embeddings contain non-finite entries")
    return out


def _domain_bucket(domain: str) -> int:
    digest = hashlib.blake2b(domain.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "big") % DOMAIN_BUCKETS


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.maximum(norms, 1e-30)


def gt_layer(
    graph: RelGraph,
    H: np.ndarray,
    config: GTConfig,
    weights: Optional[RefinementWeights] = None,
    simplices: Optional[list[TwoSimplex]] = None,
) -> np.ndarray:
    """One refinement step: tanh(self + edge aggregate + gamma * triangle
    aggregate), where each aggregate is unit-normalized when non-empty.

    Jacobi-style: every output row reads only the previous layer, so per-node
    message computation can run in parallel.
    """
    if H.shape[0] != graph.node_count:
        raise DimensionMismatch(f"H has {H.shape[0]} rows for {graph.node_count} nodes")
    if H.shape[1] != config.dim:
        raise DimensionMismatch(f"H has width {H.shape[1]}, config.dim={config.dim}")
    weights = weights or RefinementWeights(config)
    if simplices is None:
        simplices = graph_mod.detect_triangles(graph, config.triangle_mode)

    n, d = H.shape
    pre = H @ weights.w_self.T

    edge_sum = np.zeros((n, d), dtype=np.float64)
    edge_weight = np.zeros(n, dtype=np.float64)
    transformed = H @ weights.w_edge.T
    for e in graph.edges:
        w = float(e.multiplicity) if config.multiplicity_weighted else 1.0
        edge_sum[e.tail] += w * transformed[e.head] * weights.gate(e.relation.value, e.domain)
        edge_weight[e.tail] += w
    has_edges = edge_weight > 0
    if np.any(has_edges):
        means = edge_sum[has_edges] / edge_weight[has_edges, None]
        pre[has_edges] += _unit_rows(means)

    if config.gamma > 0 and simplices:
        tri_sum = np.zeros((n, d), dtype=np.float64)
        tri_count = np.zeros(n, dtype=np.float64)
        for others in _iter_triangle_pairs(simplices):
            v, a, b = others
            tri_sum[v] += 0.5 * (H[a] + H[b])
            tri_count[v] += 1.0
        has_tri = tri_count > 0
        if np.any(has_tri):
            means = (tri_sum[has_tri] / tri_count[has_tri, None]) @ weights.w_tri.T
            pre[has_tri] += config.gamma * _unit_rows(means)

    return np.tanh(pre)


def _iter_triangle_pairs(simplices: list[TwoSimplex]):
    for s in simplices:
        u, v, w = s.members()
        yield (u, v, w)
        yield (v, u, w)
        yield (w, u, v)


def gt_refine(
    graph: RelGraph,
    config: Optional[GTConfig] = None,
    encoder: Optional[PhraseEncoder] = None,
    return_initial: bool = False,
):
    """Initialize, apply the configured number of layers, L2-normalize rows."""
    config = config or GTConfig()
    H0 = init_embeddings(graph, encoder, config)
    weights = RefinementWeights(config)
    simplices = graph_mod.detect_triangles(graph, config.triangle_mode)
    H = H0
    for _ in range(config.layers):
        H = gt_layer(graph, H, config, weights, simplices)
    refined = _unit_rows(H)
    if return_initial:
        return refined, H0
    return refined


def activation_norms(initial: np.ndarray, refined: np.ndarray) -> np.ndarray:
    """Per-node refinement delta: L2 norm of (refined - normalized initial)."""
    base = _unit_rows(initial)
    return np.linalg.norm(refined - base, axis=1)
