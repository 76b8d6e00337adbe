"""INI config loading for the CLI and service.

Recognized sections: [oracle] (backend, endpoint_url, model, seed,
parallelism, max_tokens, timeout, retries), [refine] (dim, layers, gamma,
seed, triangle_mode), [manifold] (n_neighbors, min_dist, components, seed,
n_epochs), [slice] (domain, domain_phrase, roots, depth_limit, max_topics,
per_node_children, questions_per_topic, statements_per_topic).

The remote endpoint URL and API key may also come from the environment
(CAUSAL_ATLAS_ENDPOINT, CAUSAL_ATLAS_API_KEY).
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

from .oracle import OracleConfig
from .projection import ManifoldConfig
from .refine import GTConfig
from .slices import SliceConfig


def _get(parser: configparser.ConfigParser, section: str, option: str, cast, default):
    if parser.has_option(section, option):
        raw = parser.get(section, option)
        if cast is bool:
            return parser.getboolean(section, option)
        return cast(raw)
    return default


def load_oracle_config(parser: configparser.ConfigParser) -> OracleConfig:
    base = OracleConfig()
    return OracleConfig(
        backend=_get(parser, "oracle", "backend", str, base.backend),
        endpoint_url=_get(parser, "oracle", "endpoint_url", str, base.endpoint_url),
        model_name=_get(parser, "oracle", "model", str, base.model_name),
        seed=_get(parser, "oracle", "seed", int, base.seed),
        max_tokens=_get(parser, "oracle", "max_tokens", int, base.max_tokens),
        timeout=_get(parser, "oracle", "timeout", float, base.timeout),
        retries=_get(parser, "oracle", "retries", int, base.retries),
        parallelism=_get(parser, "oracle", "parallelism", int, base.parallelism),
    )


def load_slice_config(path: Optional[str | Path], slice_id: str, **overrides) -> SliceConfig:
    parser = configparser.ConfigParser()
    if path is not None:
        parser.read(str(path))
    oracle = load_oracle_config(parser)
    gt_base = GTConfig()
    gt = GTConfig(
        dim=_get(parser, "refine", "dim", int, gt_base.dim),
        layers=_get(parser, "refine", "layers", int, gt_base.layers),
        gamma=_get(parser, "refine", "gamma", float, gt_base.gamma),
        seed=_get(parser, "refine", "seed", int, gt_base.seed),
        triangle_mode=_get(parser, "refine", "triangle_mode", str, gt_base.triangle_mode),
    )
    mf_base = ManifoldConfig()
    manifold = ManifoldConfig(
        n_neighbors=_get(parser, "manifold", "n_neighbors", int, mf_base.n_neighbors),
        min_dist=_get(parser, "manifold", "min_dist", float, mf_base.min_dist),
        components=_get(parser, "manifold", "components", int, mf_base.components),
        seed=_get(parser, "manifold", "seed", int, mf_base.seed),
        n_epochs=_get(parser, "manifold", "n_epochs", int, mf_base.n_epochs),
    )
    roots_raw = _get(parser, "slice", "roots", str, "")
    roots = [r.strip() for r in roots_raw.split(",") if r.strip()]
    config = SliceConfig(
        slice_id=slice_id,
        domain=_get(parser, "slice", "domain", str, slice_id),
        domain_phrase=_get(parser, "slice", "domain_phrase", str, ""),
        roots=roots,
        depth_limit=_get(parser, "slice", "depth_limit", int, 2),
        max_topics=_get(parser, "slice", "max_topics", int, 100),
        per_node_children=_get(parser, "slice", "per_node_children", int, 10),
        questions_per_topic=_get(parser, "slice", "questions_per_topic", int, 3),
        statements_per_topic=_get(parser, "slice", "statements_per_topic", int, 3),
        oracle=oracle,
        gt=gt,
        manifold=manifold,
    )
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config
