"""In-memory representation of one domain slice: the complete pipeline output
plus the configuration that produced it."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import graph as graph_mod
from . import projection as projection_mod
from . import refine as refine_mod
from .corpus import CausalRecord
from .graph import RelGraph
from .oracle import OracleConfig
from .projection import ManifoldConfig
from .refine import GTConfig
from .topics import TopicGraph
from .triples import ExtractionStats, Triple, extract_corpus

FORMAT_VERSION = 1


@dataclass
class SliceConfig:
    slice_id: str
    domain: str
    domain_phrase: str = ""
    roots: list[str] = field(default_factory=list)
    depth_limit: int = 2
    max_topics: int = 100
    per_node_children: int = 5
    questions_per_topic: int = 2
    statements_per_topic: int = 3
    oracle: OracleConfig = field(default_factory=OracleConfig)
    gt: GTConfig = field(default_factory=GTConfig)
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass
class SliceState:
    config: SliceConfig
    topic_graph: TopicGraph
    question_records: list[CausalRecord] = field(default_factory=list)
    statement_records: list[CausalRecord] = field(default_factory=list)
    triples: list[Triple] = field(default_factory=list)
    graph: RelGraph = field(default_factory=RelGraph)
    embeddings_init: Optional[np.ndarray] = None
    embeddings: Optional[np.ndarray] = None
    coords: Optional[np.ndarray] = None
    extraction_stats: ExtractionStats = field(default_factory=ExtractionStats)
    revision: int = 0

    @property
    def slice_id(self) -> str:
        return self.config.slice_id

    @property
    def domain(self) -> str:
        return self.config.domain

    def rebuild_triples_and_graph(self) -> None:
        stats = ExtractionStats()
        question_triples = extract_corpus(
            self.question_records, self.domain, "causal_questions.jsonl", stats
        )
        statement_triples = extract_corpus(
            self.statement_records, self.domain, "causal_statements.jsonl", stats
        )
        self.triples = question_triples + statement_triples
        self.graph = graph_mod.build_graph(self.triples)
        self.extraction_stats = stats

    def rebuild_manifold(self) -> None:
        """Refine embeddings and re-project; skipped below the minimum node
        count (projection needs more nodes than neighbors)."""
        n = self.graph.node_count
        if n == 0:
            self.embeddings_init = None
            self.embeddings = None
            self.coords = None
            return
        self.embeddings, self.embeddings_init = refine_mod.gt_refine(
            self.graph, self.config.gt, return_initial=True
        )
        manifold = self.config.manifold
        if n <= 2:
            self.coords = None
            return
        n_neighbors = min(manifold.n_neighbors, n - 1)
        effective = projection_mod.ManifoldConfig(
            metric=manifold.metric,
            n_neighbors=max(2, n_neighbors),
            min_dist=manifold.min_dist,
            components=manifold.components,
            seed=manifold.seed,
            spread=manifold.spread,
            n_epochs=manifold.n_epochs,
            negative_sample_rate=manifold.negative_sample_rate,
            initial_alpha=manifold.initial_alpha,
        )
        self.coords = projection_mod.project(self.embeddings, effective)

    def activation_norms(self) -> Optional[np.ndarray]:
        if self.embeddings is None or self.embeddings_init is None:
            return None
        return refine_mod.activation_norms(self.embeddings_init, self.embeddings)

    def node_depths(self) -> list[Optional[int]]:
        """Per graph node, the minimum depth over the topics whose records
        produced its edges (None for nodes with no resolvable topic)."""
        topic_depth = {n.label: n.depth for n in self.topic_graph.nodes}
        record_depth: dict[tuple[str, int], Optional[int]] = {}
        for file_name, records in (
            ("causal_questions.jsonl", self.question_records),
            ("causal_statements.jsonl", self.statement_records),
        ):
            for idx, rec in enumerate(records):
                record_depth[(file_name, idx)] = topic_depth.get(rec.topic)
        depths: list[Optional[int]] = [None] * self.graph.node_count
        for e in self.graph.edges:
            for src in e.sources:
                d = record_depth.get((src.file, src.record))
                if d is None:
                    continue
                for v in (e.head, e.tail):
                    if depths[v] is None or d < depths[v]:
                        depths[v] = d
        return depths
