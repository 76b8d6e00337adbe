"""Versioned slice persistence: content-hashed artifacts plus an atomically
written manifest, and cross-slice union.

The manifest is written last (temp file + rename), so an interrupted write is
detectable as artifacts without a manifest.  Hashes let readers cache by
content; the timing profile and manifest itself are run metadata, not part of
the replay-deterministic artifact set.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import corpus as corpus_mod
from . import graph as graph_mod
from . import topics as topics_mod
from . import triples as triples_mod
from .errors import HashMismatch, IncompleteSlice, UnknownFormatVersion
from .oracle import OracleConfig
from .pipeline import TimingProfile
from .projection import ManifoldConfig
from .refine import GTConfig
from .slices import FORMAT_VERSION, SliceConfig, SliceState
from .triples import SourceRef, Triple

MANIFEST_NAME = "manifest.json"
EMBEDDING_MAGIC = b"CAEM"


def artifact_names(slice_id: str) -> dict[str, str]:
    return {
        "topic_graph": f"topic_graph_{slice_id}.jsonl",
        "topic_list": f"topic_list_{slice_id}.txt",
        "questions": "causal_questions.jsonl",
        "statements": "causal_statements.jsonl",
        "triples": f"triples_{slice_id}.jsonl",
        "graph": f"graph_{slice_id}.jsonl",
        "embeddings_init": f"embeddings_init_{slice_id}.bin",
        "embeddings": f"embeddings_{slice_id}.bin",
        "manifold": f"manifold_{slice_id}.jsonl",
    }


def timing_filename(slice_id: str) -> str:
    return f"timings_{slice_id}.txt"


@dataclass
class SliceManifest:
    slice_id: str
    domain: str
    created: str
    revision: int
    format_version: int
    config: dict
    artifacts: dict[str, str]
    counts: dict = field(default_factory=dict)
    timing: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "slice_id": self.slice_id,
            "domain": self.domain,
            "created": self.created,
            "revision": self.revision,
            "format_version": self.format_version,
            "config": self.config,
            "artifacts": self.artifacts,
            "counts": self.counts,
            "timing": self.timing,
        }

    @staticmethod
    def from_dict(data: dict) -> "SliceManifest":
        return SliceManifest(
            slice_id=data["slice_id"],
            domain=data["domain"],
            created=data["created"],
            revision=int(data["revision"]),
            format_version=int(data["format_version"]),
            config=data.get("config", {}),
            artifacts=dict(data.get("artifacts", {})),
            counts=dict(data.get("counts", {})),
            timing=data.get("timing"),
        )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_embeddings(matrix: np.ndarray, path: Path) -> None:
    rows, cols = matrix.shape
    with path.open("wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<IQQ", 1, rows, cols))
        fh.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())


def read_embeddings(path: Path) -> np.ndarray:
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic != EMBEDDING_MAGIC:
            raise UnknownFormatVersion(f"{path}: bad embedding header")
        version, rows, cols = struct.unpack("<IQQ", fh.read(20))
        if version != 1:
            raise UnknownFormatVersion(f"{path}: embedding format v{version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(rows, cols).copy()


def write_artifacts(slice_dir: Path, state: SliceState) -> dict[str, str]:
    slice_dir.mkdir(parents=True, exist_ok=True)
    names = artifact_names(state.slice_id)
    topics_mod.persist_topics(state.topic_graph, slice_dir / names["topic_graph"])
    topics_mod.write_topic_list(state.topic_graph, slice_dir / names["topic_list"])
    corpus_mod.persist_corpus(state.question_records, slice_dir / names["questions"])
    corpus_mod.persist_corpus(state.statement_records, slice_dir / names["statements"])
    triples_mod.persist_triples(state.triples, slice_dir / names["triples"])
    graph_mod.persist_graph(state.graph, slice_dir / names["graph"])
    written = [
        names["topic_graph"],
        names["topic_list"],
        names["questions"],
        names["statements"],
        names["triples"],
        names["graph"],
    ]
    if state.embeddings_init is not None:
        write_embeddings(state.embeddings_init, slice_dir / names["embeddings_init"])
        written.append(names["embeddings_init"])
    if state.embeddings is not None:
        write_embeddings(state.embeddings, slice_dir / names["embeddings"])
        written.append(names["embeddings"])
    if state.coords is not None:
        _write_manifold(slice_dir / names["manifold"], state)
        written.append(names["manifold"])
    return {name: _sha256(slice_dir / name) for name in written}


def _write_manifold(path: Path, state: SliceState) -> None:
    coords = np.asarray(state.coords)
    activations = state.activation_norms()
    depths = state.node_depths()
    und = graph_mod.symmetrize(state.graph)
    with path.open("w", encoding="utf-8") as fh:
        for v in range(state.graph.node_count):
            record = {
                "id": v,
                "phrase": state.graph.phrases[v],
                "coords": [float(c) for c in coords[v]],
                "degree": und.degree(v),
                "domain": state.graph.node_domain(v),
                "depth": depths[v],
                "activation": float(activations[v]) if activations is not None else None,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _atomic_write_json(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def write_manifest(
    slice_dir: Path,
    state: SliceState,
    artifacts: dict[str, str],
    timing: Optional[TimingProfile] = None,
) -> SliceManifest:
    prior_revision = 0
    manifest_path = slice_dir / MANIFEST_NAME
    if manifest_path.exists():
        try:
            prior = json.loads(manifest_path.read_text())
            prior_revision = int(prior.get("revision", 0))
        except (ValueError, KeyError):
            prior_revision = 0
    manifest = SliceManifest(
        slice_id=state.slice_id,
        domain=state.domain,
        created=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        revision=prior_revision + 1,
        format_version=FORMAT_VERSION,
        config=state.config.snapshot(),
        artifacts=artifacts,
        counts={
            "topics": len(state.topic_graph),
            "question_records": len(state.question_records),
            "statement_records": len(state.statement_records),
            "triples": len(state.triples),
            "nodes": state.graph.node_count,
            "edges": state.graph.edge_count,
        },
        timing=timing.as_dict() if timing is not None else None,
    )
    _atomic_write_json(manifest_path, manifest.to_dict())
    state.revision = manifest.revision
    return manifest


def write_slice(
    slice_dir: str | Path,
    state: SliceState,
    timing: Optional[TimingProfile] = None,
) -> SliceManifest:
    slice_dir = Path(slice_dir)
    artifacts = write_artifacts(slice_dir, state)
    if timing is not None:
        write_timing(slice_dir, state.slice_id, timing)
    return write_manifest(slice_dir, state, artifacts, timing)


def write_timing(slice_dir: Path, slice_id: str, timing: TimingProfile) -> None:
    (Path(slice_dir) / timing_filename(slice_id)).write_text(timing.render_table() + "\n")


def update_manifest_timing(slice_dir: str | Path, timing: TimingProfile) -> SliceManifest:
    """Patch the timing profile into an existing manifest (no revision bump);
    also emits the human-readable timing table."""
    slice_dir = Path(slice_dir)
    manifest = load_manifest(slice_dir)
    manifest.timing = timing.as_dict()
    write_timing(slice_dir, manifest.slice_id, timing)
    _atomic_write_json(slice_dir / MANIFEST_NAME, manifest.to_dict())
    return manifest


def load_manifest(slice_dir: str | Path) -> SliceManifest:
    slice_dir = Path(slice_dir)
    manifest_path = slice_dir / MANIFEST_NAME
    if not manifest_path.exists():
        if any(slice_dir.glob("*.jsonl")) or any(slice_dir.glob("*.bin")):
            raise IncompleteSlice(f"{slice_dir}: artifacts present but no manifest")
        raise FileNotFoundError(f"{slice_dir}: no slice here")
    manifest = SliceManifest.from_dict(json.loads(manifest_path.read_text()))
    if manifest.format_version != FORMAT_VERSION:
        raise UnknownFormatVersion(f"format v{manifest.format_version} not supported")
    return manifest


def verify_hashes(slice_dir: str | Path, manifest: SliceManifest) -> None:
    slice_dir = Path(slice_dir)
    for name, expected in manifest.artifacts.items():
        path = slice_dir / name
        if not path.exists() or _sha256(path) != expected:
            raise HashMismatch(name)


def _config_from_snapshot(snapshot: dict) -> SliceConfig:
    oracle_cfg = OracleConfig(**snapshot.get("oracle", {}))
    gt_cfg = GTConfig(**snapshot.get("gt", {}))
    manifold_cfg = ManifoldConfig(**snapshot.get("manifold", {}))
    fields = {
        k: v
        for k, v in snapshot.items()
        if k not in ("oracle", "gt", "manifold")
    }
    return SliceConfig(oracle=oracle_cfg, gt=gt_cfg, manifold=manifold_cfg, **fields)


def load_slice(slice_dir: str | Path, verify: bool = True) -> SliceState:
    slice_dir = Path(slice_dir)
    manifest = load_manifest(slice_dir)
    if verify:
        verify_hashes(slice_dir, manifest)
    config = _config_from_snapshot(manifest.config)
    names = artifact_names(manifest.slice_id)
    topic_graph = topics_mod.load_topics(
        slice_dir / names["topic_graph"], config.depth_limit, config.max_topics
    )
    state = SliceState(config=config, topic_graph=topic_graph, revision=manifest.revision)
    state.question_records = corpus_mod.load_corpus(slice_dir / names["questions"])
    state.statement_records = corpus_mod.load_corpus(slice_dir / names["statements"])
    state.triples = triples_mod.load_triples(slice_dir / names["triples"])
    state.graph = graph_mod.build_graph(state.triples)
    if names["embeddings_init"] in manifest.artifacts:
        state.embeddings_init = read_embeddings(slice_dir / names["embeddings_init"])
    if names["embeddings"] in manifest.artifacts:
        state.embeddings = read_embeddings(slice_dir / names["embeddings"])
    if names["manifold"] in manifest.artifacts:
        state.coords = _read_manifold_coords(slice_dir / names["manifold"], state.graph.node_count)
    return state


def _read_manifold_coords(path: Path, node_count: int) -> np.ndarray:
    rows = {}
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                rows[int(record["id"])] = record["coords"]
    dims = len(next(iter(rows.values()))) if rows else 2
    coords = np.zeros((node_count, dims))
    for v, c in rows.items():
        coords[v] = c
    return coords


def list_slices(store_dir: str | Path) -> list[Path]:
    store_dir = Path(store_dir)
    if not store_dir.exists():
        return []
    return sorted(
        p for p in store_dir.iterdir() if p.is_dir() and not p.name.startswith("_")
    )


# -- cross-slice union -------------------------------------------------------


def unify_slices(states: list[SliceState], slice_id: str = "union") -> SliceState:
    """Node union keyed by normalized phrase; edges concatenated with domain
    labels preserved and per-edge slice provenance in the source file field."""
    if not states:
        raise ValueError("need at least one slice")
    base = states[0].config
    config = SliceConfig(
        slice_id=slice_id,
        domain="+".join(s.domain for s in states),
        domain_phrase=base.domain_phrase,
        roots=[r for s in states for r in s.config.roots],
        depth_limit=max(s.config.depth_limit for s in states),
        max_topics=sum(s.config.max_topics for s in states),
        per_node_children=base.per_node_children,
        questions_per_topic=base.questions_per_topic,
        statements_per_topic=base.statements_per_topic,
        oracle=base.oracle,
        gt=base.gt,
        manifold=base.manifold,
    )
    merged_topics = topics_mod.TopicGraph(depth_limit=config.depth_limit, max_topics=config.max_topics)
    for s in states:
        id_map: dict[int, int] = {}
        for node in s.topic_graph.nodes:
            parent_new = id_map.get(node.parent_id) if node.parent_id is not None else None
            added = merged_topics.add_node(node.label, parent_new)
            if added is None:
                existing = merged_topics.by_label(node.label)
                if existing is not None:
                    id_map[node.id] = existing.id
            else:
                id_map[node.id] = added.id

    merged = SliceState(config=config, topic_graph=merged_topics)
    merged.question_records = [r for s in states for r in s.question_records]
    merged.statement_records = [r for s in states for r in s.statement_records]
    for s in states:
        for t in s.triples:
            merged.triples.append(
                Triple(
                    head=t.head,
                    relation=t.relation,
                    tail=t.tail,
                    domain=t.domain,
                    source=SourceRef(f"{s.slice_id}::{t.source.file}", t.source.record, t.source.line),
                    surface=t.surface,
                    injected=t.injected,
                )
            )
    merged.graph = graph_mod.build_graph(merged.triples)
    return merged
