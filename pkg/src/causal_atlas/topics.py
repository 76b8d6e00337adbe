"""Topic hierarchy construction by oracle-driven breadth-first expansion.

Root labels are expanded level by level; each node is queried once, children
are deduplicated on a normalized label, and the total node count is hard
capped.  The resulting tree (plus a duplicate-proposal counter) is persisted
as line-delimited JSON.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import grammar, oracle
from .errors import MalformedRecord, TransportError

_ENUMERATOR_RE = re.compile(r"^\s*\d+\s*[.)\-]\s+")
_TRAILING_PUNCT_RE = re.compile(r"[\s.,;:!?]+$")


def normalize_label(label: str) -> str:
    """Lowercase, collapse whitespace, strip trailing punctuation."""
    collapsed = " ".join(label.lower().split())
    return _TRAILING_PUNCT_RE.sub("", collapsed)


@dataclass
class ParseDiagnostics:
    skipped_lines: int = 0


def parse_numbered_list(text: str, diagnostics: Optional[ParseDiagnostics] = None) -> list[str]:
    """Extract labels from a numbered-list response.

    Strips enumerators of the forms "N.", "N)", "N -"; bare lines are kept
    as-is.  Empty lines are dropped.
    """
    labels: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        stripped = _ENUMERATOR_RE.sub("", line).strip()
        if not stripped:
            if diagnostics is not None:
                diagnostics.skipped_lines += 1
            continue
        labels.append(stripped)
    return labels


@dataclass
class TopicNode:
    id: int
    label: str
    depth: int
    parent_id: Optional[int]
    path: list[str]
    normalized_label: str = ""

    def __post_init__(self) -> None:
        if not self.normalized_label:
            self.normalized_label = normalize_label(self.label)


@dataclass
class TopicGraph:
    depth_limit: int = 0
    max_topics: int = 0
    nodes: list[TopicNode] = field(default_factory=list)
    children: dict[int, list[int]] = field(default_factory=dict)
    duplicate_proposals: int = 0
    parse_diagnostics: ParseDiagnostics = field(default_factory=ParseDiagnostics)
    _by_norm: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> TopicNode:
        return self.nodes[node_id]

    def by_label(self, label: str) -> Optional[TopicNode]:
        idx = self._by_norm.get(normalize_label(label))
        return self.nodes[idx] if idx is not None else None

    def add_node(self, label: str, parent_id: Optional[int]) -> Optional[TopicNode]:
        """Attach a node under parent_id; returns None on duplicate label or cap."""
        norm = normalize_label(label)
        if not norm:
            return None
        if norm in self._by_norm:
            self.duplicate_proposals += 1
            return None
        if self.max_topics and len(self.nodes) >= self.max_topics:
            return None
        if parent_id is None:
            depth = 0
            path = [label]
        else:
            parent = self.nodes[parent_id]
            depth = parent.depth + 1
            path = parent.path + [label]
        node = TopicNode(id=len(self.nodes), label=label, depth=depth, parent_id=parent_id, path=path)
        self.nodes.append(node)
        self._by_norm[norm] = node.id
        if parent_id is not None:
            self.children.setdefault(parent_id, []).append(node.id)
        return node

    def leaves(self) -> list[TopicNode]:
        return [n for n in self.nodes if not self.children.get(n.id)]

    def check_invariants(self) -> None:
        assert len({n.normalized_label for n in self.nodes}) == len(self.nodes)
        if self.max_topics:
            assert len(self.nodes) <= self.max_topics
        for n in self.nodes:
            assert len(n.path) == n.depth + 1
            assert n.path[-1] == n.label
            if n.parent_id is None:
                assert n.depth == 0
            else:
                assert n.depth == self.nodes[n.parent_id].depth + 1

    def equals(self, other: "TopicGraph") -> bool:
        if len(self.nodes) != len(other.nodes):
            return False
        for a, b in zip(self.nodes, other.nodes):
            if (a.id, a.label, a.depth, a.parent_id, a.path) != (b.id, b.label, b.depth, b.parent_id, b.path):
                return False
        return True


def expand_bfs(
    roots: list[str],
    depth_limit: int,
    max_topics: int,
    per_node_children: int,
    config: oracle.OracleConfig,
    domain_phrase: str = "",
    budget: Optional[oracle.Budget] = None,
    checkpoint_path: Optional[str | Path] = None,
) -> TopicGraph:
    """Expand root topics breadth-first through the oracle.

    Frontier order is strict FIFO by depth; each node is queried once; children
    already present (by normalized label) are skipped.  Expansion halts when
    the node cap is reached or the frontier is exhausted.  On transport
    failure the partial graph is persisted to checkpoint_path (when given)
    before the error propagates.
    """
    if not roots:
        raise ValueError("roots must be non-empty")
    if depth_limit < 0:
        raise ValueError("depth_limit must be >= 0")
    if max_topics < len(roots):
        raise ValueError("max_topics must be at least the number of roots")

    graph = TopicGraph(depth_limit=depth_limit, max_topics=max_topics)
    template = oracle.default_template(grammar.TOPIC_EXPANSION, domain_phrase)
    queue: deque[int] = deque()
    for label in roots:
        node = graph.add_node(label, parent_id=None)
        if node is not None:
            queue.append(node.id)

    try:
        while queue and len(graph) < max_topics:
            # Same-depth nodes form one batch: their oracle calls may run
            # concurrently, but children are adopted in node-id order so the
            # cap and dedup outcomes do not depend on completion order.
            level_depth = graph.node(queue[0]).depth
            if level_depth >= depth_limit:
                break
            level: list[int] = []
            while queue and graph.node(queue[0]).depth == level_depth:
                level.append(queue.popleft())
            if budget is not None:
                level = level[: budget.remaining]
                if not level:
                    break
            prompts = [
                oracle.render_prompt(template, graph.node(i).label, n=per_node_children)
                for i in level
            ]
            responses = oracle.map_generate(config, prompts, budget=budget)
            for node_id, response in zip(level, responses):
                labels = parse_numbered_list(response, graph.parse_diagnostics)
                for label in labels[:per_node_children]:
                    if len(graph) >= max_topics:
                        break
                    child = graph.add_node(label, parent_id=node_id)
                    if child is not None:
                        queue.append(child.id)
    except TransportError:
        if checkpoint_path is not None:
            persist_topics(graph, checkpoint_path)
        raise
    graph.check_invariants()
    return graph


def expand_node(
    graph: TopicGraph,
    node_id: int,
    per_node_children: int,
    config: oracle.OracleConfig,
    template: oracle.PromptTemplate,
    budget: Optional[oracle.Budget] = None,
    queue: Optional[deque] = None,
) -> list[TopicNode]:
    """Query the oracle once for a node's subtopics and attach the new ones."""
    node = graph.node(node_id)
    prompt = oracle.render_prompt(template, node.label, n=per_node_children)
    response = oracle.generate(config, prompt, budget=budget)
    labels = parse_numbered_list(response, graph.parse_diagnostics)
    added: list[TopicNode] = []
    for label in labels[:per_node_children]:
        child = graph.add_node(label, parent_id=node_id)
        if child is not None:
            added.append(child)
            if queue is not None:
                queue.append(child.id)
        if graph.max_topics and len(graph) >= graph.max_topics:
            break
    return added


def persist_topics(graph: TopicGraph, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for n in graph.nodes:
            record = {
                "id": n.id,
                "label": n.label,
                "depth": n.depth,
                "parent_id": n.parent_id,
                "path": n.path,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_topics(path: str | Path, depth_limit: int = 0, max_topics: int = 0) -> TopicGraph:
    path = Path(path)
    graph = TopicGraph(depth_limit=depth_limit, max_topics=max_topics)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
                node = TopicNode(
                    id=int(record["id"]),
                    label=record["label"],
                    depth=int(record["depth"]),
                    parent_id=record["parent_id"],
                    path=list(record["path"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(str(path), lineno, str(exc)) from exc
            if node.id != len(graph.nodes):
                raise MalformedRecord(str(path), lineno, "non-sequential node id")
            graph.nodes.append(node)
            graph._by_norm[node.normalized_label] = node.id
            if node.parent_id is not None:
                graph.children.setdefault(node.parent_id, []).append(node.id)
    if not graph.depth_limit and graph.nodes:
        graph.depth_limit = max(n.depth for n in graph.nodes)
    if not graph.max_topics:
        graph.max_topics = max(len(graph.nodes), 1)
    return graph


def write_topic_list(graph: TopicGraph, path: str | Path) -> None:
    """Tab-separated depth and label, one topic per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for n in graph.nodes:
            fh.write(f"{n.depth}\t{n.label}\n")


def iter_topics_by_depth(graph: TopicGraph) -> Iterable[TopicNode]:
    return sorted(graph.nodes, key=lambda n: (n.depth, n.id))
