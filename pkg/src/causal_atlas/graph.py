"""Multi-relational directed graph over normalized phrases.

Nodes are the distinct heads/tails of ingested triples; parallel assertions of
the same (head, relation, tail, domain) merge into one edge with a
multiplicity.  Structural queries (components, degrees, ego-graphs, triangle
motifs) are read-only and safe to run concurrently.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import MalformedRecord
from .triples import RelationType, SourceRef, Triple

CHAIN_SAME_DOMAIN = "chain_same_domain"
CYCLE = "cycle"


@dataclass
class Edge:
    head: int
    tail: int
    relation: RelationType
    domain: str
    multiplicity: int = 1
    injected_multiplicity: int = 0
    sources: list[SourceRef] = field(default_factory=list)


@dataclass(frozen=True)
class TwoSimplex:
    """A triangle motif (u, v, w) with a representative domain label.

    Chain-mode simplices are ordered paths u -> v -> w; cycle-mode simplices
    are canonicalized node sets of a directed 3-cycle (sorted ascending).
    """

    u: int
    v: int
    w: int
    domain: str

    def members(self) -> tuple[int, int, int]:
        return (self.u, self.v, self.w)


@dataclass
class ComponentReport:
    count: int
    node_counts: list[int]
    edge_counts: list[int]
    largest: int
    membership: list[int]


@dataclass
class DegreeStats:
    avg_degree: float
    max_degree: int
    in_histogram: dict[int, int]
    out_histogram: dict[int, int]


class RelGraph:
    """G = (V, E, rel, dom) with bidirectional adjacency indexes."""

    def __init__(self) -> None:
        self.phrases: list[str] = []
        self.ids: dict[str, int] = {}
        self.edges: list[Edge] = []
        self.out_edges: list[list[int]] = []
        self.in_edges: list[list[int]] = []
        self.self_loops_dropped: int = 0
        self._edge_index: dict[tuple[int, int, RelationType, str], int] = {}

    # -- construction -----------------------------------------------------

    def _node_id(self, phrase: str) -> int:
        idx = self.ids.get(phrase)
        if idx is None:
            idx = len(self.phrases)
            self.ids[phrase] = idx
            self.phrases.append(phrase)
            self.out_edges.append([])
            self.in_edges.append([])
        return idx

    def add_triple(self, triple: Triple) -> Optional[Edge]:
        if triple.head == triple.tail:
            self.self_loops_dropped += 1
            return None
        h = self._node_id(triple.head)
        t = self._node_id(triple.tail)
        key = (h, t, triple.relation, triple.domain)
        edge_idx = self._edge_index.get(key)
        if edge_idx is None:
            edge = Edge(head=h, tail=t, relation=triple.relation, domain=triple.domain)
            edge_idx = len(self.edges)
            self.edges.append(edge)
            self._edge_index[key] = edge_idx
            self.out_edges[h].append(edge_idx)
            self.in_edges[t].append(edge_idx)
        else:
            edge = self.edges[edge_idx]
            edge.multiplicity += 1
        if triple.injected:
            edge.injected_multiplicity += 1
        edge.sources.append(triple.source)
        return edge

    @property
    def node_count(self) -> int:
        return len(self.phrases)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def multiplicity_total(self) -> int:
        return sum(e.multiplicity for e in self.edges)

    def injected_nodes(self) -> list[int]:
        """Nodes whose every incident assertion came from injected claims."""
        out = []
        for v in range(self.node_count):
            incident = self.out_edges[v] + self.in_edges[v]
            if incident and all(
                self.edges[i].injected_multiplicity == self.edges[i].multiplicity for i in incident
            ):
                out.append(v)
        return out

    def domains(self) -> list[str]:
        return sorted({e.domain for e in self.edges})

    def relations(self) -> list[RelationType]:
        return sorted({e.relation for e in self.edges}, key=lambda r: r.value)

    def node_domain(self, v: int) -> str:
        """Most common domain among incident edges (lexicographic tie-break)."""
        counts = Counter(self.edges[i].domain for i in self.out_edges[v] + self.in_edges[v])
        if not counts:
            return ""
        best = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
        return best[0]


def build_graph(triples: list[Triple]) -> RelGraph:
    graph = RelGraph()
    for t in triples:
        graph.add_triple(t)
    return graph


# -- symmetrized view ------------------------------------------------------


class UndirectedView:
    """Undirected simple-graph view: u~v iff any directed edge either way."""

    def __init__(self, graph: RelGraph) -> None:
        self.node_count = graph.node_count
        self.neighbors: list[set[int]] = [set() for _ in range(graph.node_count)]
        for e in graph.edges:
            self.neighbors[e.head].add(e.tail)
            self.neighbors[e.tail].add(e.head)

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self.neighbors) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.node_count) for v in self.neighbors[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])


def symmetrize(graph: RelGraph) -> UndirectedView:
    return UndirectedView(graph)


def degree_stats(graph: RelGraph) -> DegreeStats:
    und = symmetrize(graph)
    n = graph.node_count
    avg = (2.0 * und.edge_count / n) if n else 0.0
    max_deg = max((und.degree(v) for v in range(n)), default=0)
    in_hist = Counter(len(graph.in_edges[v]) for v in range(n))
    out_hist = Counter(len(graph.out_edges[v]) for v in range(n))
    return DegreeStats(
        avg_degree=avg,
        max_degree=max_deg,
        in_histogram=dict(sorted(in_hist.items())),
        out_histogram=dict(sorted(out_hist.items())),
    )


def components(graph: RelGraph) -> ComponentReport:
    und = symmetrize(graph)
    n = und.node_count
    membership = [-1] * n
    node_counts: list[int] = []
    edge_counts: list[int] = []
    comp = 0
    for start in range(n):
        if membership[start] != -1:
            continue
        queue = deque([start])
        membership[start] = comp
        members = []
        while queue:
            v = queue.popleft()
            members.append(v)
            for w in und.neighbors[v]:
                if membership[w] == -1:
                    membership[w] = comp
                    queue.append(w)
        node_counts.append(len(members))
        edge_counts.append(sum(und.degree(v) for v in members) // 2)
        comp += 1
    largest = max(range(comp), key=lambda c: (node_counts[c], -c), default=-1) if comp else -1
    return ComponentReport(
        count=comp,
        node_counts=node_counts,
        edge_counts=edge_counts,
        largest=largest,
        membership=membership,
    )


def largest_component_nodes(graph: RelGraph) -> list[int]:
    report = components(graph)
    if report.count == 0:
        return []
    return [v for v in range(graph.node_count) if report.membership[v] == report.largest]


# -- triangle motifs -------------------------------------------------------


def detect_triangles(graph: RelGraph, mode: str = CHAIN_SAME_DOMAIN) -> list[TwoSimplex]:
    """Triangle motifs under either of two definitions.

    chain_same_domain: every directed path u -> v -> w whose two edges share a
    domain (u, v, w distinct).  cycle: directed 3-cycles, deduplicated on the
    node set and treated as undirected simplices.
    """
    if mode not in (CHAIN_SAME_DOMAIN, CYCLE):
        raise ValueError(f"unknown triangle mode {mode!r}")
    found: dict[tuple, TwoSimplex] = {}
    if mode == CHAIN_SAME_DOMAIN:
        for v in range(graph.node_count):
            for in_idx in graph.in_edges[v]:
                e_in = graph.edges[in_idx]
                u = e_in.head
                for out_idx in graph.out_edges[v]:
                    e_out = graph.edges[out_idx]
                    w = e_out.tail
                    if u == w or u == v or w == v:
                        continue
                    if e_in.domain != e_out.domain:
                        continue
                    key = (u, v, w, e_in.domain)
                    if key not in found:
                        found[key] = TwoSimplex(u=u, v=v, w=w, domain=e_in.domain)
        return sorted(found.values(), key=lambda s: (s.u, s.v, s.w, s.domain))

    out_sets = [
        {graph.edges[i].tail for i in graph.out_edges[v]} for v in range(graph.node_count)
    ]
    for e in graph.edges:
        u, v = e.head, e.tail
        for w in out_sets[v]:
            if w == u or w == v:
                continue
            if u in out_sets[w]:
                nodes = tuple(sorted((u, v, w)))
                if nodes not in found:
                    domain = min(
                        _cycle_edge_domains(graph, u, v, w),
                        default="",
                    )
                    found[nodes] = TwoSimplex(nodes[0], nodes[1], nodes[2], domain)
    return sorted(found.values(), key=lambda s: (s.u, s.v, s.w, s.domain))


def _cycle_edge_domains(graph: RelGraph, u: int, v: int, w: int) -> list[str]:
    domains = []
    pairs = {(u, v), (v, w), (w, u), (v, u), (w, v), (u, w)}
    for e in graph.edges:
        if (e.head, e.tail) in pairs:
            domains.append(e.domain)
    return domains


def triangle_memberships(simplices: list[TwoSimplex], node_count: int) -> list[list[tuple[int, int]]]:
    """Per node, the (other, other) pairs of every simplex containing it."""
    member: list[list[tuple[int, int]]] = [[] for _ in range(node_count)]
    for s in simplices:
        u, v, w = s.members()
        member[u].append((v, w))
        member[v].append((u, w))
        member[w].append((u, v))
    return member


def top_hub_edges(graph: RelGraph, k: int = 10, hub_quantile: float = 0.9) -> list[Edge]:
    """Display post-pass: the k most-asserted edges linking two hub nodes.

    Hubs are nodes at or above the given undirected-degree quantile.  The
    underlying selection procedure is a presentation heuristic; edges are
    returned with their full multiplicity, not reweighted.
    """
    if graph.node_count == 0 or k < 1:
        return []
    und = symmetrize(graph)
    degrees = sorted(und.degree(v) for v in range(graph.node_count))
    cutoff_index = min(int(len(degrees) * hub_quantile), len(degrees) - 1)
    threshold = max(degrees[cutoff_index], 2)
    hubs = {v for v in range(graph.node_count) if und.degree(v) >= threshold}
    candidates = [e for e in graph.edges if e.head in hubs and e.tail in hubs]
    candidates.sort(key=lambda e: (-e.multiplicity, e.head, e.tail, e.relation.value))
    return candidates[:k]


# -- ego graphs ------------------------------------------------------------


@dataclass
class EgoGraph:
    center: int
    hops: int
    nodes: list[int]
    edges: list[Edge]


def ego_graph(graph: RelGraph, node: int, hops: int) -> EgoGraph:
    """Induced subgraph on nodes within `hops` undirected steps."""
    if hops < 1:
        raise ValueError("hops must be >= 1")
    if not 0 <= node < graph.node_count:
        raise KeyError(f"node {node} not in graph")
    und = symmetrize(graph)
    dist = {node: 0}
    queue = deque([node])
    while queue:
        v = queue.popleft()
        if dist[v] >= hops:
            continue
        for w in und.neighbors[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    nodes = sorted(dist)
    node_set = set(nodes)
    edges = [e for e in graph.edges if e.head in node_set and e.tail in node_set]
    return EgoGraph(center=node, hops=hops, nodes=nodes, edges=edges)


# -- persistence -----------------------------------------------------------


def persist_graph(graph: RelGraph, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for e in graph.edges:
            fh.write(
                json.dumps(
                    {
                        "head": graph.phrases[e.head],
                        "relation": e.relation.value,
                        "tail": graph.phrases[e.tail],
                        "domain": e.domain,
                        "multiplicity": e.multiplicity,
                        "injected_multiplicity": e.injected_multiplicity,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_graph(path: str | Path) -> RelGraph:
    path = Path(path)
    graph = RelGraph()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
                for k in range(int(data["multiplicity"])):
                    injected = k < int(data.get("injected_multiplicity", 0))
                    graph.add_triple(
                        Triple(
                            head=data["head"],
                            relation=RelationType(data["relation"]),
                            tail=data["tail"],
                            domain=data["domain"],
                            injected=injected,
                        )
                    )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(str(path), lineno, str(exc)) from exc
    return graph
