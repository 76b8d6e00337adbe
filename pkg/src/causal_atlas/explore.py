"""Budgeted active exploration: score frontier topics, select a batch, deepen
selectively with a depth-aware policy, and optionally boost topics near
task-seed regions of the manifold."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import corpus as corpus_mod
from . import grammar, oracle
from .oracle import Budget
from .slices import SliceState
from .topics import normalize_label

DEFAULT_SEED_BOOST = 5.0


@dataclass
class UtilityWeights:
    w1: float = 1.0
    w2: float = 0.5
    w3: float = 0.5
    w4: float = 1.0
    alpha: float = 0.5

    def __post_init__(self) -> None:
        weights = (self.w1, self.w2, self.w3, self.w4)
        if any(w < 0 for w in weights) or self.alpha < 0:
            raise ValueError("weights and depth decay must be non-negative")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one weight must be positive")


@dataclass
class FrontierEntry:
    topic_id: int
    depth: int
    degree: int
    triple_count: int
    novelty: float


def utility(entry: FrontierEntry, weights: UtilityWeights) -> float:
    return (
        weights.w1 * math.exp(-weights.alpha * entry.depth)
        + weights.w2 * entry.degree
        + weights.w3 * entry.triple_count
        + weights.w4 * entry.novelty
    )


def novelty(node_coords: np.ndarray, all_coords: np.ndarray, k: int) -> float:
    """Mean distance to the k nearest other points; larger is sparser."""
    if k >= len(all_coords):
        raise ValueError("k must be smaller than the number of points")
    dists = np.linalg.norm(all_coords - node_coords[None, :], axis=1)
    order = np.sort(dists, kind="stable")
    # drop the single zero distance a point has to itself when present
    if order.size and order[0] == 0.0:
        order = order[1:]
    return float(np.mean(order[:k]))


def novelty_scores(coords: np.ndarray, k: int) -> np.ndarray:
    n = len(coords)
    k = min(k, n - 1)
    if k < 1:
        return np.zeros(n)
    diffs = coords[:, None, :] - coords[None, :, :]
    dists = np.sqrt(np.sum(diffs * diffs, axis=2))
    np.fill_diagonal(dists, np.inf)
    part = np.sort(dists, axis=1, kind="stable")[:, :k]
    return part.mean(axis=1)


def match_topic_variables(state: SliceState, topic_label: str) -> list[int]:
    """Variables whose normalized phrase contains the topic's normalized label
    as a token subsequence."""
    tokens = normalize_label(topic_label).split()
    if not tokens:
        return []
    matched = []
    for v, phrase in enumerate(state.graph.phrases):
        if _is_token_subsequence(tokens, phrase.split()):
            matched.append(v)
    return matched


def _is_token_subsequence(needle: list[str], haystack: list[str]) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


def compute_frontier(state: SliceState, max_depth: int, k: int = 5) -> list[FrontierEntry]:
    """Frontier = unexpanded topics below max_depth, scored with structural
    and manifold signals.  Topics absent from the manifold get the global
    maximum novelty."""
    graph = state.graph
    coords = state.coords
    scores = None
    max_novelty = 1.0
    if coords is not None and len(coords) > 1:
        scores = novelty_scores(np.asarray(coords), k)
        max_novelty = float(scores.max()) if scores.size else 1.0

    und_degrees = None
    if graph.node_count:
        from . import graph as graph_mod

        und = graph_mod.symmetrize(graph)
        und_degrees = [und.degree(v) for v in range(graph.node_count)]

    surfaces = [normalize_label(t.surface) for t in state.triples]
    entries: list[FrontierEntry] = []
    for node in state.topic_graph.leaves():
        if node.depth >= max_depth:
            continue
        matched = match_topic_variables(state, node.label)
        degree = max((und_degrees[v] for v in matched), default=0) if und_degrees else 0
        label_norm = node.normalized_label
        triple_count = sum(1 for s in surfaces if label_norm in s)
        if matched and scores is not None:
            nov = float(np.mean([scores[v] for v in matched]))
        else:
            nov = max_novelty
        entries.append(
            FrontierEntry(
                topic_id=node.id,
                depth=node.depth,
                degree=degree,
                triple_count=triple_count,
                novelty=nov,
            )
        )
    return entries


def select_batch(
    frontier: list[FrontierEntry],
    weights: UtilityWeights,
    batch_size: int,
    mode: str = "top_k",
    seed: int = 0,
    boost: Optional[dict[int, float]] = None,
) -> list[int]:
    """Pick batch_size topics: descending utility with topic-id tie-break, or
    seeded sampling without replacement proportional to utility."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if mode not in ("top_k", "proportional"):
        raise ValueError(f"unknown selection mode {mode!r}")
    if not frontier:
        return []
    scored = []
    for entry in frontier:
        u = utility(entry, weights)
        if boost:
            u *= boost.get(entry.topic_id, 1.0)
        scored.append((entry.topic_id, u))
    size = min(batch_size, len(scored))
    if mode == "top_k":
        ranked = sorted(scored, key=lambda s: (-s[1], s[0]))
        return [topic_id for topic_id, _ in ranked[:size]]
    rng = random.Random(seed)
    pool = list(scored)
    picked: list[int] = []
    for _ in range(size):
        total = sum(max(u, 0.0) for _, u in pool)
        if total <= 0.0:
            pool.sort(key=lambda s: s[0])
            picked.extend(tid for tid, _ in pool[: size - len(picked)])
            break
        roll = rng.random() * total
        acc = 0.0
        chosen = len(pool) - 1
        for i, (_, u) in enumerate(pool):
            acc += max(u, 0.0)
            if roll < acc:
                chosen = i
                break
        picked.append(pool.pop(chosen)[0])
    return picked


@dataclass
class DepthPolicy:
    """Per-depth allocation of oracle calls for one deepened topic."""

    full_depth: int = 2
    children_full: int = 5
    children_reduced: int = 3
    question_calls_full: int = 1
    question_calls_reduced: int = 1
    statement_calls_full: int = 2
    statement_calls_reduced: int = 1
    per_call: int = 3

    def children(self, depth: int) -> int:
        return self.children_full if depth <= self.full_depth else self.children_reduced

    def question_calls(self, depth: int) -> int:
        return self.question_calls_full if depth <= self.full_depth else self.question_calls_reduced

    def statement_calls(self, depth: int) -> int:
        return self.statement_calls_full if depth <= self.full_depth else self.statement_calls_reduced

    def calls_per_topic(self, depth: int) -> int:
        return 1 + self.question_calls(depth) + self.statement_calls(depth)


@dataclass
class DeepenDelta:
    new_topic_ids: list[int] = field(default_factory=list)
    new_question_records: int = 0
    new_statement_records: int = 0
    calls_used: int = 0
    topics_deepened: list[int] = field(default_factory=list)


def deepen(
    state: SliceState,
    batch: list[int],
    policy: DepthPolicy,
    budget: Budget,
) -> DeepenDelta:
    """Expand and query each batch topic in order, stopping mid-batch when the
    budget hits zero.  The budget is decremented exactly once per oracle call;
    partial work is kept.

    Question/statement calls are allocated round-robin over the topic itself
    (when it has no statement coverage yet) and its newly created children,
    so each call adds fresh corpus rather than re-asking covered topics.
    """
    delta = DeepenDelta()
    config = state.config
    template = oracle.default_template(grammar.TOPIC_EXPANSION, config.domain_phrase)
    calls_before = budget.calls_made
    covered = {rec.topic for rec in state.statement_records}
    for topic_id in batch:
        node = state.topic_graph.node(topic_id)
        if budget.exhausted():
            break
        from . import topics as topics_mod

        children = topics_mod.expand_node(
            state.topic_graph, topic_id, policy.children(node.depth), config.oracle, template, budget
        )
        delta.new_topic_ids.extend(c.id for c in children)
        delta.topics_deepened.append(topic_id)

        targets = ([topic_id] if node.label not in covered else []) + [c.id for c in children]
        if not targets:
            targets = [topic_id]

        for i in range(policy.question_calls(node.depth)):
            if budget.exhausted():
                break
            records = corpus_mod.generate_questions(
                state.topic_graph,
                policy.per_call,
                config.oracle,
                config.domain_phrase,
                topic_ids=[targets[i % len(targets)]],
                budget=budget,
            )
            state.question_records.extend(records)
            delta.new_question_records += len(records)
        for i in range(policy.statement_calls(node.depth)):
            if budget.exhausted():
                break
            records = corpus_mod.generate_statements(
                state.topic_graph,
                policy.per_call,
                config.oracle,
                config.domain_phrase,
                topic_ids=[targets[i % len(targets)]],
                budget=budget,
            )
            state.statement_records.extend(records)
            delta.new_statement_records += len(records)
            covered.add(state.topic_graph.node(targets[i % len(targets)]).label)
    delta.calls_used = budget.calls_made - calls_before
    return delta


@dataclass
class WaveLog:
    wave: int
    selected: list[int]
    calls_used: int
    new_topics: int
    new_triples: int
    node_count: int
    edge_count: int
    budget_initial: int = 0
    budget_remaining: int = 0


@dataclass
class ExplorationLog:
    waves: list[WaveLog] = field(default_factory=list)
    total_calls: int = 0


def seed_boosts(
    state: SliceState,
    frontier: list[FrontierEntry],
    task_seeds: list[str],
    factor: float = DEFAULT_SEED_BOOST,
    radius: Optional[float] = None,
) -> dict[int, float]:
    """Multiplicative utility boost for frontier topics whose matched
    variables sit within a manifold radius of any seed topic's variables."""
    if state.coords is None or not task_seeds:
        return {}
    coords = np.asarray(state.coords)
    seed_points = []
    for label in task_seeds:
        for v in match_topic_variables(state, label):
            seed_points.append(coords[v])
    if not seed_points:
        return {}
    seed_arr = np.vstack(seed_points)
    if radius is None:
        n = len(coords)
        sample = coords[: min(n, 200)]
        diffs = sample[:, None, :] - sample[None, :, :]
        dists = np.sqrt(np.sum(diffs * diffs, axis=2))
        upper = dists[np.triu_indices(len(sample), k=1)]
        radius = float(np.percentile(upper, 10)) if upper.size else 0.0
    boosts: dict[int, float] = {}
    for entry in frontier:
        matched = match_topic_variables(state, state.topic_graph.node(entry.topic_id).label)
        if not matched:
            continue
        center = coords[matched].mean(axis=0)
        if float(np.min(np.linalg.norm(seed_arr - center[None, :], axis=1))) <= radius:
            boosts[entry.topic_id] = factor
    return boosts


def active_loop(
    state: SliceState,
    weights: UtilityWeights,
    budget_per_wave: int,
    waves: int,
    task_seeds: Optional[list[str]] = None,
    batch_size: int = 4,
    mode: str = "top_k",
    seed: int = 0,
    policy: Optional[DepthPolicy] = None,
    max_depth: Optional[int] = None,
    boost_factor: float = DEFAULT_SEED_BOOST,
    boost_radius: Optional[float] = None,
) -> ExplorationLog:
    """Run up to `waves` rounds of score -> select -> deepen -> rebuild.

    Stops early when a wave consumes no budget (empty frontier or zero-size
    batch).  The graph and manifold are fully rebuilt after each wave."""
    policy = policy or DepthPolicy()
    if max_depth is None:
        max_depth = state.config.depth_limit + waves
    log = ExplorationLog()
    for wave_idx in range(waves):
        frontier = compute_frontier(state, max_depth)
        if not frontier:
            break
        boosts = seed_boosts(state, frontier, task_seeds or [], boost_factor, boost_radius)
        batch = select_batch(frontier, weights, batch_size, mode, seed + wave_idx, boosts)
        budget = Budget(budget_per_wave)
        delta = deepen(state, batch, policy, budget)
        assert budget.calls_made + budget.remaining == budget.initial
        if delta.calls_used == 0:
            break
        state.rebuild_triples_and_graph()
        state.rebuild_manifold()
        log.waves.append(
            WaveLog(
                wave=wave_idx,
                selected=batch,
                calls_used=delta.calls_used,
                new_topics=len(delta.new_topic_ids),
                new_triples=len(state.triples),
                node_count=state.graph.node_count,
                edge_count=state.graph.edge_count,
                budget_initial=budget.initial,
                budget_remaining=budget.remaining,
            )
        )
        log.total_calls += delta.calls_used
    return log
