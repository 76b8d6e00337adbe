"""End-to-end slice construction with a per-module timing profile.

Module boundaries are timed with contiguous timestamps, so the per-module
seconds always sum to the measured wall clock of the run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from . import topics as topics_mod
from .oracle import Budget
from .slices import SliceConfig, SliceState


@dataclass
class TimingProfile:
    """Seconds per pipeline module, in execution order."""

    entries: list[tuple[str, float]] = field(default_factory=list)
    total: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {name: seconds for name, seconds in self.entries}

    def render_table(self) -> str:
        width = max([len(name) for name, _ in self.entries] + [len("Module"), len("Total")]) + 2
        lines = [f"{'Module':<{width}} Time [s]"]
        for name, seconds in self.entries:
            lines.append(f"{name:<{width}} {seconds:.1f}")
        lines.append(f"{'Total':<{width}} {self.total:.1f}")
        return "\n".join(lines)


class _Stopwatch:
    def __init__(self) -> None:
        self.start = time.perf_counter()
        self._last = self.start
        self.profile = TimingProfile()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.profile.entries.append((name, now - self._last))
        self._last = now

    def finish(self) -> TimingProfile:
        self.profile.total = time.perf_counter() - self.start
        return self.profile


def _run_modules(
    config: SliceConfig,
    watch: _Stopwatch,
    budget: Optional[Budget] = None,
    checkpoint_dir: Optional[str | Path] = None,
) -> SliceState:
    checkpoint_path = None
    if checkpoint_dir is not None:
        checkpoint_path = Path(checkpoint_dir) / f"topic_graph_{config.slice_id}.jsonl"

    topic_graph = topics_mod.expand_bfs(
        config.roots,
        config.depth_limit,
        config.max_topics,
        config.per_node_children,
        config.oracle,
        config.domain_phrase,
        budget=budget,
        checkpoint_path=checkpoint_path,
    )
    watch.lap("1: Topic graph")


    state = SliceState(config=config, topic_graph=topic_graph)
    state.question_records = corpus_mod.generate_questions(
        topic_graph, config.questions_per_topic, config.oracle, config.domain_phrase, budget=budget
    )
    watch.lap("2: Causal questions")

    state.statement_records = corpus_mod.generate_statements(
        topic_graph,
        config.statements_per_topic,
        config.oracle,
        config.domain_phrase,
        budget=budget,
        questions=state.question_records,
    )
    watch.lap("3: Causal statements")

    state.rebuild_triples_and_graph()
    watch.lap("4: Relational triples")

    state.rebuild_manifold()
    watch.lap("5: Relational manifold")
    return state


def build_slice(
    config: SliceConfig,
    budget: Optional[Budget] = None,
    checkpoint_dir: Optional[str | Path] = None,
) -> tuple[SliceState, TimingProfile]:
    """Run topic expansion, question/statement generation, triple extraction,
    and manifold construction for one slice."""
    watch = _Stopwatch()
    state = _run_modules(config, watch, budget=budget, checkpoint_dir=checkpoint_dir)
    return state, watch.finish()


def build_and_store_slice(
    config: SliceConfig,
    store_dir: str | Path,
    budget: Optional[Budget] = None,
):
    """Build a slice and persist it; the write is timed as its own module and
    the final timing table is patched into the manifest afterwards."""
    from . import store as store_mod

    watch = _Stopwatch()
    slice_dir = Path(store_dir) / config.slice_id
    state = _run_modules(config, watch, budget=budget, checkpoint_dir=None)
    store_mod.write_slice(slice_dir, state, timing=None)
    watch.lap("5.1: Write slice")
    profile = watch.finish()
    manifest = store_mod.update_manifest_timing(slice_dir, profile)
    return state, profile, manifest
