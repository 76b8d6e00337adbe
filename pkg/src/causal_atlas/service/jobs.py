"""Deepen-job execution: one running job per slice, job records persisted to
the store directory so status survives restarts."""

from __future__ import annotations

import json
import threading
import traceback
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import explore, store
from ..oracle import Budget
from ..slices import SliceState

JOBS_DIRNAME = "_jobs"

VALID_TRANSITIONS = {
    "queued": {"running", "failed"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


@dataclass
class JobRecord:
    job_id: str
    slice_id: str
    state: str = "queued"
    waves_completed: int = 0
    calls_used: int = 0
    delta: dict = field(default_factory=dict)
    new_revision: Optional[int] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


class RegionError(ValueError):
    """The deepen region resolves to no frontier topic."""


class SliceBusy(RuntimeError):
    """Another deepen job is already running on this slice."""


def resolve_region_topics(
    state: SliceState,
    center: Optional[list[float]],
    radius: Optional[float],
    topics: Optional[list[str]],
    max_depth: int,
) -> list[int]:
    """Topics eligible for deepening: an explicit list, or topics whose
    matched variables have manifold coordinates within radius of center."""
    frontier = explore.compute_frontier(state, max_depth)
    frontier_ids = {e.topic_id for e in frontier}
    if topics:
        resolved: set[int] = set()
        for label in topics:
            node = state.topic_graph.by_label(label)
            if node is None:
                continue
            # a named interior topic means its frontier descendants
            stack = [node.id]
            while stack:
                current = stack.pop()
                if current in frontier_ids:
                    resolved.add(current)
                stack.extend(state.topic_graph.children.get(current, []))
        return sorted(resolved)
    if center is None or radius is None:
        raise RegionError("region needs either topics or (center, radius)")
    if state.coords is None:
        raise RegionError("slice has no manifold coordinates")
    coords = np.asarray(state.coords)
    center_arr = np.asarray(center, dtype=float)
    if center_arr.shape != (coords.shape[1],):
        raise RegionError(f"center must have {coords.shape[1]} components")
    resolved = []
    for entry in frontier:
        label = state.topic_graph.node(entry.topic_id).label
        matched = explore.match_topic_variables(state, label)
        if not matched:
            continue
        dists = np.linalg.norm(coords[matched] - center_arr[None, :], axis=1)
        if float(dists.min()) <= radius:
            resolved.append(entry.topic_id)
    return resolved


class JobManager:
    def __init__(self, store_dir: Path) -> None:
        self.store_dir = Path(store_dir)
        self.jobs_dir = self.store_dir / JOBS_DIRNAME
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        self._running_slices: set[str] = set()
        self._threads: list[threading.Thread] = []
        self._recover()

    def _recover(self) -> None:
        for path in sorted(self.jobs_dir.glob("*.json")):
            try:
                record = JobRecord(**json.loads(path.read_text()))
            except (ValueError, TypeError):
                continue
            if record.state in ("queued", "running"):
                record.state = "failed"
                record.error = "interrupted by service restart"
                self._persist(record)
            self._jobs[record.job_id] = record

    def _persist(self, record: JobRecord) -> None:
        path = self.jobs_dir / f"{record.job_id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n")
        tmp.replace(path)

    def _transition(self, record: JobRecord, new_state: str) -> None:
        if new_state not in VALID_TRANSITIONS[record.state]:
            raise RuntimeError(f"illegal job transition {record.state} -> {new_state}")
        record.state = new_state
        self._persist(record)

    def get(self, job_id: str) -> Optional[JobRecord]:
        return self._jobs.get(job_id)

    def slice_busy(self, slice_id: str) -> bool:
        with self._lock:
            return slice_id in self._running_slices

    def submit(
        self,
        state: SliceState,
        center: Optional[list[float]],
        radius: Optional[float],
        topics: Optional[list[str]],
        budget: int,
        waves: int,
        weights: explore.UtilityWeights,
    ) -> JobRecord:
        """Validate the region, enqueue, and start the worker thread.

        Raises RegionError for unresolvable regions; the caller enforces the
        one-job-per-slice rule via slice_busy() under its own handler."""
        max_depth = state.config.depth_limit + waves + 1
        resolved = resolve_region_topics(state, center, radius, topics, max_depth)
        if not resolved:
            raise RegionError("region resolves to no frontier topic")
        record = JobRecord(job_id=uuid.uuid4().hex[:12], slice_id=state.slice_id)
        with self._lock:
            if state.slice_id in self._running_slices:
                raise SliceBusy(state.slice_id)
            self._running_slices.add(state.slice_id)
            self._jobs[record.job_id] = record
        self._persist(record)
        thread = threading.Thread(
            target=self._run,
            args=(record, state, resolved, budget, waves, weights, max_depth),
            daemon=True,
        )
        self._threads.append(thread)
        thread.start()
        return record

    def _run(
        self,
        record: JobRecord,
        state: SliceState,
        resolved: list[int],
        budget_total: int,
        waves: int,
        weights: explore.UtilityWeights,
        max_depth: int,
    ) -> None:
        try:
            self._transition(record, "running")
            budget = Budget(budget_total)
            allowed = set(resolved)
            topics_before = len(state.topic_graph)
            nodes_before = state.graph.node_count
            triples_before = len(state.triples)
            policy = explore.DepthPolicy()
            for _ in range(max(1, waves)):
                if budget.exhausted():
                    break
                frontier = [
                    e for e in explore.compute_frontier(state, max_depth) if e.topic_id in allowed
                ]
                if not frontier:
                    break
                batch = explore.select_batch(frontier, weights, len(frontier), "top_k")
                delta = explore.deepen(state, batch, policy, budget)
                # children of in-region topics stay in region
                allowed.update(delta.new_topic_ids)
                state.rebuild_triples_and_graph()
                state.rebuild_manifold()
                record.waves_completed += 1
                record.calls_used = budget.calls_made
                self._persist(record)
                if delta.calls_used == 0:
                    break
            manifest = store.write_slice(self.store_dir / state.slice_id, state)
            record.new_revision = manifest.revision
            record.delta = {
                "topics": len(state.topic_graph) - topics_before,
                "nodes": state.graph.node_count - nodes_before,
                "triples": len(state.triples) - triples_before,
            }
            record.calls_used = budget.calls_made
            self._transition(record, "done")
        except Exception as exc:  # report, never crash the service
            record.error = f"{exc.__class__.__name__}: {exc}"
            traceback.print_exc()
            try:
                self._transition(record, "failed")
            except RuntimeError:
                pass
        finally:
            with self._lock:
                self._running_slices.discard(record.slice_id)

    def wait_all(self, timeout: float = 60.0) -> None:
        for thread in self._threads:
            thread.join(timeout)
