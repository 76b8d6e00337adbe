"""FastAPI application over a slice store.

Read endpoints never mutate slices; deepen is the only mutator and is
serialized per slice.  Loaded slices are cached by manifest content hash, so
a new revision published by a job invalidates the cache automatically.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .. import explore, graph as graph_mod, store
from ..errors import HashMismatch, IncompleteSlice, UnknownFormatVersion
from ..slices import SliceState
from . import schemas
from .jobs import JobManager, RegionError, SliceBusy

MAX_PAGE = 5000


class SliceCache:
    """(slice_id -> SliceState) keyed by the manifest file's content hash."""

    def __init__(self, store_dir: Path) -> None:
        self.store_dir = Path(store_dir)
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[str, SliceState]] = {}

    def slice_dir(self, slice_id: str) -> Path:
        return self.store_dir / slice_id

    def _manifest_hash(self, slice_id: str) -> str:
        path = self.slice_dir(slice_id) / store.MANIFEST_NAME
        return hashlib.sha256(path.read_bytes()).hexdigest()

    def load(self, slice_id: str) -> SliceState:
        slice_dir = self.slice_dir(slice_id)
        if not (slice_dir / store.MANIFEST_NAME).exists():
            raise HTTPException(status_code=404, detail=f"unknown slice {slice_id!r}")
        key = self._manifest_hash(slice_id)
        with self._lock:
            cached = self._entries.get(slice_id)
            if cached and cached[0] == key:
                return cached[1]
        try:
            state = store.load_slice(slice_dir)
        except (HashMismatch, IncompleteSlice) as exc:
            raise HTTPException(status_code=409, detail=f"slice is corrupt: {exc}")
        except UnknownFormatVersion as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        with self._lock:
            self._entries[slice_id] = (key, state)
        return state


def create_app(store_dir: str | Path, title: str = "causal-atlas") -> FastAPI:
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title=title)
    # the browser console is served from a different origin than the API
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    cache = SliceCache(store_dir)
    jobs = JobManager(store_dir)
    app.state.jobs = jobs
    app.state.cache = cache

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "store": str(store_dir)}

    @app.get("/slices", response_model=list[schemas.SliceSummary])
    def list_slices() -> list[schemas.SliceSummary]:
        summaries = []
        for slice_dir in store.list_slices(store_dir):
            try:
                manifest = store.load_manifest(slice_dir)
            except (IncompleteSlice, UnknownFormatVersion, FileNotFoundError):
                continue
            corrupt = False
            try:
                store.verify_hashes(slice_dir, manifest)
            except HashMismatch:
                corrupt = True
            summaries.append(
                schemas.SliceSummary(
                    slice_id=manifest.slice_id,
                    domain=manifest.domain,
                    revision=manifest.revision,
                    created=manifest.created,
                    counts=manifest.counts,
                    corrupt=corrupt,
                )
            )
        return summaries

    @app.get("/slices/{slice_id}/manifold", response_model=schemas.ManifoldPage)
    def manifold(
        slice_id: str,
        dims: int = Query(default=2),
        cursor: int = Query(default=0, ge=0),
        limit: int = Query(default=MAX_PAGE, ge=1, le=MAX_PAGE),
    ) -> schemas.ManifoldPage:
        state = cache.load(slice_id)
        if state.coords is None:
            raise HTTPException(status_code=409, detail="slice has no manifold; rebuild it")
        stored_dims = int(np.asarray(state.coords).shape[1])
        if dims != stored_dims:
            raise HTTPException(
                status_code=409,
                detail=(
                    f"slice stores {stored_dims}D coordinates; request dims={stored_dims} "
                    f"or rebuild the slice with components={dims}"
                ),
            )
        coords = np.asarray(state.coords)
        und = graph_mod.symmetrize(state.graph)
        depths = state.node_depths()
        activations = state.activation_norms()
        total = state.graph.node_count
        end = min(cursor + limit, total)
        nodes = [
            schemas.ManifoldNode(
                id=v,
                phrase=state.graph.phrases[v],
                coords=[float(c) for c in coords[v]],
                degree=und.degree(v),
                domain=state.graph.node_domain(v),
                depth=depths[v],
                activation=float(activations[v]) if activations is not None else None,
            )
            for v in range(cursor, end)
        ]
        return schemas.ManifoldPage(
            slice_id=slice_id,
            revision=state.revision,
            dims=stored_dims,
            total=total,
            nodes=nodes,
            next_cursor=end if end < total else None,
        )

    @app.get("/slices/{slice_id}/nodes/{node_id}/ego", response_model=schemas.EgoResponse)
    def ego(slice_id: str, node_id: int, hops: int = Query(default=2, ge=1, le=6)) -> schemas.EgoResponse:
        state = cache.load(slice_id)
        if not 0 <= node_id < state.graph.node_count:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id}")
        subgraph = graph_mod.ego_graph(state.graph, node_id, hops)
        und = graph_mod.symmetrize(state.graph)
        activations = state.activation_norms()
        nodes = [
            schemas.EgoNode(
                id=v,
                phrase=state.graph.phrases[v],
                degree=und.degree(v),
                domain=state.graph.node_domain(v),
                activation=float(activations[v]) if activations is not None else None,
            )
            for v in subgraph.nodes
        ]
        edges = [
            schemas.EgoEdge(
                source=e.head,
                target=e.tail,
                relation=e.relation.value,
                domain=e.domain,
                multiplicity=e.multiplicity,
            )
            for e in subgraph.edges
        ]
        return schemas.EgoResponse(
            slice_id=slice_id, center=node_id, hops=hops, nodes=nodes, edges=edges
        )

    @app.post("/slices/{slice_id}/deepen", response_model=schemas.JobSubmitted, status_code=202)
    def deepen(slice_id: str, request: schemas.DeepenRequest) -> schemas.JobSubmitted:
        if request.budget < 1:
            raise HTTPException(status_code=400, detail="budget must be >= 1")
        if request.waves < 1:
            raise HTTPException(status_code=400, detail="waves must be >= 1")
        cache.load(slice_id)  # 404 / corruption checks
        if jobs.slice_busy(slice_id):
            raise HTTPException(status_code=409, detail="a deepen job is already running")
        # The job mutates its own copy; readers keep the cached revision until
        # the new manifest is published.
        state = store.load_slice(cache.slice_dir(slice_id))
        weights = explore.UtilityWeights()
        if request.weights is not None:
            weights = explore.UtilityWeights(
                w1=request.weights.w1,
                w2=request.weights.w2,
                w3=request.weights.w3,
                w4=request.weights.w4,
                alpha=request.weights.alpha,
            )
        try:
            record = jobs.submit(
                state=state,
                center=request.region.center,
                radius=request.region.radius,
                topics=request.region.topics,
                budget=request.budget,
                waves=request.waves,
                weights=weights,
            )
        except RegionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except SliceBusy:
            raise HTTPException(status_code=409, detail="a deepen job is already running")
        return schemas.JobSubmitted(job_id=record.job_id, slice_id=slice_id, state=record.state)

    @app.get("/jobs/{job_id}", response_model=schemas.JobStatus)
    def job_status(job_id: str) -> schemas.JobStatus:
        record = jobs.get(job_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return schemas.JobStatus(
            job_id=record.job_id,
            slice_id=record.slice_id,
            state=record.state,
            waves_completed=record.waves_completed,
            calls_used=record.calls_used,
            delta={k: v for k, v in record.delta.items()},
            new_revision=record.new_revision,
            error=record.error,
        )

    return app
