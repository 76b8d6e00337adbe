"""Request/response models for the slice service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class SliceSummary(BaseModel):
    slice_id: str
    domain: str
    revision: int
    created: str
    counts: dict[str, int] = {}
    corrupt: bool = False


class ManifoldNode(BaseModel):
    id: int
    phrase: str
    coords: list[float]
    degree: int
    domain: str
    depth: Optional[int] = None
    activation: Optional[float] = None


class ManifoldPage(BaseModel):
    slice_id: str
    revision: int
    dims: int
    total: int
    nodes: list[ManifoldNode]
    next_cursor: Optional[int] = None


class EgoNode(BaseModel):
    id: int
    phrase: str
    degree: int
    domain: str
    activation: Optional[float] = None


class EgoEdge(BaseModel):
    source: int
    target: int
    relation: str
    domain: str
    multiplicity: int


class EgoResponse(BaseModel):
    slice_id: str
    center: int
    hops: int
    nodes: list[EgoNode]
    edges: list[EgoEdge]


class WeightsOverride(BaseModel):
    w1: float = 1.0
    w2: float = 0.5
    w3: float = 0.5
    w4: float = 1.0
    alpha: float = 0.5


class RegionSpec(BaseModel):
    center: Optional[list[float]] = None
    radius: Optional[float] = None
    topics: Optional[list[str]] = None


class DeepenRequest(BaseModel):
    region: RegionSpec
    budget: int
    waves: int = 1
    weights: Optional[WeightsOverride] = None


class JobSubmitted(BaseModel):
    job_id: str
    slice_id: str
    state: str


class JobStatus(BaseModel):
    job_id: str
    slice_id: str
    state: str  # queued | running | done | failed
    waves_completed: int = 0
    calls_used: int = 0
    delta: dict[str, int] = {}
    new_revision: Optional[int] = None
    error: Optional[str] = None
