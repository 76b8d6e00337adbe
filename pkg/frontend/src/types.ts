/** Wire types mirroring the slice service's response models. */

export interface SliceSummary {
  slice_id: string;
  domain: string;
  revision: number;
  created: string;
  counts: Record<string, number>;
  corrupt: boolean;
}

export interface ManifoldNode {
  id: number;
  phrase: string;
  coords: number[];
  degree: number;
  domain: string;
  depth: number | null;
  activation: number | null;
}

export interface ManifoldPage {
  slice_id: string;
  revision: number;
  dims: number;
  total: number;
  nodes: ManifoldNode[];
  next_cursor: number | null;
}

export interface Manifold {
  slice_id: string;
  revision: number;
  dims: number;
  nodes: ManifoldNode[];
}

export interface EgoNode {
  id: number;
  phrase: string;
  degree: number;
  domain: string;
  activation: number | null;
}

export interface EgoEdge {
  source: number;
  target: number;
  relation: string;
  domain: string;
  multiplicity: number;
}

export interface EgoResponse {
  slice_id: string;
  center: number;
  hops: number;
  nodes: EgoNode[];
  edges: EgoEdge[];
}

export interface RegionSpec {
  center?: number[];
  radius?: number;
  topics?: string[];
}

export interface DeepenRequest {
  region: RegionSpec;
  budget: number;
  waves?: number;
}

export interface JobSubmitted {
  job_id: string;
  slice_id: string;
  state: string;
}

export interface JobStatus {
  job_id: string;
  slice_id: string;
  state: 'queued' | 'running' | 'done' | 'failed';
  waves_completed: number;
  calls_used: number;
  delta: Record<string, number>;
  new_revision: number | null;
  error: string | null;
}

export type ColorMode = 'domain' | 'degree' | 'depth' | 'activation';
