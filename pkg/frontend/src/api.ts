/** Typed HTTP client for the slice service.  Only the documented endpoints
 * are used; the fetch implementation is injectable for tests. */

import type {
  DeepenRequest,
  EgoResponse,
  JobStatus,
  JobSubmitted,
  Manifold,
  ManifoldPage,
  SliceSummary,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class AtlasClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  async listSlices(): Promise<SliceSummary[]> {
    return this.get<SliceSummary[]>('/slices');
  }

  async manifoldPage(sliceId: string, dims: number, cursor: number, limit: number): Promise<ManifoldPage> {
    return this.get<ManifoldPage>(
      `/slices/${encodeURIComponent(sliceId)}/manifold?dims=${dims}&cursor=${cursor}&limit=${limit}`,
    );
  }

  /** Walk the pagination cursor until every node has been fetched once. */
  async fetchManifold(sliceId: string, dims = 2, pageSize = 1000): Promise<Manifold> {
    const nodes = [];
    let cursor = 0;
    let revision = 0;
    let dimsSeen = dims;
    for (;;) {
      const page = await this.manifoldPage(sliceId, dims, cursor, pageSize);
      nodes.push(...page.nodes);
      revision = page.revision;
      dimsSeen = page.dims;
      if (page.next_cursor === null) break;
      cursor = page.next_cursor;
    }
    return { slice_id: sliceId, revision, dims: dimsSeen, nodes };
  }

  async ego(sliceId: string, nodeId: number, hops = 2): Promise<EgoResponse> {
    return this.get<EgoResponse>(
      `/slices/${encodeURIComponent(sliceId)}/nodes/${nodeId}/ego?hops=${hops}`,
    );
  }

  async submitDeepen(sliceId: string, request: DeepenRequest): Promise<JobSubmitted> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/slices/${encodeURIComponent(sliceId)}/deepen`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(request),
      },
    );
    if (!response.ok) await parseError(response);
    return (await response.json()) as JobSubmitted;
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    return this.get<JobStatus>(`/jobs/${encodeURIComponent(jobId)}`);
  }

  /** Poll a job until it reaches a terminal state. */
  async pollJob(
    jobId: string,
    intervalMs = 500,
    onUpdate?: (status: JobStatus) => void,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<JobStatus> {
    for (;;) {
      const status = await this.jobStatus(jobId);
      onUpdate?.(status);
      if (status.state === 'done' || status.state === 'failed') return status;
      await sleep(intervalMs);
    }
  }
}
