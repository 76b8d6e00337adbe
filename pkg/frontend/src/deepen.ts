/** Deepen workflow: validate locally, submit, poll the job, and on success
 * reload the new revision (which computes the new-node highlight set). */

import type { AtlasClient } from './api.js';
import type { ViewState } from './state.js';
import type { ToastArea } from './toast.js';
import type { JobStatus, RegionSpec } from './types.js';

export interface SubmitResult {
  ok: boolean;
  validationError?: string;
  job?: JobStatus;
}

export class DeepenController {
  constructor(
    private readonly client: AtlasClient,
    private readonly state: ViewState,
    private readonly toasts: ToastArea,
    private readonly pollIntervalMs = 400,
  ) {}

  /** A second submission is disabled while a job is pending. */
  get busy(): boolean {
    return this.state.pendingJobId !== null;
  }

  validate(region: RegionSpec, budget: number): string | null {
    if (!Number.isInteger(budget) || budget < 1) {
      return 'Budget must be a positive whole number of oracle calls.';
    }
    const hasTopics = !!region.topics && region.topics.length > 0;
    const hasCircle = !!region.center && region.radius !== undefined && region.radius > 0;
    if (!hasTopics && !hasCircle) {
      return 'Select a region first (drag a circle or name topics).';
    }
    if (this.busy) {
      return 'A deepen job is already running on this slice.';
    }
    return null;
  }

  async submit(
    region: RegionSpec,
    budget: number,
    waves = 1,
    sleep?: (ms: number) => Promise<void>,
  ): Promise<SubmitResult> {
    // inline validation happens before any request leaves the browser
    const validationError = this.validate(region, budget);
    if (validationError) {
      return { ok: false, validationError };
    }
    const sliceId = this.state.sliceId;
    if (!sliceId) {
      return { ok: false, validationError: 'No slice loaded.' };
    }
    try {
      const submitted = await this.client.submitDeepen(sliceId, { region, budget, waves });
      this.state.setPendingJob(submitted.job_id);
      const done = await this.client.pollJob(
        submitted.job_id,
        this.pollIntervalMs,
        undefined,
        sleep,
      );
      if (done.state === 'failed') {
        this.toasts.show(`Deepen job failed: ${done.error ?? 'unknown error'}`, 'error');
        return { ok: false, job: done };
      }
      // reload the published revision; setManifold computes the highlight set
      const manifold = await this.client.fetchManifold(sliceId, this.state.manifold?.dims ?? 2);
      this.state.setManifold(manifold);
      this.toasts.show(
        `Deepen complete: +${done.delta['topics'] ?? 0} topics, +${done.delta['nodes'] ?? 0} nodes ` +
          `(${done.calls_used} oracle calls).`,
        'info',
      );
      return { ok: true, job: done };
    } catch (err) {
      this.toasts.show(`Deepen request failed: ${(err as Error).message}`, 'error');
      return { ok: false };
    } finally {
      this.state.setPendingJob(null);
    }
  }
}
