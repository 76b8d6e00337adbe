import { describe, expect, it } from 'vitest';

import { AtlasClient } from '../src/api.js';
import { DeepenController } from '../src/deepen.js';
import { ViewState } from '../src/state.js';
import { ToastArea } from '../src/toast.js';
import { jsonResponse, makeManifold } from './helpers.js';

function loadedState(): ViewState {
  const state = new ViewState();
  state.setManifold(makeManifold(10, 1));
  return state;
}

describe('DeepenController validation', () => {
  it('budget 0 is rejected inline before any request', async () => {
    let requests = 0;
    const client = new AtlasClient('http://test', async () => {
      requests++;
      return jsonResponse(500, {});
    });
    const controller = new DeepenController(client, loadedState(), new ToastArea(document.createElement('div')));
    const result = await controller.submit({ center: [0, 0], radius: 1 }, 0);
    expect(result.ok).toBe(false);
    expect(result.validationError).toContain('Budget');
    expect(requests).toBe(0);
  });

  it('missing region is rejected inline', async () => {
    const client = new AtlasClient('http://test', async () => jsonResponse(500, {}));
    const controller = new DeepenController(client, loadedState(), new ToastArea(document.createElement('div')));
    const result = await controller.submit({}, 5);
    expect(result.ok).toBe(false);
    expect(result.validationError).toContain('region');
  });

  it('second submission is disabled while a job is pending', async () => {
    const state = loadedState();
    const client = new AtlasClient('http://test', async () => jsonResponse(500, {}));
    const controller = new DeepenController(client, state, new ToastArea(document.createElement('div')));
    state.setPendingJob('running-job');
    expect(controller.busy).toBe(true);
    const result = await controller.submit({ center: [0, 0], radius: 1 }, 5);
    expect(result.ok).toBe(false);
    expect(result.validationError).toContain('already running');
  });
});

describe('DeepenController full flow (mock service)', () => {
  it('submits, polls to done, reloads the revision, and highlights new nodes', async () => {
    const state = loadedState();
    let polls = 0;
    const client = new AtlasClient('http://test', async (url, init) => {
      if (url.endsWith('/deepen') && init?.method === 'POST') {
        const payload = JSON.parse(String(init.body));
        expect(payload.budget).toBe(20);
        return jsonResponse(202, { job_id: 'j1', slice_id: 'fixture', state: 'queued' });
      }
      if (url.includes('/jobs/j1')) {
        polls++;
        const running = polls < 3;
        return jsonResponse(200, {
          job_id: 'j1',
          slice_id: 'fixture',
          state: running ? 'running' : 'done',
          waves_completed: running ? 0 : 1,
          calls_used: running ? 3 : 20,
          delta: { topics: 2, nodes: 4, triples: 6 },
          new_revision: 2,
          error: null,
        });
      }
      if (url.includes('/manifold')) {
        const manifold = makeManifold(14, 2);
        return jsonResponse(200, {
          slice_id: 'fixture',
          revision: 2,
          dims: 2,
          total: manifold.nodes.length,
          nodes: manifold.nodes,
          next_cursor: null,
        });
      }
      return jsonResponse(404, { detail: `unexpected ${url}` });
    });
    const toasts = new ToastArea(document.createElement('div'));
    const controller = new DeepenController(client, state, toasts, 1);
    const result = await controller.submit({ center: [0, 0], radius: 1 }, 20, 1, async () => {});
    expect(result.ok).toBe(true);
    expect(result.job?.state).toBe('done');
    expect(state.revision).toBe(2);
    expect(state.highlighted.size).toBe(4);
    expect(state.pendingJobId).toBeNull();
    expect(toasts.messages().some((m) => m.includes('Deepen complete'))).toBe(true);
  });

  it('failed job surfaces a toast and leaves the manifold untouched', async () => {
    const state = loadedState();
    const client = new AtlasClient('http://test', async (url, init) => {
      if (url.endsWith('/deepen') && init?.method === 'POST') {
        return jsonResponse(202, { job_id: 'j2', slice_id: 'fixture', state: 'queued' });
      }
      return jsonResponse(200, {
        job_id: 'j2',
        slice_id: 'fixture',
        state: 'failed',
        waves_completed: 0,
        calls_used: 0,
        delta: {},
        new_revision: null,
        error: 'synthetic failure',
      });
    });
    const toasts = new ToastArea(document.createElement('div'));
    const controller = new DeepenController(client, state, toasts, 1);
    const result = await controller.submit({ center: [0, 0], radius: 1 }, 5, 1, async () => {});
    expect(result.ok).toBe(false);
    expect(state.revision).toBe(1);
    expect(toasts.messages().some((m) => m.includes('synthetic failure'))).toBe(true);
  });
});
