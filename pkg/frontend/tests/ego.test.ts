import { describe, expect, it } from 'vitest';

import { AtlasClient } from '../src/api.js';
import { EgoInspector, renderEgoPanel } from '../src/ego.js';
import { ToastArea } from '../src/toast.js';
import type { EgoResponse } from '../src/types.js';
import { jsonResponse } from './helpers.js';

const FIXTURE: EgoResponse = {
  slice_id: 'econ',
  center: 0,
  hops: 2,
  nodes: [
    { id: 0, phrase: 'long-term partnerships', degree: 3, domain: 'econ', activation: 0.9 },
    { id: 1, phrase: 'engagement rates', degree: 1, domain: 'econ', activation: 0.2 },
    { id: 2, phrase: 'brand loyalty', degree: 1, domain: 'econ', activation: 0.4 },
    { id: 3, phrase: 'campaign fatigue', degree: 1, domain: 'econ', activation: 0.1 },
  ],
  edges: [
    { source: 0, target: 1, relation: 'leads_to', domain: 'econ', multiplicity: 2 },
    { source: 0, target: 2, relation: 'causes', domain: 'econ', multiplicity: 1 },
    { source: 3, target: 0, relation: 'reduces', domain: 'econ', multiplicity: 1 },
  ],
};

describe('renderEgoPanel', () => {
  it('shows the focus node with its causes and effects', () => {
    const panel = document.createElement('div');
    renderEgoPanel(panel, FIXTURE);
    expect(panel.querySelector('.ego-focus')?.textContent).toBe('long-term partnerships');
    const text = panel.textContent ?? '';
    expect(text).toContain('engagement rates');
    expect(text).toContain('campaign fatigue');
    expect(panel.querySelectorAll('line.ego-edge')).toHaveLength(3);
  });

  it('labels edges with their relation types', () => {
    const panel = document.createElement('div');
    renderEgoPanel(panel, FIXTURE);
    const relations = Array.from(panel.querySelectorAll('line.ego-edge')).map((l) =>
      l.getAttribute('data-relation'),
    );
    expect(relations.sort()).toEqual(['causes', 'leads_to', 'reduces']);
    expect(panel.textContent).toContain('leads_to (x2)');
  });

  it('node size tracks activation', () => {
    const panel = document.createElement('div');
    renderEgoPanel(panel, FIXTURE);
    const radiusOf = (id: number) =>
      Number(panel.querySelector(`circle[data-node-id="${id}"]`)?.getAttribute('r'));
    expect(radiusOf(0)).toBeGreaterThan(radiusOf(3));
  });

  it('isolated node renders a single-node panel', () => {
    const panel = document.createElement('div');
    renderEgoPanel(panel, {
      slice_id: 's',
      center: 5,
      hops: 2,
      nodes: [{ id: 5, phrase: 'lonely concept', degree: 0, domain: 'd', activation: 0 }],
      edges: [],
    });
    expect(panel.querySelectorAll('circle')).toHaveLength(1);
    expect(panel.querySelector('.ego-isolated')?.textContent).toContain('Isolated node');
  });
});

describe('EgoInspector', () => {
  it('API 404 produces an error toast and no crash', async () => {
    const client = new AtlasClient('http://test', async () =>
      jsonResponse(404, { detail: 'unknown node 999' }),
    );
    const panel = document.createElement('div');
    panel.innerHTML = '<p>previous content</p>';
    const toastHost = document.createElement('div');
    const toasts = new ToastArea(toastHost);
    const inspector = new EgoInspector(client, panel, toasts);
    await inspector.inspect('econ', 999);
    expect(toasts.messages().some((m) => m.includes('unknown node 999'))).toBe(true);
    expect(panel.textContent).toContain('previous content');
  });

  it('renders the panel on success', async () => {
    const client = new AtlasClient('http://test', async () => jsonResponse(200, FIXTURE));
    const panel = document.createElement('div');
    const inspector = new EgoInspector(client, panel, new ToastArea(document.createElement('div')));
    await inspector.inspect('econ', 0);
    expect(panel.querySelector('.ego-focus')).not.toBeNull();
  });
});
