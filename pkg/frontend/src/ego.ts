/** Ego-graph inspector panel: typed directed edges around a focus node,
 * node size mapped to refinement activation. */

import { ApiError, type AtlasClient } from './api.js';
import type { ToastArea } from './toast.js';
import type { EgoResponse } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export function renderEgoPanel(container: HTMLElement, ego: EgoResponse): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const heading = doc.createElement('h3');
  const focus = ego.nodes.find((n) => n.id === ego.center);
  heading.textContent = focus ? focus.phrase : `node ${ego.center}`;
  heading.className = 'ego-focus';
  container.appendChild(heading);

  if (ego.edges.length === 0) {
    const note = doc.createElement('p');
    note.className = 'ego-isolated';
    note.textContent = 'Isolated node: no causal edges within this neighborhood.';
    container.appendChild(note);
  }

  const maxActivation = Math.max(...ego.nodes.map((n) => n.activation ?? 0), 1e-9);
  const layout = circularLayout(ego);
  const svg = doc.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', '0 0 400 300');
  svg.setAttribute('class', 'ego-graph');

  const defs = doc.createElementNS(SVG_NS, 'defs');
  const marker = doc.createElementNS(SVG_NS, 'marker');
  marker.setAttribute('id', 'arrow');
  marker.setAttribute('orient', 'auto');
  marker.setAttribute('markerWidth', '8');
  marker.setAttribute('markerHeight', '8');
  marker.setAttribute('refX', '7');
  marker.setAttribute('refY', '3');
  const arrow = doc.createElementNS(SVG_NS, 'path');
  arrow.setAttribute('d', 'M0,0 L7,3 L0,6 Z');
  arrow.setAttribute('fill', '#b03030');
  marker.appendChild(arrow);
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of ego.edges) {
    const from = layout.get(edge.source);
    const to = layout.get(edge.target);
    if (!from || !to) continue;
    const line = doc.createElementNS(SVG_NS, 'line');
    line.setAttribute('class', 'ego-edge');
    line.setAttribute('data-relation', edge.relation);
    line.setAttribute('x1', String(from.x));
    line.setAttribute('y1', String(from.y));
    line.setAttribute('x2', String(to.x));
    line.setAttribute('y2', String(to.y));
    line.setAttribute('stroke', '#b03030');
    line.setAttribute('marker-end', 'url(#arrow)');
    svg.appendChild(line);
    const label = doc.createElementNS(SVG_NS, 'text');
    label.setAttribute('class', 'relation-label');
    label.setAttribute('x', String((from.x + to.x) / 2));
    label.setAttribute('y', String((from.y + to.y) / 2 - 3));
    label.textContent = edge.multiplicity > 1 ? `${edge.relation} (x${edge.multiplicity})` : edge.relation;
    svg.appendChild(label);
  }

  for (const node of ego.nodes) {
    const at = layout.get(node.id);
    if (!at) continue;
    const circle = doc.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('class', node.id === ego.center ? 'ego-node ego-center' : 'ego-node');
    circle.setAttribute('data-node-id', String(node.id));
    circle.setAttribute('cx', String(at.x));
    circle.setAttribute('cy', String(at.y));
    const size = 5 + 8 * ((node.activation ?? 0) / maxActivation);
    circle.setAttribute('r', String(size));
    circle.setAttribute('fill', node.id === ego.center ? '#2b5fad' : '#7da7d9');
    const title = doc.createElementNS(SVG_NS, 'title');
    title.textContent = node.phrase;
    circle.appendChild(title);
    svg.appendChild(circle);
  }
  container.appendChild(svg);

  const list = doc.createElement('ul');
  list.className = 'ego-edge-list';
  const phraseOf = new Map(ego.nodes.map((n) => [n.id, n.phrase]));
  for (const edge of ego.edges) {
    const item = doc.createElement('li');
    item.textContent = `${phraseOf.get(edge.source)} → [${edge.relation}] → ${phraseOf.get(edge.target)}`;
    list.appendChild(item);
  }
  container.appendChild(list);
}

function circularLayout(ego: EgoResponse): Map<number, { x: number; y: number }> {
  const layout = new Map<number, { x: number; y: number }>();
  layout.set(ego.center, { x: 200, y: 150 });
  const others = ego.nodes.filter((n) => n.id !== ego.center);
  others.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(others.length, 1);
    layout.set(node.id, { x: 200 + 120 * Math.cos(angle), y: 150 + 100 * Math.sin(angle) });
  });
  return layout;
}

export class EgoInspector {
  constructor(
    private readonly client: AtlasClient,
    private readonly panel: HTMLElement,
    private readonly toasts: ToastArea,
  ) {}

  async inspect(sliceId: string, nodeId: number, hops = 2): Promise<void> {
    try {
      const ego = await this.client.ego(sliceId, nodeId, hops);
      renderEgoPanel(this.panel, ego);
    } catch (err) {
      if (err instanceof ApiError) {
        this.toasts.show(`Could not load neighborhood: ${err.detail}`, 'error');
        return; // panel keeps its previous contents; no crash
      }
      throw err;
    }
  }
}
