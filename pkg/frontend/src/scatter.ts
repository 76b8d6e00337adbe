/** Manifold scatter: pure scene computation plus an SVG renderer.
 *
 * One glyph per node; hover shows the phrase via <title>; highlighted nodes
 * (new since the last revision) carry a halo ring; an optional selected
 * region is drawn as a circle overlay. */

import { projectPoint, type CameraPose } from './camera.js';
import { makeColorScale, type LegendEntry } from './colors.js';
import type { ColorMode, Manifold, ManifoldNode } from './types.js';

export interface Glyph {
  id: number;
  x: number;
  y: number;
  radius: number;
  color: string;
  phrase: string;
  highlighted: boolean;
}

export interface Scene {
  glyphs: Glyph[];
  legend: LegendEntry[];
  width: number;
  height: number;
  empty: boolean;
}

export interface SceneOptions {
  width?: number;
  height?: number;
  colorBy?: ColorMode;
  camera?: CameraPose;
  highlighted?: Set<number>;
}

const MARGIN = 20;

export function buildScene(manifold: Manifold | null, options: SceneOptions = {}): Scene {
  const width = options.width ?? 800;
  const height = options.height ?? 600;
  const colorBy = options.colorBy ?? 'domain';
  const camera = options.camera ?? { yaw: 0.5, pitch: 0.35, zoom: 1.0 };
  const highlighted = options.highlighted ?? new Set<number>();
  const nodes = manifold?.nodes ?? [];
  if (nodes.length === 0) {
    return { glyphs: [], legend: [], width, height, empty: true };
  }

  const projected = nodes.map((n) => projectPoint(n.coords, camera));
  const xs = projected.map((p) => p.x);
  const ys = projected.map((p) => p.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const xSpan = xHi - xLo || 1;
  const ySpan = yHi - yLo || 1;

  const scale = makeColorScale(nodes, colorBy);
  const maxActivation = Math.max(...nodes.map((n) => n.activation ?? 0), 1e-9);

  const glyphs = nodes.map((node, i) => ({
    id: node.id,
    x: MARGIN + ((projected[i].x - xLo) / xSpan) * (width - 2 * MARGIN),
    y: MARGIN + ((projected[i].y - yLo) / ySpan) * (height - 2 * MARGIN),
    radius: glyphRadius(node, maxActivation),
    color: scale.colorOf(node),
    phrase: node.phrase,
    highlighted: highlighted.has(node.id),
  }));
  return { glyphs, legend: scale.legend(), width, height, empty: false };
}

function glyphRadius(node: ManifoldNode, maxActivation: number): number {
  const t = (node.activation ?? 0) / maxActivation;
  return 2 + 4 * Math.max(0, Math.min(1, t));
}

export interface RegionOverlay {
  center: number[];
  radius: number;
}

const SVG_NS = 'http://www.w3.org/2000/svg';

export function renderScatter(
  container: HTMLElement,
  scene: Scene,
  onNodeClick?: (id: number) => void,
  region?: RegionOverlay | null,
  manifold?: Manifold | null,
  camera?: CameraPose,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (scene.empty) {
    const message = doc.createElement('p');
    message.className = 'empty-state';
    message.textContent = 'This slice has no manifold yet: build or deepen it first.';
    container.appendChild(message);
    return;
  }
  const svg = doc.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${scene.width} ${scene.height}`);
  svg.setAttribute('class', 'manifold-scatter');

  for (const glyph of scene.glyphs) {
    if (glyph.highlighted) {
      const halo = doc.createElementNS(SVG_NS, 'circle');
      halo.setAttribute('class', 'halo');
      halo.setAttribute('cx', String(glyph.x));
      halo.setAttribute('cy', String(glyph.y));
      halo.setAttribute('r', String(glyph.radius + 3));
      halo.setAttribute('fill', 'none');
      halo.setAttribute('stroke', '#ff3366');
      halo.setAttribute('stroke-width', '2');
      svg.appendChild(halo);
    }
    const circle = doc.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('class', 'node-glyph');
    circle.setAttribute('data-node-id', String(glyph.id));
    circle.setAttribute('cx', String(glyph.x));
    circle.setAttribute('cy', String(glyph.y));
    circle.setAttribute('r', String(glyph.radius));
    circle.setAttribute('fill', glyph.color);
    const title = doc.createElementNS(SVG_NS, 'title');
    title.textContent = glyph.phrase;
    circle.appendChild(title);
    if (onNodeClick) {
      circle.addEventListener('click', () => onNodeClick(glyph.id));
    }
    svg.appendChild(circle);
  }

  if (region && manifold && !scene.empty) {
    const overlay = regionToScreen(region, scene, manifold, camera);
    if (overlay) {
      const circle = doc.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('class', 'region-overlay');
      circle.setAttribute('cx', String(overlay.x));
      circle.setAttribute('cy', String(overlay.y));
      circle.setAttribute('r', String(overlay.r));
      circle.setAttribute('fill', 'rgba(80,120,255,0.12)');
      circle.setAttribute('stroke', '#5078ff');
      svg.appendChild(circle);
    }
  }
  container.appendChild(svg);

  const legend = doc.createElement('ul');
  legend.className = 'legend';
  for (const entry of scene.legend) {
    const item = doc.createElement('li');
    item.className = 'legend-entry';
    const swatch = doc.createElement('span');
    swatch.className = 'swatch';
    swatch.setAttribute('style', `background:${entry.color}`);
    item.appendChild(swatch);
    item.appendChild(doc.createTextNode(` ${entry.label}`));
    legend.appendChild(item);
  }
  container.appendChild(legend);
}

/** Map a manifold-space region to screen space using the same normalization
 * as the glyphs (approximate for 3D poses: uses the projected bounds). */
function regionToScreen(
  region: RegionOverlay,
  scene: Scene,
  manifold: Manifold,
  camera?: CameraPose,
): { x: number; y: number; r: number } | null {
  const pose = camera ?? { yaw: 0.5, pitch: 0.35, zoom: 1.0 };
  const projected = manifold.nodes.map((n) => projectPoint(n.coords, pose));
  if (projected.length === 0) return null;
  const xs = projected.map((p) => p.x);
  const ys = projected.map((p) => p.y);
  const xLo = Math.min(...xs);
  const xSpan = Math.max(...xs) - xLo || 1;
  const yLo = Math.min(...ys);
  const ySpan = Math.max(...ys) - yLo || 1;
  const center = projectPoint(region.center, pose);
  const x = MARGIN + ((center.x - xLo) / xSpan) * (scene.width - 2 * MARGIN);
  const y = MARGIN + ((center.y - yLo) / ySpan) * (scene.height - 2 * MARGIN);
  const r = (region.radius * pose.zoom * (scene.width - 2 * MARGIN)) / xSpan;
  return { x, y, r };
}
