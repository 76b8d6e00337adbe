/** Color scales for the four node-coloring modes, plus legend entries. */

import type { ColorMode, ManifoldNode } from './types.js';

const CATEGORICAL = [
  '#4e79a7',
  '#f28e2b',
  '#e15759',
  '#76b7b2',
  '#59a14f',
  '#edc948',
  '#b07aa1',
  '#ff9da7',
  '#9c755f',
  '#bab0ac',
];

export interface LegendEntry {
  label: string;
  color: string;
}

function hashString(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

export function domainColor(domain: string, domains: string[]): string {
  const index = domains.indexOf(domain);
  if (index >= 0) return CATEGORICAL[index % CATEGORICAL.length];
  return CATEGORICAL[hashString(domain) % CATEGORICAL.length];
}

/** Dark blue -> yellow ramp for normalized values in [0, 1]. */
export function rampColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const r = Math.round(40 + 215 * clamped);
  const g = Math.round(40 + 180 * clamped);
  const b = Math.round(120 - 80 * clamped);
  return `rgb(${r},${g},${b})`;
}

function numericValue(node: ManifoldNode, mode: ColorMode): number {
  if (mode === 'degree') return node.degree;
  if (mode === 'depth') return node.depth ?? 0;
  return node.activation ?? 0;
}

export interface ColorScale {
  colorOf(node: ManifoldNode): string;
  legend(): LegendEntry[];
}

export function makeColorScale(nodes: ManifoldNode[], mode: ColorMode): ColorScale {
  if (mode === 'domain') {
    const domains = [...new Set(nodes.map((n) => n.domain))].sort();
    return {
      colorOf: (node) => domainColor(node.domain, domains),
      legend: () => domains.map((d) => ({ label: d || '(none)', color: domainColor(d, domains) })),
    };
  }
  const values = nodes.map((n) => numericValue(n, mode));
  const lo = values.length ? Math.min(...values) : 0;
  const hi = values.length ? Math.max(...values) : 1;
  const span = hi - lo || 1;
  return {
    colorOf: (node) => rampColor((numericValue(node, mode) - lo) / span),
    legend: () => [
      { label: `${mode} ${lo.toFixed(2)}`, color: rampColor(0) },
      { label: `${mode} ${((lo + hi) / 2).toFixed(2)}`, color: rampColor(0.5) },
      { label: `${mode} ${hi.toFixed(2)}`, color: rampColor(1) },
    ],
  };
}
