import type { Manifold, ManifoldNode } from '../src/types.js';

export function makeNode(id: number, overrides: Partial<ManifoldNode> = {}): ManifoldNode {
  return {
    id,
    phrase: `phrase ${id}`,
    coords: [Math.cos(id), Math.sin(id)],
    degree: 1 + (id % 5),
    domain: id % 2 === 0 ? 'econ' : 'bio',
    depth: id % 3,
    activation: (id % 7) / 7,
    ...overrides,
  };
}

export function makeManifold(count: number, revision = 1): Manifold {
  return {
    slice_id: 'fixture',
    revision,
    dims: 2,
    nodes: Array.from({ length: count }, (_, i) => makeNode(i)),
  };
}

/** Minimal Response-compatible stub for the injectable fetch. */
export function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => body,
  } as unknown as Response;
}
