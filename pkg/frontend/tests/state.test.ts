import { describe, expect, it } from 'vitest';

import { ViewState } from '../src/state.js';
import { makeManifold } from './helpers.js';

describe('ViewState revision safety', () => {
  it('clears region and node selections when the revision changes', () => {
    const state = new ViewState();
    state.setManifold(makeManifold(10, 1));
    state.selectRegion([0, 0], 1.0);
    state.selectNode(3);
    expect(state.selectedRegion).not.toBeNull();

    state.setManifold(makeManifold(12, 2));
    expect(state.selectedRegion).toBeNull();
    expect(state.selectedNode).toBeNull();
  });

  it('keeps selections while the revision is unchanged', () => {
    const state = new ViewState();
    state.setManifold(makeManifold(10, 1));
    state.selectNode(2);
    state.setManifold(makeManifold(10, 1));
    expect(state.selectedNode?.nodeId).toBe(2);
  });

  it('computes the highlight set as nodes new to the revision', () => {
    const state = new ViewState();
    state.setManifold(makeManifold(10, 1));
    expect(state.highlighted.size).toBe(0);
    state.setManifold(makeManifold(14, 2));
    expect([...state.highlighted].sort((a, b) => a - b)).toEqual([10, 11, 12, 13]);
  });

  it('notifies listeners on every mutation', () => {
    const state = new ViewState();
    let calls = 0;
    state.onChange(() => calls++);
    state.setManifold(makeManifold(3, 1));
    state.setColorBy('degree');
    state.selectNode(1);
    state.setPendingJob('abc');
    expect(calls).toBe(4);
  });
});
