/** Browser bootstrap: wires the slice picker, scatter, ego inspector, and
 * deepen form against a running slice service. */

import { AtlasClient } from './api.js';
import { DeepenController } from './deepen.js';
import { EgoInspector } from './ego.js';
import { buildScene, renderScatter } from './scatter.js';
import { ViewState } from './state.js';
import { ToastArea } from './toast.js';
import type { ColorMode } from './types.js';

function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export async function bootstrap(baseUrl: string): Promise<void> {
  const client = new AtlasClient(baseUrl);
  const state = new ViewState();
  const toasts = new ToastArea(must('toasts'));
  const scatterHost = must('scatter');
  const egoPanel = must('ego-panel');
  const inspector = new EgoInspector(client, egoPanel, toasts);
  const deepener = new DeepenController(client, state, toasts);

  const slicePicker = must<HTMLSelectElement>('slice-picker');
  const colorPicker = must<HTMLSelectElement>('color-picker');
  const budgetInput = must<HTMLInputElement>('budget');
  const radiusInput = must<HTMLInputElement>('radius');
  const deepenButton = must<HTMLButtonElement>('deepen-button');
  const formError = must('form-error');

  const redraw = () => {
    const scene = buildScene(state.manifold, {
      colorBy: state.colorBy,
      camera: state.camera,
      highlighted: state.highlighted,
    });
    renderScatter(
      scatterHost,
      scene,
      (nodeId) => {
        state.selectNode(nodeId);
        if (state.sliceId) void inspector.inspect(state.sliceId, nodeId, 2);
      },
      state.selectedRegion,
      state.manifold,
      state.camera,
    );
    deepenButton.disabled = deepener.busy;
  };
  state.onChange(redraw);

  const slices = await client.listSlices();
  for (const summary of slices) {
    const option = document.createElement('option');
    option.value = summary.slice_id;
    option.textContent = `${summary.slice_id} (rev ${summary.revision}${summary.corrupt ? ', CORRUPT' : ''})`;
    slicePicker.appendChild(option);
  }

  const loadSlice = async (sliceId: string) => {
    const manifold = await client.fetchManifold(sliceId);
    state.setManifold(manifold);
  };
  slicePicker.addEventListener('change', () => void loadSlice(slicePicker.value));
  colorPicker.addEventListener('change', () => state.setColorBy(colorPicker.value as ColorMode));

  scatterHost.addEventListener('dblclick', (event) => {
    // double-click selects a region centered on the nearest node
    const manifold = state.manifold;
    if (!manifold || manifold.nodes.length === 0) return;
    const target = event.target as Element;
    const nodeId = target.getAttribute?.('data-node-id');
    const anchor = nodeId
      ? manifold.nodes.find((n) => n.id === Number(nodeId))
      : manifold.nodes[0];
    if (anchor) state.selectRegion(anchor.coords, Number(radiusInput.value) || 1.0);
  });

  deepenButton.addEventListener('click', () => {
    formError.textContent = '';
    const budget = Number(budgetInput.value);
    const region = state.selectedRegion
      ? { center: state.selectedRegion.center, radius: state.selectedRegion.radius }
      : {};
    void deepener.submit(region, budget).then((result) => {
      if (!result.ok && result.validationError) {
        formError.textContent = result.validationError;
      }
    });
  });

  if (slices.length > 0) {
    slicePicker.value = slices[0].slice_id;
    await loadSlice(slices[0].slice_id);
  } else {
    scatterHost.textContent = 'No slices in the store yet.';
  }
}

declare global {
  interface Window {
    atlasBootstrap?: typeof bootstrap;
  }
}

if (typeof window !== 'undefined') {
  window.atlasBootstrap = bootstrap;
}
