/** View state for the console.
 *
 * Region and node selections are tagged with the slice revision they were
 * made against; applying a manifold from a newer revision clears them, so
 * the UI never mixes elements from two revisions in one frame. */

import { DEFAULT_POSE, type CameraPose } from './camera.js';
import type { ColorMode, Manifold } from './types.js';

export interface RegionSelection {
  center: number[];
  radius: number;
  revision: number;
}

export interface NodeSelection {
  nodeId: number;
  revision: number;
}

export class ViewState {
  sliceId: string | null = null;
  manifold: Manifold | null = null;
  camera: CameraPose = { ...DEFAULT_POSE };
  colorBy: ColorMode = 'domain';
  selectedNode: NodeSelection | null = null;
  selectedRegion: RegionSelection | null = null;
  pendingJobId: string | null = null;
  /** Nodes added by the most recent deepen, shown with a halo for one wave. */
  highlighted: Set<number> = new Set();

  private listeners: Array<() => void> = [];

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get revision(): number {
    return this.manifold?.revision ?? 0;
  }

  setManifold(manifold: Manifold): void {
    const previous = this.manifold;
    this.sliceId = manifold.slice_id;
    this.manifold = manifold;
    if (previous && previous.revision !== manifold.revision) {
      // stale selections are only valid while their revision is current
      if (this.selectedRegion && this.selectedRegion.revision !== manifold.revision) {
        this.selectedRegion = null;
      }
      if (this.selectedNode && this.selectedNode.revision !== manifold.revision) {
        this.selectedNode = null;
      }
      const previousIds = new Set(previous.nodes.map((n) => n.id));
      this.highlighted = new Set(
        manifold.nodes.filter((n) => !previousIds.has(n.id)).map((n) => n.id),
      );
    } else if (!previous) {
      this.highlighted = new Set();
    }
    this.emit();
  }

  selectRegion(center: number[], radius: number): void {
    this.selectedRegion = { center, radius, revision: this.revision };
    this.emit();
  }

  selectNode(nodeId: number): void {
    this.selectedNode = { nodeId, revision: this.revision };
    this.emit();
  }

  clearHighlights(): void {
    this.highlighted = new Set();
    this.emit();
  }

  setColorBy(mode: ColorMode): void {
    this.colorBy = mode;
    this.emit();
  }

  setPendingJob(jobId: string | null): void {
    this.pendingJobId = jobId;
    this.emit();
  }
}
