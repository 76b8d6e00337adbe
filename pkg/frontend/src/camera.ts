/** Minimal orbit camera: yaw/pitch rotation and orthographic drop to 2D.
 * 2D manifolds pass through unchanged. */

export interface CameraPose {
  yaw: number;
  pitch: number;
  zoom: number;
}

export const DEFAULT_POSE: CameraPose = { yaw: 0.5, pitch: 0.35, zoom: 1.0 };

export function projectPoint(coords: number[], pose: CameraPose): { x: number; y: number; depth: number } {
  if (coords.length === 2) {
    return { x: coords[0] * pose.zoom, y: coords[1] * pose.zoom, depth: 0 };
  }
  const [x, y, z] = coords;
  const cy = Math.cos(pose.yaw);
  const sy = Math.sin(pose.yaw);
  const cp = Math.cos(pose.pitch);
  const sp = Math.sin(pose.pitch);
  // yaw about the vertical axis, then pitch about the horizontal axis
  const x1 = cy * x + sy * z;
  const z1 = -sy * x + cy * z;
  const y1 = cp * y - sp * z1;
  const z2 = sp * y + cp * z1;
  return { x: x1 * pose.zoom, y: y1 * pose.zoom, depth: z2 };
}
