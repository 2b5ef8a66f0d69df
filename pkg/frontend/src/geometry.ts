/** Small vector helpers: normals, bounding boxes, camera framing. */

import type { ParsedMesh } from "./objparse.js";

export type Vec3 = [number, number, number];

export function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]);
  if (n === 0) return [0, 0, 0];
  return [v[0] / n, v[1] / n, v[2] / n];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/** Area-weighted per-vertex normals (smooth shading for the Lambert mode). */
export function vertexNormals(mesh: ParsedMesh): Float32Array {
  const normals = new Float32Array(mesh.positions.length);
  const idx = mesh.indices;
  const pos = mesh.positions;
  for (let f = 0; f < idx.length; f += 3) {
    const [a, b, c] = [idx[f] * 3, idx[f + 1] * 3, idx[f + 2] * 3];
    const u: Vec3 = [pos[b] - pos[a], pos[b + 1] - pos[a + 1], pos[b + 2] - pos[a + 2]];
    const v: Vec3 = [pos[c] - pos[a], pos[c + 1] - pos[a + 1], pos[c + 2] - pos[a + 2]];
    const n = cross(u, v); // length ~ 2x area: bigger faces weigh more
    for (const base of [a, b, c]) {
      normals[base] += n[0];
      normals[base + 1] += n[1];
      normals[base + 2] += n[2];
    }
  }
  for (let i = 0; i < normals.length; i += 3) {
    const n = normalize([normals[i], normals[i + 1], normals[i + 2]]);
    normals[i] = n[0];
    normals[i + 1] = n[1];
    normals[i + 2] = n[2];
  }
  return normals;
}

export interface BoundingSphere {
  center: Vec3;
  radius: number;
}

export function boundingSphere(positions: Float32Array): BoundingSphere {
  if (positions.length === 0) {
    return { center: [0, 0, 0], radius: 1 };
  }
  const lo: Vec3 = [Infinity, Infinity, Infinity];
  const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < positions.length; i += 3) {
    for (let k = 0; k < 3; k++) {
      lo[k] = Math.min(lo[k], positions[i + k]);
      hi[k] = Math.max(hi[k], positions[i + k]);
    }
  }
  const center: Vec3 = [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2];
  let radius = 0;
  for (let i = 0; i < positions.length; i += 3) {
    const d = Math.hypot(
      positions[i] - center[0],
      positions[i + 1] - center[1],
      positions[i + 2] - center[2],
    );
    radius = Math.max(radius, d);
  }
  return { center, radius: radius || 1 };
}

/**
 * Fixed camera start distance framing the bounding sphere: the whole
 * object fits with some margin at the given vertical field of view.
 * Both viewports use this same framing; only the mesh differs.
 */
export function framingDistance(sphere: BoundingSphere, fovYRadians: number, margin = 1.25): number {
  return (sphere.radius * margin) / Math.tan(fovYRadians / 2);
}
