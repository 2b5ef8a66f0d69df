/**
 * Client-side Wavefront OBJ subset parser.
 *
 * Mirrors the server grammar exactly: only v/vt/f records are consumed,
 * polygons are fan-triangulated, indices are 1-based with negative values
 * relative to the records seen so far.  The displayed topology is
 * therefore identical to what the server validated.
 */

export interface ParsedMesh {
  /** xyz triples, flat */
  positions: Float32Array;
  /** uv pairs, flat; zero-filled when the file has no vt records */
  uvs: Float32Array;
  /** three corner indices per triangle, into deduplicated corners */
  indices: Uint32Array;
  triangleCount: number;
}

interface Corner {
  v: number;
  t: number;
}

function resolveIndex(raw: string, count: number, line: number, what: string): number {
  const idx = Number.parseInt(raw, 10);
  if (!Number.isFinite(idx) || Number.isNaN(idx)) {
    throw new Error(`line ${line}: malformed ${what} index '${raw}'`);
  }
  if (idx === 0) {
    throw new Error(`line ${line}: ${what} index 0 is not allowed`);
  }
  const resolved = idx < 0 ? count + idx : idx - 1;
  if (resolved < 0 || resolved >= count) {
    throw new Error(`line ${line}: ${what} index ${idx} out of range (have ${count})`);
  }
  return resolved;
}

export function parseObj(text: string): ParsedMesh {
  const vertices: number[][] = [];
  const uvs: number[][] = [];
  const faces: Corner[][] = [];

  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const lineNo = i + 1;
    const tokens = lines[i].trim().split(/\s+/);
    if (tokens.length === 0 || tokens[0] === "" || tokens[0].startsWith("#")) {
      continue;
    }
    const rec = tokens[0];
    if (rec === "v") {
      if (tokens.length < 4) throw new Error(`line ${lineNo}: vertex needs 3 coordinates`);
      const coords = tokens.slice(1, 4).map(Number);
      if (coords.some((c) => Number.isNaN(c))) {
        throw new Error(`line ${lineNo}: malformed vertex coordinate`);
      }
      vertices.push(coords);
    } else if (rec === "vt") {
      if (tokens.length < 3) throw new Error(`line ${lineNo}: uv needs 2 coordinates`);
      const coords = tokens.slice(1, 3).map(Number);
      if (coords.some((c) => Number.isNaN(c))) {
        throw new Error(`line ${lineNo}: malformed uv coordinate`);
      }
      uvs.push(coords);
    } else if (rec === "f") {
      if (tokens.length < 4) throw new Error(`line ${lineNo}: face needs 3+ corners`);
      const corners: Corner[] = [];
      for (const token of tokens.slice(1)) {
        const parts = token.split("/");
        const v = resolveIndex(parts[0], vertices.length, lineNo, "vertex");
        const t = parts.length > 1 && parts[1] !== ""
          ? resolveIndex(parts[1], uvs.length, lineNo, "uv")
          : -1;
        corners.push({ v, t });
      }
      // fan triangulation, same as the server
      for (let k = 1; k + 1 < corners.length; k++) {
        faces.push([corners[0], corners[k], corners[k + 1]]);
      }
    }
    // vn, mtllib, usemtl, o, g, s: skipped
  }

  // Deduplicate (vertex, uv) corners so positions and uvs share indices.
  const cornerIds = new Map<string, number>();
  const positions: number[] = [];
  const flatUvs: number[] = [];
  const indices: number[] = [];
  for (const face of faces) {
    for (const corner of face) {
      const key = `${corner.v}/${corner.t}`;
      let id = cornerIds.get(key);
      if (id === undefined) {
        id = cornerIds.size;
        cornerIds.set(key, id);
        const [x, y, z] = vertices[corner.v];
        positions.push(x, y, z);
        if (corner.t >= 0) {
          const [u, w] = uvs[corner.t];
          flatUvs.push(u, w);
        } else {
          flatUvs.push(0, 0);
        }
      }
      indices.push(id);
    }
  }

  return {
    positions: new Float32Array(positions),
    uvs: new Float32Array(flatUvs),
    indices: new Uint32Array(indices),
    triangleCount: faces.length,
  };
}
