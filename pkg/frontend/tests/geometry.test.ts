import { describe, expect, it } from "vitest";

import { boundingSphere, framingDistance, vertexNormals } from "../src/geometry.js";
import { parseObj } from "../src/objparse.js";

const TRIANGLE = parseObj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");

describe("vertex normals", () => {
  it("a flat triangle gets its face normal everywhere", () => {
    const normals = vertexNormals(TRIANGLE);
    for (let i = 0; i < normals.length; i += 3) {
      expect(normals[i]).toBeCloseTo(0, 6);
      expect(normals[i + 1]).toBeCloseTo(0, 6);
      expect(normals[i + 2]).toBeCloseTo(1, 6);
    }
  });

  it("normals are unit length", () => {
    const cube = parseObj(
      [
        "v -1 -1 -1", "v 1 -1 -1", "v 1 1 -1", "v -1 1 -1",
        "v -1 -1 1", "v 1 -1 1", "v 1 1 1", "v -1 1 1",
        "f 1 4 3 2", "f 5 6 7 8", "f 1 2 6 5",
        "f 3 4 8 7", "f 2 3 7 6", "f 4 1 5 8",
      ].join("\n"),
    );
    const normals = vertexNormals(cube);
    for (let i = 0; i < normals.length; i += 3) {
      const len = Math.hypot(normals[i], normals[i + 1], normals[i + 2]);
      expect(len).toBeCloseTo(1, 6);
    }
  });
});

describe("framing", () => {
  it("bounding sphere encloses all vertices", () => {
    const sphere = boundingSphere(TRIANGLE.positions);
    expect(sphere.center[0]).toBeCloseTo(0.5, 10);
    expect(sphere.center[1]).toBeCloseTo(0.5, 10);
    expect(sphere.radius).toBeGreaterThanOrEqual(Math.SQRT1_2 - 1e-9);
  });

  it("framing distance scales with radius and fov", () => {
    const sphere = { center: [0, 0, 0] as [number, number, number], radius: 2 };
    const narrow = framingDistance(sphere, Math.PI / 8);
    const wide = framingDistance(sphere, Math.PI / 2);
    expect(narrow).toBeGreaterThan(wide);
    expect(framingDistance({ ...sphere, radius: 4 }, Math.PI / 8)).toBeCloseTo(
      2 * narrow, 10,
    );
  });
});
