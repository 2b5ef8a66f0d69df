"""Procedural meshes used by tests, benchmarks and the demo assets.

All generators return closed, watertight meshes with one uv per vertex
(spherical or face-agnostic mapping); corner uv index == vertex index.
"""

from __future__ import annotations

import math

from .objio import Face, Mesh


def _spherical_uv(x: float, y: float, z: float) -> tuple[float, float]:
    r = math.sqrt(x * x + y * y + z * z) or 1.0
    u = 0.5 + math.atan2(z, x) / (2.0 * math.pi)
    v = 0.5 - math.asin(max(-1.0, min(1.0, y / r))) / math.pi
    return (u, v)


def _with_vertex_uvs(vertices, faces, name: str) -> Mesh:
    uvs = [_spherical_uv(*p) for p in vertices]
    tri_faces: list[Face] = [((a, a), (b, b), (c, c)) for a, b, c in faces]
    return Mesh(vertices=list(vertices), uvs=uvs, faces=tri_faces, name=name)


def tetrahedron(scale: float = 1.0) -> Mesh:
    s = scale
    vertices = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return _with_vertex_uvs(vertices, faces, "tetrahedron")


def cube(scale: float = 1.0) -> Mesh:
    s = scale
    vertices = [
        (-s, -s, -s), (s, -s, -s), (s, s, -s), (-s, s, -s),
        (-s, -s, s), (s, -s, s), (s, s, s), (-s, s, s),
    ]
    quads = [
        (0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
        (2, 3, 7, 6), (1, 2, 6, 5), (3, 0, 4, 7),
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return _with_vertex_uvs(vertices, faces, "cube")


def icosphere(subdivisions: int = 0, radius: float = 1.0) -> Mesh:
    """Icosahedron subdivided ``subdivisions`` times: 20 * 4**s triangles."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    raw = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]

    def normalized(p):
        n = math.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
        k = radius / n
        return (p[0] * k, p[1] * k, p[2] * k)

    vertices = [normalized(p) for p in raw]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]

    midpoint_cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        cached = midpoint_cache.get(key)
        if cached is not None:
            return cached
        pa, pb = vertices[a], vertices[b]
        m = normalized(((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2, (pa[2] + pb[2]) / 2))
        vertices.append(m)
        idx = len(vertices) - 1
        midpoint_cache[key] = idx
        return idx

    for _ in range(subdivisions):
        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces

    return _with_vertex_uvs(vertices, faces, f"icosphere{subdivisions}")


def uv_sphere(stacks: int, segments: int, radius: float = 1.0) -> Mesh:
    """Latitude/longitude sphere with 2 * segments * (stacks - 1) triangles."""
    if stacks < 2 or segments < 3:
        raise ValueError("need stacks >= 2 and segments >= 3")
    vertices = [(0.0, radius, 0.0)]
    for i in range(1, stacks):
        phi = math.pi * i / stacks
        y = radius * math.cos(phi)
        ring = radius * math.sin(phi)
        for j in range(segments):
            theta = 2.0 * math.pi * j / segments
            vertices.append((ring * math.cos(theta), y, ring * math.sin(theta)))
    vertices.append((0.0, -radius, 0.0))
    bottom = len(vertices) - 1

    def ring_index(i: int, j: int) -> int:
        return 1 + (i - 1) * segments + (j % segments)

    faces = []
    for j in range(segments):
        faces.append((0, ring_index(1, j + 1), ring_index(1, j)))
    for i in range(1, stacks - 1):
        for j in range(segments):
            a, b = ring_index(i, j), ring_index(i, j + 1)
            c, d = ring_index(i + 1, j), ring_index(i + 1, j + 1)
            faces.append((a, b, d))
            faces.append((a, d, c))
    for j in range(segments):
        faces.append((bottom, ring_index(stacks - 1, j), ring_index(stacks - 1, j + 1)))

    return _with_vertex_uvs(vertices, faces, f"uvsphere{stacks}x{segments}")
