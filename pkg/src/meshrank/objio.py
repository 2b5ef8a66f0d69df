"""Wavefront OBJ triangle meshes with UV coordinates.

Only ``v``, ``vt`` and ``f`` records are consumed; materials, normals,
groups and comments are skipped.  Shading is an experiment condition
applied at render time, never baked into the asset, so MTL data is
irrelevant here.  Texture images are referenced by path elsewhere and
never decoded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import ObjParseError

# A face corner is (vertex index, uv index); uv index is -1 only when the
# mesh has no uv coordinates at all.
Corner = tuple[int, int]
Face = tuple[Corner, Corner, Corner]

NO_UV = -1


@dataclass
class Mesh:
    """Indexed triangle mesh with per-corner UV references."""

    vertices: list[tuple[float, float, float]] = field(default_factory=list)
    uvs: list[tuple[float, float]] = field(default_factory=list)
    faces: list[Face] = field(default_factory=list)
    name: str = ""

    @property
    def triangle_count(self) -> int:
        return len(self.faces)

    def copy(self) -> "Mesh":
        return Mesh(list(self.vertices), list(self.uvs), list(self.faces), self.name)


@dataclass
class ValidationReport:
    triangle_count: int
    degenerate_faces: int
    out_of_range_indices: int
    connected_components: int
    is_watertight: bool
    bounding_box: tuple[tuple[float, float, float], tuple[float, float, float]] | None

    @property
    def passed(self) -> bool:
        return self.degenerate_faces == 0 and self.out_of_range_indices == 0


def _parse_float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ObjParseError(f"malformed numeric literal {token!r}", line_no) from None


def _resolve_index(raw: str, count: int, line_no: int, what: str) -> int:
    try:
        idx = int(raw)
    except ValueError:
        raise ObjParseError(f"malformed {what} index {raw!r}", line_no) from None
    if idx == 0:
        raise ObjParseError(f"{what} index 0 is not allowed (OBJ indices are 1-based)", line_no)
    # Negative indices are relative to the records seen so far.
    resolved = count + idx if idx < 0 else idx - 1
    if not 0 <= resolved < count:
        raise ObjParseError(f"{what} index {idx} out of range (have {count})", line_no)
    return resolved


def parse_obj(source: IO[bytes] | IO[str] | bytes | str, name: str = "") -> Mesh:
    """Parse OBJ text into a Mesh.

    Polygons with more than three corners are fan-triangulated.  Corners
    written without a ``vt`` reference get uv index 0 when the file carries
    uv records, and -1 otherwise.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data

    mesh = Mesh(name=name)
    pending_faces: list[list[tuple[int, int, bool]]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        rec = tokens[0]
        if rec == "v":
            if len(tokens) < 4:
                raise ObjParseError("vertex record needs 3 coordinates", line_no)
            x, y, z = (_parse_float(t, line_no) for t in tokens[1:4])
            mesh.vertices.append((x, y, z))
        elif rec == "vt":
            if len(tokens) < 3:
                raise ObjParseError("uv record needs 2 coordinates", line_no)
            u, v = (_parse_float(t, line_no) for t in tokens[1:3])
            mesh.uvs.append((u, v))
        elif rec == "f":
            if len(tokens) < 4:
                raise ObjParseError("face record needs at least 3 corners", line_no)
            corners = []
            for token in tokens[1:]:
                parts = token.split("/")
                v_idx = _resolve_index(parts[0], len(mesh.vertices), line_no, "vertex")
                if len(parts) > 1 and parts[1]:
                    t_idx = _resolve_index(parts[1], len(mesh.uvs), line_no, "uv")
                    corners.append((v_idx, t_idx, True))
                else:
                    corners.append((v_idx, 0, False))
            pending_faces.append(corners)
        # vn, vp, mtllib, usemtl, o, g, s, l: not consumed.

    has_uvs = bool(mesh.uvs)
    default_uv = 0 if has_uvs else NO_UV
    for corners in pending_faces:
        fixed = [(v, t if explicit else default_uv) for v, t, explicit in corners]
        # Fan triangulation: k-gon -> k-2 triangles around corner 0.
        for i in range(1, len(fixed) - 1):
            mesh.faces.append((fixed[0], fixed[i], fixed[i + 1]))
    return mesh


def write_obj(mesh: Mesh) -> bytes:
    """Serialize a valid Mesh as OBJ text.

    Coordinates are written with ``repr`` (shortest round-trip form), so
    ``parse_obj(write_obj(m))`` reproduces every coordinate exactly.
    Output is deterministic: equal meshes yield byte-identical files.
    """
    out: list[str] = []
    if mesh.name:
        out.append(f"o {mesh.name}")
    for x, y, z in mesh.vertices:
        out.append(f"v {x!r} {y!r} {z!r}")
    for u, v in mesh.uvs:
        out.append(f"vt {u!r} {v!r}")
    with_uv = bool(mesh.uvs)
    for face in mesh.faces:
        if with_uv:
            out.append("f " + " ".join(f"{v + 1}/{t + 1}" for v, t in face))
        else:
            out.append("f " + " ".join(str(v + 1) for v, _ in face))
    return ("\n".join(out) + "\n").encode("utf-8")


def _union_find_components(n: int, edges: Iterable[tuple[int, int]], active: set[int]) -> int:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in active})


def validate(mesh: Mesh) -> ValidationReport:
    """Report structural problems without mutating or raising.

    Watertight means every undirected edge of a well-formed face is shared
    by exactly two faces.  Components are counted over vertices referenced
    by at least one face; unreferenced vertices are ignored.
    """
    n_vertices = len(mesh.vertices)
    n_uvs = len(mesh.uvs)

    degenerate = 0
    out_of_range = 0
    edge_count: dict[tuple[int, int], int] = {}
    links: list[tuple[int, int]] = []
    referenced: set[int] = set()

    for face in mesh.faces:
        v_ids = [v for v, _ in face]
        ok = True
        for v, t in face:
            if not 0 <= v < n_vertices:
                out_of_range += 1
                ok = False
            if n_uvs > 0:
                if not 0 <= t < n_uvs:
                    out_of_range += 1
                    ok = False
            elif t != NO_UV:
                out_of_range += 1
                ok = False
        if len(set(v_ids)) != 3:
            degenerate += 1
            ok = False
        if not ok:
            continue
        referenced.update(v_ids)
        for i in range(3):
            a, b = v_ids[i], v_ids[(i + 1) % 3]
            key = (a, b) if a < b else (b, a)
            edge_count[key] = edge_count.get(key, 0) + 1
            links.append(key)

    watertight = bool(edge_count) and all(c == 2 for c in edge_count.values())
    components = _union_find_components(n_vertices, links, referenced)

    bbox = None
    if mesh.vertices:
        xs, ys, zs = zip(*mesh.vertices)
        bbox = ((min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs)))

    return ValidationReport(
        triangle_count=len(mesh.faces),
        degenerate_faces=degenerate,
        out_of_range_indices=out_of_range,
        connected_components=components,
        is_watertight=watertight,
        bounding_box=bbox,
    )
