"""Mesh simplification to an exact triangle budget.

Garland-Heckbert quadric edge collapse: every vertex accumulates a 4x4
quadric form of squared point-to-plane distances; the cheapest valid edge
is collapsed to the quadric-minimizing point until the target face count
is reached.  The collapse phase is fully deterministic (cost, then lowest
vertex-index pair, breaks ties); a seed only drives error sampling.

Boundary edges receive an extra constraint-plane quadric (perpendicular
to the incident face, weighted by squared edge length) so open rims do
not drift.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DecimationError, TopologyLockError
from .objio import Mesh, validate

_SINGULAR_REL = 1e-12


class Quadric:
    """Symmetric quadric q(v) = v'Av + 2b'v + c over homogeneous planes.

    Stored as the six upper-triangle entries of A, the vector b and the
    scalar c.  Additive: the quadric of a merged vertex is the sum of the
    endpoint quadrics.
    """

    __slots__ = ("m00", "m01", "m02", "m11", "m12", "m22", "b0", "b1", "b2", "c")

    def __init__(self, m00=0.0, m01=0.0, m02=0.0, m11=0.0, m12=0.0, m22=0.0,
                 b0=0.0, b1=0.0, b2=0.0, c=0.0):
        self.m00 = m00
        self.m01 = m01
        self.m02 = m02
        self.m11 = m11
        self.m12 = m12
        self.m22 = m22
        self.b0 = b0
        self.b1 = b1
        self.b2 = b2
        self.c = c

    @classmethod
    def from_plane(cls, nx: float, ny: float, nz: float, d: float,
                   weight: float = 1.0) -> "Quadric":
        """Quadric of squared distance to the plane n.v + d = 0, |n| = 1."""
        w = weight
        return cls(
            w * nx * nx, w * nx * ny, w * nx * nz,
            w * ny * ny, w * ny * nz, w * nz * nz,
            w * d * nx, w * d * ny, w * d * nz, w * d * d,
        )

    def add(self, other: "Quadric") -> "Quadric":
        return Quadric(
            self.m00 + other.m00, self.m01 + other.m01, self.m02 + other.m02,
            self.m11 + other.m11, self.m12 + other.m12, self.m22 + other.m22,
            self.b0 + other.b0, self.b1 + other.b1, self.b2 + other.b2,
            self.c + other.c,
        )

    def add_in_place(self, other: "Quadric") -> None:
        self.m00 += other.m00
        self.m01 += other.m01
        self.m02 += other.m02
        self.m11 += other.m11
        self.m12 += other.m12
        self.m22 += other.m22
        self.b0 += other.b0
        self.b1 += other.b1
        self.b2 += other.b2
        self.c += other.c

    def evaluate(self, x: float, y: float, z: float) -> float:
        return (
            x * (self.m00 * x + self.m01 * y + self.m02 * z)
            + y * (self.m01 * x + self.m11 * y + self.m12 * z)
            + z * (self.m02 * x + self.m12 * y + self.m22 * z)
            + 2.0 * (self.b0 * x + self.b1 * y + self.b2 * z)
            + self.c
        )

    def optimal_point(self) -> tuple[float, float, float] | None:
        """Minimizer of the quadric, or None when A is numerically singular."""
        m00, m01, m02 = self.m00, self.m01, self.m02
        m11, m12, m22 = self.m11, self.m12, self.m22
        c00 = m11 * m22 - m12 * m12
        c01 = m02 * m12 - m01 * m22
        c02 = m01 * m12 - m02 * m11
        det = m00 * c00 + m01 * c01 + m02 * c02
        scale = max(abs(m00), abs(m01), abs(m02), abs(m11), abs(m12), abs(m22))
        if scale <= 0.0 or abs(det) < _SINGULAR_REL * scale * scale * scale:
            return None
        inv = 1.0 / det
        b0, b1, b2 = self.b0, self.b1, self.b2
        x = -(c00 * b0 + c01 * b1 + c02 * b2) * inv
        y = -(c01 * b0 + (m00 * m22 - m02 * m02) * b1 + (m01 * m02 - m00 * m12) * b2) * inv
        z = -(c02 * b0 + (m01 * m02 - m00 * m12) * b1 + (m00 * m11 - m01 * m01) * b2) * inv
        return (x, y, z)


@dataclass
class DecimationReport:
    requested: int
    achieved: int
    collapses: int
    overshoot: bool  # parity left the count at requested + 1


@dataclass
class ErrorSummary:
    mean: float
    max: float
    sample_count: int
    seed: int


def _face_normal(positions, a: int, b: int, c: int):
    ax, ay, az = positions[a]
    bx, by, bz = positions[b]
    cx, cy, cz = positions[c]
    ux, uy, uz = bx - ax, by - ay, bz - az
    vx, vy, vz = cx - ax, cy - ay, cz - az
    return (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


def _best_placement(q: Quadric, pa, pb):
    """Optimal point when solvable, else cheapest of endpoints/midpoint."""
    opt = q.optimal_point()
    if opt is not None:
        cost = q.evaluate(*opt)
        return cost, opt
    mid = ((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0)
    best_cost = q.evaluate(*pa)
    best = (pa[0], pa[1], pa[2])
    cost_b = q.evaluate(*pb)
    if cost_b < best_cost:
        best_cost, best = cost_b, (pb[0], pb[1], pb[2])
    cost_m = q.evaluate(*mid)
    if cost_m < best_cost:
        best_cost, best = cost_m, mid
    return best_cost, best


class _Collapser:
    def __init__(self, mesh: Mesh):
        self.positions = [list(p) for p in mesh.vertices]
        self.faces: list[list[int] | None] = [[c[0] for c in f] for f in mesh.faces]
        self.face_uvs: list[list[int]] = [[c[1] for c in f] for f in mesh.faces]
        self.uvs = list(mesh.uvs)
        self.name = mesh.name
        n = len(self.positions)
        self.vertex_faces: list[set[int]] = [set() for _ in range(n)]
        for fi, f in enumerate(self.faces):
            for v in f:
                self.vertex_faces[v].add(fi)
        self.generation = [0] * n
        self.alive_faces = len(self.faces)
        self.quadrics = self._initial_quadrics()
        self.heap: list[tuple] = []
        self.collapses = 0
        for a, b in self._edges():
            self._push_candidate(a, b)

    def _edges(self):
        seen = set()
        for f in self.faces:
            for i in range(3):
                a, b = f[i], f[(i + 1) % 3]
                key = (a, b) if a < b else (b, a)
                if key not in seen:
                    seen.add(key)
                    yield key

    def _initial_quadrics(self) -> list[Quadric]:
        quadrics = [Quadric() for _ in self.positions]
        edge_faces: dict[tuple[int, int], list[int]] = {}
        for fi, f in enumerate(self.faces):
            a, b, c = f
            nx, ny, nz = _face_normal(self.positions, a, b, c)
            norm = math.sqrt(nx * nx + ny * ny + nz * nz)
            if norm > 0.0:
                nx, ny, nz = nx / norm, ny / norm, nz / norm
                px, py, pz = self.positions[a]
                d = -(nx * px + ny * py + nz * pz)
                plane = Quadric.from_plane(nx, ny, nz, d)
                for v in f:
                    quadrics[v].add_in_place(plane)
            for i in range(3):
                u, v = f[i], f[(i + 1) % 3]
                key = (u, v) if u < v else (v, u)
                edge_faces.setdefault(key, []).append(fi)
        # Boundary preservation: perpendicular constraint plane per rim edge.
        for (u, v), incident in edge_faces.items():
            if len(incident) != 1:
                continue
            fi = incident[0]
            a, b, c = self.faces[fi]
            fnx, fny, fnz = _face_normal(self.positions, a, b, c)
            fl = math.sqrt(fnx * fnx + fny * fny + fnz * fnz)
            if fl == 0.0:
                continue
            fnx, fny, fnz = fnx / fl, fny / fl, fnz / fl
            pu, pv = self.positions[u], self.positions[v]
            ex, ey, ez = pv[0] - pu[0], pv[1] - pu[1], pv[2] - pu[2]
            edge_sq = ex * ex + ey * ey + ez * ez
            mx = fny * ez - fnz * ey
            my = fnz * ex - fnx * ez
            mz = fnx * ey - fny * ex
            ml = math.sqrt(mx * mx + my * my + mz * mz)
            if ml == 0.0 or edge_sq == 0.0:
                continue
            mx, my, mz = mx / ml, my / ml, mz / ml
            d = -(mx * pu[0] + my * pu[1] + mz * pu[2])
            constraint = Quadric.from_plane(mx, my, mz, d, weight=edge_sq)
            quadrics[u].add_in_place(constraint)
            quadrics[v].add_in_place(constraint)
        return quadrics

    def _push_candidate(self, a: int, b: int) -> None:
        if a > b:
            a, b = b, a
        merged = self.quadrics[a].add(self.quadrics[b])
        cost, pos = _best_placement(merged, self.positions[a], self.positions[b])
        if cost < 0.0:
            cost = 0.0
        heapq.heappush(
            self.heap,
            (cost, a, b, self.generation[a], self.generation[b], pos),
        )

    def _shared_faces(self, a: int, b: int) -> list[int]:
        fa, fb = self.vertex_faces[a], self.vertex_faces[b]
        if len(fb) < len(fa):
            fa, fb = fb, fa
        return sorted(fi for fi in fa if fi in fb)

    def _neighbors(self, v: int) -> set[int]:
        out: set[int] = set()
        for fi in self.vertex_faces[v]:
            out.update(self.faces[fi])
        out.discard(v)
        return out

    def _collapse_is_safe(self, a: int, b: int, shared: list[int], pos) -> bool:
        # Link condition: common neighbors must be exactly the vertices
        # opposite the shared faces, otherwise the surface would pinch.
        opposite = set()
        for fi in shared:
            for v in self.faces[fi]:
                if v != a and v != b:
                    opposite.add(v)
        common = self._neighbors(a) & self._neighbors(b)
        if common != opposite:
            return False
        # Orientation guard: no surviving face may flip or vanish.
        px, py, pz = pos
        positions = self.positions
        shared_set = set(shared)
        for v, other in ((a, b), (b, a)):
            for fi in self.vertex_faces[v]:
                if fi in shared_set:
                    continue
                f = self.faces[fi]
                i0, i1, i2 = f
                n0x, n0y, n0z = _face_normal(positions, i0, i1, i2)
                q0 = positions[i0] if i0 != v else (px, py, pz)
                q1 = positions[i1] if i1 != v else (px, py, pz)
                q2 = positions[i2] if i2 != v else (px, py, pz)
                ux, uy, uz = q1[0] - q0[0], q1[1] - q0[1], q1[2] - q0[2]
                wx, wy, wz = q2[0] - q0[0], q2[1] - q0[1], q2[2] - q0[2]
                n1x = uy * wz - uz * wy
                n1y = uz * wx - ux * wz
                n1z = ux * wy - uy * wx
                if n1x * n0x + n1y * n0y + n1z * n0z <= 0.0:
                    return False
        return True

    def _execute(self, a: int, b: int, shared: list[int], pos) -> None:
        # Donor uv for corners remapped from b: vertex a's uv in the lowest
        # shared face (the nearest surviving corner across the collapsed edge).
        donor_uv = None
        for fi in shared:
            f = self.faces[fi]
            for slot in range(3):
                if f[slot] == a:
                    donor_uv = self.face_uvs[fi][slot]
                    break
            if donor_uv is not None:
                break

        for fi in shared:
            for v in self.faces[fi]:
                self.vertex_faces[v].discard(fi)
            self.faces[fi] = None
            self.alive_faces -= 1

        self.positions[a] = [pos[0], pos[1], pos[2]]
        self.quadrics[a].add_in_place(self.quadrics[b])

        for fi in list(self.vertex_faces[b]):
            f = self.faces[fi]
            for slot in range(3):
                if f[slot] == b:
                    f[slot] = a
                    if donor_uv is not None:
                        self.face_uvs[fi][slot] = donor_uv
            self.vertex_faces[a].add(fi)
        self.vertex_faces[b].clear()

        self.generation[a] += 1
        self.generation[b] += 1
        self.collapses += 1

        for u in self._neighbors(a):
            self._push_candidate(a, u)

    def run(self, target: int) -> DecimationReport:
        requested = target
        heap = self.heap
        while self.alive_faces > target and heap:
            cost, a, b, gen_a, gen_b, pos = heapq.heappop(heap)
            if self.generation[a] != gen_a or self.generation[b] != gen_b:
                continue
            shared = self._shared_faces(a, b)
            if not shared:
                continue
            if self.alive_faces - len(shared) < target:
                # Would undershoot; only a smaller (boundary) collapse can
                # still land exactly on target.
                continue
            if not self._collapse_is_safe(a, b, shared, pos):
                continue
            self._execute(a, b, shared, pos)
        achieved = self.alive_faces
        return DecimationReport(
            requested=requested,
            achieved=achieved,
            collapses=self.collapses,
            overshoot=achieved == requested + 1,
        )

    def to_mesh(self) -> Mesh:
        used_vertices = sorted({v for f in self.faces if f is not None for v in f})
        used_uvs = sorted(
            {
                self.face_uvs[fi][slot]
                for fi, f in enumerate(self.faces)
                if f is not None
                for slot in range(3)
                if self.face_uvs[fi][slot] >= 0
            }
        )
        v_map = {old: new for new, old in enumerate(used_vertices)}
        t_map = {old: new for new, old in enumerate(used_uvs)}
        t_map[-1] = -1
        faces = []
        for fi, f in enumerate(self.faces):
            if f is None:
                continue
            uv = self.face_uvs[fi]
            faces.append(tuple((v_map[f[s]], t_map[uv[s]]) for s in range(3)))
        return Mesh(
            vertices=[tuple(self.positions[v]) for v in used_vertices],
            uvs=[self.uvs[t] for t in used_uvs],
            faces=faces,
            name=self.name,
        )


def simplify_to(mesh: Mesh, target_triangles: int) -> tuple[Mesh, DecimationReport]:
    """Collapse edges until the face count reaches the target.

    Returns the simplified mesh and a report.  When parity makes the exact
    target unreachable the result stops at target + 1 and the report says
    so; when topology locks earlier a TopologyLockError carries the best
    mesh achieved.
    """
    if target_triangles < 4:
        raise ValueError(f"target_triangles must be >= 4, got {target_triangles}")
    report = validate(mesh)
    if not report.passed:
        raise DecimationError(
            f"input mesh does not validate: {report.degenerate_faces} degenerate, "
            f"{report.out_of_range_indices} out-of-range indices"
        )
    if target_triangles >= mesh.triangle_count:
        return mesh, DecimationReport(target_triangles, mesh.triangle_count, 0, False)

    collapser = _Collapser(mesh)
    result = collapser.run(target_triangles)
    out = collapser.to_mesh()
    if result.achieved > target_triangles + 1:
        raise TopologyLockError(
            f"collapse queue exhausted at {result.achieved} faces "
            f"(target {target_triangles})",
            best_mesh=out,
            achieved=result.achieved,
        )
    return out, result


def decimate(mesh: Mesh, target_triangles: int, seed: int = 0) -> Mesh:
    """Reduce a mesh to an exact triangle count.

    The collapse phase is deterministic and seed-independent; the seed
    parameter exists for interface symmetry with geometric_error.
    """
    out, _ = simplify_to(mesh, target_triangles)
    return out


def decimate_ladder(mesh: Mesh, targets: list[int]) -> dict[int, tuple[Mesh, DecimationReport]]:
    """Produce every target resolution, chaining from coarse to coarser.

    Targets are processed in descending order and each level starts from
    the previous one, which cuts total collapse work roughly in half on a
    typical resolution ladder without changing the contract of any level.
    """
    results: dict[int, tuple[Mesh, DecimationReport]] = {}
    current = mesh
    for target in sorted(set(targets), reverse=True):
        current, report = simplify_to(current, target)
        results[target] = (current, report)
    return results


def _sample_surface(vertices: np.ndarray, faces: np.ndarray, count: int,
                    rng: np.random.Generator) -> np.ndarray:
    a = vertices[faces[:, 0]]
    b = vertices[faces[:, 1]]
    c = vertices[faces[:, 2]]
    cross = np.cross(b - a, c - a)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    total = areas.sum()
    if total <= 0.0:
        raise ValueError("mesh has zero surface area")
    chosen = rng.choice(len(faces), size=count, p=areas / total)
    u = rng.random(count)
    v = rng.random(count)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    fa, fb, fc = a[chosen], b[chosen], c[chosen]
    return fa + u[:, None] * (fb - fa) + v[:, None] * (fc - fa)


def _point_to_triangles(p: np.ndarray, a: np.ndarray, ab: np.ndarray,
                        ac: np.ndarray, bc: np.ndarray) -> float:
    """Min squared distance from one point to every triangle (Ericson)."""
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = ap - ab
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = ap - ac
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(divide="ignore", invalid="ignore"):
        # Interior projection by default, overridden region by region.
        denom = va + vb + vc
        v = np.where(denom != 0.0, vb / denom, 0.0)
        w = np.where(denom != 0.0, vc / denom, 0.0)
        q = a + v[:, None] * ab + w[:, None] * ac

        t_bc = np.where(
            (d4 - d3) + (d5 - d6) != 0.0,
            (d4 - d3) / ((d4 - d3) + (d5 - d6)),
            0.0,
        )
        on_bc = (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)
        q = np.where(on_bc[:, None], a + ab + np.clip(t_bc, 0, 1)[:, None] * bc, q)

        t_ac = np.where(d2 - d6 != 0.0, d2 / (d2 - d6), 0.0)
        on_ac = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
        q = np.where(on_ac[:, None], a + np.clip(t_ac, 0, 1)[:, None] * ac, q)

        t_ab = np.where(d1 - d3 != 0.0, d1 / (d1 - d3), 0.0)
        on_ab = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
        q = np.where(on_ab[:, None], a + np.clip(t_ab, 0, 1)[:, None] * ab, q)

        at_c = (d6 >= 0.0) & (d5 <= d6)
        q = np.where(at_c[:, None], a + ac, q)
        at_b = (d3 >= 0.0) & (d4 <= d3)
        q = np.where(at_b[:, None], a + ab, q)
        at_a = (d1 <= 0.0) & (d2 <= 0.0)
        q = np.where(at_a[:, None], a, q)

    diff = q - p
    return float(np.min(np.einsum("ij,ij->i", diff, diff)))


def geometric_error(original: Mesh, simplified: Mesh, sample_count: int,
                    seed: int) -> ErrorSummary:
    """Sampled one-sided surface distance from original to simplified.

    Points are drawn uniformly by area on the original surface; each is
    measured to the nearest point of any simplified triangle.  Fully
    deterministic for a given seed.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if not original.faces or not simplified.faces:
        raise ValueError("both meshes must have faces")

    o_vertices = np.asarray(original.vertices, dtype=np.float64)
    o_faces = np.asarray([[c[0] for c in f] for f in original.faces], dtype=np.intp)
    s_vertices = np.asarray(simplified.vertices, dtype=np.float64)
    s_faces = np.asarray([[c[0] for c in f] for f in simplified.faces], dtype=np.intp)

    rng = np.random.default_rng(seed)
    samples = _sample_surface(o_vertices, o_faces, sample_count, rng)

    a = s_vertices[s_faces[:, 0]]
    ab = s_vertices[s_faces[:, 1]] - a
    ac = s_vertices[s_faces[:, 2]] - a
    bc = ac - ab

    sq = np.empty(sample_count)
    for i in range(sample_count):
        sq[i] = _point_to_triangles(samples[i], a, ab, ac, bc)
    dist = np.sqrt(np.maximum(sq, 0.0))
    return ErrorSummary(
        mean=float(dist.mean()),
        max=float(dist.max()),
        sample_count=sample_count,
        seed=seed,
    )
