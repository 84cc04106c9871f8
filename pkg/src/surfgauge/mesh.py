"""Oriented triangulated closed surfaces with per-face charts and areas.

A mesh is combinatorial (vertices, oriented edges, oriented faces) plus, per
face, the chart coordinates of its three corners and a symplectic area.  The
area form omega assigns mass ``areas[f]`` to face f regardless of the chart's
Euclidean size; per-face metrics always enter through omega and a complex
structure, so charts only fix frames.

Built-in meshes come from a regular 4g-gon with opposite sides identified by
translations (a translation surface: genus g, flat away from one cone point
of angle (4g-2)pi).  All charts are then parallel, which keeps transition
rotations trivial.  Edges are first-class objects (parallel edges between the
same vertex pair are allowed; faces reference edge ids with signs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

MAX_FACES = 65536


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceMesh:
    """Immutable triangulated closed oriented surface.

    Fields
    ------
    nv          number of vertices
    edges       (E,2) int, tail/head vertex of each oriented edge
    faces       (F,3) int, vertex ids in chart-CCW order
    face_edges  (F,3) int, edge id on the boundary slot i (vertices i->i+1)
    face_signs  (F,3) int, +1 if the face traverses the edge tail->head
    corners     (F,3,2) float, chart coordinates of the three corners
    areas       (F,) float, symplectic face areas (sum = total volume)
    genus       int
    positions   optional (V,3) float, an embedding (for OFF export)
    """

    nv: int
    edges: np.ndarray
    faces: np.ndarray
    face_edges: np.ndarray
    face_signs: np.ndarray
    corners: np.ndarray
    areas: np.ndarray
    genus: int
    positions: np.ndarray | None = None
    meta: dict | None = field(default=None, compare=False)

    # ----- basic counts and invariants -------------------------------------

    @property
    def ne(self) -> int:
        return len(self.edges)

    @property
    def nf(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.nv - self.ne + self.nf

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.areas))

    @property
    def cc_target(self) -> float:
        """Constant value of the scalar curvature allowed by Gauss-Bonnet.

        With the convention S = 2 * angle_defect / vertex_mass the total
        curvature is 4*pi*chi exactly, so the constant-curvature equation
        reads S = 4*pi*chi / V.  (This is the discrete realization of the
        normalization constant in the scalar-curvature equation.)
        """
        return 4.0 * np.pi * self.euler_characteristic / self.total_volume

    def validate(self) -> None:
        if self.euler_characteristic != 2 - 2 * self.genus:
            raise MeshError(
                f"Euler characteristic {self.euler_characteristic} != {2 - 2 * self.genus}"
            )
        if np.any(self.areas <= 0):
            raise MeshError("non-positive face area")
        if np.any(self.chart_areas <= 0):
            raise MeshError("non-CCW or degenerate face chart")
        # Each edge borders exactly two face slots, with opposite signs.
        use = {}
        for f in range(self.nf):
            for i in range(3):
                use.setdefault(self.face_edges[f, i], []).append(self.face_signs[f, i])
        for e in range(self.ne):
            signs = use.get(e, [])
            if sorted(signs) != [-1, 1]:
                raise MeshError(f"edge {e} has face signs {signs}")
        # Chart corners must be consistent with edge orientations.
        for f in range(self.nf):
            for i in range(3):
                e = self.face_edges[f, i]
                s = self.face_signs[f, i]
                pair = (self.faces[f, i], self.faces[f, (i + 1) % 3])
                expect = tuple(self.edges[e]) if s == 1 else tuple(self.edges[e][::-1])
                if pair != expect:
                    raise MeshError(f"face {f} slot {i}: vertices {pair} vs edge {expect}")

    # ----- chart-derived quantities ----------------------------------------

    @cached_property
    def chart_areas(self) -> np.ndarray:
        """Euclidean area of each face chart triangle."""
        p = self.corners
        u = p[:, 1] - p[:, 0]
        v = p[:, 2] - p[:, 0]
        return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])

    @cached_property
    def omega_density(self) -> np.ndarray:
        """Per-face density of omega relative to chart dx^dy."""
        return self.areas / self.chart_areas

    @cached_property
    def vertex_mass(self) -> np.ndarray:
        """Lumped vertex masses m_v = (1/3) sum of incident face areas."""
        m = np.zeros(self.nv)
        np.add.at(m, self.faces.ravel(), np.repeat(self.areas / 3.0, 3))
        return m

    @cached_property
    def barycentric_gradients(self) -> np.ndarray:
        """(F,3,2) gradients (= covectors d lambda_i) of barycentric coords."""
        p = self.corners
        g = np.empty((self.nf, 3, 2))
        m = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=1)  # rows
        minv = np.linalg.inv(m)
        g[:, 1] = minv[:, :, 0]
        g[:, 2] = minv[:, :, 1]
        g[:, 0] = -g[:, 1] - g[:, 2]
        return g

    @cached_property
    def whitney_covectors(self) -> np.ndarray:
        """(F,3,2): covector weight of (signed) edge value i in the face-averaged
        Whitney interpolant, (d lambda_{i+1} - d lambda_i)/3."""
        g = self.barycentric_gradients
        return (np.roll(g, -1, axis=1) - g) / 3.0

    @cached_property
    def d0(self) -> sp.csr_matrix:
        """Coboundary C^0 -> C^1."""
        e = self.edges
        rows = np.repeat(np.arange(self.ne), 2)
        cols = e.ravel()
        vals = np.tile([-1.0, 1.0], self.ne)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.ne, self.nv))

    @cached_property
    def d1(self) -> sp.csr_matrix:
        """Coboundary C^1 -> C^2 (signed sum over the face boundary)."""
        rows = np.repeat(np.arange(self.nf), 3)
        cols = self.face_edges.ravel()
        vals = self.face_signs.ravel().astype(float)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.nf, self.ne))

    @cached_property
    def face_average(self) -> sp.csr_matrix:
        """C^0 -> per-face values, u -> mean over the three corners."""
        rows = np.repeat(np.arange(self.nf), 3)
        cols = self.faces.ravel()
        vals = np.full(3 * self.nf, 1.0 / 3.0)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.nf, self.nv))

    @cached_property
    def _whitney_matrix(self) -> sp.csr_matrix:
        """Sparse (2F, E): cochain -> stacked face-form components."""
        rows = []
        cols = []
        vals = []
        wc = self.whitney_covectors
        for comp in range(2):
            rows.append(2 * np.repeat(np.arange(self.nf), 3) + comp)
            cols.append(self.face_edges.ravel())
            vals.append((self.face_signs * wc[:, :, comp]).ravel())
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * self.nf, self.ne),
        )

    @cached_property
    def _unwhitney_pinv(self) -> np.ndarray:
        """Dense pseudo-inverse realizing the reference-metric projection
        C^1 <- face forms; unwhitney(whitney(w)) is then the orthogonal
        projection of w onto the complement of ker(whitney)."""
        w = self._whitney_matrix.toarray()
        g0 = np.repeat(self.chart_areas, 2)  # reference Gram weights
        m1 = w.T @ (g0[:, None] * w)
        rhs = w.T * g0[None, :]
        return np.linalg.pinv(m1, rcond=1e-11) @ rhs  # (E, 2F)

    # ----- unfolding across edges (for gradient reconstruction) ------------

    @cached_property
    def edge_faces(self) -> np.ndarray:
        """(E,2) int: faces adjacent to each edge, positive-sign face first."""
        ef = np.full((self.ne, 2), -1, dtype=int)
        for f in range(self.nf):
            for i in range(3):
                e = self.face_edges[f, i]
                ef[e, 0 if self.face_signs[f, i] == 1 else 1] = f
        return ef

    @cached_property
    def unfold_maps(self) -> list[list[tuple[int, np.ndarray, np.ndarray]]]:
        """Per face: list of (neighbor, R, t) with R x + t mapping the
        neighbor chart into this face's chart, matching the shared edge."""
        slot_of = {}
        for f in range(self.nf):
            for i in range(3):
                slot_of.setdefault(self.face_edges[f, i], []).append((f, i))
        out: list[list[tuple[int, np.ndarray, np.ndarray]]] = [[] for _ in range(self.nf)]
        for e, slots in slot_of.items():
            (f1, i1), (f2, i2) = slots
            for (fa, ia), (fb, ib) in [((f1, i1), (f2, i2)), ((f2, i2), (f1, i1))]:
                # In fa the slot runs corner ia -> ia+1; in fb the same geometric
                # edge runs the opposite way, so match endpoints crosswise.
                a1 = self.corners[fa, ia]
                a2 = self.corners[fa, (ia + 1) % 3]
                b1 = self.corners[fb, (ib + 1) % 3]
                b2 = self.corners[fb, ib]
                va = a2 - a1
                vb = b2 - b1
                na = np.hypot(*va)
                nb = np.hypot(*vb)
                ca = va / na
                cb = vb / nb
                # rotation taking cb to ca
                cos = ca @ cb
                sin = ca[0] * cb[1] - ca[1] * cb[0]
                rot = np.array([[cos, sin], [-sin, cos]])
                t = a1 - rot @ b1
                out[fa].append((fb, rot, t))
        return out

    @cached_property
    def face_barycenters(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    # ----- OFF export --------------------------------------------------------

    def _torus_positions(self) -> np.ndarray:
        """Donut embedding for genus-1 meshes built from the square chart."""
        if self.genus != 1:
            raise MeshError("embedding is only constructed for genus-1 meshes")
        rep = np.zeros((self.nv, 2))
        seen = np.zeros(self.nv, dtype=bool)
        for f in range(self.nf):
            for i in range(3):
                v = self.faces[f, i]
                if not seen[v]:
                    rep[v] = self.corners[f, i]
                    seen[v] = True
        # lattice of the square translation surface (side pairings 0<->2, 1<->3)
        c = np.array(
            [[np.cos(2 * np.pi * (k + 0.5) / 4), np.sin(2 * np.pi * (k + 0.5) / 4)] for k in range(4)]
        )
        mids = 0.5 * (c + np.roll(c, -1, axis=0))
        lat = np.stack([-2 * mids[0], -2 * mids[1]], axis=1)
        uv = np.linalg.solve(lat, rep.T).T
        ang = 2 * np.pi * uv
        big, small = 1.5, 0.5
        x = (big + small * np.cos(ang[:, 0])) * np.cos(ang[:, 1])
        y = (big + small * np.cos(ang[:, 0])) * np.sin(ang[:, 1])
        z = small * np.sin(ang[:, 0])
        return np.stack([x, y, z], axis=1)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _polygon_fan(genus: int) -> SurfaceMesh:
    """Triangulated regular 4g-gon with opposite sides glued by translation.

    Vertices: centre (0), the single cone vertex (1), and the 2g identified
    side midpoints (2..2g+1).  Faces: two per polygon side, fanned from the
    centre.  All corners carry polygon coordinates, so charts are parallel.
    """
    n = 4 * genus
    corner = np.array(
        [[np.cos(2 * np.pi * (k + 0.5) / n), np.sin(2 * np.pi * (k + 0.5) / n)] for k in range(n)]
    )
    mid = 0.5 * (corner + np.roll(corner, -1, axis=0))

    def vmid(k):
        return 2 + (k % (2 * genus))

    centre, cone = 0, 1
    nv = 2 + 2 * genus

    # edges: spokes to corners, spokes to midpoints, identified half-sides
    edges = []
    spoke_c = {}
    spoke_m = {}
    half = {}
    for k in range(n):
        spoke_c[k] = len(edges)
        edges.append((centre, cone))
    for k in range(n):
        spoke_m[k] = len(edges)
        edges.append((centre, vmid(k)))
    for k in range(n):
        half[k] = len(edges)  # class of {corner_k -> m_k, m_{k+2g} -> corner_{k+2g+1}}
        edges.append((cone, vmid(k)))

    faces = []
    face_edges = []
    face_signs = []
    corners3 = []
    for k in range(n):
        # F1_k = (centre, corner_k, m_k)
        faces.append((centre, cone, vmid(k)))
        face_edges.append((spoke_c[k], half[k], spoke_m[k]))
        face_signs.append((1, 1, -1))
        corners3.append((np.zeros(2), corner[k], mid[k]))
        # F2_k = (centre, m_k, corner_{k+1}); its side half is the reversed
        # member of class (k + 2g)
        faces.append((centre, vmid(k), cone))
        face_edges.append((spoke_m[k], half[(k + 2 * genus) % n], spoke_c[(k + 1) % n]))
        face_signs.append((1, -1, -1))
        corners3.append((np.zeros(2), mid[k], corner[(k + 1) % n]))

    nf = len(faces)
    mesh = SurfaceMesh(
        nv=nv,
        edges=np.array(edges, dtype=int),
        faces=np.array(faces, dtype=int),
        face_edges=np.array(face_edges, dtype=int),
        face_signs=np.array(face_signs, dtype=int),
        corners=np.array(corners3, dtype=float),
        areas=np.full(nf, 1.0 / nf),
        genus=genus,
    )
    return mesh


def refine(mesh: SurfaceMesh) -> SurfaceMesh:
    """One 1->4 subdivision; child charts live in the parent chart frame,
    areas stay uniform per parent (each child gets a quarter)."""
    if 4 * mesh.nf > MAX_FACES:
        raise MeshError("refinement overflow: too many faces")
    nv = mesh.nv
    mid_vertex = nv + np.arange(mesh.ne)
    edges = []
    # halves of old edges keep the class orientation
    half_a = {}
    half_b = {}
    for e in range(mesh.ne):
        t, h = mesh.edges[e]
        half_a[e] = len(edges)
        edges.append((t, mid_vertex[e]))
        half_b[e] = len(edges)
        edges.append((mid_vertex[e], h))

    faces = []
    face_edges = []
    face_signs = []
    corners3 = []
    areas = []

    for f in range(mesh.nf):
        inner: dict[tuple[int, int], int] = {}

        def add_inner(va, vb):
            """Edge id and traversal sign for going va -> vb (inner edges are
            local to the parent face, so parallel shared edges are safe)."""
            if (va, vb) in inner:
                return inner[(va, vb)], 1
            if (vb, va) in inner:
                return inner[(vb, va)], -1
            inner[(va, vb)] = len(edges)
            edges.append((va, vb))
            return inner[(va, vb)], 1

        vs = mesh.faces[f]
        es = mesh.face_edges[f]
        ss = mesh.face_signs[f]
        mids = [mid_vertex[es[i]] for i in range(3)]
        pc = mesh.corners[f]
        pm = [0.5 * (pc[i] + pc[(i + 1) % 3]) for i in range(3)]
        a4 = mesh.areas[f] / 4.0

        def half_edge(i, first):
            """Child edge id+sign of slot i's first/second half as the face
            traverses it (corner i -> corner i+1)."""
            e, s = es[i], ss[i]
            if s == 1:
                return (half_a[e], 1) if first else (half_b[e], 1)
            return (half_b[e], -1) if first else (half_a[e], -1)

        # corner triangles (corner i, mid i, mid i-1)
        for i in range(3):
            j = (i + 2) % 3
            e1, s1 = half_edge(i, True)
            em, sm = add_inner(mids[i], mids[j])
            e2, s2 = half_edge(j, False)
            faces.append((vs[i], mids[i], mids[j]))
            face_edges.append((e1, em, e2))
            face_signs.append((s1, sm, s2))
            corners3.append((pc[i], pm[i], pm[j]))
            areas.append(a4)
        # central triangle (mid 0, mid 1, mid 2), reusing the inner edges
        # created by the corner triangles (traversed in reverse)
        ce = []
        cs = []
        for i in range(3):
            e, s = add_inner(mids[i], mids[(i + 1) % 3])
            ce.append(e)
            cs.append(s)
        faces.append((mids[0], mids[1], mids[2]))
        face_edges.append((ce[0], ce[1], ce[2]))
        face_signs.append((cs[0], cs[1], cs[2]))
        corners3.append((pm[0], pm[1], pm[2]))
        areas.append(a4)

    out = SurfaceMesh(
        nv=nv + mesh.ne,
        edges=np.array(edges, dtype=int),
        faces=np.array(faces, dtype=int),
        face_edges=np.array(face_edges, dtype=int),
        face_signs=np.array(face_signs, dtype=int),
        corners=np.array(corners3, dtype=float),
        areas=np.array(areas),
        genus=mesh.genus,
        positions=None,
    )
    return out


def build_surface(genus: int, refinement: int) -> SurfaceMesh:
    """Genus-g surface (g >= 1) from the identified 4g-gon, subdivided
    ``refinement`` times; uniform face areas with total volume 1."""
    if genus < 1:
        raise MeshError("genus must be >= 1 (genus 0 is not supported)")
    if refinement < 0:
        raise MeshError("refinement must be >= 0")
    mesh = _polygon_fan(genus)
    for _ in range(refinement):
        mesh = refine(mesh)
    if mesh.nf > MAX_FACES:
        raise MeshError("refinement overflow")
    object.__setattr__(mesh, "meta", {"kind": "builtin", "genus": genus, "refinement": refinement})
    mesh.validate()
    return mesh


# ---------------------------------------------------------------------------
# prolongation (coarse -> refined meshes, for convergence sweeps)
# ---------------------------------------------------------------------------


def prolong_vertex(coarse: SurfaceMesh, fine: SurfaceMesh, u: np.ndarray) -> np.ndarray:
    """Affine interpolation of vertex data to the refined mesh."""
    u = np.asarray(u)
    out = np.concatenate([u, 0.5 * (u[coarse.edges[:, 0]] + u[coarse.edges[:, 1]])], axis=0)
    return out


def prolong_face(coarse: SurfaceMesh, fine: SurfaceMesh, j: np.ndarray) -> np.ndarray:
    """Copy per-face data to the four children (charts are parallel)."""
    return np.repeat(np.asarray(j), 4, axis=0)


def prolong_edge(coarse: SurfaceMesh, fine: SurfaceMesh, w: np.ndarray) -> np.ndarray:
    """Whitney-consistent prolongation of edge cochains.

    Halves of old edges each get half the value (the Whitney interpolant has
    constant tangential component along its own edge); interior child edges
    integrate the parent Whitney form along the mid-segment.
    """
    w = np.asarray(w)
    shape = (fine.ne,) + w.shape[1:]
    out = np.zeros(shape, dtype=w.dtype)
    out[0 : 2 * coarse.ne : 2] = 0.5 * w
    out[1 : 2 * coarse.ne : 2] = 0.5 * w
    # interior edges: child faces were emitted per parent face, 4 per parent,
    # with the three inner edges created in a fixed order; recover them by
    # evaluating the parent Whitney interpolant (affine per face).
    gb = coarse.barycentric_gradients
    for f in range(coarse.nf):
        pc = coarse.corners[f]
        pm = [0.5 * (pc[i] + pc[(i + 1) % 3]) for i in range(3)]
        signs = coarse.face_signs[f].reshape((3,) + (1,) * (w.ndim - 1))
        vals = w[coarse.face_edges[f]] * signs
        for i in range(3):
            j = (i + 2) % 3
            a, b = pm[i], pm[j]
            seg = b - a
            mid = 0.5 * (a + b)
            lam = _barycentric(pc, mid)
            # Whitney 1-form value at mid: sum_i v_i (lam_i dl_{i+1} - lam_{i+1} dl_i)
            cov = np.zeros((2,) + w.shape[1:], dtype=w.dtype)
            for k in range(3):
                kk = (k + 1) % 3
                wk = lam[k] * gb[f, kk] - lam[kk] * gb[f, k]
                cov += wk.reshape((2,) + (1,) * (w.ndim - 1)) * vals[k][None, ...]
            val = seg[0] * cov[0] + seg[1] * cov[1]
            eid = _find_inner_edge(fine, coarse, f, i)
            out[eid[0]] = eid[1] * val
    return out


def restrict_vertex(coarse: SurfaceMesh, fine: SurfaceMesh, u: np.ndarray) -> np.ndarray:
    """Restriction of fine vertex data (coarse vertices come first)."""
    return np.asarray(u)[: coarse.nv]


def restrict_edge(coarse: SurfaceMesh, fine: SurfaceMesh, w: np.ndarray) -> np.ndarray:
    """Restriction of fine edge cochains: integrals add along the halves."""
    w = np.asarray(w)
    return w[0 : 2 * coarse.ne : 2] + w[1 : 2 * coarse.ne : 2]


def restrict_face(coarse: SurfaceMesh, fine: SurfaceMesh, j: np.ndarray) -> np.ndarray:
    """Restriction of per-face data: average over the four children."""
    j = np.asarray(j)
    return j.reshape((coarse.nf, 4) + j.shape[1:]).mean(axis=1)


def smooth_vertex(mesh: SurfaceMesh, u: np.ndarray, rounds: int) -> np.ndarray:
    """Neighbor-averaging rounds (combinatorial heat steps) on vertex data."""
    u = np.asarray(u, dtype=float).copy()
    deg = np.zeros(mesh.nv)
    np.add.at(deg, mesh.edges.ravel(), 1.0)
    for _ in range(rounds):
        acc = np.zeros_like(u)
        np.add.at(acc, mesh.edges[:, 0], u[mesh.edges[:, 1]])
        np.add.at(acc, mesh.edges[:, 1], u[mesh.edges[:, 0]])
        u = 0.5 * u + 0.5 * acc / deg.reshape((mesh.nv,) + (1,) * (u.ndim - 1))
    return u


def smooth_face(mesh: SurfaceMesh, vals: np.ndarray, rounds: int) -> np.ndarray:
    """Neighbor-averaging rounds on per-face data (edge-adjacent faces)."""
    vals = np.asarray(vals, dtype=float).copy()
    ef = mesh.edge_faces
    for _ in range(rounds):
        acc = np.zeros_like(vals)
        cnt = np.zeros(mesh.nf)
        np.add.at(acc, ef[:, 0], vals[ef[:, 1]])
        np.add.at(acc, ef[:, 1], vals[ef[:, 0]])
        np.add.at(cnt, ef[:, 0], 1.0)
        np.add.at(cnt, ef[:, 1], 1.0)
        vals = 0.5 * vals + 0.5 * acc / cnt.reshape((mesh.nf,) + (1,) * (vals.ndim - 1))
    return vals


def _barycentric(pc: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = np.stack([pc[1] - pc[0], pc[2] - pc[0]], axis=1)
    st = np.linalg.solve(m, x - pc[0])
    return np.array([1.0 - st[0] - st[1], st[0], st[1]])


def _find_inner_edge(fine: SurfaceMesh, coarse: SurfaceMesh, f: int, i: int):
    """Inner edge of parent f joining midpoint of slot i to midpoint of slot
    i-1, as (edge id, sign) in the fine mesh (children are 4f..4f+3)."""
    child = 4 * f + i  # corner triangle at corner i has slots (half, inner, half)
    e = fine.face_edges[child, 1]
    s = fine.face_signs[child, 1]
    return e, s


# ---------------------------------------------------------------------------
# OFF files
# ---------------------------------------------------------------------------


def write_off(mesh: SurfaceMesh, path: str) -> None:
    """Write an ASCII OFF file (header, counts, vertex lines, face lines).

    Requires vertex positions: meshes read from OFF keep theirs; genus-1
    built meshes are embedded as a torus of revolution.  Higher-genus built
    meshes are quotient constructions without a stored embedding and are
    rejected.
    """
    if mesh.positions is not None:
        pos = mesh.positions
    else:
        pos = mesh._torus_positions()
    lines = ["OFF", f"{mesh.nv} {mesh.nf} {mesh.ne}"]
    for p in pos:
        lines.append(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_off(path_or_file) -> SurfaceMesh:
    """Read an embedded triangle mesh from OFF; charts come from the
    embedding (per-face isometric frames) and areas from Euclidean areas."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError("not an OFF file")
    nv, nf, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    idx = 4
    pos = np.array([float(t) for t in tokens[idx : idx + 3 * nv]]).reshape(nv, 3)
    idx += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[idx])
        if cnt != 3:
            raise MeshError("only triangle faces are supported")
        faces.append([int(tokens[idx + 1]), int(tokens[idx + 2]), int(tokens[idx + 3])])
        idx += 4
    faces = np.array(faces, dtype=int)

    # edge classes from undirected vertex pairs
    edge_id = {}
    edges = []
    face_edges = np.zeros((nf, 3), dtype=int)
    face_signs = np.zeros((nf, 3), dtype=int)
    for f in range(nf):
        for i in range(3):
            a, b = faces[f, i], faces[f, (i + 1) % 3]
            key = (min(a, b), max(a, b))
            if key not in edge_id:
                edge_id[key] = len(edges)
                edges.append((a, b))
            e = edge_id[key]
            face_edges[f, i] = e
            face_signs[f, i] = 1 if tuple(edges[e]) == (a, b) else -1
    edges = np.array(edges, dtype=int)

    # per-face isometric charts from the embedding
    corners = np.zeros((nf, 3, 2))
    p0 = pos[faces[:, 0]]
    u = pos[faces[:, 1]] - p0
    v = pos[faces[:, 2]] - p0
    lu = np.linalg.norm(u, axis=1)
    udotv = np.sum(u * v, axis=1)
    cross = np.cross(u, v)
    areas2 = np.linalg.norm(cross, axis=1)
    if np.any(lu <= 0) or np.any(areas2 <= 0):
        raise MeshError("degenerate face in OFF file")
    corners[:, 1, 0] = lu
    corners[:, 2, 0] = udotv / lu
    corners[:, 2, 1] = areas2 / lu

    areas = 0.5 * areas2
    chi = nv - len(edges) + nf
    if chi % 2 != 0:
        raise MeshError("non-orientable or broken complex")
    mesh = SurfaceMesh(
        nv=nv,
        edges=edges,
        faces=faces,
        face_edges=face_edges,
        face_signs=face_signs,
        corners=corners,
        areas=areas,
        genus=(2 - chi) // 2,
        positions=pos,
    )
    mesh.validate()
    return mesh
