"""Flat-triangle surface meshes for centroid-collocation boundary elements.

Meshes are closed, outward-oriented triangulations of the boundary of a
3-D elastic solid.  Only flat triangles with piecewise-constant data are
supported; all per-element geometry (centroid, outward unit normal, area,
diameter) is derived once at construction time and never mutated, so a
mesh may be shared freely across workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

# Triangles with area below this fraction of the mean area are rejected
# as degenerate slivers.
DEGENERATE_AREA_REL = 1e-14

# Face labels used by the box generator, in region-tag order 0..5.
BOX_FACE_NAMES = ("x-", "x+", "y-", "y+", "z-", "z+")


class MeshError(ValueError):
    """Invalid mesh topology or geometry."""


class MeshFormatError(MeshError):
    """Mesh file could not be parsed."""


@dataclass
class TriangleMesh:
    """Triangulated surface with per-element derived geometry.

    Parameters
    ----------
    vertices : np.ndarray, shape (nv, 3)
        Vertex coordinates [m].
    triangles : np.ndarray, shape (nt, 3)
        Vertex index triples, counter-clockwise seen from outside.
    region_tag : np.ndarray, shape (nt,)
        Integer label per element, used for boundary-condition targeting.
    closed : bool
        Whether the mesh is declared a closed manifold (every undirected
        edge shared by exactly two consistently oriented triangles).
        Required by the rigid-body treatment of the singular self-terms.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    region_tag: np.ndarray
    closed: bool = True

    # Derived quantities, computed in __post_init__.
    centroids: np.ndarray = field(init=False, repr=False)   # (nt, 3)
    normals: np.ndarray = field(init=False, repr=False)     # (nt, 3)
    areas: np.ndarray = field(init=False, repr=False)       # (nt,)
    diameters: np.ndarray = field(init=False, repr=False)   # (nt,) longest edge

    def __post_init__(self) -> None:
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.region_tag is None:
            self.region_tag = np.zeros(len(self.triangles), dtype=np.int64)
        self.region_tag = np.ascontiguousarray(self.region_tag, dtype=np.int64)
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshError("triangle vertex index out of range")
        self._compute_geometry()
        self.validate()

    # ------------------------------------------------------------------
    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @property
    def n_dofs(self) -> int:
        """Three Cartesian components per element."""
        return 3 * len(self.triangles)

    def _compute_geometry(self) -> None:
        v0 = self.vertices[self.triangles[:, 0]]  # (nt, 3)
        v1 = self.vertices[self.triangles[:, 1]]
        v2 = self.vertices[self.triangles[:, 2]]
        cross = np.cross(v1 - v0, v2 - v0)  # (nt, 3)
        double_area = np.linalg.norm(cross, axis=1)  # (nt,)
        self.areas = 0.5 * double_area
        with np.errstate(invalid="ignore", divide="ignore"):
            self.normals = cross / double_area[:, None]
        self.centroids = (v0 + v1 + v2) / 3.0
        edge_lengths = np.stack(
            [
                np.linalg.norm(v1 - v0, axis=1),
                np.linalg.norm(v2 - v1, axis=1),
                np.linalg.norm(v0 - v2, axis=1),
            ],
            axis=1,
        )  # (nt, 3)
        self.diameters = edge_lengths.max(axis=1)

    # ------------------------------------------------------------------
    def validate(self) -> None:
        """Check all mesh invariants.  Raises MeshError on failure.

        Idempotent and side-effect free: derived arrays are re-checked,
        never re-computed.
        """
        nt = self.n_elements
        nv = len(self.vertices)
        if nt == 0:
            raise MeshError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= nv:
            raise MeshError("triangle vertex index out of range")
        same = (
            (self.triangles[:, 0] == self.triangles[:, 1])
            | (self.triangles[:, 1] == self.triangles[:, 2])
            | (self.triangles[:, 2] == self.triangles[:, 0])
        )
        if same.any():
            bad = int(np.flatnonzero(same)[0])
            raise MeshError(f"triangle {bad} repeats a vertex index")
        if not np.all(np.isfinite(self.vertices)):
            raise MeshError("non-finite vertex coordinates")
        mean_area = float(self.areas.mean())
        degenerate = self.areas <= DEGENERATE_AREA_REL * mean_area
        if degenerate.any():
            bad = int(np.flatnonzero(degenerate)[0])
            raise MeshError(
                f"triangle {bad} is degenerate (area {self.areas[bad]:.3e}, "
                f"mean {mean_area:.3e})"
            )
        norm_err = np.abs(np.linalg.norm(self.normals, axis=1) - 1.0)
        if norm_err.max() > 1e-12:
            raise MeshError(f"non-unit normal, max deviation {norm_err.max():.3e}")
        if self.closed:
            self._check_closed_manifold()

    def _check_closed_manifold(self) -> None:
        # Each directed edge must occur exactly once, and its reverse
        # exactly once (two triangles per undirected edge, opposite
        # orientation).
        tri = self.triangles
        edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        seen: set[tuple[int, int]] = set()
        for a, b in edges:
            key = (int(a), int(b))
            if key in seen:
                raise MeshError(f"directed edge {key} occurs twice (fold or overlap)")
            seen.add(key)
        for a, b in seen:
            if (b, a) not in seen:
                raise MeshError(
                    f"edge ({a}, {b}) has no opposite-oriented partner; "
                    "mesh is not a closed manifold"
                )


def point_triangle_distance(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to a triangle, shape (M,).

    Projects onto the triangle plane and clamps to the closest feature
    (face, edge or vertex) via barycentric region tests.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v0, v1, v2 = np.asarray(verts, dtype=float)
    e0 = v1 - v0
    e1 = v2 - v0
    w = points - v0  # (M, 3)
    a = e0 @ e0
    b = e0 @ e1
    c = e1 @ e1
    d = w @ e0  # (M,)
    e = w @ e1
    det = a * c - b * b
    s = (c * d - b * e) / det
    t = (a * e - b * d) / det
    # clamp barycentric coordinates to the triangle
    s = np.clip(s, 0.0, 1.0)
    t = np.clip(t, 0.0, 1.0)
    over = s + t > 1.0
    if np.any(over):
        # project onto the s + t = 1 edge, then re-clamp
        shift = (s[over] + t[over] - 1.0) / 2.0
        s[over] -= shift
        t[over] -= shift
        s[over] = np.clip(s[over], 0.0, 1.0)
        t[over] = np.clip(t[over], 0.0, 1.0)
    closest = v0 + s[:, None] * e0 + t[:, None] * e1
    d_plane = np.linalg.norm(points - closest, axis=1)
    # the in-plane clamp above is approximate near the slanted edge;
    # guard with distances to every edge segment as well
    for p, q in ((v0, v1), (v1, v2), (v2, v0)):
        seg = q - p
        tt = np.clip(((points - p) @ seg) / (seg @ seg), 0.0, 1.0)
        proj = p + tt[:, None] * seg
        d_plane = np.minimum(d_plane, np.linalg.norm(points - proj, axis=1))
    return d_plane


def element_geometry(mesh: TriangleMesh, e: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (centroid, outward unit normal, area) of element ``e``."""
    if not 0 <= e < mesh.n_elements:
        raise IndexError(f"element index {e} out of range")
    return mesh.centroids[e], mesh.normals[e], float(mesh.areas[e])


def element_vertices(mesh: TriangleMesh, e: int) -> np.ndarray:
    """Vertex coordinates of element ``e``, shape (3, 3)."""
    return mesh.vertices[mesh.triangles[e]]


# ----------------------------------------------------------------------
# File I/O.  ASCII format:
#   line 1:   nv nt
#   nv lines: x y z
#   nt lines: i j k [tag]      (0-based indices, tag defaults to 0)
# ----------------------------------------------------------------------
def load_mesh(path, format: str = "tri", closed: bool = True) -> TriangleMesh:
    """Load and validate a triangle mesh from an ASCII file."""
    if format != "tri":
        raise MeshFormatError(f"unknown mesh format {format!r}")
    path = Path(path)
    tokens_per_line = []
    with path.open("r", encoding="ascii") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens_per_line.append(line.split())
    if not tokens_per_line:
        raise MeshFormatError(f"{path}: empty mesh file")
    header = tokens_per_line[0]
    if len(header) != 2:
        raise MeshFormatError(f"{path}: header must be 'nv nt'")
    try:
        nv, nt = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MeshFormatError(f"{path}: bad header {header}") from exc
    if len(tokens_per_line) != 1 + nv + nt:
        raise MeshFormatError(
            f"{path}: expected {1 + nv + nt} data lines, found {len(tokens_per_line)}"
        )
    try:
        vertices = np.array(
            [[float(t) for t in row] for row in tokens_per_line[1 : 1 + nv]]
        )
        tri_rows = tokens_per_line[1 + nv :]
        triangles = np.array([[int(t) for t in row[:3]] for row in tri_rows])
        tags = np.array(
            [int(row[3]) if len(row) > 3 else 0 for row in tri_rows], dtype=np.int64
        )
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"{path}: malformed vertex or triangle line") from exc
    if vertices.shape != (nv, 3) or triangles.shape != (nt, 3):
        raise MeshFormatError(f"{path}: wrong vertex or triangle arity")
    return TriangleMesh(vertices, triangles, tags, closed=closed)


def save_mesh(mesh: TriangleMesh, path) -> None:
    """Write a mesh in the ASCII format understood by load_mesh."""
    path = Path(path)
    with path.open("w", encoding="ascii") as fh:
        fh.write(f"{len(mesh.vertices)} {mesh.n_elements}\n")
        for v in mesh.vertices:
            fh.write(f"{float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t, tag in zip(mesh.triangles, mesh.region_tag):
            fh.write(f"{t[0]} {t[1]} {t[2]} {tag}\n")


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------
def generate_box_mesh(lengths, divisions) -> TriangleMesh:
    """Closed box surface mesh with outward normals and per-face region tags.

    Parameters
    ----------
    lengths : sequence of 3 positive floats
        Box edge lengths [m]; the box spans [0, lengths[i]] on each axis.
    divisions : sequence of 3 positive ints
        Subdivisions per axis.  Each face quad is split into 2 triangles,
        giving 4*(d1*d2 + d2*d3 + d1*d3) elements in total.

    Region tags follow BOX_FACE_NAMES: 0,1 = x-,x+; 2,3 = y-,y+; 4,5 = z-,z+.
    Output is deterministic (bit-identical) for equal inputs.
    """
    lengths = [float(x) for x in lengths]
    divisions = [int(d) for d in divisions]
    if min(lengths) <= 0:
        raise ValueError("box lengths must be positive")
    if min(divisions) < 1:
        raise ValueError("box divisions must be >= 1")

    dx = [lengths[i] / divisions[i] for i in range(3)]
    vertex_index: dict[tuple[int, int, int], int] = {}
    vertices: list[tuple[float, float, float]] = []

    def vid(i: int, j: int, k: int) -> int:
        key = (i, j, k)
        idx = vertex_index.get(key)
        if idx is None:
            idx = len(vertices)
            vertex_index[key] = idx
            vertices.append((i * dx[0], j * dx[1], k * dx[2]))
        return idx

    # Each face: (fixed axis, lattice value, axis_a, axis_b) chosen so that
    # unit(a) x unit(b) is the outward normal.
    faces = [
        (0, 0, 2, 1),             # x-: z x y = -x
        (0, divisions[0], 1, 2),  # x+: y x z = +x
        (1, 0, 0, 2),             # y-: x x z = -y
        (1, divisions[1], 2, 0),  # y+: z x x = +y
        (2, 0, 1, 0),             # z-: y x x = -z
        (2, divisions[2], 0, 1),  # z+: x x y = +z
    ]
    triangles: list[tuple[int, int, int]] = []
    tags: list[int] = []
    for tag, (ax_fixed, val, ax_a, ax_b) in enumerate(faces):
        for a in range(divisions[ax_a]):
            for b in range(divisions[ax_b]):
                lattice = {}
                for da, db, corner in ((0, 0, "00"), (1, 0, "10"), (1, 1, "11"), (0, 1, "01")):
                    coord = [0, 0, 0]
                    coord[ax_fixed] = val
                    coord[ax_a] = a + da
                    coord[ax_b] = b + db
                    lattice[corner] = vid(*coord)
                triangles.append((lattice["00"], lattice["10"], lattice["11"]))
                triangles.append((lattice["00"], lattice["11"], lattice["01"]))
                tags.extend((tag, tag))

    return TriangleMesh(
        np.array(vertices, dtype=np.float64),
        np.array(triangles, dtype=np.int64),
        np.array(tags, dtype=np.int64),
        closed=True,
    )


def generate_icosphere(center, radius: float, subdivisions: int = 1,
                       flip: bool = False, region_tag: int = 0) -> TriangleMesh:
    """Icosahedron-based sphere mesh.

    With ``flip=True`` the winding is reversed so normals point toward the
    sphere center, as required for a cavity surface inside a solid.
    The result is a closed manifold on its own; combine with an outer
    surface via merge_meshes to model a solid with cavities.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
            (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
            (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
        ],
        dtype=np.float64,
    )
    tris = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    for _ in range(max(0, int(subdivisions))):
        verts, tris = _subdivide_once(verts, tris)
    verts = verts / np.linalg.norm(verts, axis=1)[:, None]
    verts = np.asarray(center, dtype=float) + radius * verts
    if flip:
        tris = tris[:, [0, 2, 1]]
    tags = np.full(len(tris), region_tag, dtype=np.int64)
    return TriangleMesh(verts, tris, tags, closed=True)


def _subdivide_once(verts: np.ndarray, tris: np.ndarray):
    verts = list(map(tuple, verts))
    midpoint: dict[tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = midpoint.get(key)
        if idx is None:
            idx = len(verts)
            midpoint[key] = idx
            pa, pb = np.array(verts[a]), np.array(verts[b])
            verts.append(tuple((pa + pb) / 2.0))
        return idx

    out = []
    for a, b, c in tris:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(verts, dtype=np.float64), np.array(out, dtype=np.int64)


def merge_meshes(meshes) -> TriangleMesh:
    """Concatenate meshes (e.g. outer box plus cavity spheres).

    Each input must be closed on its own; the union is then a valid
    multi-component closed boundary.
    """
    meshes = list(meshes)
    if not meshes:
        raise ValueError("no meshes to merge")
    verts, tris, tags = [], [], []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        tags.append(m.region_tag)
        offset += len(m.vertices)
    return TriangleMesh(
        np.concatenate(verts), np.concatenate(tris), np.concatenate(tags),
        closed=all(m.closed for m in meshes),
    )
