"""Dense collocation assembly of the boundary operators and BC application.

The discretized boundary integral equation at one frequency reads
T u = U t, where row block i collocates at the centroid of element i and
column block j integrates the kernel over element j.  The free term
(0.5 I at smooth points) is absorbed into the diagonal of T together
with the rigid-body treatment of the strongly singular self integral.

Applying the boundary conditions swaps columns between T and U so that
all unknowns end up in a single vector a:  A(omega) a = b.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .kernels import (
    integrated_blocks,
    integrated_blocks_static,
    pair_geometry,
)
from .material import Material
from .mesh import TriangleMesh, element_vertices, point_triangle_distance
from .quadrature import QuadratureSet, self_rule_points

logger = logging.getLogger(__name__)

# Boundary-condition kinds, per DOF.
NEUMANN = 0    # traction prescribed, displacement unknown
DIRICHLET = 1  # displacement prescribed, traction unknown


class BoundaryConditionError(ValueError):
    """Inconsistent or incomplete boundary-condition specification."""


@dataclass
class BoundaryConditionSet:
    """Per-element, per-component BC kinds and signal assignments.

    ``kind[e, c]`` is NEUMANN or DIRICHLET; ``signal_index[e, c]`` names
    the time signal whose spectrum supplies the prescribed value (index
    into the driver's signal table; index 0 is conventionally the zero
    signal).  Every DOF has exactly one kind; the default is homogeneous
    Neumann (traction free).
    """

    kind: np.ndarray          # (n_elements, 3) uint8
    signal_index: np.ndarray  # (n_elements, 3) int32

    @classmethod
    def traction_free(cls, n_elements: int) -> "BoundaryConditionSet":
        return cls(
            kind=np.zeros((n_elements, 3), dtype=np.uint8),
            signal_index=np.zeros((n_elements, 3), dtype=np.int32),
        )

    def set_region(self, mesh: TriangleMesh, region_tag: int, components,
                   kind: int, signal_index: int) -> None:
        """Assign one BC kind/signal to components of all elements in a region."""
        elements = np.flatnonzero(mesh.region_tag == region_tag)
        if elements.size == 0:
            raise BoundaryConditionError(f"region tag {region_tag} matches no elements")
        for c in components:
            self.kind[elements, c] = kind
            self.signal_index[elements, c] = signal_index

    def validate(self, allow_floating: bool = False) -> None:
        if not allow_floating and not (self.kind == DIRICHLET).any():
            raise BoundaryConditionError(
                "no Dirichlet DOF anywhere: the solid is free-floating "
                "(set allow_floating to override)"
            )

    def flat_kind(self) -> np.ndarray:
        """(N,) per-DOF kinds; DOF index = 3 * element + component."""
        return self.kind.reshape(-1)

    def flat_signal(self) -> np.ndarray:
        return self.signal_index.reshape(-1)


@dataclass
class DenseSystem:
    """One solvable frequency-domain system A a = b.

    ``unknown_kind`` records, per DOF, whether the unknown collected in
    ``a`` is a displacement (NEUMANN DOFs) or a traction (DIRICHLET DOFs).
    """

    A: np.ndarray             # (N, N) complex
    b: np.ndarray             # (N,) complex
    unknown_kind: np.ndarray  # (N,) uint8, NEUMANN -> displacement unknown

    @property
    def n(self) -> int:
        return len(self.b)


class Assembler:
    """Builds dense T and U collocation matrices for one mesh/material.

    Geometry-dependent data (quadrature points per element and rule tier,
    the rule-selection table, and the static traction row sums needed by
    the rigid-body self-term) are computed once and reused across all
    frequencies of a sweep.
    """

    def __init__(self, mesh: TriangleMesh, material: Material,
                 quadrature: QuadratureSet | None = None):
        self.mesh = mesh
        self.material = material
        self.quad = quadrature or QuadratureSet.default()
        self._prepare_geometry()
        self._static_rowsums: np.ndarray | None = None
        self._static_tu: tuple[np.ndarray, np.ndarray] | None = None

    # ------------------------------------------------------------------
    def _prepare_geometry(self) -> None:
        """Precompute all frequency-independent pair data.

        For every element column j and rule tier, store the collocation
        rows using that tier together with (r, d, dr/dn) for the
        (rows x quadrature points) grid, plus the self-rule geometry.
        Roughly 40 bytes per point pair; a 448-element mesh needs ~50 MB.
        """
        mesh = self.mesh
        n_e = mesh.n_elements
        dist = np.linalg.norm(
            mesh.centroids[:, None, :] - mesh.centroids[None, :, :], axis=-1
        )  # (n_e, n_e)
        ratio = dist / mesh.diameters[None, :]
        rule_id = self.quad.classify(ratio)  # (n_e, n_e)
        # Cache the subdivided near rules actually used by this mesh.
        near_rules: dict[int, object] = {}
        x_all = mesh.centroids
        self._columns = []  # [j] -> list of (rows, weights, r, d, drdn)
        self._selfs = []    # [j] -> (weights, r, d, drdn)
        for j in range(n_e):
            verts = element_vertices(mesh, j)
            area = mesh.areas[j]
            normal = mesh.normals[j]
            buckets = []  # (rows, rule) sharing one set of field points
            for tier, rule in ((0, self.quad.far), (1, self.quad.mid)):
                rows = np.flatnonzero(rule_id[:, j] == tier)
                rows = rows[rows != j]
                if rows.size:
                    buckets.append((rows, rule))
            near_rows = np.flatnonzero(rule_id[:, j] == 2)
            near_rows = near_rows[near_rows != j]
            if near_rows.size:
                separation = point_triangle_distance(x_all[near_rows], verts)
                levels = self.quad.near_level(separation / mesh.diameters[j])
                for level in np.unique(levels):
                    if level not in near_rules:
                        near_rules[level] = self.quad.near_rule(level)
                    buckets.append((near_rows[levels == level],
                                    near_rules[level]))
            per_tier = []
            for rows, rule in buckets:
                y = rule.mapped(verts)
                r, d, drdn = pair_geometry(x_all[rows], y, normal)
                per_tier.append((rows, rule.weights * area, r, d, drdn))
            self._columns.append(per_tier)
            y_self, w_self = self_rule_points(verts, self.quad.duffy_radial,
                                              self.quad.duffy_angular)
            r, d, drdn = pair_geometry(x_all[j][None, :], y_self, normal)
            self._selfs.append((w_self, r, d, drdn))

    # ------------------------------------------------------------------
    def static_offdiag_rowsums(self) -> np.ndarray:
        """Row sums of the off-diagonal static traction integrals.

        Frequency independent; computed once per mesh and consumed by the
        rigid-body self-term at every frequency.
        """
        if self._static_rowsums is None:
            self._assemble_static()
        return self._static_rowsums

    def assemble_static_tu(self):
        """Static (Kelvin) T and U with the rigid-body diagonal, real systems.

        Used for the omega = 0 sample of an undamped sweep.
        """
        if self._static_tu is None:
            self._assemble_static()
        return self._static_tu

    def _assemble_static(self) -> None:
        mesh = self.mesh
        n_e = mesh.n_elements
        t_mat = np.zeros((n_e, 3, n_e, 3), dtype=float)
        u_mat = np.zeros((n_e, 3, n_e, 3), dtype=float)
        for j in range(n_e):
            normal = mesh.normals[j]
            for rows, w, r, d, drdn in self._columns[j]:
                u_int, t_int = integrated_blocks_static(r, d, drdn, w, normal,
                                                        self.material)
                u_mat[rows, :, j, :] = u_int
                t_mat[rows, :, j, :] = t_int
        rowsums = t_mat.sum(axis=2)  # (n_e, 3, 3) over columns, diag still zero
        self._static_rowsums = rowsums
        # Rigid-body diagonal: free term + CPV self integral combine to
        # minus the off-diagonal static row sum.
        for e in range(n_e):
            t_mat[e, :, e, :] = -rowsums[e]
            w, r, d, drdn = self._selfs[e]
            u_self, _ = integrated_blocks_static(r, d, drdn, w,
                                                 mesh.normals[e], self.material)
            u_mat[e, :, e, :] = u_self[0]
        n = 3 * n_e
        self._static_tu = (t_mat.reshape(n, n), u_mat.reshape(n, n))

    # ------------------------------------------------------------------
    def assemble_tu(self, omega: complex):
        """Dense T and U at a complex frequency, free term absorbed into T.

        Returns (T, U) as (N, N) complex arrays, N = 3 * n_elements.
        """
        if omega == 0:
            t_static, u_static = self.assemble_static_tu()
            return t_static.astype(complex), u_static.astype(complex)
        mesh = self.mesh
        mat = self.material
        n_e = mesh.n_elements
        rowsums = self.static_offdiag_rowsums()
        t_mat = np.zeros((n_e, 3, n_e, 3), dtype=complex)
        u_mat = np.zeros((n_e, 3, n_e, 3), dtype=complex)
        for j in range(n_e):
            normal = mesh.normals[j]
            for rows, w, r, d, drdn in self._columns[j]:
                u_int, t_int = integrated_blocks(r, d, drdn, w, normal, mat, omega)
                u_mat[rows, :, j, :] = u_int
                t_mat[rows, :, j, :] = t_int
            # Self terms: weakly singular U, rigid-body + dynamic-static T.
            w_self, r, d, drdn = self._selfs[j]
            u_dyn, t_dyn = integrated_blocks(r, d, drdn, w_self, normal, mat, omega)
            _, t_sta = integrated_blocks_static(r, d, drdn, w_self, normal, mat)
            u_mat[j, :, j, :] = u_dyn[0]
            # free term 0.5 I cancels against the rigid-body bracket,
            # leaving minus the static off-diagonal row sum.
            t_mat[j, :, j, :] = -rowsums[j] + (t_dyn[0] - t_sta[0])
        n = 3 * n_e
        t_out = t_mat.reshape(n, n)
        u_out = u_mat.reshape(n, n)
        if not (np.isfinite(t_out).all() and np.isfinite(u_out).all()):
            raise FloatingPointError(
                f"non-finite entries assembled at omega = {omega}"
            )
        return t_out, u_out


def assemble_tu(mesh: TriangleMesh, material: Material, omega: complex,
                quadrature: QuadratureSet | None = None):
    """One-shot assembly; prefer a persistent Assembler inside sweeps."""
    return Assembler(mesh, material, quadrature).assemble_tu(omega)


def apply_bcs(t_mat: np.ndarray, u_mat: np.ndarray,
              bcs: BoundaryConditionSet,
              prescribed: np.ndarray) -> DenseSystem:
    """Turn T u = U t plus BC data into a single system A a = b.

    Per DOF column d: if the traction is unknown (Dirichlet), the A
    column is -U[:, d] and the prescribed displacement contributes
    -T[:, d] * u_bar to b; if the displacement is unknown (Neumann), the
    A column is T[:, d] and the prescribed traction contributes
    +U[:, d] * t_bar to b.

    Parameters
    ----------
    prescribed : (N,) complex
        Per-DOF prescribed boundary value at this frequency (displacement
        for Dirichlet DOFs, traction for Neumann DOFs).
    """
    kinds = bcs.flat_kind()
    n = len(kinds)
    if t_mat.shape != (n, n) or u_mat.shape != (n, n):
        raise ValueError("matrix/BC size mismatch")
    prescribed = np.asarray(prescribed, dtype=complex)
    if prescribed.shape != (n,):
        raise ValueError("prescribed spectrum has wrong length")
    if not np.isfinite(prescribed).all():
        raise ValueError("unresolved (non-finite) prescribed boundary value")

    dirichlet = kinds == DIRICHLET
    neumann = ~dirichlet
    a_mat = np.empty((n, n), dtype=complex)
    a_mat[:, neumann] = t_mat[:, neumann]
    a_mat[:, dirichlet] = -u_mat[:, dirichlet]
    b = u_mat[:, neumann] @ prescribed[neumann]
    b -= t_mat[:, dirichlet] @ prescribed[dirichlet]
    return DenseSystem(A=a_mat, b=b, unknown_kind=kinds.copy())


def scatter_solution(system: DenseSystem, a: np.ndarray,
                     prescribed: np.ndarray):
    """Recover full displacement and traction DOF vectors (u, t)."""
    u = np.where(system.unknown_kind == NEUMANN, a, prescribed)
    t = np.where(system.unknown_kind == DIRICHLET, a, prescribed)
    return u, t
