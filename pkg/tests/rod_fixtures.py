"""Shared rod-benchmark builders used across the test modules.

The reference problem: a 3 m x 1 m x 1 m prismatic rod, fixed at the
x = 0 face, loaded by a step traction P0 = -1e6 N/m^2 in x on the x = 3
face, all other surfaces traction free, zero Poisson ratio (the exact
solution is then one-dimensional).
"""

from __future__ import annotations

import numpy as np

from ewbem.assembly import DIRICHLET, NEUMANN, BoundaryConditionSet
from ewbem.config import Probe, SweepConfig
from ewbem.material import Material
from ewbem.mesh import TriangleMesh, generate_box_mesh
from ewbem.transform import TimeSignal

ROD_LENGTH = 3.0
ROD_E = 2.11e11
ROD_RHO = 7850.0
ROD_P0 = -1e6
ROD_PERIOD = 0.0155


def rod_material() -> Material:
    return Material.from_young_poisson(ROD_E, 0.0, ROD_RHO)


def face_center_element(mesh: TriangleMesh, tag: int) -> int:
    members = np.flatnonzero(mesh.region_tag == tag)
    center = mesh.centroids[members].mean(axis=0)
    return int(members[np.argmin(
        np.linalg.norm(mesh.centroids[members] - center, axis=1))])


def rod_boundary_conditions(mesh: TriangleMesh) -> BoundaryConditionSet:
    bcs = BoundaryConditionSet.traction_free(mesh.n_elements)
    bcs.set_region(mesh, 0, (0, 1, 2), DIRICHLET, 0)  # x- face fixed
    bcs.set_region(mesh, 1, (0,), NEUMANN, 1)         # x+ face axial load
    return bcs


def rod_bcs_and_spectra(mesh: TriangleMesh, amplitude: float):
    """BC set plus a single-frequency prescribed DOF vector."""
    bcs = rod_boundary_conditions(mesh)
    prescribed = np.zeros(mesh.n_dofs, dtype=complex)
    loaded = np.flatnonzero(mesh.region_tag == 1)
    prescribed[3 * loaded] = amplitude
    return bcs, prescribed


def rod_sweep_config(divisions=(12, 4, 4), n_omega=128, kappa=4.0,
                     window="hanning", sem=True, period=ROD_PERIOD,
                     amplitude=ROD_P0, figures=False, **overrides) -> SweepConfig:
    mesh = generate_box_mesh((ROD_LENGTH, 1.0, 1.0), divisions)
    probes = [
        Probe("tip_ux", face_center_element(mesh, 1), 0, "displacement"),
        Probe("mid_ux", _mid_lateral_element(mesh), 0, "displacement"),
        Probe("root_tx", face_center_element(mesh, 0), 0, "traction"),
    ]
    return SweepConfig(
        mesh=mesh,
        material=rod_material(),
        bcs=rod_boundary_conditions(mesh),
        signals=[TimeSignal.zero(), TimeSignal.heaviside(amplitude)],
        signal_names=["zero", "load"],
        probes=probes,
        period=period,
        n_omega=n_omega,
        kappa=kappa,
        window=window,
        sem_enabled=sem,
        sem_depth=4,
        figures=figures,
        **overrides,
    )


def _mid_lateral_element(mesh: TriangleMesh) -> int:
    members = np.flatnonzero(mesh.region_tag == 4)  # z- face
    target = np.array([ROD_LENGTH / 2, 0.5, 0.0])
    return int(members[np.argmin(
        np.linalg.norm(mesh.centroids[members] - target, axis=1))])
