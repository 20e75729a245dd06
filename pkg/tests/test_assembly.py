import numpy as np
import pytest

from ewbem.assembly import (
    DIRICHLET,
    NEUMANN,
    Assembler,
    BoundaryConditionSet,
    apply_bcs,
    assemble_tu,
    scatter_solution,
)
from ewbem.kernels import kernel_blocks
from ewbem.material import Material
from ewbem.mesh import generate_box_mesh, generate_icosphere, merge_meshes
from ewbem.quadrature import QuadratureSet, gauss7, integrate_regular

STEEL0 = Material.from_young_poisson(2.11e11, 0.0, 7850.0)
ETA_ROD = 594.2155078694312  # kappa = 4 damping for the T = 0.0155 s period


def constant_translations(n_elements):
    """(N, 3) matrix whose columns are the three unit rigid translations."""
    return np.tile(np.eye(3), (n_elements, 1))


@pytest.fixture(scope="module")
def cube_assembler():
    return Assembler(generate_box_mesh((1, 1, 1), (1, 1, 1)), STEEL0)


def test_rigid_body_rowsum_near_static(cube_assembler):
    t_mat, _ = cube_assembler.assemble_tu(-1e-6j)
    ones = constant_translations(cube_assembler.mesh.n_elements)
    residual = np.abs(t_mat @ ones).max()
    assert residual <= 1e-7 * np.abs(t_mat).max()


def test_rigid_body_rowsum_static_exact(cube_assembler):
    t_static, _ = cube_assembler.assemble_static_tu()
    ones = constant_translations(cube_assembler.mesh.n_elements)
    assert np.abs(t_static @ ones).max() <= 1e-12 * np.abs(t_static).max()


def test_rigid_body_on_cavity_mesh():
    # multi-component closed boundary: identity holds across components
    box = generate_box_mesh((1, 1, 1), (2, 2, 2))
    cavity = generate_icosphere((0.5, 0.5, 0.5), 0.2, 0, flip=True, region_tag=6)
    mesh = merge_meshes([box, cavity])
    asm = Assembler(mesh, STEEL0)
    t_mat, _ = asm.assemble_tu(-1e-6j)
    residual = np.abs(t_mat @ constant_translations(mesh.n_elements)).max()
    assert residual <= 1e-7 * np.abs(t_mat).max()


def test_entries_finite_at_damped_frequency(cube_assembler):
    t_mat, u_mat = cube_assembler.assemble_tu(-1j * ETA_ROD)
    assert np.isfinite(t_mat).all() and np.isfinite(u_mat).all()
    # purely imaginary frequency gives a real system
    assert np.abs(t_mat.imag).max() <= 1e-12 * np.abs(t_mat.real).max()


def test_conjugate_reflection_symmetry(cube_assembler):
    # A(-conj(omega)) = conj(A(omega)): the identity behind the
    # conjugate-symmetric spectral fill (reflection through the
    # imaginary axis keeps the damping, negates the rotation)
    omega = 405.0 - 594.0j
    t_mat, u_mat = cube_assembler.assemble_tu(omega)
    t_ref, u_ref = cube_assembler.assemble_tu(-np.conj(omega))
    assert np.abs(t_ref - np.conj(t_mat)).max() <= 1e-12 * np.abs(t_mat).max()
    assert np.abs(u_ref - np.conj(u_mat)).max() <= 1e-12 * np.abs(u_mat).max()


def test_assembly_deterministic(cube_assembler):
    omega = 700.0 - 100.0j
    t1, u1 = cube_assembler.assemble_tu(omega)
    t2, u2 = cube_assembler.assemble_tu(omega)
    assert np.array_equal(t1, t2) and np.array_equal(u1, u2)
    # and across independent assembler instances
    t3, u3 = assemble_tu(cube_assembler.mesh, STEEL0, omega)
    assert np.array_equal(t1, t3) and np.array_equal(u1, u3)


def test_u_blocks_reciprocal_for_point_reflected_pair():
    # Two congruent triangles relating by a point reflection: the exact
    # integrals satisfy block(i, j) = block(j, i)^T, and identical mapped
    # rules preserve it to roundoff.
    verts_a = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
    center = np.array([2.5, 1.5, 0.7])
    verts_b = 2 * center - verts_a  # reflected triangle (opposite winding)
    area = 0.5
    centroid_a = verts_a.mean(axis=0)
    centroid_b = verts_b.mean(axis=0)
    normal_a = np.array([0.0, 0.0, 1.0])
    normal_b = -normal_a  # reflection flips the plane orientation
    omega = 900.0 - 50.0j

    def u_kernel(normal):
        def evaluate(xp, yp):
            return kernel_blocks(xp, yp, normal, STEEL0, omega)[0]
        return evaluate

    blk_ab = integrate_regular(u_kernel(normal_b), verts_b, area, centroid_a, gauss7())
    blk_ba = integrate_regular(u_kernel(normal_a), verts_a, area, centroid_b, gauss7())
    assert np.abs(blk_ab - blk_ba.T).max() <= 1e-6 * np.abs(blk_ab).max()


def test_u_block_symmetry_sanity_on_cube(cube_assembler):
    # constant-element collocation only approximates reciprocity between
    # generic element pairs; it must still hold at the few-percent level
    _, u_mat = cube_assembler.assemble_tu(300.0 - 40.0j)
    n_e = cube_assembler.mesh.n_elements
    blocks = u_mat.reshape(n_e, 3, n_e, 3)
    worst = 0.0
    for i in range(n_e):
        for j in range(i + 1, n_e):
            denom = np.abs(blocks[i, :, j, :]).max()
            worst = max(worst, np.abs(blocks[i, :, j, :]
                                      - blocks[j, :, i, :].T).max() / denom)
    # adjacent-pair blocks on this very coarse mesh differ at the ~10%
    # level (midpoint vs element-average); exact pairs are covered above
    assert worst <= 0.15


def test_diagonal_blocks_match_self_term_contract(cube_assembler):
    # the assembler's inlined diagonal equals the standalone self-term
    # routine plus the 0.5 I free term
    from ewbem.quadrature import self_term_t

    omega = 900.0 - 200.0j
    t_mat, _ = cube_assembler.assemble_tu(omega)
    n_e = cube_assembler.mesh.n_elements
    rowsums = cube_assembler.static_offdiag_rowsums()
    blocks = self_term_t(cube_assembler.mesh, STEEL0, omega, rowsums)
    t_blocks = t_mat.reshape(n_e, 3, n_e, 3)
    for e in range(n_e):
        expected = 0.5 * np.eye(3) + blocks[e]
        assert np.abs(t_blocks[e, :, e, :] - expected).max() \
            <= 1e-12 * np.abs(expected).max()


def test_quadrature_doubling_stability_rod():
    # Doubling every rule of the ladder moves no matrix entry by more
    # than a couple of parts in 1e5 of the matrix scale on the rod
    # fixture, even at a mid-sweep frequency where the 7-point tier must
    # also resolve the kernel phase across each element.
    mesh = generate_box_mesh((3, 1, 1), (12, 4, 4))
    omega = 32 * 2 * np.pi / 0.0155 - 1j * ETA_ROD
    t_def, u_def = Assembler(mesh, STEEL0, QuadratureSet.default()).assemble_tu(omega)
    t_ref, u_ref = Assembler(mesh, STEEL0, QuadratureSet.refined()).assemble_tu(omega)
    assert np.abs(t_def - t_ref).max() <= 2e-5 * np.abs(t_ref).max()
    assert np.abs(u_def - u_ref).max() <= 2e-5 * np.abs(u_ref).max()


# ----------------------------------------------------------------------
# boundary conditions
# ----------------------------------------------------------------------
def rod_bcs(mesh):
    bcs = BoundaryConditionSet.traction_free(mesh.n_elements)
    bcs.set_region(mesh, 0, (0, 1, 2), DIRICHLET, 0)
    bcs.set_region(mesh, 1, (0,), NEUMANN, 1)
    return bcs


def test_bc_validation():
    mesh = generate_box_mesh((1, 1, 1), (1, 1, 1))
    bcs = BoundaryConditionSet.traction_free(mesh.n_elements)
    with pytest.raises(ValueError, match="free-floating"):
        bcs.validate()
    bcs.validate(allow_floating=True)
    bcs.set_region(mesh, 0, (0, 1, 2), DIRICHLET, 0)
    bcs.validate()
    with pytest.raises(ValueError, match="no elements"):
        bcs.set_region(mesh, 99, (0,), DIRICHLET, 0)


def test_apply_bcs_zero_data_gives_zero_system(cube_assembler):
    mesh = cube_assembler.mesh
    t_mat, u_mat = cube_assembler.assemble_tu(500.0 - 80.0j)
    bcs = BoundaryConditionSet.traction_free(mesh.n_elements)
    system = apply_bcs(t_mat, u_mat, bcs, np.zeros(mesh.n_dofs, complex))
    assert np.abs(system.b).max() == 0.0
    # a = 0 solves it, and the scatter returns all-zero fields
    u, t = scatter_solution(system, np.zeros(mesh.n_dofs, complex),
                            np.zeros(mesh.n_dofs, complex))
    assert not u.any() and not t.any()


def test_apply_bcs_roundtrip_identity(cube_assembler):
    rng = np.random.default_rng(3)
    mesh = cube_assembler.mesh
    t_mat, u_mat = cube_assembler.assemble_tu(405.0 - 594.0j)
    bcs = rod_bcs(mesh)
    prescribed = rng.normal(size=mesh.n_dofs) + 1j * rng.normal(size=mesh.n_dofs)
    system = apply_bcs(t_mat, u_mat, bcs, prescribed)
    a = np.linalg.solve(system.A, system.b)
    u, t = scatter_solution(system, a, prescribed)
    residual = np.linalg.norm(t_mat @ u - u_mat @ t)
    assert residual <= 1e-9 * np.linalg.norm(u_mat @ t)
    # bookkeeping: prescribed values land in the right slots
    kinds = bcs.flat_kind()
    assert np.array_equal(u[kinds == DIRICHLET], prescribed[kinds == DIRICHLET])
    assert np.array_equal(t[kinds == NEUMANN], prescribed[kinds == NEUMANN])


def test_apply_bcs_linear_in_prescribed_data(cube_assembler):
    rng = np.random.default_rng(8)
    mesh = cube_assembler.mesh
    t_mat, u_mat = cube_assembler.assemble_tu(200.0 - 30.0j)
    bcs = rod_bcs(mesh)
    p1 = rng.normal(size=mesh.n_dofs) + 1j * rng.normal(size=mesh.n_dofs)
    p2 = rng.normal(size=mesh.n_dofs) + 1j * rng.normal(size=mesh.n_dofs)
    alpha, beta = 1.7, -0.4 + 0.9j
    b1 = apply_bcs(t_mat, u_mat, bcs, p1).b
    b2 = apply_bcs(t_mat, u_mat, bcs, p2).b
    b12 = apply_bcs(t_mat, u_mat, bcs, alpha * p1 + beta * p2).b
    assert np.abs(b12 - (alpha * b1 + beta * b2)).max() <= 1e-12 * np.abs(b12).max()


def test_apply_bcs_rejects_bad_input(cube_assembler):
    mesh = cube_assembler.mesh
    t_mat, u_mat = cube_assembler.assemble_tu(100.0 - 10.0j)
    bcs = rod_bcs(mesh)
    bad = np.full(mesh.n_dofs, np.nan, dtype=complex)
    with pytest.raises(ValueError, match="unresolved"):
        apply_bcs(t_mat, u_mat, bcs, bad)
    with pytest.raises(ValueError, match="length"):
        apply_bcs(t_mat, u_mat, bcs, np.zeros(3, complex))
