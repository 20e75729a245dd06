"""Transient elastodynamic boundary-element analysis via exponentially
windowed frequency-domain sweeps."""

__version__ = "0.1.0"

from .assembly import (
    Assembler,
    BoundaryConditionSet,
    DenseSystem,
    apply_bcs,
    assemble_tu,
    scatter_solution,
)
from .config import Probe, SweepConfig, parse_config
from .driver import SweepResult, analytic_rod_oracle, emit_outputs, run_sweep
from .kernels import displacement_kernel, phi_psi, static_kernels, traction_kernel
from .linsolve import SolutionHistory, SolveStats, block_diag_precond, gmres, sem_initial_guess
from .material import Material, wave_speeds, wavenumbers
from .mesh import TriangleMesh, element_geometry, generate_box_mesh, load_mesh, save_mesh
from .quadrature import QuadratureSet, TriangleRule, integrate_regular, integrate_weakly_singular
from .transform import (
    Spectrum,
    TimeSignal,
    conjugate_fill,
    eta_from_kappa,
    forward_mft,
    inverse_mft,
    window_weights,
)
