"""Sweep orchestration: assemble, solve and invert over all frequencies.

One sweep solves the boundary-element system at the N/2+1 complex
frequencies omega_k = k*dw - i*eta, collects the requested probe DOFs,
completes each probe spectrum by conjugate symmetry, and inverts it with
the selected frequency window and exponential rescaling.

Frequencies are processed in ascending order.  With solution
extrapolation enabled the solves are inherently sequential (each initial
guess depends on earlier solutions); with it disabled the frequencies
are independent and may be distributed over a process pool.  Outputs are
collected in index order either way, so results are identical across
worker counts.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import Assembler, apply_bcs, scatter_solution
from .config import SweepConfig
from .linsolve import SolutionHistory, SolveStats, block_diag_precond, gmres, sem_initial_guess
from .transform import conjugate_fill, eta_from_kappa, forward_mft, frequency_grid, inverse_mft

logger = logging.getLogger(__name__)


class SweepError(RuntimeError):
    """A frequency solve failed in a way that invalidates the sweep."""


@dataclass
class SweepResult:
    times: np.ndarray                       # (N,) sample instants [s]
    histories: dict[str, np.ndarray]        # probe name -> (N,) real samples
    half_spectra: dict[str, np.ndarray]     # probe name -> (N/2+1,) complex
    stats: list[SolveStats]
    manifest: dict
    failed_frequencies: list[int] = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return sum(s.iterations for s in self.stats)


def _solve_one(assembler: Assembler, cfg: SweepConfig, spectra: np.ndarray,
               k: int, omega: complex, x0: np.ndarray | None):
    """Assemble and solve frequency index k; returns (a, u, t, stats)."""
    t_mat, u_mat = assembler.assemble_tu(omega)
    prescribed = spectra[cfg.bcs.flat_signal(), k]
    system = apply_bcs(t_mat, u_mat, cfg.bcs, prescribed)
    del t_mat, u_mat  # only A is kept while solving
    precond = block_diag_precond(system.A)
    a, stats = gmres(system.A, system.b, x0=x0, tol=cfg.tol,
                     restart=cfg.restart, maxiter=cfg.maxiter, precond=precond)
    stats.k = k
    stats.omega = omega
    u, t = scatter_solution(system, a, prescribed)
    return a, u, t, stats


# Process-pool state: populated once per worker via fork inheritance.
_POOL_STATE: dict = {}


def _pool_init(assembler, cfg, spectra, omegas):
    _POOL_STATE["args"] = (assembler, cfg, spectra, omegas)


def _pool_task(k: int):
    assembler, cfg, spectra, omegas = _POOL_STATE["args"]
    _, u, t, stats = _solve_one(assembler, cfg, spectra, k, omegas[k], None)
    probe_vals = _collect_probes(cfg, u, t)
    return k, probe_vals, stats


def _collect_probes(cfg: SweepConfig, u: np.ndarray, t: np.ndarray) -> np.ndarray:
    vals = np.empty(len(cfg.probes), dtype=complex)
    for i, p in enumerate(cfg.probes):
        vals[i] = u[p.dof] if p.quantity == "displacement" else t[p.dof]
    return vals


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run the full transient analysis described by ``cfg``."""
    t_begin = time.perf_counter()
    eta = eta_from_kappa(cfg.kappa, cfg.period)
    omegas = frequency_grid(cfg.period, cfg.n_omega, eta)
    n_freq = len(omegas)
    logger.info("sweep: %d elements, %d frequencies, eta=%.4g 1/s",
                cfg.mesh.n_elements, n_freq, eta)

    # Boundary-signal spectra, one row per signal (row 0 is the zero signal).
    spectra = np.stack([
        forward_mft(sig, cfg.period, cfg.n_omega, eta).values[:n_freq]
        for sig in cfg.signals
    ])

    assembler = Assembler(cfg.mesh, cfg.material)
    assembler.static_offdiag_rowsums()  # materialise before any fork

    probe_spectra = np.empty((len(cfg.probes), n_freq), dtype=complex)
    stats_list: list[SolveStats] = [None] * n_freq  # type: ignore[list-item]

    parallel = cfg.workers > 1 and not cfg.sem_enabled
    if parallel:
        # Workers inherit the assembled state through fork; nothing is pickled.
        ctx = multiprocessing.get_context("fork")
        _pool_init(assembler, cfg, spectra, omegas)
        with ProcessPoolExecutor(max_workers=cfg.workers, mp_context=ctx) as pool:
            for k, probe_vals, stats in pool.map(_pool_task, range(n_freq)):
                probe_spectra[:, k] = probe_vals
                stats_list[k] = stats
        _POOL_STATE.clear()
    else:
        if cfg.workers > 1:
            logger.info("solution extrapolation is sequential; ignoring workers=%d",
                        cfg.workers)
        history = SolutionHistory(cfg.sem_depth) if cfg.sem_enabled else None
        for k in range(n_freq):
            x0 = None
            try:
                t_mat, u_mat = assembler.assemble_tu(omegas[k])
                prescribed = spectra[cfg.bcs.flat_signal(), k]
                system = apply_bcs(t_mat, u_mat, cfg.bcs, prescribed)
                del t_mat, u_mat
                if history is not None and len(history) > 0:
                    x0 = sem_initial_guess(history, system.A, system.b)
                precond = block_diag_precond(system.A)
                a, stats = gmres(system.A, system.b, x0=x0, tol=cfg.tol,
                                 restart=cfg.restart, maxiter=cfg.maxiter,
                                 precond=precond)
            except SweepError:
                raise
            except Exception as exc:
                raise SweepError(f"frequency index {k} (omega={omegas[k]:.6g}): "
                                 f"{exc}") from exc
            stats.k = k
            stats.omega = omegas[k]
            stats_list[k] = stats
            u, t = scatter_solution(system, a, prescribed)
            probe_spectra[:, k] = _collect_probes(cfg, u, t)
            if history is not None:
                history.push(a)
            logger.debug("k=%3d iters=%4d res=%.2e", k, stats.iterations,
                         stats.final_residual)

    failed = [s.k for s in stats_list if not s.converged]
    if failed:
        logger.error("non-converged frequencies: %s", failed)

    dt = cfg.period / cfg.n_omega
    times = np.arange(cfg.n_omega) * dt
    histories: dict[str, np.ndarray] = {}
    half_spectra: dict[str, np.ndarray] = {}
    for i, p in enumerate(cfg.probes):
        half = probe_spectra[i]
        half_spectra[p.name] = half.copy()
        spec = conjugate_fill(half, cfg.period, eta)
        series = inverse_mft(spec, cfg.window, eta)
        if failed:
            series = np.full_like(series, np.nan)  # poison, never silent garbage
        histories[p.name] = series

    manifest = build_manifest(cfg, eta, time.perf_counter() - t_begin, failed)
    return SweepResult(times=times, histories=histories,
                       half_spectra=half_spectra, stats=stats_list,
                       manifest=manifest, failed_frequencies=failed)


def build_manifest(cfg: SweepConfig, eta: float, seconds: float,
                   failed: list[int]) -> dict:
    dw = 2.0 * math.pi / cfg.period
    manifest = {
        "n_elements": cfg.mesh.n_elements,
        "n_dofs": cfg.mesh.n_dofs,
        "period": cfg.period,
        "n_omega": cfg.n_omega,
        "delta_t": cfg.period / cfg.n_omega,
        "delta_omega": dw,
        "kappa": cfg.kappa,
        "eta": eta,
        "f_nyquist": cfg.n_omega * dw / (4.0 * math.pi),
        "window": cfg.window,
        "sem_enabled": cfg.sem_enabled,
        "sem_depth": cfg.sem_depth,
        "gmres_tol": cfg.tol,
        "gmres_restart": cfg.restart,
        "workers": cfg.workers,
        "elapsed_seconds": seconds,
        "failed_frequencies": failed,
    }
    return manifest


# ----------------------------------------------------------------------
# Analytic benchmark: fixed-free prismatic rod under an end step traction
# ----------------------------------------------------------------------
def analytic_rod_oracle(length: float, young: float, rho: float, p0: float,
                        t: np.ndarray):
    """Characteristics solution for a rod fixed at x=0, loaded at x=L.

    A step traction p0 applied at t=0 on the free end of a rod with zero
    Poisson ratio produces (c = sqrt(E/rho), tau = L/c):

    * free-end axial displacement: a triangular wave of period 4 tau,
      zero at t=0, peak 2 p0 L / E at t = 2 tau;
    * fixed-end axial stress: a square wave of period 4 tau that is 0 for
      t < tau, 2 p0 on (tau, 3 tau), 0 again on (3 tau, 5 tau), ...

    Returns (u_free, sigma_fixed) sampled on ``t``.  Only valid for
    nu = 0 materials, where the 3-D solution is exactly one-dimensional.
    """
    if length <= 0 or young <= 0 or rho <= 0:
        raise ValueError("rod oracle needs positive L, E, rho")
    t = np.asarray(t, dtype=float)
    c = math.sqrt(young / rho)
    tau = length / c
    phase = np.mod(t, 4.0 * tau)
    ramp = np.where(phase <= 2.0 * tau, phase, 4.0 * tau - phase)
    u_free = (p0 * c / young) * ramp
    sigma_fixed = np.where((phase > tau) & (phase < 3.0 * tau), 2.0 * p0, 0.0)
    return u_free, sigma_fixed


def rod_jump_times(length: float, young: float, rho: float,
                   t_max: float) -> np.ndarray:
    """Discontinuity instants (<= t_max) of the fixed-end stress wave."""
    c = math.sqrt(young / rho)
    tau = length / c
    count = int(math.floor((t_max - tau) / (2.0 * tau))) + 1
    if count <= 0:
        return np.empty(0)
    return tau + 2.0 * tau * np.arange(count)


# ----------------------------------------------------------------------
# Output emission
# ----------------------------------------------------------------------
def emit_outputs(result: SweepResult, cfg: SweepConfig) -> dict[str, Path]:
    """Write per-probe history CSVs, the stats CSV, the run manifest and
    (optionally) figures.  Returns a name -> path map of written files."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    for name, series in result.histories.items():
        path = out / f"history_{name}.csv"
        with path.open("w", encoding="ascii") as fh:
            fh.write("t,value\n")
            for t, v in zip(result.times, series):
                fh.write(f"{float(t)!r},{float(v)!r}\n")
        written[f"history_{name}"] = path

    stats_path = out / "solve_stats.csv"
    with stats_path.open("w", encoding="ascii") as fh:
        fh.write(SolveStats.CSV_HEADER + "\n")
        for s in result.stats:
            fh.write(s.csv_row() + "\n")
    written["solve_stats"] = stats_path

    manifest_path = out / "manifest.txt"
    with manifest_path.open("w", encoding="ascii") as fh:
        for key, value in result.manifest.items():
            fh.write(f"{key} = {value}\n")
        fh.write("# config echo\n")
        for key, value in cfg.raw:
            fh.write(f"config.{key} = {value}\n")
    written["manifest"] = manifest_path

    if cfg.figures:
        from . import report

        written.update(report.render_sweep_figures(result, out))
    return written


def read_history_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back a history CSV written by emit_outputs."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
