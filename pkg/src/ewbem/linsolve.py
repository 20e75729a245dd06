"""Sequential complex dense solves: restarted GMRES, block-diagonal
preconditioning, and least-squares extrapolation of initial guesses.

The sweep produces a family A(omega_k) a_k = b_k of dense complex
systems.  Each is solved by right-preconditioned restarted GMRES; right
preconditioning keeps the monitored residual equal to the true residual
||b - A x||, so the convergence test needs no back-substitution.

Because neighbouring frequencies have similar solutions, the initial
guess for system k can be extrapolated from the previous K solutions:
x0 = X s where X stacks those solutions column-wise and s minimises
||A_k X s - b_k||_2 via a thin QR factorisation of Y = A_k X.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class SolveStats:
    """Per-solve record emitted into the stats CSV."""

    k: int = -1                      # frequency index within the sweep
    omega: complex = 0.0
    iterations: int = 0
    init_residual: float = 0.0       # ||b - A x0|| / ||b||
    final_residual: float = 0.0      # true relative residual at exit
    seconds: float = 0.0
    converged: bool = True
    residual_history: list = field(default_factory=list, repr=False)

    CSV_HEADER = "k,omega_re,omega_im,iterations,init_residual,final_residual,seconds"

    def csv_row(self) -> str:
        omega = complex(self.omega)
        return (
            f"{self.k},{omega.real!r},{omega.imag!r},"
            f"{self.iterations},{float(self.init_residual)!r},"
            f"{float(self.final_residual)!r},{float(self.seconds)!r}"
        )


class SolutionHistory:
    """Ring buffer of the most recent solution vectors, newest first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("history capacity must be >= 1")
        self.capacity = capacity
        self._buf: deque[np.ndarray] = deque(maxlen=capacity)

    def push(self, x: np.ndarray) -> None:
        self._buf.appendleft(np.array(x, dtype=complex, copy=True))

    def __len__(self) -> int:
        return len(self._buf)

    def matrix(self) -> np.ndarray:
        """Stack stored solutions as columns (N, K), newest first."""
        if not self._buf:
            raise ValueError("empty solution history")
        return np.stack(list(self._buf), axis=1)


def _as_operator(a):
    if callable(a):
        return a
    mat = np.asarray(a)
    return lambda v: mat @ v


def block_diag_precond(a_mat: np.ndarray):
    """Inverse of the 3x3 collocation-point diagonal blocks of ``a_mat``.

    Returns an operator v -> P^{-1} v.  Blocks are factorised once; a
    singular block falls back to the identity with a warning.
    """
    n = a_mat.shape[0]
    if a_mat.shape != (n, n) or n % 3:
        raise ValueError("matrix must be square with size divisible by 3")
    nb = n // 3
    blocks = np.empty((nb, 3, 3), dtype=complex)
    for i in range(nb):
        blocks[i] = a_mat[3 * i : 3 * i + 3, 3 * i : 3 * i + 3]
    inv = np.empty_like(blocks)
    for i in range(nb):
        try:
            inv[i] = np.linalg.inv(blocks[i])
        except np.linalg.LinAlgError:
            logger.warning("singular 3x3 diagonal block %d; identity fallback", i)
            inv[i] = np.eye(3)

    def apply(v: np.ndarray) -> np.ndarray:
        return np.einsum("bij,bj->bi", inv, v.reshape(nb, 3)).reshape(n)

    return apply


def gmres(apply_a, b: np.ndarray, x0: np.ndarray | None = None,
          tol: float = 1e-5, restart: int = 60, maxiter: int = 1000,
          precond=None) -> tuple[np.ndarray, SolveStats]:
    """Right-preconditioned restarted GMRES for complex dense systems.

    Parameters
    ----------
    apply_a : (N, N) array or callable v -> A v.
    b : (N,) right-hand side.
    x0 : optional initial guess (zero if omitted).
    tol : relative tolerance on the true residual ||b - A x|| / ||b||.
    restart : Arnoldi cycle length.
    maxiter : cap on total inner iterations; exceeding it returns the
        best iterate with ``converged=False``.
    precond : optional operator v -> M^{-1} v applied on the right.

    Returns
    -------
    (x, stats); ``stats.residual_history`` holds the per-iteration
    residual norm estimates, non-increasing within each restart cycle.
    """
    t_start = time.perf_counter()
    mv = _as_operator(apply_a)
    pc = precond if precond is not None else (lambda v: v)
    b = np.asarray(b, dtype=complex)
    n = b.shape[0]
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must be in (0, 1), got {tol}")

    norm_b = np.linalg.norm(b)
    stats = SolveStats()
    if norm_b == 0.0:
        stats.seconds = time.perf_counter() - t_start
        return np.zeros(n, dtype=complex), stats

    x = (np.zeros(n, dtype=complex) if x0 is None
         else np.array(x0, dtype=complex, copy=True))
    r = b - mv(x) if x.any() else b.copy()
    res = np.linalg.norm(r) / norm_b
    stats.init_residual = res
    stats.residual_history.append(res)

    total_iters = 0
    while res > tol and total_iters < maxiter:
        # One Arnoldi cycle with Givens-rotation least squares.
        m = min(restart, maxiter - total_iters)
        v_basis = np.empty((m + 1, n), dtype=complex)
        h = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m, dtype=complex)
        sn = np.zeros(m, dtype=complex)
        beta = np.linalg.norm(r)
        v_basis[0] = r / beta
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        j_used = 0
        for j in range(m):
            w = mv(pc(v_basis[j]))
            # modified Gram-Schmidt
            for i in range(j + 1):
                h[i, j] = np.vdot(v_basis[i], w)
                w -= h[i, j] * v_basis[i]
            h[j + 1, j] = np.linalg.norm(w)
            if h[j + 1, j] > 0:
                v_basis[j + 1] = w / h[j + 1, j]
            # apply previous rotations to the new column
            for i in range(j):
                tmp = cs[i] * h[i, j] + sn[i] * h[i + 1, j]
                h[i + 1, j] = -np.conj(sn[i]) * h[i, j] + np.conj(cs[i]) * h[i + 1, j]
                h[i, j] = tmp
            # new rotation zeroing h[j+1, j]; c real, s complex
            denom = np.sqrt(abs(h[j, j]) ** 2 + abs(h[j + 1, j]) ** 2)
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            elif h[j, j] == 0.0:
                cs[j], sn[j] = 0.0, 1.0
            else:
                cs[j] = abs(h[j, j]) / denom
                sn[j] = (h[j, j] / abs(h[j, j])) * np.conj(h[j + 1, j]) / denom
            h[j, j] = cs[j] * h[j, j] + sn[j] * h[j + 1, j]
            h[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            total_iters += 1
            j_used = j + 1
            res_est = abs(g[j + 1]) / norm_b
            stats.residual_history.append(res_est)
            if res_est <= tol:
                break
        # solve the triangular system and update x
        y = np.zeros(j_used, dtype=complex)
        for i in range(j_used - 1, -1, -1):
            y[i] = (g[i] - h[i, i + 1 : j_used] @ y[i + 1 : j_used]) / h[i, i]
        x = x + pc(v_basis[:j_used].T @ y)
        r = b - mv(x)
        res = np.linalg.norm(r) / norm_b  # true residual, recomputed

    stats.iterations = total_iters
    stats.final_residual = res
    stats.converged = res <= tol
    stats.seconds = time.perf_counter() - t_start
    if not stats.converged:
        logger.warning("GMRES stalled at residual %.3e after %d iterations",
                       res, total_iters)
    return x, stats


def sem_initial_guess(history: SolutionHistory, apply_a, b: np.ndarray,
                      rank_tol: float = 1e-10) -> np.ndarray:
    """Least-squares extrapolated initial guess from previous solutions.

    Computes Y = A X (one operator application per stored solution),
    takes the thin QR of Y and returns x0 = X R^{-1} Q^* b, the minimiser
    of ||A x0 - b||_2 over the span of the stored solutions.

    Near-parallel history columns are dropped: any column whose
    orthogonalised norm |R_ii| falls below ``rank_tol`` times the largest
    is removed and the QR is redone.  If nothing usable remains, the most
    recent solution is returned unchanged.
    """
    mv = _as_operator(apply_a)
    x_mat = history.matrix()  # (N, K), newest first
    y_mat = np.stack([mv(x_mat[:, i]) for i in range(x_mat.shape[1])], axis=1)

    keep = np.arange(x_mat.shape[1])
    for _ in range(2):
        q, r = np.linalg.qr(y_mat[:, keep])
        diag = np.abs(np.diag(r))
        good = diag >= rank_tol * diag.max() if diag.max() > 0 else diag > 0
        if good.all():
            s = np.linalg.solve(r, q.conj().T @ b)
            return (x_mat[:, keep] @ s).astype(complex)
        keep = keep[good]
        if keep.size == 0:
            break
    logger.debug("extrapolation rank-deficient; falling back to last solution")
    return x_mat[:, 0].copy()
