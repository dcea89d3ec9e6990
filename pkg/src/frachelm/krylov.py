"""Complex BiCG-STAB with left preconditioning.

Reference: H. A. van der Vorst, SIAM J. Sci. Stat. Comput. 13(2), 1992.

The iteration runs on ``M^{-1} A x = M^{-1} b`` and the recursively updated
residual is the preconditioned one. Convergence is only declared once the
true residual ``||b - A x|| / ||b||`` is below ``tol``; that check costs one
extra operator application and is counted separately from the two
applications every iteration performs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ._kernels import row_sq_norms, scaled_difference, update_direction, update_solution
from .errors import BreakdownError, DimensionError

BREAKDOWN_EPS = 1e-30
STALL_CHECKS = 3


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool
    history: np.ndarray
    block_residuals: Optional[Tuple[float, float, float]] = None
    block_history: Optional[np.ndarray] = field(default=None, repr=False)
    final_preconditioned_residual: float = float("nan")
    operator_applications: int = 0
    true_residual_checks: int = 0
    status: str = "converged"
    restarts: int = 0

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_relative_residual": self.final_relative_residual,
            "final_preconditioned_residual": self.final_preconditioned_residual,
            "converged": self.converged,
            "status": self.status,
            "operator_applications": self.operator_applications,
            "true_residual_checks": self.true_residual_checks,
            "restarts": self.restarts,
            "block_residuals": list(self.block_residuals) if self.block_residuals else None,
        }


def merge_reports(first: "SolveReport", second: "SolveReport") -> "SolveReport":
    """Combine the report of a restarted solve with its predecessor."""
    def cat(a, b):
        if a is None or b is None:
            return b
        return np.concatenate([a, b]) if len(a) and len(b) else (b if len(b) else a)

    return SolveReport(
        iterations=first.iterations + second.iterations,
        final_relative_residual=second.final_relative_residual,
        converged=second.converged,
        history=cat(first.history, second.history),
        block_residuals=second.block_residuals,
        block_history=cat(first.block_history, second.block_history),
        final_preconditioned_residual=second.final_preconditioned_residual,
        operator_applications=first.operator_applications + second.operator_applications,
        true_residual_checks=first.true_residual_checks + second.true_residual_checks,
        status=second.status,
        restarts=first.restarts + second.restarts + 1,
    )


def _norm(x: np.ndarray) -> float:
    # avoids the conjugated copy np.linalg.norm makes for complex input
    return math.sqrt(np.vdot(x, x).real)


def _block_norms(r: np.ndarray, block_shape) -> Tuple[float, float, float]:
    norms = np.sqrt(row_sq_norms(np.ascontiguousarray(r).reshape(block_shape)))
    return float(norms[:-2].mean()), float(norms[-2]), float(norms[-1])


def bicgstab(
    apply: Callable[[np.ndarray], np.ndarray],
    precond: Union[np.ndarray, Callable[[np.ndarray], np.ndarray], None],
    b: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 10000,
    x0: Optional[np.ndarray] = None,
    block_shape: Optional[Tuple[int, int]] = None,
    callback: Optional[Callable[[int, float], None]] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """Solve ``A x = b`` for a complex, nonsymmetric operator.

    Parameters
    ----------
    apply : callable
        ``x -> A x``. Called exactly twice per iteration, plus once for each
        true-residual check (and once up front if ``x0`` is given).
    precond : ndarray, callable or None
        Left preconditioner. An array is taken as the diagonal of ``A``
        (Jacobi scaling); a callable applies ``M^{-1}`` to a vector; ``None``
        means no preconditioning.
    b : ndarray
        Right-hand side.
    tol : float
        Target for the true relative residual.
    max_iter : int
        Iteration cap. Hitting it returns a non-converged report.
    x0 : ndarray, optional
        Initial guess (zero by default).
    block_shape : (int, int), optional
        ``(blocks, n)`` layout with the last two blocks being the ``w`` and
        ``v`` blocks; enables per-block residual reporting.
    callback : callable, optional
        ``callback(iteration, preconditioned_relative_residual)``.

    Returns
    -------
    x, report
        The iterate and a :class:`SolveReport`. If the tolerance is out of
        reach (e.g. below round-off) the loop stops once the true residual
        stops improving, with ``status="stalled"``.

    Raises
    ------
    BreakdownError
        When ``rho``, ``<r_hat, v>`` or ``omega`` vanishes (relative to the
        initial scale) and the true residual is still above ``tol``. ``err.report`` and ``err.x`` hold
        the partial state.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = np.ascontiguousarray(b, dtype=complex)
    if b.ndim != 1:
        raise DimensionError(f"b must be one-dimensional, got shape {b.shape}")
    if precond is None:
        def minv(vec):
            return vec
    elif callable(precond):
        minv = precond
    else:
        diag_inv = 1.0 / np.asarray(precond, dtype=complex)
        if diag_inv.shape != b.shape:
            raise DimensionError(f"preconditioner length {diag_inv.shape} does not match b {b.shape}")

        def minv(vec):
            return diag_inv * vec

    counter = [0]

    def A(vec):
        counter[0] += 1
        out = np.asarray(apply(vec), dtype=complex)
        if out.shape != vec.shape:
            raise DimensionError(f"operator returned shape {out.shape} for input {vec.shape}")
        return out

    bnorm = _norm(b)
    if bnorm == 0.0:
        report = SolveReport(0, 0.0, True, np.zeros(0), None, None, 0.0, 0, 0, "zero_rhs")
        if block_shape is not None:
            report.block_residuals = (0.0, 0.0, 0.0)
        return np.zeros_like(b), report

    bt = minv(b)
    btnorm = _norm(bt)

    history: list[float] = []
    block_hist: list[Tuple[float, float, float]] = []
    checks = 0

    def finish(x, true_r, converged, status, iterations, rnorm):
        rep = SolveReport(
            iterations=iterations,
            final_relative_residual=float(_norm(true_r) / bnorm),
            converged=converged,
            history=np.asarray(history),
            block_residuals=_block_norms(true_r, block_shape) if block_shape else None,
            block_history=np.asarray(block_hist) if block_shape else None,
            final_preconditioned_residual=float(rnorm / btnorm),
            operator_applications=counter[0],
            true_residual_checks=checks,
            status=status,
        )
        return x, rep

    if x0 is None:
        x = np.zeros_like(b)
        true_r = b.copy()
    else:
        x = np.array(x0, dtype=complex)
        if x.shape != b.shape:
            raise DimensionError(f"x0 shape {x.shape} does not match b {b.shape}")
        true_r = b - A(x)
        checks += 1
        if _norm(true_r) / bnorm <= tol:
            return finish(x, true_r, True, "converged", 0, _norm(minv(true_r)))
    r = np.array(minv(true_r), dtype=complex)
    r_hat = r.copy()
    rho_scale = abs(np.vdot(r_hat, r))

    rho_old = alpha = omega = 1.0 + 0.0j
    p = np.zeros_like(b)
    v = np.zeros_like(b)
    s = np.empty_like(b)
    rnorm = _norm(r)
    # The preconditioned and true norms weigh blocks differently, so the
    # target for the recursive residual is tightened after a failed check.
    target = tol
    best_true = np.inf
    stale_checks = 0

    def breakdown(what, it):
        # a vanishing inner product at round-off level is convergence, not failure
        nonlocal checks
        tr = b - A(x)
        checks += 1
        if _norm(tr) / bnorm <= tol:
            return finish(x, tr, True, "converged", it, rnorm)
        _, rep = finish(x, tr, False, "breakdown", it, rnorm)
        err = BreakdownError(f"BiCG-STAB breakdown ({what}) at iteration {it}", rep)
        err.x = x
        raise err

    for it in range(1, max_iter + 1):
        rho = np.vdot(r_hat, r)
        if abs(rho) < BREAKDOWN_EPS * rho_scale:
            return breakdown("rho", it - 1)
        beta = (rho / rho_old) * (alpha / omega)
        update_direction(p, r, v, beta, omega)
        v = minv(A(p))
        rv = np.vdot(r_hat, v)
        if abs(rv) < BREAKDOWN_EPS * rho_scale:
            return breakdown("<r_hat, v>", it - 1)
        alpha = rho / rv
        scaled_difference(s, r, v, alpha)
        t = minv(A(s))
        tt = np.vdot(t, t).real
        omega = np.vdot(t, s) / tt if tt > 0 else 0.0 + 0.0j
        rnorm = math.sqrt(update_solution(x, r, p, s, t, alpha, omega))
        rho_old = rho

        rel = rnorm / btnorm
        history.append(rel)
        if block_shape is not None:
            block_hist.append(tuple(v_ / btnorm for v_ in _block_norms(r, block_shape)))
        if callback is not None:
            callback(it, rel)

        if rel <= target or rnorm == 0.0:
            true_r = b - A(x)
            checks += 1
            true_rel = _norm(true_r) / bnorm
            if true_rel <= tol:
                return finish(x, true_r, True, "converged", it, rnorm)
            if true_rel < 0.5 * best_true:
                best_true = true_rel
                stale_checks = 0
            else:
                stale_checks += 1
                if stale_checks >= STALL_CHECKS:
                    return finish(x, true_r, False, "stalled", it, rnorm)
            # Replace the drifted recursive residual by the true one.
            r = np.array(minv(true_r), dtype=complex)
            rnorm = _norm(r)
            target = min(target, rnorm / btnorm) * min(0.5, tol / true_rel)
            continue

        if abs(omega) < BREAKDOWN_EPS:
            return breakdown("omega", it)

    true_r = b - A(x)
    checks += 1
    return finish(x, true_r, False, "max_iter", max_iter, rnorm)
