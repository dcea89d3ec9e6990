"""Verification studies and independent dense oracles.

The oracles assemble element by element into dense matrices and never touch
the tridiagonal or block-operator code they are used to check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from .errors import FracHelmError, NonConvergenceError, OracleResonanceError
from .krylov import SolveReport
from .mesh_fem import build_mesh
from .quadrature import SincQuadrature, default_spacing, sinc_params
from .solver import ProblemSpec, mms_exact, mms_forcing, solve

ORACLE_MAX_NODES = 151
RESONANCE_RTOL = 1e-12


@dataclass
class ConvergenceRow:
    n_nodes: int
    h: float
    rms_error: float
    total_dim: int
    iterations: int
    status: str = "converged"
    relative_residual: float = float("nan")


def rms_error(u_h: np.ndarray, u: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(np.asarray(u_h) - np.asarray(u)) ** 2)))


def _mms_row(s: float, k_sq: complex, n_nodes: int, tol: float,
             m_override: Optional[float] = None) -> Tuple[ConvergenceRow, Optional[SolveReport]]:
    mesh = build_mesh(n_nodes)
    spec = ProblemSpec(s=s, k_sq=k_sq, f=mms_forcing(s, k_sq), g0=1.0, g1=1.0,
                       n_nodes=n_nodes, tol=tol, m_override=m_override)
    total_dim = n_nodes if s == 1.0 else sinc_params(s, mesh.h, m_override).total_dim(n_nodes)
    try:
        bundle = solve(spec)
    except NonConvergenceError as err:
        bundle = getattr(err, "bundle", None)
        if bundle is None:
            return ConvergenceRow(n_nodes, mesh.h, float("nan"), total_dim, err.report.iterations,
                                  err.report.status, err.report.final_relative_residual), err.report
    except FracHelmError as err:
        report = getattr(err, "report", None)
        its = report.iterations if report is not None else 0
        return ConvergenceRow(n_nodes, mesh.h, float("nan"), total_dim, its,
                              f"error: {type(err).__name__}"), report
    rep = bundle.report
    row = ConvergenceRow(n_nodes, mesh.h, rms_error(bundle.u, mms_exact(mesh.nodes)),
                         bundle.total_dim, rep.iterations, rep.status, rep.final_relative_residual)
    return row, rep


def fit_slope(h: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of ``log(err)`` against ``log(h)`` over finite rows."""
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    ok = np.isfinite(err) & (err > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


def mms_convergence(s: float = 0.25, k_sq: complex = 1.0, mesh_sizes: Sequence[int] = (101, 201, 501, 1001),
                    tol: float = 1e-12) -> Tuple[List[ConvergenceRow], float]:
    """MMS error per mesh and the fitted convergence slope.

    ``mesh_sizes`` are node counts. A row whose solve stops short of ``tol``
    keeps its error and reports the solver status (e.g. ``stalled`` when
    ``tol`` is below round-off).
    """
    rows = [_mms_row(s, k_sq, int(n), tol)[0] for n in mesh_sizes]
    return rows, fit_slope([r.h for r in rows], [r.rms_error for r in rows])


def quadrature_sweep(s: float = 0.25, n_nodes: int = 101, m_values: Optional[Sequence[float]] = None,
                     k_sq: complex = 1.0, tol: float = 1e-12) -> List[Tuple[float, float]]:
    """MMS error as a function of the sinc spacing ``m``.

    Defaults to ``m*`` times 0.5, 1 and 2 with ``m* = 1/ln(1/h)``.
    """
    if m_values is None:
        m_star = default_spacing(build_mesh(n_nodes).h)
        m_values = [0.5 * m_star, m_star, 2.0 * m_star]
    return [(float(m), _mms_row(s, k_sq, n_nodes, tol, m_override=float(m))[0].rms_error) for m in m_values]


def size_growth_exponent(s: float, mesh_sizes: Sequence[int]) -> float:
    """Fitted exponent ``a`` in ``total_dim ~ N^a``."""
    n = np.asarray(mesh_sizes, dtype=float)
    dims = [sinc_params(s, build_mesh(int(k)).h).total_dim(int(k)) for k in mesh_sizes]
    return float(np.polyfit(np.log(n), np.log(dims), 1)[0])


def residual_history(s: float = 0.25, k_sq: complex = 1.0, n_nodes: int = 101,
                     preconditioner: str = "jacobi", tol: float = 1e-12) -> SolveReport:
    """Report of the MMS solve, including per-block residual histories."""
    spec = ProblemSpec(s=s, k_sq=k_sq, f=mms_forcing(s, k_sq), g0=1.0, g1=1.0,
                       n_nodes=n_nodes, tol=tol, preconditioner=preconditioner)
    return solve(spec).report


# -- dense oracles -----------------------------------------------------------

def dense_fem(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Dense stiffness and mass matrices from the element loop."""
    mesh = build_mesh(n_nodes)
    h = mesh.h
    ke = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    me = np.array([[2.0, 1.0], [1.0, 2.0]]) * h / 6.0
    K = np.zeros((n_nodes, n_nodes))
    M = np.zeros((n_nodes, n_nodes))
    for e in range(n_nodes - 1):
        idx = np.ix_([e, e + 1], [e, e + 1])
        K[idx] += ke
        M[idx] += me
    return K, M


def dense_block_operator(quad: SincQuadrature, k_sq: complex, n_nodes: int, formulation: str = "scaled_v") -> np.ndarray:
    """Dense block matrix with Dirichlet rows replaced by identity rows.

    Unknown order: quadrature components, then ``w``, then ``v``.
    """
    K, M = dense_fem(n_nodes)
    n, P = n_nodes, quad.n_points
    B = P + 2
    A = np.zeros((B * n, B * n), dtype=complex)

    def blk(i, j):
        return A[i * n:(i + 1) * n, j * n:(j + 1) * n]

    for l in range(P):
        scale = 1.0 / quad.d[l] if formulation == "scaled_v" else 1.0
        weight = 1.0 if formulation == "scaled_v" else quad.d[l]
        blk(l, l)[:] = (K + quad.c[l] * M) * scale
        blk(l, P)[:] = -k_sq * M
        blk(l, P + 1)[:] = -k_sq * M
        blk(P + 1, l)[:] = -weight * M
    blk(P, P)[:] = K
    blk(P + 1, P + 1)[:] = M
    boundary = [b * n + j for b in range(B) for j in (0, n - 1)]
    A[boundary, :] = 0.0
    A[:, boundary] = 0.0
    A[boundary, boundary] = 1.0
    return A


@dataclass
class SpectralOracle:
    """Generalized eigenpairs of the interior stiffness and mass matrices.

    ``eigenvectors`` are nodal (zero on the boundary) and M1-orthonormal.
    """

    n_nodes: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    stiffness: np.ndarray
    mass: np.ndarray

    @classmethod
    def build(cls, n_nodes: int) -> "SpectralOracle":
        if n_nodes > ORACLE_MAX_NODES:
            raise ValueError(f"oracle limited to n_nodes <= {ORACLE_MAX_NODES}, got {n_nodes}")
        K, M = dense_fem(n_nodes)
        lam, phi = eigh(K[1:-1, 1:-1], M[1:-1, 1:-1])
        vecs = np.zeros((n_nodes, lam.size))
        vecs[1:-1] = phi
        return cls(n_nodes, lam, vecs, K, M)

    def solve(self, s: float, k_sq: complex, f_nodal: np.ndarray) -> np.ndarray:
        """Zero-boundary solution for nodal forcing ``f_nodal``."""
        lam_s = self.eigenvalues**s
        denom = lam_s - k_sq
        if np.min(np.abs(denom)) < RESONANCE_RTOL * np.max(lam_s):
            k = int(np.argmin(np.abs(denom)))
            raise OracleResonanceError(f"lambda_{k}^s = {lam_s[k]:.6e} resonates with k^2 = {k_sq}")
        load = (self.mass @ np.asarray(f_nodal, dtype=complex))[1:-1]
        coef = (self.eigenvectors[1:-1].T @ load) / denom
        return self.eigenvectors @ coef


def spectral_solve_oracle(s: float, k_sq: complex, f: np.ndarray, n_nodes: int) -> np.ndarray:
    return SpectralOracle.build(n_nodes).solve(s, k_sq, f)


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(np.asarray(a) - b) / nb) if nb > 0 else float(np.linalg.norm(a))
