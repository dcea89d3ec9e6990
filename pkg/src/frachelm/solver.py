"""Fractional Helmholtz boundary-value solver.

Solves ``(-Laplace)^s u - k^2 u = f`` on (0, 1) with ``u(0) = g0``,
``u(1) = g1`` by splitting ``u = v + w``: ``w`` is the harmonic lift of the
boundary data and ``v`` (zero on the boundary) is expanded over the sinc
quadrature nodes. All pieces are solved together as one block system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_banded

from .block_system import Formulation, block_jacobi, build_rhs, build_system, jacobi_diagonal, matvec
from .errors import BreakdownError, InvalidExponentError, InvariantViolation, NonConvergenceError
from .krylov import SolveReport, bicgstab, merge_reports
from .mesh_fem import FemMatrices, Mesh1D, Tridiagonal, assemble, build_mesh, load_vector
from .quadrature import SincQuadrature, reconstruct_v, sinc_params

S_MIN = 0.05
S_MAX = 0.9999
COMPATIBILITY_RTOL = 1e-8
MAX_RESTARTS = 5
PRECONDITIONERS = ("block_jacobi", "jacobi")


@dataclass(frozen=True)
class SineForcing:
    """Forcing ``amplitude * sin(wavenumber * x) + constant``.

    Its load vector is integrated exactly against the hat functions.
    """

    amplitude: complex
    wavenumber: float = 2.0 * math.pi
    constant: complex = 0.0

    def __call__(self, x):
        return self.amplitude * np.sin(self.wavenumber * np.asarray(x)) + self.constant

    def load(self, mesh: Mesh1D) -> np.ndarray:
        x, h, om = mesh.nodes, mesh.h, self.wavenumber
        if om == 0.0:
            sine = np.zeros_like(x)
        else:
            # rising half of hat i on [x_i - h, x_i], falling half on [x_i, x_i + h]
            rising = -np.cos(om * x) / om + (np.sin(om * x) - np.sin(om * (x - h))) / (om * om * h)
            falling = np.cos(om * x) / om - (np.sin(om * (x + h)) - np.sin(om * x)) / (om * om * h)
            rising[0] = 0.0
            falling[-1] = 0.0
            sine = rising + falling
        ones = np.full_like(x, h)
        ones[0] = ones[-1] = h / 2.0
        return self.amplitude * sine.astype(complex) + self.constant * ones


def mms_forcing(s: float, k_sq: complex) -> SineForcing:
    """Forcing that makes ``u = 1 + sin(2 pi x)`` exact with ``g0 = g1 = 1``.

    ``sin(2 pi x)`` is a Dirichlet eigenfunction with eigenvalue ``(2 pi)^2``,
    so the fractional operator scales it by ``(2 pi)^(2 s)``.
    """
    lam = (2.0 * math.pi) ** 2
    return SineForcing(amplitude=lam**s - k_sq, wavenumber=2.0 * math.pi, constant=-k_sq)


def mms_exact(x) -> np.ndarray:
    return 1.0 + np.sin(2.0 * math.pi * np.asarray(x))


Forcing = Union[np.ndarray, SineForcing, None]


@dataclass(frozen=True)
class ProblemSpec:
    s: float
    k_sq: complex
    f: Forcing = None
    g0: complex = 0.0
    g1: complex = 0.0
    n_nodes: int = 501
    tol: float = 1e-12
    m_override: Optional[float] = None
    max_iter: int = 20000
    formulation: Formulation = "scaled_v"
    preconditioner: str = "block_jacobi"

    def validate(self) -> None:
        if self.s == 1.0:
            pass
        elif not S_MIN <= self.s <= S_MAX:
            raise InvalidExponentError(
                f"s must be 1 or lie in [{S_MIN}, {S_MAX}], got {self.s}"
            )
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"preconditioner must be one of {PRECONDITIONERS}, got {self.preconditioner!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        build_mesh(self.n_nodes)


@dataclass
class SolutionBundle:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    v_scaled: np.ndarray = field(repr=False)
    report: SolveReport
    mesh: Mesh1D = field(repr=False)
    quad: Optional[SincQuadrature] = field(default=None, repr=False)
    total_dim: int = 0


def _dirichlet_system(T: Tridiagonal, load: np.ndarray, g0: complex, g1: complex):
    """Banded matrix and right-hand side of ``T u = load`` with ``u = g`` on
    the boundary (identity rows, boundary columns lifted out)."""
    ab = T.to_banded().astype(complex)
    rhs = np.array(load, dtype=complex)
    n = T.n
    rhs[1] -= T.sub[0] * g0
    rhs[n - 2] -= T.sup[n - 2] * g1
    rhs[0], rhs[-1] = g0, g1
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0   # (0, 1)
    ab[2, 0] = 0.0   # (1, 0)
    ab[0, -1] = 0.0  # (n-2, n-1)
    ab[2, -2] = 0.0  # (n-1, n-2)
    return ab, rhs


def _banded_matvec(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = ab[1] * x
    y[:-1] += ab[0, 1:] * x[1:]
    y[1:] += ab[2, :-1] * x[:-1]
    return y


def _dirichlet_solve(T: Tridiagonal, load: np.ndarray, g0: complex, g1: complex) -> np.ndarray:
    ab, rhs = _dirichlet_system(T, load, g0, g1)
    return solve_banded((1, 1), ab, rhs)


def solve_pure_laplace(g0: complex, g1: complex, n_nodes: int) -> np.ndarray:
    """Discrete harmonic lift of the boundary data (linear in 1-D)."""
    mesh = build_mesh(n_nodes)
    fem = assemble(mesh, 0.0)
    return _dirichlet_solve(fem.K, np.zeros(n_nodes, dtype=complex), g0, g1)


def _load(spec: ProblemSpec, fem: FemMatrices) -> np.ndarray:
    if spec.f is None:
        return np.zeros(fem.mesh.n_nodes, dtype=complex)
    if isinstance(spec.f, SineForcing):
        return spec.f.load(fem.mesh)
    return load_vector(fem, spec.f)


def _solve_classical(spec: ProblemSpec, fem: FemMatrices, load: np.ndarray) -> SolutionBundle:
    K, M2 = fem.K, fem.M2
    T = Tridiagonal(K.sub + M2.sub, K.main + M2.main, K.sup + M2.sup)
    ab, rhs = _dirichlet_system(T, load, spec.g0, spec.g1)
    u = solve_banded((1, 1), ab, rhs)

    bnorm = np.linalg.norm(rhs)
    resid = np.linalg.norm(rhs - _banded_matvec(ab, u)) / bnorm if bnorm > 0 else 0.0
    report = SolveReport(
        iterations=0,
        final_relative_residual=float(resid),
        converged=True,
        history=np.zeros(0),
        status="direct",
    )
    w = solve_pure_laplace(spec.g0, spec.g1, fem.mesh.n_nodes)
    n = fem.mesh.n_nodes
    return SolutionBundle(
        u=u, v=u - w, w=w, v_scaled=np.zeros((0, n), dtype=complex),
        report=report, mesh=fem.mesh, quad=None, total_dim=n,
    )


def _bicgstab_with_restarts(system, precond, rhs, spec: ProblemSpec, x0):
    # A breakdown restarts from the partial iterate, which also renews the
    # shadow residual. The zero-forcing MT systems need this: M^{-1} b lives
    # almost entirely on the w block, so it can become orthogonal to r.
    previous = None
    budget = spec.max_iter
    for attempt in range(MAX_RESTARTS + 1):
        try:
            x, report = bicgstab(
                lambda y: matvec(system, y), precond, rhs,
                tol=spec.tol, max_iter=budget, x0=x0,
                block_shape=(system.blocks, system.n),
            )
        except BreakdownError as err:
            report = err.report if previous is None else merge_reports(previous, err.report)
            if attempt == MAX_RESTARTS or report.iterations >= spec.max_iter:
                err.report = report
                raise
            previous, x0 = report, err.x
            budget = spec.max_iter - report.iterations
            continue
        return x, (report if previous is None else merge_reports(previous, report))
    raise AssertionError("unreachable")


def solve(spec: ProblemSpec, x0: Optional[np.ndarray] = None) -> SolutionBundle:
    """Solve the boundary-value problem described by ``spec``.

    Raises
    ------
    BreakdownError
        If BiCG-STAB still breaks down after ``MAX_RESTARTS`` restarts.
    NonConvergenceError
        If BiCG-STAB stops short of ``spec.tol``. The error carries the
        partial ``report`` and the unconverged ``bundle``.
    InvariantViolation
        If the solved ``v`` block disagrees with the sum of the scaled
        component fields by more than 1e-8 relative.
    """
    spec.validate()
    mesh = build_mesh(spec.n_nodes)
    fem = assemble(mesh, spec.k_sq)
    load = _load(spec, fem)
    if spec.s == 1.0:
        return _solve_classical(spec, fem, load)

    quad = sinc_params(spec.s, mesh.h, spec.m_override)
    system = build_system(fem, quad, spec.formulation, spec.g0, spec.g1)
    rhs = build_rhs(system, load)
    if spec.preconditioner == "jacobi":
        precond = jacobi_diagonal(system)
    else:
        precond = block_jacobi(system)
    x, report = _bicgstab_with_restarts(system, precond, rhs, spec, x0)

    X = x.reshape(system.blocks, system.n)
    P = quad.n_points
    v_scaled = X[:P].copy()
    if spec.formulation == "unscaled_v":
        v_scaled *= quad.d[:, None]
    w = X[P].copy()
    v = X[P + 1].copy()
    # Dirichlet rows are identity rows: pin their values instead of keeping
    # the iterate's round-off there.
    v_scaled[:, [0, -1]] = 0.0
    v[[0, -1]] = 0.0
    w[0], w[-1] = spec.g0, spec.g1
    bundle = SolutionBundle(
        u=v + w, v=v, w=w, v_scaled=v_scaled, report=report,
        mesh=mesh, quad=quad, total_dim=system.total_dim,
    )
    if not report.converged:
        err = NonConvergenceError(
            f"BiCG-STAB {report.status} after {report.iterations} iterations, "
            f"relative residual {report.final_relative_residual:.3e} > tol {spec.tol:.1e}",
            report,
        )
        err.bundle = bundle
        raise err

    v_sum = reconstruct_v(quad, v_scaled)
    scale = max(np.linalg.norm(v), np.linalg.norm(v_sum))
    if scale > 0:
        mismatch = np.linalg.norm(v - v_sum) / scale
        if mismatch > COMPATIBILITY_RTOL:
            raise InvariantViolation(
                f"v differs from the sum of its quadrature components by {mismatch:.2e} (relative)"
            )
    return bundle
