"""Uniform 1-D mesh on [0, 1] and linear-element FEM matrices.

All matrices are symmetric tridiagonal and stored as (sub, main, super)
diagonals. Element integrals are exact for linear hat functions, so no
element quadrature is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidMeshError


@dataclass(frozen=True)
class Mesh1D:
    n_nodes: int
    h: float
    nodes: np.ndarray = field(repr=False)


def build_mesh(n_nodes: int) -> Mesh1D:
    if int(n_nodes) != n_nodes or n_nodes < 3:
        raise InvalidMeshError(f"need an integer n_nodes >= 3, got {n_nodes!r}")
    n_nodes = int(n_nodes)
    nodes = np.linspace(0.0, 1.0, n_nodes)
    nodes.setflags(write=False)
    return Mesh1D(n_nodes=n_nodes, h=1.0 / (n_nodes - 1), nodes=nodes)


@dataclass(frozen=True)
class Tridiagonal:
    """Tridiagonal matrix held as its three diagonals.

    ``sub[i]`` is entry (i+1, i), ``sup[i]`` is entry (i, i+1).
    """

    sub: np.ndarray
    main: np.ndarray
    sup: np.ndarray

    @property
    def n(self) -> int:
        return self.main.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply to ``x`` along its last axis (batched over leading axes)."""
        if x.shape[-1] != self.n:
            raise DimensionError(f"expected last axis {self.n}, got {x.shape[-1]}")
        y = self.main * x
        y[..., :-1] += self.sup * x[..., 1:]
        y[..., 1:] += self.sub * x[..., :-1]
        return y

    def scaled(self, alpha) -> "Tridiagonal":
        return Tridiagonal(alpha * self.sub, alpha * self.main, alpha * self.sup)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.main).astype(np.result_type(self.main, self.sub))
        a += np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return a

    def to_banded(self) -> np.ndarray:
        """Layout expected by :func:`scipy.linalg.solve_banded` with (1, 1)."""
        ab = np.zeros((3, self.n), dtype=np.result_type(self.main, self.sub))
        ab[0, 1:] = self.sup
        ab[1] = self.main
        ab[2, :-1] = self.sub
        return ab


@dataclass(frozen=True)
class FemMatrices:
    K: Tridiagonal
    M1: Tridiagonal
    M2: Tridiagonal
    k_sq: complex
    mesh: Mesh1D = field(repr=False)


def _stencil(n: int, off: float, diag: float, end: float) -> Tridiagonal:
    main = np.full(n, diag)
    main[0] = main[-1] = end
    sub = np.full(n - 1, off)
    out = Tridiagonal(sub, main, sub.copy())
    for a in (out.sub, out.main, out.sup):
        a.setflags(write=False)
    return out


def assemble(mesh: Mesh1D, k_sq: complex) -> FemMatrices:
    """Stiffness, mass and Helmholtz-mass matrices on ``mesh``.

    The Helmholtz mass is ``M2 = -k_sq * M1``, kept complex even when
    ``k_sq`` is real so downstream arithmetic has a single dtype.
    """
    n, h = mesh.n_nodes, mesh.h
    K = _stencil(n, -1.0 / h, 2.0 / h, 1.0 / h)
    M1 = _stencil(n, h / 6.0, 4.0 * h / 6.0, 2.0 * h / 6.0)
    k_sq = complex(k_sq)
    M2 = Tridiagonal(-k_sq * M1.sub, -k_sq * M1.main, -k_sq * M1.sup)
    return FemMatrices(K=K, M1=M1, M2=M2, k_sq=k_sq, mesh=mesh)


def load_vector(fem: FemMatrices, f_nodal: np.ndarray) -> np.ndarray:
    """Load vector of the piecewise-linear interpolant of ``f_nodal``."""
    f_nodal = np.asarray(f_nodal, dtype=complex)
    if f_nodal.shape != (fem.mesh.n_nodes,):
        raise DimensionError(f"forcing has shape {f_nodal.shape}, mesh has {fem.mesh.n_nodes} nodes")
    return fem.M1.matvec(f_nodal)
