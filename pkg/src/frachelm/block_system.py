"""Matrix-free augmented block operator for the fractional Helmholtz problem.

Unknowns are laid out block by block as ``(v'_0, ..., v'_{P-1}, w, v)``,
each block holding ``N`` nodal values. In the scaled formulation the block
rows read::

    (K + c_l M1)/d_l v'_l + M2 w + M2 v = f      l = 0..P-1
    K w                                = 0
    -M1 sum_l v'_l + M1 v              = 0

and the unscaled formulation uses ``v_l = v'_l / d_l`` as unknowns, moving
the weights into the last row. Dirichlet conditions are imposed by row
replacement: the first and last row of every block become identity rows and
their column couplings are lifted into the right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._kernels import block_matvec, block_tridiag_factor, block_tridiag_solve
from .errors import DimensionError, PreconditionerDegenerateError
from .mesh_fem import FemMatrices
from .quadrature import SincQuadrature

Formulation = Literal["scaled_v", "unscaled_v"]
FORMULATIONS = ("scaled_v", "unscaled_v")


@dataclass(frozen=True)
class BlockSystem:
    fem: FemMatrices
    quad: SincQuadrature
    formulation: Formulation
    g0: complex
    g1: complex

    @property
    def n(self) -> int:
        return self.fem.mesh.n_nodes

    @property
    def n_points(self) -> int:
        return self.quad.n_points

    @property
    def blocks(self) -> int:
        return self.quad.n_points + 2

    @property
    def total_dim(self) -> int:
        return self.n * self.blocks

    @property
    def w_block(self) -> int:
        return self.n_points

    @property
    def v_block(self) -> int:
        return self.n_points + 1

    def storage_count(self) -> int:
        """Number of stored numeric scalars (matrices, coefficients, BC data)."""
        arrays = [
            self.fem.K.sub, self.fem.K.main, self.fem.K.sup,
            self.fem.M1.sub, self.fem.M1.main, self.fem.M1.sup,
            self.fem.M2.sub, self.fem.M2.main, self.fem.M2.sup,
            self.quad.nodes, self.quad.c, self.quad.d,
        ]
        return sum(a.size for a in arrays) + 3  # + k_sq, g0, g1

    def as_blocks(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.total_dim,):
            raise DimensionError(f"expected vector of length {self.total_dim}, got shape {x.shape}")
        return x.reshape(self.blocks, self.n)


def build_system(
    fem: FemMatrices,
    quad: SincQuadrature,
    formulation: Formulation = "scaled_v",
    g0: complex = 0.0,
    g1: complex = 0.0,
) -> BlockSystem:
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")
    return BlockSystem(fem=fem, quad=quad, formulation=formulation, g0=complex(g0), g1=complex(g1))


def matvec(sys: BlockSystem, x: np.ndarray) -> np.ndarray:
    """Apply the block operator to ``x`` without forming any block matrix."""
    X = np.ascontiguousarray(sys.as_blocks(x), dtype=complex)
    K, M1 = sys.fem.K, sys.fem.M1
    Y = np.empty_like(X)
    block_matvec(
        X, K.sub, K.main, K.sup, M1.sub, M1.main, M1.sup,
        sys.fem.k_sq, sys.quad.c, sys.quad.d, sys.formulation == "scaled_v", Y,
    )
    return Y.reshape(-1)


def jacobi_diagonal(sys: BlockSystem) -> np.ndarray:
    """Diagonal of the block operator, Dirichlet rows set to one."""
    P = sys.n_points
    K, M1 = sys.fem.K, sys.fem.M1
    D = np.empty((sys.blocks, sys.n), dtype=complex)
    D[:P] = K.main[None, :] + sys.quad.c[:, None] * M1.main[None, :]
    if sys.formulation == "scaled_v":
        D[:P] /= sys.quad.d[:, None]
    D[P] = K.main
    D[P + 1] = M1.main
    D[:, 0] = 1.0
    D[:, -1] = 1.0
    if not np.all(np.isfinite(D)) or np.any(D == 0):
        raise PreconditionerDegenerateError("block operator has a zero or non-finite diagonal entry")
    return D.reshape(-1)


def build_rhs(sys: BlockSystem, f_load: np.ndarray) -> np.ndarray:
    """Right-hand side ``(f, ..., f, 0, 0)`` with Dirichlet data lifted in.

    ``f_load`` is the nodal load vector (integrals of the forcing against the
    hat functions); its boundary entries are ignored.
    """
    f_load = np.asarray(f_load, dtype=complex)
    if f_load.shape != (sys.n,):
        raise DimensionError(f"load vector has shape {f_load.shape}, expected ({sys.n},)")
    P = sys.n_points
    B = np.zeros((sys.blocks, sys.n), dtype=complex)
    B[:P] = f_load

    w_bc = np.zeros(sys.n, dtype=complex)
    w_bc[0], w_bc[-1] = sys.g0, sys.g1
    B[:P] -= sys.fem.M2.matvec(w_bc)
    B[P] -= sys.fem.K.matvec(w_bc)

    B[:, 0] = 0.0
    B[:, -1] = 0.0
    B[P, 0], B[P, -1] = sys.g0, sys.g1
    return B.reshape(-1)


class BlockJacobi:
    """Exact inverse of the block-diagonal part of the operator.

    Every diagonal block is tridiagonal (``(K + c_l M1)/d_l``, ``K`` or
    ``M1``, Dirichlet rows replaced). The blocks are real, so their LU
    factors are computed once and stored as two real ``(blocks, n - 2)``
    arrays.
    """

    def __init__(self, sys: BlockSystem):
        P = sys.n_points
        a_k = np.ones(sys.blocks)
        a_m = np.zeros(sys.blocks)
        scale = np.ones(sys.blocks)
        a_m[:P] = sys.quad.c
        if sys.formulation == "scaled_v":
            scale[:P] = sys.quad.d
        a_k[P + 1], a_m[P + 1] = 0.0, 1.0
        self.shape = (sys.blocks, sys.n)
        K, M1 = sys.fem.K, sys.fem.M1
        self._inv_pivot = np.empty((sys.blocks, sys.n - 2))
        self._mult = np.zeros((sys.blocks, sys.n - 2))
        block_tridiag_factor(K.sub, K.main, M1.sub, M1.main, a_k, a_m, scale, self._inv_pivot, self._mult)
        if not np.all(np.isfinite(self._inv_pivot)):
            raise PreconditionerDegenerateError("singular diagonal block in block-Jacobi preconditioner")

    def storage_count(self) -> int:
        return self._inv_pivot.size + self._mult.size

    def __call__(self, r: np.ndarray) -> np.ndarray:
        R = np.ascontiguousarray(np.asarray(r).reshape(self.shape), dtype=complex)
        Y = np.empty_like(R)
        block_tridiag_solve(R, self._inv_pivot, self._mult, Y)
        return Y.reshape(-1)


def block_jacobi(sys: BlockSystem) -> BlockJacobi:
    return BlockJacobi(sys)
