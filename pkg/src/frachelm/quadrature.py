"""Sinc quadrature for the integral representation of the inverse
fractional Laplacian.

For a positive operator ``A`` and ``0 < s < 1``::

    A^{-s} = sin(s*pi)/pi * int_R exp((1-s) y) (exp(y) + A)^{-1} dy

which is discretized on the uniform grid ``y_l = m*l``,
``l = -n_minus, ..., n_plus``. The default spacing ``m = 1/ln(1/h)`` balances
quadrature error against the O(h^2) error of linear finite elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, InvalidExponentError


@dataclass(frozen=True)
class SincQuadrature:
    s: float
    m: float
    n_minus: int
    n_plus: int
    nodes: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.n_minus + self.n_plus + 1

    def total_dim(self, n_nodes: int) -> int:
        """Unknown count of the augmented block system on ``n_nodes`` nodes."""
        return n_nodes * (self.n_points + 2)


def default_spacing(h: float) -> float:
    return 1.0 / math.log(1.0 / h)


def sinc_params(s: float, h: float, m_override: Optional[float] = None) -> SincQuadrature:
    """Quadrature spacing, truncation bounds and coefficients for exponent ``s``.

    Parameters
    ----------
    s : float
        Fractional exponent, strictly inside (0, 1).
    h : float
        Mesh spacing, used to pick the default spacing ``m = 1/ln(1/h)``.
    m_override : float, optional
        Explicit spacing; the truncation bounds are recomputed from it.

    Returns
    -------
    SincQuadrature
        ``c_l = exp(y_l)`` shifts and ``d_l = sin(s pi)/pi * m * exp((1-s) y_l)``
        weights, ordered by increasing ``y_l``.
    """
    if not 0.0 < s < 1.0:
        raise InvalidExponentError(f"s must lie in (0, 1), got {s}")
    if not 0.0 < h < 1.0:
        raise ValueError(f"h must lie in (0, 1), got {h}")
    if m_override is not None:
        if not m_override > 0.0:
            raise ValueError(f"m_override must be positive, got {m_override}")
        m = float(m_override)
    else:
        m = default_spacing(h)

    pi_sq = math.pi**2
    n_plus = math.ceil(pi_sq / (4.0 * s * m * m))
    n_minus = math.ceil(pi_sq / (4.0 * (1.0 - s) * m * m))

    ell = np.arange(-n_minus, n_plus + 1, dtype=float)
    y = m * ell
    # exp(y) underflows to 0 for y < -745; K alone is still invertible then.
    c = np.exp(y)
    d = (math.sin(s * math.pi) / math.pi) * m * np.exp((1.0 - s) * y)
    for a in (y, c, d):
        a.setflags(write=False)
    return SincQuadrature(s=float(s), m=m, n_minus=n_minus, n_plus=n_plus, nodes=y, c=c, d=d)


def reconstruct_v(quad: SincQuadrature, v_scaled: Sequence[np.ndarray]) -> np.ndarray:
    """Sum the scaled component fields ``v'_l = d_l v_l`` into ``v``."""
    arr = np.asarray(v_scaled, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != quad.n_points:
        raise DimensionError(
            f"expected {quad.n_points} component vectors, got array of shape {arr.shape}"
        )
    return arr.sum(axis=0)


def kato_sum(quad: SincQuadrature, v_components: Sequence[np.ndarray]) -> np.ndarray:
    """Weighted sum ``sum_l d_l v_l`` over unscaled component fields."""
    arr = np.asarray(v_components, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != quad.n_points:
        raise DimensionError(
            f"expected {quad.n_points} component vectors, got array of shape {arr.shape}"
        )
    return quad.d @ arr
