"""Magnetotelluric forward modeling over a uniform half-layer.

Depth is scaled by ``z_star`` so the layer is ``zeta`` in [0, 1] with a
perfectly conducting bottom. The electric field solves the fractional
Helmholtz problem with ``k^2 = -i kappa^2``, ``u(0) = 1 + 1i`` and
``u(1) = 0``; apparent resistivity and phase come from the surface ratio
``u / du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateGradientError, FracHelmError
from .krylov import SolveReport
from .solver import PRECONDITIONERS, ProblemSpec, SolutionBundle, solve

MU0 = 4.0e-7 * math.pi
SURFACE_VALUE = 1.0 + 1.0j
GRADIENT_FLOOR = 1e-300


@dataclass(frozen=True)
class EarthModel:
    """Uniform conductivity layer of thickness ``z_star`` over a conductor.

    ``s`` is the spatial fractional exponent (``s = 1`` is classical).
    """

    sigma: float = 0.01
    z_star: float = 1000.0
    s: float = 1.0
    n_nodes: int = 501
    tol: float = 1e-12
    preconditioner: str = "block_jacobi"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.z_star > 0:
            raise ValueError(f"z_star must be positive, got {self.z_star}")
        if not 0.0 < self.s <= 1.0:
            raise ValueError(f"s must lie in (0, 1], got {self.s}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"preconditioner must be one of {PRECONDITIONERS}")


@dataclass
class SoundingPoint:
    frequency: float
    kappa_sq: float
    rho_a: float
    theta: float
    surface_field: complex
    surface_gradient: complex
    status: str = "ok"
    report: Optional[SolveReport] = field(default=None, repr=False, compare=False)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)


def nondimensionalize(model: EarthModel, frequency: float) -> Tuple[complex, float]:
    """Return ``(k_sq, kappa_sq)`` with ``kappa^2 = omega mu0 sigma z*^2``."""
    if not frequency >= 0:
        raise ValueError(f"frequency must be non-negative, got {frequency}")
    kappa_sq = 2.0 * math.pi * frequency * MU0 * model.sigma * model.z_star**2
    return -1j * kappa_sq, kappa_sq


def decay_profile(model: EarthModel, frequency: float) -> SolutionBundle:
    """Solve for the field versus scaled depth; ``bundle.u`` holds it."""
    k_sq, _ = nondimensionalize(model, frequency)
    spec = ProblemSpec(
        s=model.s, k_sq=k_sq, f=None, g0=SURFACE_VALUE, g1=0.0,
        n_nodes=model.n_nodes, tol=model.tol, preconditioner=model.preconditioner,
    )
    return solve(spec)


def surface_gradient(u: np.ndarray, h: float) -> complex:
    """Second-order one-sided difference for ``du/dzeta`` at ``zeta = 0``."""
    return complex((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h))


def impedance_point(frequency: float, kappa_sq: float, z_star: float, u0: complex, du0: complex) -> SoundingPoint:
    """Apparent resistivity and phase from the surface field and gradient."""
    if abs(du0) < GRADIENT_FLOOR:
        raise DegenerateGradientError(f"surface gradient {abs(du0):.3e} too small at f={frequency} Hz")
    omega = 2.0 * math.pi * frequency
    ratio = -u0 / du0
    return SoundingPoint(
        frequency=frequency,
        kappa_sq=kappa_sq,
        rho_a=omega * MU0 * z_star**2 * abs(ratio) ** 2,
        theta=math.atan2(ratio.imag, ratio.real),
        surface_field=u0,
        surface_gradient=du0,
    )


def sounding_point(model: EarthModel, frequency: float) -> SoundingPoint:
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    bundle = decay_profile(model, frequency)
    _, kappa_sq = nondimensionalize(model, frequency)
    u = bundle.u
    point = impedance_point(frequency, kappa_sq, model.z_star, complex(u[0]), surface_gradient(u, bundle.mesh.h))
    point.report = bundle.report
    return point


def default_frequencies(f_min: float = 1e-2, f_max: float = 1e4, per_decade: int = 10) -> np.ndarray:
    """Log-uniform grid including both endpoints."""
    decades = math.log10(f_max / f_min)
    count = int(round(decades * per_decade)) + 1
    return np.logspace(math.log10(f_min), math.log10(f_max), count)


def _failed_point(model: EarthModel, frequency: float, err: Exception) -> SoundingPoint:
    _, kappa_sq = nondimensionalize(model, frequency)
    nan = float("nan")
    point = SoundingPoint(frequency, kappa_sq, nan, nan, complex(nan, nan), complex(nan, nan),
                          status=f"error: {type(err).__name__}")
    point.report = getattr(err, "report", None)
    return point


def sounding_sweep(model: EarthModel, frequencies: Optional[Sequence[float]] = None) -> List[SoundingPoint]:
    """One independent solve per frequency, in input order.

    A failing point is recorded with ``status`` naming the error and NaN
    values; the sweep carries on.
    """
    freqs = default_frequencies() if frequencies is None else np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequencies must be a non-empty 1-D sequence")
    if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
        raise ValueError("frequencies must be positive and strictly ascending")
    points = []
    for f in freqs:
        try:
            points.append(sounding_point(model, float(f)))
        except FracHelmError as err:
            points.append(_failed_point(model, float(f), err))
    return points


def sign_changes(values: Iterable[float], rel_tol: float = 1e-6) -> int:
    """Number of sign changes, ignoring entries below ``rel_tol * max|values|``.

    The cutoff skips the near-zero tail above the conducting bottom, where
    the sign of ``Re u`` is set by discretization error.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return 0
    cutoff = rel_tol * np.max(np.abs(arr))
    signs = np.sign(arr[np.abs(arr) > cutoff])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
