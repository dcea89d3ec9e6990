"""Closed-form references for the uniform layer with a conducting bottom.

With ``gamma^2 = i kappa^2`` the classical field is
``u0 sinh(gamma (1 - zeta)) / sinh(gamma)`` and ``-u / du`` at the surface
is ``1 / (gamma coth gamma)``. Square roots take the principal branch, so
``Re gamma >= 0`` and the field decays with depth. For ``|gamma| > 50`` the
hyperbolic functions are evaluated in exponentially scaled form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mt import MU0, SURFACE_VALUE, EarthModel, SoundingPoint, nondimensionalize

OVERFLOW_GAMMA = 50.0


@dataclass(frozen=True)
class TimeFractionalParams:
    """Layer with a time-fractional conduction law of order ``beta``.

    ``sigma`` carries units of S/m (rad/s)^(-beta).
    """

    beta: float
    sigma: float = 0.01
    z_star: float = 1000.0

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not self.sigma > 0 or not self.z_star > 0:
            raise ValueError("sigma and z_star must be positive")


def _gamma_coth(gamma: complex) -> complex:
    if gamma == 0:
        return 1.0 + 0.0j
    if abs(gamma) > OVERFLOW_GAMMA:
        e = np.exp(-2.0 * gamma)
        return complex(gamma * (1.0 + e) / (1.0 - e))
    return complex(gamma / np.tanh(gamma))


def _sinh_ratio(gamma: complex, zeta: np.ndarray) -> np.ndarray:
    """``sinh(gamma (1 - zeta)) / sinh(gamma)``."""
    a = gamma * (1.0 - zeta)
    if abs(gamma) > OVERFLOW_GAMMA:
        return np.exp(a - gamma) * (1.0 - np.exp(-2.0 * a)) / (1.0 - np.exp(-2.0 * gamma))
    return np.sinh(a) / np.sinh(gamma)


def classical_field(kappa_sq: float, zeta, u0: complex = SURFACE_VALUE) -> np.ndarray:
    if not kappa_sq >= 0:
        raise ValueError(f"kappa_sq must be non-negative, got {kappa_sq}")
    zeta = np.asarray(zeta, dtype=float)
    if kappa_sq == 0:
        return u0 * (1.0 - zeta).astype(complex)
    gamma = np.sqrt(1j * kappa_sq)
    return u0 * _sinh_ratio(gamma, zeta)


def _point(frequency: float, kappa_sq: float, z_star: float, gamma: complex) -> SoundingPoint:
    gc = _gamma_coth(gamma)
    omega = 2.0 * math.pi * frequency
    ratio = 1.0 / gc
    return SoundingPoint(
        frequency=frequency,
        kappa_sq=kappa_sq,
        rho_a=omega * MU0 * z_star**2 * abs(ratio) ** 2,
        theta=math.atan2(ratio.imag, ratio.real),
        surface_field=SURFACE_VALUE,
        surface_gradient=-SURFACE_VALUE * gc,
        status="analytic",
    )


def classical_sounding(model: EarthModel, frequency: float) -> SoundingPoint:
    _, kappa_sq = nondimensionalize(model, frequency)
    return _point(frequency, kappa_sq, model.z_star, complex(np.sqrt(1j * kappa_sq)))


def time_fractional_sounding(params: TimeFractionalParams, frequency: float) -> SoundingPoint:
    """Uses ``gamma^2 = (i omega)^(1 - beta) mu0 sigma z*^2``.

    ``kappa_sq`` in the result is ``|gamma^2|``.
    """
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    omega = 2.0 * math.pi * frequency
    gamma_sq = (1j * omega) ** (1.0 - params.beta) * MU0 * params.sigma * params.z_star**2
    return _point(frequency, abs(gamma_sq), params.z_star, complex(np.sqrt(gamma_sq)))
