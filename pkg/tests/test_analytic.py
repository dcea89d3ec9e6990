import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frachelm.analytic import (
    OVERFLOW_GAMMA,
    TimeFractionalParams,
    _gamma_coth,
    _sinh_ratio,
    classical_field,
    classical_sounding,
    time_fractional_sounding,
)
from frachelm.mesh_fem import assemble, build_mesh
from frachelm.mt import EarthModel


def test_field_endpoints_and_laplace_limit():
    zeta = np.linspace(0, 1, 11)
    u = classical_field(50.0, zeta, 1 + 1j)
    assert u[0] == pytest.approx(1 + 1j) and abs(u[-1]) < 1e-15
    np.testing.assert_allclose(classical_field(0.0, zeta, 2.0), 2.0 * (1 - zeta))
    with pytest.raises(ValueError):
        classical_field(-1.0, zeta)


def test_field_decays_for_large_wavenumber():
    u = classical_field(1e6, np.array([0.0, 0.5, 1.0]))
    assert np.all(np.isfinite(u))
    assert abs(u[1]) < 1e-100


def test_overflow_guard_is_continuous():
    for mag in (OVERFLOW_GAMMA * 0.999, OVERFLOW_GAMMA * 1.001):
        g = mag * np.exp(1j * math.pi / 4)
        direct = g / np.tanh(g)
        assert _gamma_coth(g) == pytest.approx(direct, rel=1e-13)
        z = np.linspace(0, 1, 5)
        scaled = _sinh_ratio(g, z)
        np.testing.assert_allclose(scaled[:-1], (np.sinh(g * (1 - z)) / np.sinh(g))[:-1], rtol=1e-10)


def test_field_satisfies_discrete_equation_to_second_order():
    kappa_sq = 40.0
    res = []
    for n in (51, 101, 201):
        mesh = build_mesh(n)
        fem = assemble(mesh, -1j * kappa_sq)
        u = classical_field(kappa_sq, mesh.nodes)
        r = fem.K.matvec(u) + fem.M2.matvec(u)
        res.append(np.abs(r[1:-1]).max() / mesh.h)
    ratios = np.array(res[:-1]) / np.array(res[1:])
    assert np.all(ratios > 3.5)


def test_high_frequency_half_space_limit():
    p = classical_sounding(EarthModel(sigma=0.01, z_star=1000.0), 1e4)
    assert p.rho_a == pytest.approx(100.0, rel=1e-6)
    assert p.theta == pytest.approx(-math.pi / 4, abs=1e-6)


def test_low_frequency_conductor_limit():
    rho = [classical_sounding(EarthModel(), f).rho_a for f in (1e-2, 1e-4, 1e-6)]
    assert rho[0] > rho[1] > rho[2] and rho[2] < 1e-4
    assert abs(classical_sounding(EarthModel(), 1e-6).theta) < 1e-6


def test_beta_zero_reduces_to_classical():
    model = EarthModel()
    params = TimeFractionalParams(0.0, model.sigma, model.z_star)
    for f in (1e-2, 1.0, 1e3):
        a, b = classical_sounding(model, f), time_fractional_sounding(params, f)
        assert b.rho_a == pytest.approx(a.rho_a, rel=1e-12)
        assert b.theta == pytest.approx(a.theta, abs=1e-12)


def test_time_fractional_phase_offset():
    theta = time_fractional_sounding(TimeFractionalParams(0.2), 1e4).theta
    assert math.degrees(theta) == pytest.approx(-(1 - 0.2) * 45.0, abs=0.1)


def test_time_fractional_params_validate():
    for beta in (-0.1, 1.0):
        with pytest.raises(ValueError):
            TimeFractionalParams(beta)
    with pytest.raises(ValueError):
        time_fractional_sounding(TimeFractionalParams(0.1), 0.0)


@settings(max_examples=50, deadline=None)
@given(kappa_sq=st.floats(1e-6, 1e5), zeta=st.floats(0, 1))
def test_field_bounded_by_surface_value(kappa_sq, zeta):
    u = classical_field(kappa_sq, np.array([zeta]))[0]
    assert abs(u) <= abs(1 + 1j) * (1 + 1e-9)


@settings(max_examples=50, deadline=None)
@given(f=st.floats(1e-3, 1e5))
def test_sounding_phase_in_principal_range(f):
    p = classical_sounding(EarthModel(), f)
    assert -math.pi < p.theta <= math.pi and p.rho_a >= 0
