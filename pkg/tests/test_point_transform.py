"""Coordinate map, wavefunction maps, and the radial Jacobian identity."""

import numpy as np
import pytest

from pdmlab import (
    DomainError,
    GriddedWavefunction,
    build_map,
    constant_mass,
    constant_scalar,
    custom_mass,
    jacobian_trace_residual,
    make_pair,
    pull_wavefunction,
    push_wavefunction,
    radial_map,
    reciprocal_quadratic_mass,
    tabulated_mass,
)


def test_unit_mass_map_is_identity():
    x = np.linspace(0.0, 1.0, 101)
    tmap = build_map(constant_mass(1.0), x)
    np.testing.assert_allclose(tmap.q_of_x, x, rtol=0, atol=1e-14)
    np.testing.assert_allclose(tmap.jac, 1.0)


def test_constant_mass_map_scales_linearly():
    x = np.linspace(0.0, 1.0, 101)
    tmap = build_map(constant_mass(4.0), x)
    np.testing.assert_allclose(tmap.q_of_x, 2.0 * x, rtol=0, atol=1e-13)


def test_arctangent_oracle():
    x = np.linspace(0.0, 10.0, 2001)
    tmap = build_map(reciprocal_quadratic_mass(), x)
    assert np.max(np.abs(tmap.q_of_x - np.arctan(x))) <= 1e-8


def test_map_refinement_converges_at_quadrature_order():
    def err(n):
        x = np.linspace(0.0, 10.0, n)
        tmap = build_map(reciprocal_quadratic_mass(), x)
        return np.max(np.abs(tmap.q_of_x - np.arctan(x)))

    assert err(501) / max(err(1001), 1e-16) > 8.0


def test_map_monotone_for_random_positive_mass():
    rng = np.random.default_rng(3)
    x = np.linspace(-2.0, 2.0, 401)
    values = 0.5 + np.abs(np.cumsum(rng.normal(0, 0.02, x.size))) + 0.1 * np.sin(3 * x)
    mass = tabulated_mass(x, values)
    tmap = build_map(mass, x)
    assert np.all(np.diff(tmap.q_of_x) > 0)


def test_inverse_interpolant_hits_nodes():
    x = np.linspace(-5.0, 5.0, 801)
    tmap = build_map(reciprocal_quadratic_mass(), x)
    np.testing.assert_allclose(tmap.x(tmap.q_of_x), x, rtol=0, atol=1e-10)


def test_map_rejects_nonpositive_mass():
    x = np.linspace(-1.0, 1.0, 101)
    bad = custom_mass(lambda t: 1.0 - np.asarray(t, float) ** 2 * 2.0)
    with pytest.raises(DomainError):
        build_map(bad, x)


def test_push_unit_mass_is_identity():
    # m = 1: q(x) = x - x_min, so phi is psi with a shifted argument only
    x = np.linspace(-4.0, 4.0, 801)
    tmap = build_map(constant_mass(1.0), x)
    q = np.linspace(-0.5, 8.5, 901)
    psi = GriddedWavefunction(q, np.exp(-((q - 4.0) ** 2) / 2).astype(complex), "dq")
    phi = push_wavefunction(psi, tmap, constant_mass(1.0))
    np.testing.assert_allclose(phi.values.real, np.exp(-(x**2) / 2), rtol=0, atol=1e-9)


def test_push_preserves_norm_for_arctan_map():
    # ground state of the transformed oscillator, width chosen so its mass
    # sits inside the arctan image (-pi/2, pi/2)
    omega = 16.0
    mass = reciprocal_quadratic_mass()
    x = np.linspace(-20.0, 20.0, 8001)
    tmap = build_map(mass, x)
    center = 0.5 * (tmap.q_range[0] + tmap.q_range[1])
    q = np.linspace(tmap.q_range[0], tmap.q_range[1], 3001)
    values = (omega / np.pi) ** 0.25 * np.exp(-omega * (q - center) ** 2 / 2)
    psi = GriddedWavefunction(q, values.astype(complex), "dq")
    phi = push_wavefunction(psi, tmap, mass)
    assert abs(phi.norm_squared() - psi.norm_squared()) <= 1e-8
    assert abs(phi.norm_squared() - 1.0) <= 1e-8


def test_push_constant_mass_four_rescales_argument():
    # m = 4: q = 2(x - x_min), phi(x) = sqrt(2)*psi(q(x)); norm carried over
    mass = constant_mass(4.0)
    x = np.linspace(-5.0, 5.0, 2001)
    tmap = build_map(mass, x)
    q = np.linspace(-0.5, 20.5, 4201)
    psi = GriddedWavefunction(q, np.exp(-((q - 10.0) ** 2) / 2).astype(complex), "dq")
    phi = push_wavefunction(psi, tmap, mass)
    expected = np.sqrt(2.0) * np.exp(-((2.0 * x) ** 2) / 2)
    np.testing.assert_allclose(phi.values.real, expected, rtol=1e-9, atol=1e-12)
    assert abs(phi.norm_squared() - psi.norm_squared()) <= 1e-8 * psi.norm_squared()


def test_pull_then_push_round_trip():
    mass = reciprocal_quadratic_mass()
    x = np.linspace(-8.0, 8.0, 2001)
    tmap = build_map(mass, x)
    rng = np.random.default_rng(5)
    coeff = rng.normal(size=4)
    smooth = sum(c * np.exp(-(x - c) ** 2 / 4) for c in coeff)
    phi = GriddedWavefunction(x, smooth.astype(complex), "dx")
    psi = pull_wavefunction(phi, tmap, mass)
    back = push_wavefunction(psi, tmap, mass)
    assert np.max(np.abs(back.values - phi.values)) <= 1e-6


def test_push_then_pull_round_trip():
    mass = reciprocal_quadratic_mass()
    x = np.linspace(-6.0, 6.0, 2001)
    tmap = build_map(mass, x)
    q = np.linspace(-0.1, tmap.q_range[1] + 0.1, 2001)
    psi_vals = np.exp(-((q - 1.4) / 0.3) ** 2) * np.exp(1j * q)
    psi = GriddedWavefunction(q, psi_vals, "dq")
    phi = push_wavefunction(psi, tmap, mass)
    psi_back = pull_wavefunction(phi, tmap, mass)
    expected = np.interp(psi_back.grid, q, psi_vals.real) + 1j * np.interp(psi_back.grid, q, psi_vals.imag)
    assert np.max(np.abs(psi_back.values - expected)) <= 1e-5


def test_push_refuses_extrapolation():
    mass = constant_mass(1.0)
    x = np.linspace(0.0, 10.0, 101)
    tmap = build_map(mass, x)
    q = np.linspace(0.0, 5.0, 51)
    psi = GriddedWavefunction(q, np.ones(51, dtype=complex), "dq")
    with pytest.raises(DomainError):
        push_wavefunction(psi, tmap, mass)


def test_normalized_invariant():
    q = np.linspace(-6, 6, 1201)
    wf = GriddedWavefunction(q, (np.exp(-q**2) * (1 + 2j)).astype(complex), "dq")
    assert abs(wf.normalized().norm_squared() - 1.0) <= 1e-10


def test_radial_map_identity_for_unit_pair():
    q = radial_map(constant_scalar(1.0), constant_mass(1.0), np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(q, [1.0, 2.0, 3.0])


def test_radial_map_quadratic_pair_hand_oracle():
    # m = r^2, S = 3 r^2/4: factor S/sqrt(m) = 3r/4, so x=(1,0,0) -> (0.75,0,0)
    entry = make_pair("m-quadratic", lam=1.0, dof=3)
    q = radial_map(entry.scalar, entry.mass, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(q, [0.75, 0.0, 0.0], rtol=1e-14)


def test_jacobian_trace_identity_for_catalog_pair():
    entry = make_pair("S-unity", lam=1.0, dof=3)
    res = jacobian_trace_residual(entry.scalar, entry.mass, 3,
                                  np.linspace(0.5, 5.0, 20), stencil=2e-5)
    assert res <= 1e-6
    # O(h^2) stencil convergence: quadrupling shows up when h is halved
    coarse = jacobian_trace_residual(entry.scalar, entry.mass, 3,
                                     np.linspace(0.5, 5.0, 20), stencil=1e-4)
    finer = jacobian_trace_residual(entry.scalar, entry.mass, 3,
                                    np.linspace(0.5, 5.0, 20), stencil=5e-5)
    assert coarse / finer > 3.5


def test_jacobian_trace_identity_constant_pair():
    res = jacobian_trace_residual(constant_scalar(1.0), constant_mass(1.0), 3,
                                  np.linspace(0.5, 5.0, 10), stencil=1e-4)
    assert res <= 1e-10


def test_jacobian_trace_negative_control():
    quad = make_pair("m-quadratic", lam=1.0, dof=3)
    res = jacobian_trace_residual(constant_scalar(1.0), quad.mass, 3,
                                  np.linspace(0.5, 5.0, 10), stencil=1e-4)
    assert res > 1e-2
