"""Classical PDM trajectories: conservation, forces, frame equivalence."""

import numpy as np
import pytest

from pdmlab import (
    ClassicalState,
    DomainError,
    ValidationError,
    build_map,
    classical_fields,
    constant_mass,
    eom_rhs,
    fields_from_mass_profile,
    gradient_check,
    hamiltonian_eval,
    integrate,
    make_pair,
    reciprocal_quadratic_mass,
    transform_equivalence_check,
)


def ho_fields(m0=0.5):
    return classical_fields(mass=1.0, V=lambda x: float(x[0] ** 2),
                            grad_V=lambda x: np.array([2.0 * x[0]]), m0=m0)


def test_free_particle_energy_values():
    fields = classical_fields(mass=1.0, m0=0.5)
    state = ClassicalState(np.array([0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    assert hamiltonian_eval(state, fields) == 1.0
    fields4 = classical_fields(mass=4.0, m0=0.5)
    assert hamiltonian_eval(state, fields4) == 0.25


def test_pseudo_momentum_energy_identity():
    # E computed from (x, P) equals pi^2/(2 m0) + V with pi = P/sqrt(m)
    mass = reciprocal_quadratic_mass()
    fields = fields_from_mass_profile(mass, V=lambda x: float(x[0] ** 2),
                                      grad_V=lambda x: np.array([2.0 * x[0]]))
    state = ClassicalState(np.array([0.7]), np.array([0.4]))
    m = float(mass.m(0.7))
    pi = 0.4 / np.sqrt(m)
    expected = pi**2 / (2.0 * fields.m0) + 0.7**2
    assert hamiltonian_eval(state, fields) == pytest.approx(expected, rel=1e-14)


def test_free_particle_moves_straight():
    fields = classical_fields(mass=1.0, m0=0.5)
    state = ClassicalState(np.zeros(3), np.array([0.5, -0.25, 0.0]))
    traj = integrate(state, fields, 1e-3, 2000, record_every=100)
    v = traj.momenta[0] / 0.5
    for t, x in zip(traj.times, traj.positions):
        np.testing.assert_allclose(x, v * t, rtol=0, atol=1e-12)
    assert traj.drift <= 1e-14


def test_constant_mass_rk4_drift_and_order():
    state = ClassicalState(np.array([1.0]), np.array([0.0]))
    drifts = {}
    for dt in (4e-3, 2e-3):
        steps = int(round(10 * np.pi / dt))
        drifts[dt] = integrate(state, ho_fields(), dt, steps, record_every=200).drift
    assert drifts[2e-3] <= 1e-8
    assert drifts[4e-3] / drifts[2e-3] > 10.0  # 4th-order scaling


def test_pdm_confining_drift():
    entry = make_pair("S-unity", lam=1.0)
    fields = fields_from_mass_profile(
        entry.mass, V=lambda x: float(4.0 * (x[0] - 2.0) ** 2),
        grad_V=lambda x: np.array([8.0 * (x[0] - 2.0)]),
    )
    state = ClassicalState(np.array([2.4]), np.array([0.0]))
    traj = integrate(state, fields, 1e-3, 40000, record_every=200)
    assert traj.drift <= 1e-8


def test_cyclotron_orbit_matches_analytic():
    # m = 1, symmetric-gauge potential, m0 = 1/2: angular frequency |e|B0/m0
    B0, e, v = 1.0, 1.0, 1.0
    fields = classical_fields(
        mass=1.0,
        A=lambda x: np.array([-0.5 * B0 * x[1], 0.5 * B0 * x[0], 0.0]),
        jac_A=lambda x: np.array([[0.0, -0.5 * B0, 0.0],
                                  [0.5 * B0, 0.0, 0.0],
                                  [0.0, 0.0, 0.0]]),
        e=e, m0=0.5,
    )
    omega_c = abs(e) * B0 / 0.5
    state = ClassicalState(np.zeros(3), np.array([0.0, 0.5 * v, 0.0]))
    steps = int(round(np.pi / 1e-4))
    traj = integrate(state, fields, 1e-4, steps, record_every=100)
    radius = v / omega_c
    expected_x = radius * (1.0 - np.cos(omega_c * traj.times))
    expected_y = radius * np.sin(omega_c * traj.times)
    assert np.max(np.abs(traj.positions[:, 0] - expected_x)) <= 1e-8
    assert np.max(np.abs(traj.positions[:, 1] - expected_y)) <= 1e-8
    assert traj.drift <= 1e-10


def test_eom_gradient_check_against_hamiltonian():
    entry = make_pair("S-unity", lam=1.0)
    fields = fields_from_mass_profile(
        entry.mass, V=lambda x: float(4.0 * (x[0] - 2.0) ** 2),
        grad_V=lambda x: np.array([8.0 * (x[0] - 2.0)]),
    )
    rng = np.random.default_rng(2)
    for _ in range(5):
        state = ClassicalState(np.array([rng.uniform(1.0, 3.0)]),
                               np.array([rng.normal()]))
        assert gradient_check(state, fields, eps=1e-5) <= 1e-8


def test_gradient_check_with_vector_potential():
    B0 = 0.8
    mass3d = lambda x: 1.0 / (1.0 + 0.1 * float(np.dot(x, x)))
    fields = classical_fields(
        mass=mass3d,
        V=lambda x: float(np.dot(x, x)),
        A=lambda x: np.array([-0.5 * B0 * x[1], 0.5 * B0 * x[0], 0.0]),
        e=1.0, m0=0.5,
    )
    state = ClassicalState(np.array([0.4, -0.3, 0.2]), np.array([0.1, 0.2, -0.5]))
    assert gradient_check(state, fields, eps=1e-5) <= 1e-7


def test_legendre_consistency_along_trajectory():
    # P reconstructed from the velocity equals m0*m*xdot + e*A at every sample
    B0 = 0.6
    fields = classical_fields(
        mass=lambda x: 1.0 + 0.2 * float(x[0] ** 2),
        V=lambda x: float(x[0] ** 2 + x[1] ** 2),
        A=lambda x: np.array([-0.5 * B0 * x[1], 0.5 * B0 * x[0], 0.0]),
        e=1.0, m0=0.5,
    )
    state = ClassicalState(np.array([0.5, 0.0, 0.0]), np.array([0.0, 0.4, 0.1]))
    traj = integrate(state, fields, 1e-3, 2000, record_every=50)
    for s in traj.states():
        v, _ = eom_rhs(s, fields)
        rebuilt = 0.5 * fields.mass(s.x) * v + 1.0 * fields.A(s.x)
        np.testing.assert_allclose(rebuilt, s.P, rtol=0, atol=1e-12)


def test_leapfrog_bounded_no_secular_growth():
    state = ClassicalState(np.array([1.0]), np.array([0.0]))
    short = integrate(state, ho_fields(), 1e-3, int(round(10 * np.pi / 1e-3)),
                      scheme="leapfrog", record_every=100)
    long = integrate(state, ho_fields(), 1e-3, int(round(100 * np.pi / 1e-3)),
                     scheme="leapfrog", record_every=500)
    assert long.drift <= 2.0 * short.drift
    assert long.drift <= 1e-5


def test_leapfrog_rejected_for_pdm_or_gauge():
    mass = reciprocal_quadratic_mass()
    fields = fields_from_mass_profile(mass, V=lambda x: float(x[0] ** 2),
                                      grad_V=lambda x: np.array([2.0 * x[0]]))
    state = ClassicalState(np.array([0.1]), np.array([0.0]))
    with pytest.raises(DomainError):
        integrate(state, fields, 1e-3, 10, scheme="leapfrog")
    with pytest.raises(ValidationError):
        integrate(state, ho_fields(), 1e-3, 10, scheme="nope")


def test_truncated_trajectory_diagnostic():
    bad = classical_fields(mass=1.0, V=lambda x: float(np.sqrt(x[0])),
                           grad_V=lambda x: np.array([0.5 / np.sqrt(x[0])]), m0=0.5)
    state = ClassicalState(np.array([1.0]), np.array([-2.0]))
    with np.errstate(invalid="ignore"):
        traj = integrate(state, bad, 1e-2, 2000, record_every=10)
    assert traj.truncated
    assert "non-finite" in traj.diagnostic


def _centered_potential(mass, domain):
    x = np.linspace(domain[0], domain[1], 2001)
    tmap = build_map(mass, x)
    qc = 0.5 * (tmap.q_range[0] + tmap.q_range[1])
    return (lambda q: (q - qc) ** 2), (lambda q: 2.0 * (q - qc))


def test_transform_equivalence_identity_for_constant_mass():
    V, dV = _centered_potential(constant_mass(1.0), (-6.0, 6.0))
    rep = transform_equivalence_check(constant_mass(1.0), V, dV, 0.0, 1.0,
                                      1e-3, 3142, (-6.0, 6.0))
    assert rep.max_discrepancy <= 1e-11


def test_transform_equivalence_pdm_one_period():
    mass = reciprocal_quadratic_mass()
    V, dV = _centered_potential(mass, (-6.0, 6.0))
    rep = transform_equivalence_check(mass, V, dV, 0.0, 1.0, 1e-4, 31416,
                                      (-6.0, 6.0))
    assert rep.max_discrepancy <= 1e-6


def test_transform_equivalence_with_minimal_coupling():
    # the pseudo-momentum form in the transformed frame and the canonical
    # x-frame form generate the same motion when A maps with 1/sqrt(m)
    mass = reciprocal_quadratic_mass()
    V, dV = _centered_potential(mass, (-6.0, 6.0))
    rep = transform_equivalence_check(mass, V, dV, 0.0, 1.0, 1e-3, 3142,
                                      (-6.0, 6.0), e=0.7,
                                      a_of_x=lambda xv: 0.3 * xv)
    assert rep.max_discrepancy <= 1e-6


def test_dt_validation():
    with pytest.raises(ValidationError):
        integrate(ClassicalState(np.array([0.0]), np.array([0.0])),
                  ho_fields(), -1.0, 10)
