"""Failure modes the contracts promise: singularities, bad inputs, exits."""

import numpy as np
import pytest

from pdmlab import (
    DomainError,
    GriddedWavefunction,
    ValidationError,
    box_potential,
    build_map,
    build_von_roos,
    constant_mass,
    mass_from_scalar,
    mm_ordering,
    pull_wavefunction,
    push_wavefunction,
    reciprocal_quadratic_mass,
    reference_q_operator,
    scalar_from_csv,
    solve_symmetric,
    symmetrize,
    tabulated_scalar,
)
from pdmlab.cli import main


def test_mass_from_scalar_singular_coefficient():
    # S vanishing on the grid: singular-coefficient error up front
    r = np.linspace(0.5, 3.5, 101)  # r = 2.0 is a node
    crossing = tabulated_scalar(r, r - 2.0)
    with pytest.raises(DomainError, match="singular"):
        mass_from_scalar(crossing, 3, 0.5, 1.0, r)


def test_mass_from_scalar_pole_between_nodes():
    # a sign change between nodes escapes the grid check but blows up the
    # integration, which must surface with the last good radius
    from pdmlab import IntegrationError
    from pdmlab.mass_models import ScalarMultiplier

    r = np.linspace(0.5, 5.0, 101)
    raw = ScalarMultiplier(S=lambda t: np.asarray(t) - 2.011,
                           dS=lambda t: np.ones_like(np.asarray(t, float)))
    with pytest.raises(IntegrationError) as info:
        mass_from_scalar(raw, 3, 0.5, 1.0, r)
    assert info.value.last_good is not None


def test_scalar_from_csv(tmp_path):
    path = tmp_path / "s.csv"
    r = np.linspace(0.5, 5.0, 41)
    path.write_text("r,S\n" + "\n".join(f"{a},{3*a}" for a in r) + "\n")
    scal = scalar_from_csv(path)
    np.testing.assert_allclose(scal(r), 3 * r, rtol=1e-12)
    np.testing.assert_allclose(scal.dS(r), 3.0, rtol=1e-8)


def test_wavefunction_measure_mismatch():
    x = np.linspace(0.0, 1.0, 64)
    tmap = build_map(constant_mass(1.0), x)
    wf_dx = GriddedWavefunction(x, np.ones(64, dtype=complex), "dx")
    with pytest.raises(DomainError):
        push_wavefunction(wf_dx, tmap, constant_mass(1.0))
    wf_dq = GriddedWavefunction(x, np.ones(64, dtype=complex), "dq")
    with pytest.raises(DomainError):
        pull_wavefunction(wf_dq, tmap, constant_mass(1.0))


def test_wavefunction_grid_validation():
    with pytest.raises(DomainError):
        GriddedWavefunction(np.array([0.0, 1.0, 0.5]), np.zeros(3, dtype=complex))
    with pytest.raises(DomainError):
        GriddedWavefunction(np.linspace(0, 1, 4), np.zeros(3, dtype=complex))
    with pytest.raises(DomainError):
        GriddedWavefunction(np.linspace(0, 1, 3), np.zeros(3, dtype=complex), "dz")


def test_solve_full_spectrum_boundary():
    grid = np.linspace(0.0, np.pi, 40)
    op = reference_q_operator(box_potential(), grid)
    sol = solve_symmetric(op, op.size)
    assert sol.eigenvalues.size == op.size
    assert np.all(np.diff(sol.eigenvalues) > 0)


def test_symmetrize_rejects_complex_or_wide():
    from pdmlab import build_pseudo_momentum

    grid = np.linspace(-1.0, 1.0, 64)
    with pytest.raises(DomainError):
        symmetrize(build_pseudo_momentum(reciprocal_quadratic_mass(), grid))
    raw = build_von_roos(constant_mass(1.0), box_potential(), mm_ordering(), grid)
    from pdmlab.operators import DiscretizedOperator

    wide = DiscretizedOperator(grid=raw.grid, walls=raw.walls,
                               matrix=(raw.matrix @ raw.matrix))
    with pytest.raises(DomainError):
        symmetrize(wide)


def test_cli_landau_zero_charge_exits_3(tmp_path, capsys):
    code = main(["landau", "--e", "0.0", "--output", str(tmp_path / "r")])
    assert code == 3
    assert "e*B0" in capsys.readouterr().err


def test_cli_radial_mass_in_1d_scenario_exits_2(tmp_path, capsys):
    code = main(["spectrum", "--set", "mass.tag=m-rational",
                 "--output", str(tmp_path / "r")])
    assert code == 2
    assert "radial" in capsys.readouterr().err


def test_cli_bad_override_exits_2(tmp_path, capsys):
    code = main(["landau", "--set", "oops", "--output", str(tmp_path / "r")])
    assert code == 2
