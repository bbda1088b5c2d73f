"""Artifact writers: deterministic JSON, CSV dumps of the domain objects."""

import numpy as np
import pytest

from pdmlab import (
    DomainError,
    GriddedWavefunction,
    box_potential,
    build_map,
    build_von_roos,
    constant_mass,
    constant_scalar,
    make_pair,
    mm_ordering,
    radial_map,
    serialize,
)


def test_wavefunction_csv_and_json(tmp_path):
    q = np.linspace(-2.0, 2.0, 5)
    wf = GriddedWavefunction(q, (q + 1j * q**2).astype(complex), "dq")
    csv_path = tmp_path / "wf.csv"
    serialize.wavefunction_to_csv(wf, csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "grid,re,im"
    assert len(lines) == 6
    json_path = tmp_path / "wf.json"
    serialize.wavefunction_to_json(wf, json_path)
    import json

    data = json.loads(json_path.read_text())
    assert data["measure"] == "dq"
    assert data["re"][0] == -2.0


def test_map_csv(tmp_path):
    x = np.linspace(0.0, 1.0, 11)
    tmap = build_map(constant_mass(4.0), x)
    path = tmp_path / "map.csv"
    serialize.map_to_csv(tmap, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,q,jacobian"
    assert lines[-1].split(",") == ["1", "2", "2"]


def test_operator_coo_csv(tmp_path):
    grid = np.linspace(0.0, 1.0, 12)
    op = build_von_roos(constant_mass(1.0), box_potential(), mm_ordering(), grid)
    path = tmp_path / "op.csv"
    serialize.operator_to_csv(op, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,j,re,im"
    assert len(lines) == 1 + 3 * op.size - 2


def test_json_round_trips_and_key_order():
    text = serialize.dumps({"b": 1, "a": [1.5, None, True]})
    assert text.index('"b"') < text.index('"a"')
    import json

    assert json.loads(text) == {"b": 1, "a": [1.5, None, True]}


def test_radial_map_optional_pair_check():
    entry = make_pair("S-unity", lam=1.0)
    pts = np.array([[1.0, 0.5, 0.2], [2.0, 0.0, 1.0]])
    radial_map(entry.scalar, entry.mass, pts, check_pair=True)
    quad = make_pair("m-quadratic", lam=1.0)
    with pytest.raises(DomainError):
        radial_map(constant_scalar(1.0), quad.mass, pts, check_pair=True)
