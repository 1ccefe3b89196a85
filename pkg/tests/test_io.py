import json

import numpy as np
import pytest

from collective_decay import ValidationError, make_ensemble
from collective_decay.io import (OUT_DIR_ENV, ensemble_document, parse_ensemble,
                                 resolve_out_dir, write_matrix)

DOC = {"omega0_over_gamma": 1000, "length_unit": "inverse_k0",
       "atoms": [{"position": [0, 0, 0]}, {"position": [0, 0, 1.5]}]}


def test_parse_roundtrip():
    ens = parse_ensemble(DOC)
    assert ens.n_atoms == 2 and ens.omega0 == 1000
    again = parse_ensemble(json.dumps(ensemble_document(ens)))
    assert np.array_equal(again.positions, ens.positions)


def test_units():
    doc = {**DOC, "length_unit": "wavelength"}
    assert parse_ensemble(doc).separations()[0, 1] == pytest.approx(3 * np.pi)
    bare = {k: v for k, v in DOC.items() if k != "length_unit"}
    assert parse_ensemble(bare, "wavelength").separations()[0, 1] == pytest.approx(3 * np.pi)
    with pytest.raises(ValidationError):
        parse_ensemble(DOC, "wavelength")


@pytest.mark.parametrize("doc", [
    {**DOC, "omega0": 5},
    {**DOC, "omega0_over_gamma": -1},
    {**DOC, "atoms": []},
    {**DOC, "atoms": [{"position": [0, 0]}]},
    {**DOC, "atoms": [{"position": [0, 0, 0], "mass": 1}]},
    {**DOC, "length_unit": "meters"},
    '{"omega0_over_gamma": 1000,',
])
def test_strict_schema(doc):
    with pytest.raises(ValidationError):
        parse_ensemble(doc)


def test_matrix_csv(tmp_path):
    ens = make_ensemble([[0, 0, 0], [0, 0, 1]])
    m = np.arange(36).reshape(6, 6) * (1 + 0.1j) / 7
    names = write_matrix(tmp_path / "g", m, ens.n_atoms)
    assert names == ["g_real.csv", "g_imag.csv"]
    lines = (tmp_path / "g_real.csv").read_text().splitlines()
    assert lines[0] == "channel,atom0_m-1,atom0_m0,atom0_m1,atom1_m-1,atom1_m0,atom1_m1"
    row = lines[2].split(",")
    assert row[0] == "atom0_m0"
    assert float(row[3]) == m[1, 2].real  # 17 significant digits round-trip exactly


def test_out_dir_resolution(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
    assert resolve_out_dir(None) == tmp_path / "env"
    assert resolve_out_dir(tmp_path / "flag") == tmp_path / "flag"
    assert (tmp_path / "flag").is_dir()
