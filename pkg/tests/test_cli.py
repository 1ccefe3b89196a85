import json

import numpy as np
import pytest

from collective_decay.cli import main, parse_initial
from collective_decay import ValidationError


def write(path, positions, omega0=1000.0):
    path.write_text(json.dumps({"omega0_over_gamma": omega0, "length_unit": "inverse_k0",
                                "atoms": [{"position": p} for p in positions]}))
    return str(path)


@pytest.fixture
def dicke(tmp_path):
    return write(tmp_path / "dicke.json", [[0, 0, 0], [0, 0, 1e-3]])


@pytest.fixture
def single(tmp_path):
    return write(tmp_path / "one.json", [[0, 0, 0]])


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, dtype=str)


def test_couplings_single_atom_zero(single, tmp_path):
    out = tmp_path / "o"
    assert main(["couplings", single, "--out-dir", str(out)]) == 0
    for name in ("b_closed_real.csv", "g_closed_real.csv", "g_closed_imag.csv"):
        assert np.all(read_csv(out / name)[:, 1:].astype(float) == 0)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["command"] == "couplings" and meta["parameters"]["quadrature"]["cutoff"] == 40.0


def test_couplings_compare(tmp_path, capsys):
    f = write(tmp_path / "p.json", [[0, 0, 0], [0.4, 0.3, 0.2]])
    out = tmp_path / "o"
    assert main(["couplings", f, "--compare", "extended,full_numeric", "--out-dir", str(out),
                 "--workers", "2"]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["max_abs_difference"] <= 1e-2
    assert (out / "g_diff_extended_full_numeric_real.csv").exists()


def test_spectrum_dicke_and_trace(dicke, tmp_path):
    out = tmp_path / "o"
    assert main(["spectrum", dicke, "--out-dir", str(out)]) == 0
    table = read_csv(out / "eigenmodes.csv").astype(float)
    assert np.allclose(table[:3, 0], 2.0, rtol=1e-3)
    assert np.all(np.abs(table[3:, 0]) < 1e-3)
    assert table[:, 0].sum() == pytest.approx(6.0, abs=1e-10)


def test_spectrum_single_atom(single, tmp_path):
    out = tmp_path / "o"
    assert main(["spectrum", single, "--out-dir", str(out)]) == 0
    table = read_csv(out / "eigenmodes.csv").astype(float)
    assert table.shape[0] == 3
    assert np.allclose(table[:, 0], 1.0) and np.allclose(table[:, 1], 0.0)


def test_evolve_single_atom(single, tmp_path):
    out = tmp_path / "o"
    assert main(["evolve", single, "--initial", "single:0,1", "--t-final", "1",
                 "--out-dir", str(out)]) == 0
    header = (out / "trajectory.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "time" and header[-2:] == ["population", "emission_rate"]
    last = read_csv(out / "trajectory.csv")[-1].astype(float)
    assert last[0] == 1.0
    assert last[-2] == pytest.approx(np.exp(-1), abs=1e-8)


def test_evolve_symmetric_dicke(dicke, tmp_path):
    out = tmp_path / "o"
    assert main(["evolve", dicke, "--initial", "symmetric:0", "--t-final", "1",
                 "--out-dir", str(out)]) == 0
    table = read_csv(out / "trajectory.csv").astype(float)
    assert np.allclose(table[:, -2], np.exp(-2 * table[:, 0]), rtol=1e-5)


def test_outputs_byte_identical(dicke, tmp_path):
    for run in ("a", "b"):
        assert main(["evolve", dicke, "--initial", "antisymmetric:1", "--t-final", "0.5",
                     "--out-dir", str(tmp_path / run)]) == 0
    for name in ("trajectory.csv", "metadata.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_env_out_dir(single, tmp_path, monkeypatch):
    monkeypatch.setenv("COLLECTIVE_DECAY_OUT_DIR", str(tmp_path / "env"))
    assert main(["spectrum", single]) == 0
    assert (tmp_path / "env" / "eigenmodes.csv").exists()


@pytest.mark.parametrize("argv", [
    ["evolve", "{f}", "--initial", "bogus:1"],
    ["evolve", "{f}", "--initial", "single:5,0"],
    ["evolve", "{f}", "--initial", "weights:1,2"],
    ["spectrum", "{f}", "--variant", "nonsense"],
    ["spectrum", "{missing}"],
    ["spectrum", "{bad}"],
    ["couplings", "{f}", "--compare", "extended"],
    [],
])
def test_usage_errors_exit_2(argv, single, tmp_path):
    (tmp_path / "bad.json").write_text('{"omega0_over_gamma": 1000, "atoms": [')
    args = [a.format(f=single, missing=str(tmp_path / "nope.json"), bad=str(tmp_path / "bad.json"))
            for a in argv]
    assert main(args + ["--out-dir", str(tmp_path / "o")] if args else args) == 2


def test_unknown_field_exit_2(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"omega0_over_gamma": 1000, "atoms": [{"position": [0, 0, 0]}],
                             "gamma": 2}))
    assert main(["spectrum", str(p), "--out-dir", str(tmp_path / "o")]) == 2
    assert "invalid ensemble file" in capsys.readouterr().err


def test_convergence_failure_exit_1(tmp_path, capsys):
    f = write(tmp_path / "p.json", [[0, 0, 0], [0, 0, 0.5]])
    code = main(["couplings", f, "--variant", "extended", "--eps-seq", "0.5,0.4,0.3",
                 "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "residual" in capsys.readouterr().err


def test_microsim_full_needs_two_atoms(tmp_path):
    f = write(tmp_path / "t.json", [[0, 0, 0], [0, 0, 1], [0, 0, 2]], omega0=20.0)
    assert main(["microsim", f, "--sector", "full", "--out-dir", str(tmp_path / "o")]) == 2


def test_microsim_single_atom(single, tmp_path):
    out = tmp_path / "o"
    assert main(["microsim", single, "--band", "20", "--n-omega", "80", "--angular-order", "9",
                 "--t-final", "2", "--samples", "81", "--out-dir", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["fit"]["rate"] == pytest.approx(1.0, rel=0.05)
    assert meta["prediction"]["rate"] == pytest.approx(1.0)
    assert meta["parameters"]["grid"]["n_omega"] == 80


def test_verify_tensors(tmp_path):
    out = tmp_path / "o"
    assert main(["verify", "--suite", "tensors", "--out-dir", str(out)]) == 0
    report = json.loads((out / "verify_tensors.json").read_text())
    assert report["passed"] and len(report["suites"]["tensors"]) == 5


def test_parse_initial():
    assert np.allclose(parse_initial("weights:1,0,0,0,1j,0", 2)[[0, 4]], [2**-0.5, 1j * 2**-0.5])
    with pytest.raises(ValidationError):
        parse_initial("symmetric:x", 2)
