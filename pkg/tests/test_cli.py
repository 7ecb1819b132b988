import json

import numpy as np
import pytest

from spectral_cuts.cli import main
from spectral_cuts.contour import circle, rectangle, Cycle
from spectral_cuts.operators import operator_to_json
from spectral_cuts.fixtures import perturbed_fixture
from spectral_cuts.perturbation import build_appropriate_grid


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def cplx(v):
    return complex(*v) if isinstance(v, list) else complex(v)


def read(path):
    return json.loads(path.read_text())


@pytest.fixture
def diag(tmp_path):
    return write(tmp_path / "op.json", {"kind": "diagonal", "lambda": [0, 2]})


@pytest.fixture
def unit_circle(tmp_path):
    return write(tmp_path / "cyc.json", Cycle([circle(0, 1)]).to_json())


def test_spectrum_examples(tmp_path, diag):
    out = tmp_path / "o1"
    assert main(["spectrum", diag, "--out", str(out)]) == 0
    rep = read(out / "spectrum.json")
    assert [cplx(v) for v in rep["eigenvalues"]] == [0, 2]
    assert (out / "scatter.csv").read_text().splitlines()[0] == "re,im"
    tri = write(tmp_path / "tri.json", {"kind": "dense", "data": [[1, 5], [0, 3]]})
    assert main(["spectrum", tri, "--out", str(tmp_path / "o2")]) == 0
    ev = sorted(cplx(v).real for v in read(tmp_path / "o2" / "spectrum.json")["eigenvalues"])
    assert ev == pytest.approx([1, 3])


def test_parse_error_names_field(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", {"kind": "diagonal", "lamda": [0]})
    assert main(["spectrum", bad, "--out", str(tmp_path)]) == 2
    assert "lambda" in capsys.readouterr().err
    (tmp_path / "broken.json").write_text("{not json")
    assert main(["spectrum", str(tmp_path / "broken.json"), "--out", str(tmp_path)]) == 2


def test_cut_all_pass_and_exit3(tmp_path, diag, unit_circle):
    out = tmp_path / "cut"
    assert main(["cut", diag, unit_circle, "--out", str(out)]) == 0
    rep = read(out / "report.json")
    assert rep["all_pass"]
    assert rep["manifest"]["seed"] == 0 and "tolerances" in rep and rep["version"]
    P = read(out / "projection.json")["P"]
    assert [cplx(v) for v in P["entries"]] == pytest.approx([1, 0], abs=1e-12)
    on = write(tmp_path / "on.json", Cycle([circle(0, 2)]).to_json())
    assert main(["cut", diag, on, "--out", str(out)]) == 3


def test_calculus_examples(tmp_path, unit_circle):
    op = write(tmp_path / "op.json", {"kind": "diagonal", "lambda": [0, 2, 5]})
    cyc = write(tmp_path / "c.json", Cycle([circle(0, 1), circle(2, 1)]).to_json())
    assert main(["calculus", op, cyc, "--f", "z^2", "--out", str(tmp_path)]) == 0
    rep = read(tmp_path / "calculus.json")
    for route in ("restrict", "integral"):
        assert [cplx(v) for v in rep[route]["F"]["entries"]] == pytest.approx([0, 4, 0], abs=1e-10)
    assert rep["agreement"] <= 1e-7 and rep["agreement_pass"]
    dense = write(tmp_path / "d.json", {"kind": "dense", "data": [[0, 1], [0.5, 2]]})
    assert main(["calculus", dense, unit_circle, "--f", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(["cut", dense, unit_circle, "--out", str(tmp_path / "a")]) == 0
    F = np.array([[cplx(v) for v in r] for r in read(tmp_path / "a" / "calculus.json")["integral"]["F"]["entries"]])
    P = np.array([[cplx(v) for v in r] for r in read(tmp_path / "a" / "projection.json")["P"]["entries"]])
    assert np.abs(F - P).max() <= 1e-9


def test_decompose_examples(tmp_path, diag):
    cover = write(tmp_path / "cov.json", {"U": [{"disc": [0, 0, 1.2]}], "V": [{"disc": [2, 0, 1.2]}]})
    assert main(["decompose", diag, cover, "--out", str(tmp_path)]) == 0
    assert read(tmp_path / "witness.json")["report"]["witness_pass"]
    bad = write(tmp_path / "bad.json", {"U": [{"disc": [0, 0, 1]}], "V": [{"disc": [5, 0, 1]}]})
    assert main(["decompose", diag, bad, "--out", str(tmp_path)]) == 5
    op = write(tmp_path / "pd.json", operator_to_json(perturbed_fixture(12, 2, 0)))
    cov = write(tmp_path / "pc.json", {"U": [{"rect": [-1, 1.5, -1, 1.5]}],
                                       "V": [{"rect": [0.5, 5, -1, 5]}, {"rect": [-1, 5, 0.5, 5]}]})
    assert main(["decompose", op, cov, "--out", str(tmp_path / "p")]) == 0
    rep = read(tmp_path / "p" / "witness.json")["report"]
    assert rep["route"] == "series" and rep["series_vs_dense"] <= 1e-6


def test_perturb_examples(tmp_path):
    lam = [0, 1, [0, 1], [1, 1], 2, [2, 1]]
    zero = write(tmp_path / "z.json", {"kind": "diag_plus_series", "lambda": lam,
                                      "alpha": [[0] * 6], "beta": [[0] * 6]})
    assert main(["perturb", "grid", zero, "--out", str(tmp_path)]) == 0
    assert set(read(tmp_path / "grid.json")["scores"]["xs"]) == {0}
    Pd = perturbed_fixture(12, 2, 0)
    op = write(tmp_path / "pd.json", operator_to_json(Pd))
    g = build_appropriate_grid(Pd, 8, 8)
    cyc = write(tmp_path / "c.json", Cycle([rectangle(g.xs[1], g.xs[4], g.ys[1], g.ys[4])]).to_json())
    assert main(["perturb", "project", op, cyc, "--out", str(tmp_path)]) == 0
    assert read(tmp_path / "report.json")["series_vs_dense"] <= 1e-6
    x = Pd.lam[0].real
    bad = write(tmp_path / "b.json", Cycle([rectangle(x, g.xs[4], g.ys[1], g.ys[4])]).to_json())
    assert main(["perturb", "curve-check", op, bad, "--out", str(tmp_path)]) == 6


def test_determinism(tmp_path, unit_circle):
    op = write(tmp_path / "op.json", {"kind": "dense", "data": [[0, 1], [0.5, 2]]})
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["cut", op, unit_circle, "--seed", "7", "--out", str(out)]) == 0
    for name in ("projection.json", "report.json", "resolvent_norm.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rep = read(a / "report.json")
    assert rep["manifest"]["seed"] == 7 and len(rep["manifest_sha256"]) == 64


def test_flag_validation(tmp_path, diag):
    with pytest.raises(SystemExit) as e:
        main(["spectrum", diag, "--grading", "1.5"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["spectrum", diag, "--seed", "-1"])
