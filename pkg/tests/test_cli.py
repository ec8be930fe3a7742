import csv
import io
import json

import numpy as np
import pytest

from randepth.cli import main
from randepth.io import InputError, model_from_dict, model_to_dict, read_points
from randepth.models import EllipticalAffine, GaussianStd, PSymmetric, StudentT, UniformBall, cauchy_marginal


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    g = tmp_path / "g2.json"
    g.write_text(json.dumps({"schema": 1, "family": "gaussian", "d": 2}))
    q = tmp_path / "q.csv"
    q.write_text("0,0\n1,1\n-2,0.5\n")
    data = tmp_path / "data.csv"
    rng = np.random.default_rng(0)
    np.savetxt(data, rng.standard_normal((200, 2)), delimiter=",", header="x,y", comments="")
    return tmp_path, g, q, data


def test_depth_center(capsys, files):
    _, g, q, _ = files
    code, out, _ = run(capsys, "depth", "--model", str(g), "--query", str(q), "--n", "1000", "--seed", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0] == {"index": "0", "depth": "0.5", "n": "1000", "seed": "1", "exact": "0.5", "gap": "0"}
    assert all(float(r["gap"]) >= 0 for r in rows)


def test_depth_is_deterministic(capsys, files):
    _, g, q, _ = files
    a = run(capsys, "depth", "--model", str(g), "--query", str(q), "--n", "500", "--seed", "4")[1]
    b = run(capsys, "depth", "--model", str(g), "--query", str(q), "--n", "500", "--seed", "4")[1]
    assert a == b


def test_depth_on_data_with_header(capsys, files):
    _, _, q, data = files
    code, out, _ = run(capsys, "depth", "--data", str(data), "--query", str(q), "--n", "2000", "--header")
    # --header applies to the query file too, so its first row is skipped
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert "exact" not in rows[0]
    for r in rows:
        assert float(r["depth"]) * 200 == pytest.approx(round(float(r["depth"]) * 200))


def test_depth_from_stdin(capsys, files, monkeypatch):
    _, g, _, _ = files
    monkeypatch.setattr("sys.stdin", io.StringIO("0,0\n"))
    code, out, _ = run(capsys, "depth", "--model", str(g), "--query", "-", "--n", "50")
    assert code == 0 and out.splitlines()[1].startswith("0,0.5,50,0")


def test_projection_depth(capsys, files):
    _, g, q, _ = files
    code, out, _ = run(capsys, "depth", "--model", str(g), "--query", str(q), "--kind", "projection", "--k", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert float(rows[0]["depth"]) == 1.0
    assert all(float(r["gap"]) >= -1e-12 for r in rows)


def test_wrong_column_count_is_usage_error(capsys, files, tmp_path):
    _, g, _, _ = files
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    code, out, err = run(capsys, "depth", "--model", str(g), "--query", str(bad))
    assert code == 2 and out == "" and "expected 2 columns" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["depth", "--model", "missing.json", "--query", "q.csv"],
        ["depth", "--query", "q.csv"],
        ["plan", "--eps", "0.8", "--d", "2"],
        ["plan", "--eps", "abc", "--d", "2"],
        ["bound", "--modulus", "tight"],
        ["simulate", "--protocol", "figure6"],
        ["simulate", "--protocol", "spacing", "--d", "5"],
        ["simulate", "--protocol", "outlyingness", "--model", "{g}"],
        ["bound", "--precision", "0", "--table1"],
        [],
    ],
)
def test_usage_errors(capsys, files, argv):
    _, g, _, _ = files
    argv = [a.replace("{g}", str(g)) for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_bad_model_json(capsys, files, tmp_path):
    _, _, q, _ = files
    m = tmp_path / "m.json"
    for text in ["{", '{"schema": 2, "family": "gaussian", "d": 2}', '{"schema": 1, "family": "weird", "d": 2}', '{"schema": 1, "family": "gaussian", "d": 1}']:
        m.write_text(text)
        assert run(capsys, "depth", "--model", str(m), "--query", str(q))[0] == 2


def test_table1_anchors(capsys):
    code, out, _ = run(capsys, "bound", "--table1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["block", "n", "d=2", "d=3", "d=5", "d=10", "d=20"]
    cell = {(r[0], int(r[1])): r[2:] for r in rows[1:]}
    assert cell[("Gaussian", 100)][0] == "0.00707"
    assert cell[("2-sym.", 10000)][2] == "0.32404"
    assert cell[("Uniform", 1000)][3:] == ["---", "---"]


def test_bound_grid(capsys, files):
    _, g, _, _ = files
    code, out, _ = run(capsys, "bound", "--modulus", "tight", "--model", str(g), "--n-list", "100,1000", "--d-list", "2,3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["d=2"]) == pytest.approx(0.00707, abs=1e-5)
    assert float(rows[1]["d=3"]) == pytest.approx(0.00623, abs=1e-5)


def test_bound_psym_uses_model_index(capsys, tmp_path):
    m = tmp_path / "p.json"
    m.write_text(json.dumps({"schema": 1, "family": "p_symmetric", "d": 3, "p": 1, "marginal": "cauchy"}))
    a = run(capsys, "bound", "--modulus", "psym1", "--model", str(m), "--n-list", "1000", "--d-list", "3")[1]
    b = run(capsys, "bound", "--modulus", "psym1", "--p", "1", "--n-list", "1000", "--d-list", "3")[1]
    assert a == b


def test_plan_outputs(capsys, files):
    _, g, _, _ = files
    code, out, _ = run(capsys, "plan", "--eps", "0.00624", "--d", "3", "--modulus", "tight", "--model", str(g))
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and int(row["n"]) <= 1000
    code, out, _ = run(capsys, "plan", "--eps", "0.4", "--d", "2")
    assert next(csv.DictReader(io.StringIO(out)))["n"] == "16"
    code, out, _ = run(capsys, "plan", "--eps", "1e-12", "--d", "2", "--n-max", "1e6")
    assert code == 0 and next(csv.DictReader(io.StringIO(out)))["n"] == "unachievable"


def test_csv_and_json_agree(capsys, files):
    _, g, q, _ = files
    for argv in (
        ["depth", "--model", str(g), "--query", str(q), "--n", "300"],
        ["bound", "--n-list", "100,1000", "--d-list", "2,5", "--precision", "12"],
        ["simulate", "--protocol", "figure4", "--runs", "2", "--points", "20", "--n-grid", "20,40"],
        ["bound", "--table1"],
    ):
        csv_out = run(capsys, *argv)[1]
        json_out = json.loads(run(capsys, *argv, "--format", "json")[1])
        lines = [ln for ln in csv_out.splitlines() if not ln.startswith("#")]
        rows = list(csv.DictReader(lines))
        assert len(rows) == len(json_out["rows"])
        for r, j in zip(rows, json_out["rows"]):
            for k, v in r.items():
                jv = j[k]
                if isinstance(jv, float):
                    assert float(v) == pytest.approx(jv, rel=1e-12, abs=0)
                elif jv is None:
                    assert v in ("---", "nan")
                else:
                    assert v == str(jv)


def test_simulate_figure4_shape(capsys):
    code, out, _ = run(capsys, "simulate", "--protocol", "figure4", "--runs", "3", "--points", "30", "--seed", "5")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# protocol=figure4") and "master_seed=5" in lines[0]
    assert lines[1] == "run,n,max_error,bound"
    assert len(lines) == 2 + 3 * 3


@pytest.mark.parametrize(
    "argv",
    [
        ["--protocol", "figure6", "--N", "500", "--runs", "2", "--points", "10", "--n-grid", "16,32"],
        ["--protocol", "spacing", "--runs", "2", "--n-grid", "100,200"],
        ["--protocol", "atomic", "--n-grid", "10,100"],
        ["--protocol", "outlyingness", "--n-grid", "100", "--x1-grid", "1,2"],
    ],
)
def test_simulate_other_protocols(capsys, argv):
    code, out, _ = run(capsys, "simulate", *argv)
    assert code == 0 and len(out.splitlines()) >= 3


def test_model_round_trip():
    models = [
        GaussianStd(3),
        StudentT(2, 3),
        UniformBall(5),
        PSymmetric(2, 1.0, cauchy_marginal()),
        EllipticalAffine(StudentT(2, 1), [1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]]),
    ]
    for m in models:
        back = model_from_dict(json.loads(json.dumps(model_to_dict(m))))
        x = np.array([[0.3, -1.2] + [0.0] * (m.d - 2)])
        assert type(back) is type(m)
        assert back.exact_depths(x)[0] == m.exact_depths(x)[0]


def test_read_points_errors(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("1,2\n\n3,4\n")
    assert read_points(str(f)).shape == (2, 2)
    f.write_text("1,x\n")
    with pytest.raises(InputError):
        read_points(str(f))
    f.write_text("1,2\n3\n")
    with pytest.raises(InputError):
        read_points(str(f))
    f.write_text("")
    with pytest.raises(InputError):
        read_points(str(f))
