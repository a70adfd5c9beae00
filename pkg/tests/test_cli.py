import io
import json

import numpy as np
import pytest

from cyclidic import cli
from cyclidic.cli import dispatch, dumps, emit_table, format_number, parse_table
from cyclidic.errors import ConvergenceError


def run(*argv):
    out = io.StringIO()
    code = dispatch(list(argv), stdout=out)
    return code, out.getvalue()


def test_coords_origin():
    code, text = run("coords", "to", "--a", "0,1,2,3", "--point", "0,0,0")
    assert code == 0
    assert text.strip() == '{"s":[1,2,3]}'


def test_omega_at_zero():
    code, text = run("omega", "--a", "0,1,2,3", "--at", "0")
    assert code == 0
    assert text.strip() == '{"Omega":0}'


def test_eigen_ground_state():
    code, text = run("eigen", "--kind", "I", "--n", "0,0", "--parity", "000", "--a", "0,1,2,3")
    assert code == 0
    rec = json.loads(text)
    assert rec["zero_counts"] == [0, 0]
    assert abs(rec["norm_check"] - 1) < 1e-7
    assert abs(rec["lambda1"] - -0.7330713148327406) < 1e-9


def test_emit_table_basics():
    assert emit_table([], "csv", header=["a", "b"]) == "a,b\n"
    row = {"n_a": 1, "lambda1": -0.1 / 3, "flag": True}
    header, back = parse_table(emit_table([row]))
    assert header == ["n_a", "lambda1", "flag"]
    assert back == [{"n_a": 1.0, "lambda1": -0.1 / 3, "flag": "true"}]
    assert json.loads(emit_table([row], "json"))[0]["lambda1"] == -0.1 / 3
    assert format_number(float("nan")) == "null"
    assert format_number(0.1) == "0.10000000000000001"


def test_batch_is_row_sorted(tmp_path):
    code, text = run("eigen", "--kind", "I", "--parity", "000", "--batch", "3,3", "--jobs", "2")
    assert code == 0
    _, rows = parse_table(text)
    keys = [(r["n_a"], r["n_b"]) for r in rows]
    assert keys == sorted(keys) and len(keys) == 16
    # parallel and serial runs agree byte for byte
    code, serial = run("eigen", "--kind", "I", "--parity", "000", "--batch", "3,3")
    assert serial == text


def test_output_is_deterministic_and_out_file(tmp_path):
    argv = ("harmonic", "eval", "--kind", "II", "--n", "1,0", "--parity", "0100", "--point", "0.3,0.2,0.1")
    assert run(*argv) == run(*argv)
    path = tmp_path / "g.csv"
    code, text = run(*argv, "--out", str(path))
    assert code == 0 and text == ""
    _, rows = parse_table(path.read_text())
    assert rows[0]["flag"] == 0 and np.isfinite(rows[0]["G"])


def test_usage_errors_exit_two(capsys):
    assert run("coords", "to", "--bogus")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("coords", "to", "--a", "0,2,1,3", "--point", "0,0,0")[0] == 2
    assert run("omega", "--at", "7")[0] == 2
    assert run("eigen", "--kind", "II", "--parity", "000", "--n", "0,0")[0] == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert "error" in json.loads(err)


def test_numerical_failure_exits_three(capsys, monkeypatch):
    def fail(args, cfg):
        raise ConvergenceError("two-parameter search did not converge", history=[(1.0, 0.5)])

    monkeypatch.setitem(cli.COMMANDS, "eigen", fail)
    code, _ = run("eigen", "--kind", "I", "--n", "0,0", "--parity", "000")
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert "converge" in json.dumps(err)


def test_config_file(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"a": [0, 1, 2, 3], "format": "json"}))
    code, text = run("coords", "to", "--config", str(conf), "--point", "0,0,0")
    assert code == 0 and json.loads(text) == {"s": [1, 2, 3]}
    conf.write_text(json.dumps({"ode_rtol": -1}))
    assert run("omega", "--config", str(conf), "--at", "1")[0] == 2


def test_coords_csv_round_trip(tmp_path):
    pts = tmp_path / "s.csv"
    pts.write_text("s1,s2,s3,sheet\n0.5,1.5,2.5,0110\n0.2,1.9,2.1,1000\n")
    code, text = run("coords", "from", "--points", str(pts))
    assert code == 0
    _, rows = parse_table(text)
    xyz = tmp_path / "p.csv"
    xyz.write_text(emit_table([{k: r[k] for k in ("x", "y", "z")} for r in rows]))
    code, text = run("coords", "to", "--points", str(xyz))
    _, back = parse_table(text)
    for r, b in zip(rows, back):
        assert abs(r["s2"] - b["s2"]) < 1e-12


def test_surface_and_verify():
    code, text = run("surface", "--index", "2", "--d", "1.5", "--resolution", "4,4")
    assert code == 0 and text.startswith("x,y,z,sheet")
    code, text = run("verify", "--roundtrip", "--count", "50")
    assert code == 0 and json.loads(text)["max_error"] < 1e-10
    code, text = run("verify", "--laplacian", "--kind", "III", "--n", "1,0", "--parity", "010", "--count", "20")
    assert code == 0 and json.loads(text)["ratio"] > 3.5


def test_solve_with_check(tmp_path):
    pts = tmp_path / "p.csv"
    pts.write_text("x,y,z\n0.1,0.1,0.1\n")
    code, text = run("solve", "--region", "first", "--d", "0.5", "--N", "2", "--check", "--field-points", str(pts))
    assert code == 0
    out = json.loads(text)
    assert out["check"]["interior_max_error"] < 1e-2
    assert abs(out["field"][0]["u"] - 1 / np.linalg.norm(np.array([4.9, 4.9, 4.9]))) < 1e-3


def test_dumps_rejects_objects():
    with pytest.raises(TypeError):
        dumps(object())
    assert dumps({"x": [1, 2.5, None]}) == '{"x":[1,2.5,null]}'
