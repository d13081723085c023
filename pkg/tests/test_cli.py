import json
import math

import pytest

from holotwo.carriers import chord_algebra
from holotwo.cli import EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, Check, InputError, Report, main, parse_suites
from holotwo.series import TruncatedSeries


def _write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


LOOP = {"command": "p", "instance": {"kind": "kz", "n": 2}, "N": 3,
        "path": {"kind": "builtin", "name": "loop", "n": 2, "i": 1, "j": 2}, "quadrature": {"ode_steps": 1024}}


def test_loop_holonomy(tmp_path, capsys):
    code, out, _ = _run(["holonomy", "--config", _write(tmp_path, "c.json", LOOP)], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["carrier"] == "ch2" and data["config"]["N"] == 3
    P = TruncatedSeries.from_json(chord_algebra(2, 3), data["result"]["value"])
    re, im = data["result"]["value"][1]["r12"]
    assert re == pytest.approx(0.0, abs=1e-9) and im == pytest.approx(2 * math.pi, abs=1e-7)
    assert P.coeffs[2][P.carrier.index("r12*r12")] == pytest.approx((2j * math.pi) ** 2 / 2, abs=1e-6)


def test_zero_chain_connection(tmp_path, capsys):
    cfg = {"instance": {"kind": "chain", "complex": "C->C2->C", "zero": True}, "N": 2}
    code, out, _ = _run(["holonomy", "--config", _write(tmp_path, "p.json", cfg)], capsys)
    assert code == EXIT_OK
    value = json.loads(out)["result"]["value"]
    assert value[1] == {} and value[2] == {}
    assert all(v == [1.0, 0.0] for v in value[0].values()) and len(value[0]) >= 1
    cfg["command"] = "r"
    code, out, _ = _run(["holonomy", "--config", _write(tmp_path, "r.json", cfg)], capsys)
    assert code == EXIT_OK
    assert all(c == {} for c in json.loads(out)["result"]["value"])


def test_output_file_and_determinism(tmp_path, capsys):
    cfg = {"command": "q", "instance": {"kind": "chain", "complex": "C->C"}, "N": 2,
           "quadrature": {"grid_t": 16, "grid_s": 16, "ode_steps": 64}}
    path = _write(tmp_path, "q.json", cfg)
    outs = []
    for k in range(2):
        target = str(tmp_path / f"out{k}.json")
        assert main(["holonomy", "--config", path, "--output", target]) == EXIT_OK
        outs.append((tmp_path / f"out{k}.json").read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["command"] == "q"


def test_malformed_json_is_input_error(tmp_path, capsys):
    code, _, err = _run(["holonomy", "--config", _write(tmp_path, "bad.json", "{bad")], capsys)
    assert code == EXIT_INPUT
    assert "line 1 column 2" in err


def test_invalid_field_reports_path(tmp_path, capsys):
    cfg = {"instance": {"kind": "kz", "n": "x"}}
    code, _, err = _run(["holonomy", "--config", _write(tmp_path, "c.json", cfg)], capsys)
    assert code == EXIT_INPUT and "instance.n" in err
    cfg = {"instance": {"kind": "kz"}, "quadrature": {"grid_t": 15}}
    code, _, err = _run(["holonomy", "--config", _write(tmp_path, "c2.json", cfg)], capsys)
    assert code == EXIT_INPUT and "quadrature.grid_t" in err
    cfg = {"instance": {"kind": "kz"}, "unexpected": 1}
    code, _, err = _run(["holonomy", "--config", _write(tmp_path, "c3.json", cfg)], capsys)
    assert code == EXIT_INPUT and "unexpected" in err


def test_semantic_input_errors(tmp_path, capsys):
    cases = [
        {"command": "r", "instance": {"kind": "kz", "n": 3}},
        {"command": "q", "instance": {"kind": "kz", "n": 2}},
        {"command": "r", "instance": {"kind": "chain"}, "surface": {"kind": "torus"}},
        {"command": "p", "instance": {"kind": "kz", "n": 3}, "path": {"kind": "spiral"}},
        {"command": "p", "instance": {"kind": "chain", "complex": "nope"}},
    ]
    for k, cfg in enumerate(cases):
        code, _, err = _run(["holonomy", "--config", _write(tmp_path, f"c{k}.json", cfg)], capsys)
        assert code == EXIT_INPUT, (cfg, err)


def test_pole_collision_is_numeric_failure(tmp_path, capsys):
    cfg = {"instance": {"kind": "kz", "n": 2}, "N": 2,
           "path": {"kind": "polyline", "points": [[0, 1], [1, 0]]}}
    code, _, err = _run(["holonomy", "--config", _write(tmp_path, "c.json", cfg)], capsys)
    assert code == EXIT_NUMERIC and "numerical failure" in err


def test_suite_parsing():
    assert parse_suites("all") == ["axioms", "holonomy", "compat"]
    assert parse_suites("compat, axioms,compat") == ["compat", "axioms"]
    for bad in ("", " , ", "speed"):
        with pytest.raises(InputError):
            parse_suites(bad)


def test_verify_empty_or_unknown_suite(capsys):
    assert _run(["verify", "--suite", ""], capsys)[0] == EXIT_INPUT
    assert _run(["verify", "--suite", "bogus"], capsys)[0] == EXIT_INPUT


def test_verify_axioms_default(capsys):
    code, out, err = _run(["verify", "--suite", "axioms"], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["passed"] is True and data["suites"] == ["axioms"]
    assert data["checks"] and all(c["residual"] == 0.0 for c in data["checks"])
    assert all("seconds" not in c for c in data["checks"])
    assert "overall: PASS" in err


def test_verify_compat_on_hom(tmp_path, capsys):
    cfg = {"instance": {"kind": "chain", "complex": "C->C2->C"}, "N": 3}
    code, out, _ = _run(["verify", "--suite", "compat", "--timings", "--config", _write(tmp_path, "c.json", cfg)],
                        capsys)
    assert code == EXIT_OK
    checks = json.loads(out)["checks"]
    assert {c["name"] for c in checks} >= {"T(Proj(exact)) = K(fuzzy)", "K(fuzzy) = bare", "fuzzy = T(Inc(exact))"}
    assert all(c["residual"] <= 1e-5 and "seconds" in c for c in checks)


def test_failed_check_gives_exit_one():
    rep = Report(["x"], {}, [Check("a", "b", 2.0, 1.0)])
    assert not rep.passed
    assert "FAIL" in rep.text()
    assert EXIT_FAIL == 1


def test_carrier_command(tmp_path, capsys):
    free = {"kind": "words", "generators": ["x", "y"], "max_degree": 3}
    code, out, _ = _run(["carrier", "--spec", _write(tmp_path, "f.json", free)], capsys)
    assert code == EXIT_OK and json.loads(out)["degree_dims"] == [1, 2, 4, 8]
    comm = dict(free, relations=[[[1, ["x", "y"]], [-1, ["y", "x"]]]])
    code, out, _ = _run(["carrier", "--spec", _write(tmp_path, "c.json", comm), "--report", "basis"], capsys)
    data = json.loads(out)
    assert data["degree_dims"] == [1, 2, 3, 4]
    assert len(data["labels"]) == data["dim"] == 10
    chord = {"kind": "chord", "n": 3, "max_degree": 3}
    code, out, _ = _run(["carrier", "--spec", _write(tmp_path, "ch.json", chord)], capsys)
    assert json.loads(out)["degree_dims"] == [1, 3, 7, 15]
    code, _, _ = _run(["carrier", "--spec", _write(tmp_path, "b.json", {"kind": "words"})], capsys)
    assert code == EXIT_INPUT
