import csv
import io
import json

import pytest

from dworklab.lab import (
    CSV_COLUMNS,
    EXIT_BUDGET,
    EXIT_INPUT,
    EXIT_OK,
    SMOOTHNESS_NOTE,
    SpecError,
    cmd_check,
    cmd_sweep,
    load_spec,
    main,
    parse_spec,
    persist,
)
from dworklab.polygon import NewtonPolygon, compare

CUBIC_SPEC = {"dim": 1, "vertices": [[0], [3]], "f": [[[3], "1"], [[1], "1"]],
              "pmin": 5, "pmax": 13, "trials": 20, "seed": 0}
AJV_SPEC = {"dim": 1, "vertices": [[0], [3]], "family": "AJV", "support_J": [[1], [2]],
            "support_V": [[3]], "coeffs_V": [1], "pmin": 5, "pmax": 47}
WAN_SPEC = {"dim": 4, "vertices": [[0, 0, 0, 0], [1, 1, 1, 0], [1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]],
            "pmin": 5, "pmax": 5, "trials": 0, "budget": 1000}


def write_spec(tmp_path, data, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=1))
    return path


def test_minimal_spec_parses(tmp_path):
    spec = load_spec(write_spec(tmp_path, {"dim": 1, "vertices": [[0], [3]]}))
    assert spec.V_delta == 3 and spec.family == "full"


def test_zero_vertex_coefficient_rejected():
    with pytest.raises(SpecError, match="must be nonzero"):
        parse_spec(json.dumps({**AJV_SPEC, "coeffs_V": [0]}))


def test_overlapping_supports_rejected():
    with pytest.raises(SpecError, match="disjoint"):
        parse_spec(json.dumps({**AJV_SPEC, "support_J": [[1], [3]]}))


def test_unknown_key_reports_line():
    text = '{\n "dim": 1,\n "vertices": [[0], [3]],\n "colour": 2\n}'
    with pytest.raises(SpecError, match="line 4"):
        parse_spec(text)


def test_missing_spec_file(tmp_path):
    with pytest.raises(SpecError):
        load_spec(tmp_path / "absent.json")


def test_sweep_rows_lie_above_hodge():
    record = cmd_sweep(parse_spec(json.dumps(CUBIC_SPEC)))
    assert [r["p"] for r in record.rows] == [5, 7, 11, 13]
    for row in record.rows:
        c = compare(NewtonPolygon.from_json(row["np_vertices"]), NewtonPolygon.from_json(row["hp_vertices"]))
        assert c.lies_above and c.endpoints_meet
    assert {r["p"]: r["max_gap"] for r in record.rows}[7] == "0"


def test_empty_prime_range_gives_empty_csv(tmp_path):
    record = cmd_sweep(parse_spec(json.dumps({**CUBIC_SPEC, "pmin": 24, "pmax": 28})))
    assert record.rows == [] and record.status == "complete"
    out = persist(record, tmp_path)
    rows = list(csv.reader(io.StringIO((out / "sweep.csv").read_text())))
    assert rows == [CSV_COLUMNS]
    json.loads((out / "record.json").read_text())


def test_persist_is_byte_identical(tmp_path):
    spec = parse_spec(json.dumps(CUBIC_SPEC))
    a = persist(cmd_sweep(spec), tmp_path / "a")
    b = persist(cmd_sweep(spec), tmp_path / "b")
    for name in ("sweep.csv", "record.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert a.name == spec.digest()


def test_sweep_independent_of_worker_count(monkeypatch):
    spec = parse_spec(json.dumps(CUBIC_SPEC))
    monkeypatch.setenv("DWORKLAB_THREADS", "1")
    serial = cmd_sweep(spec).to_json()
    monkeypatch.setenv("DWORKLAB_THREADS", "4")
    assert cmd_sweep(spec).to_json() == serial


def test_persist_into_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    record = cmd_sweep(parse_spec(json.dumps({**CUBIC_SPEC, "pmin": 5, "pmax": 5, "trials": 0})))
    with pytest.raises(OSError):
        persist(record, blocker)


def test_wan_simplex_sweep_is_annotated():
    record = cmd_sweep(parse_spec(json.dumps(WAN_SPEC)))
    assert SMOOTHNESS_NOTE in record.annotations
    assert record.status.startswith("budget exceeded")


def test_check_suites():
    assert cmd_check("disc") == []
    assert cmd_check("skew") == []
    with pytest.raises(SpecError):
        cmd_check("nonsense")


def test_cli_commands(tmp_path, capsys):
    path = str(write_spec(tmp_path, CUBIC_SPEC))
    assert main(["hp", "--spec", path]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["slopes"] == "0;1/3;2/3"
    assert main(["np", "--spec", path, "--p", "7"]) == EXIT_OK
    capsys.readouterr()
    assert main(["dwork-np", "--spec", path, "--p", "7"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["slopes"] == "0;1/3;2/3"
    assert main(["sweep", "--spec", path, "--out", str(tmp_path / "res")]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["rows"] == 4


def test_cli_hasse(tmp_path, capsys):
    path = str(write_spec(tmp_path, AJV_SPEC))
    assert main(["hasse", "--spec", path, "--kind", "global"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["P_str"] == "-3*A[1] + A[2]^2"


def test_cli_exit_codes(tmp_path, capsys):
    bad = str(write_spec(tmp_path, {**AJV_SPEC, "coeffs_V": [0]}, "bad.json"))
    assert main(["hp", "--spec", bad]) == EXIT_INPUT
    assert "line" in capsys.readouterr().err
    wan = str(write_spec(tmp_path, WAN_SPEC, "wan.json"))
    assert main(["sweep", "--spec", wan, "--out", str(tmp_path / "res")]) == EXIT_BUDGET
