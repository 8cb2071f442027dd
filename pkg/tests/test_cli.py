import json

import pytest

from qdicut.cli import main

CORPUS_EDGE = "2 1\n0 1\n"


@pytest.fixture
def edge_file(tmp_path):
    p = tmp_path / "edge.txt"
    p.write_text(CORPUS_EDGE)
    return p


def test_generate_roundtrip(tmp_path):
    out = tmp_path / "g.txt"
    assert main(["generate", "--n", "6", "--p", "0.5", "--seed", "3", "--out", str(out)]) == 0
    first = out.read_text()
    main(["generate", "--n", "6", "--p", "0.5", "--seed", "3", "--out", str(out)])
    assert out.read_text() == first and first.startswith("6 ")


def test_exact_single_edge(edge_file, tmp_path):
    out = tmp_path / "x.json"
    assert main(["exact", str(edge_file), "--classes", "test2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["opt"] == 1
    assert doc["snapshot"] == [[0, 0], [1, 0]]
    assert sum(map(sum, doc["pseudosnapshot"])) == 1


def test_exact_csv(edge_file, capsys):
    assert main(["exact", str(edge_file), "--classes", "test2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "field,i,j,value" and "snapshot,1,0,1" in lines


def test_simulate_byte_identical(edge_file, tmp_path):
    a, b, trace = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "t.jsonl"
    args = ["simulate", str(edge_file), "--classes", "test2", "--copies", "5000", "--med-reps", "3", "--opt"]
    assert main(args + ["--out", str(a), "--trace", str(trace)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["opt"] == 1 and doc["config"]["name"] == "test2" and doc["params"]["copies"] == 5000
    recs = [json.loads(line) for line in trace.read_text().splitlines()]
    assert recs and recs[0]["op"] == "measure"


def test_comm_table(capsys):
    assert main(["comm", "--n", "400", "--trials", "50", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("protocol,") and len(lines) == 3


def test_error_record(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1\n0 0\n")
    assert main(["exact", str(bad)]) == 2
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["error"] == "SelfLoopError" and rec["command"] == "exact"
    assert main(["simulate", str(tmp_path / "missing.txt")]) == 2
    assert main(["exact", str(bad), "--classes", str(tmp_path / "nope.json")]) == 2


def test_invalid_params_are_reported(edge_file, capsys):
    assert main(["simulate", str(edge_file), "--eps", "2"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ValueError"


@pytest.mark.slow
def test_verify_on_bundled_corpus(capsys):
    assert main(["verify"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and all(s["passed"] for s in doc["suites"])
