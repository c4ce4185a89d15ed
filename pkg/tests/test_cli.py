import csv
import io
import json
import os

import pytest

from horn_abduce.cli import BENCH_COLUMNS, main

from conftest import TESTS, data_path

EX1 = data_path("example1.kb")
FIG1 = os.path.join(TESTS, "data", "fig1_solution.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("objective,cost", [("wa", 188), ("card", 3), ("coh", 6)])
def test_solve_json(capsys, objective, cost):
    code, out, _ = run(capsys, "solve", "-i", EX1, "--objective", objective, "--skolem", "inf")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["status"] == "optimal" and doc["report"]["cost"] == cost
    assert doc["solution"]["cost"] == cost
    assert set(doc["report"]["stats"]) == {"pot_count", "skolem_count", "nodes_explored", "nogoods_learned",
                                           "incumbent_updates"}


def test_solve_is_deterministic(capsys):
    a = json.loads(run(capsys, "solve", "-i", EX1, "--objective", "coh")[1])["solution"]
    b = json.loads(run(capsys, "solve", "-i", EX1, "--objective", "coh", "--lazy", "off")[1])["solution"]
    c = json.loads(run(capsys, "solve", "-i", EX1, "--objective", "coh")[1])["solution"]
    assert a == c and a["cost"] == b["cost"]


def test_solve_text_and_output_file(capsys, tmp_path):
    out_file = tmp_path / "sol.txt"
    code, out, _ = run(capsys, "solve", "-i", EX1, "--format", "text", "-o", str(out_file))
    assert code == 0 and out == ""
    text = out_file.read_text()
    assert "cost: 188" in text and "abduced: fatherof(f,m), is(f,dead), name(m,mary)" in text


def test_solve_cyclic_inf_is_an_error(capsys):
    code, out, err = run(capsys, "solve", "-i", data_path("cyclic.kb"), "--skolem", "inf")
    assert code == 1 and "CyclicTheory" in err


def test_solve_cyclic_with_limit(capsys):
    code, out, _ = run(capsys, "solve", "-i", data_path("cyclic.kb"), "--skolem", "p2", "--skolem-naming", "flat")
    assert code == 0 and json.loads(out)["report"]["stats"]["skolem_count"] == 2


def test_timeout_and_infeasible_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "-i", data_path("accel", "rob.kb"), "--skolem", "g1", "--objective", "coh",
                       "--time-limit", "0.05")
    assert code == 2 and json.loads(out)["report"]["status"] == "timeout"
    f = tmp_path / "inf.kb"
    f.write_text("axiom r: h(X) <- b(X).\ngoal: h(a), c(a).\nnogood: h(X), c(Y).\nnogood: b(X), c(Y).\n")
    code, out, _ = run(capsys, "solve", "-i", str(f))
    assert code == 3 and json.loads(out)["report"]["cost"] is None
    code, out, _ = run(capsys, "solve", "-i", str(f), "--constraints", "off")
    assert code == 0


def test_parse_error_exit(capsys, tmp_path):
    f = tmp_path / "bad.kb"
    f.write_text("axiom r: h(X) <- .\n")
    code, _, err = run(capsys, "solve", "-i", str(f))
    assert code == 1 and "InstanceSyntaxError" in err
    code, _, err = run(capsys, "solve", "-i", str(tmp_path / "missing.kb"))
    assert code == 1


def test_ground_stats(capsys):
    code, out, _ = run(capsys, "ground", "-i", EX1, "--stats")
    assert code == 0
    assert json.loads(out) == {"pot_count": 15, "edge_count": 11, "skolem_count": 2, "max_term_depth": 1}
    code, out, _ = run(capsys, "ground", "-i", EX1)
    assert len(json.loads(out)["pot"]) == 15


def test_export(capsys):
    code, out, _ = run(capsys, "export-asp", "-i", EX1, "--encoding", "bwdg", "--objective", "wa")
    with open(os.path.join(TESTS, "golden", "example1_bwdg_wa.lp")) as fh:
        assert out == fh.read()
    code, _, err = run(capsys, "export-asp", "-i", EX1, "--encoding", "fwda", "--objective", "wa")
    assert code == 1 and "ExportError" in err


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "-i", EX1, "-s", FIG1, "--objective", "wa")
    assert code == 0 and out.strip() == "valid (cost 188)"
    doc = json.load(open(FIG1))
    doc["cost"] = 187
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "-i", EX1, "-s", str(bad), "--format", "json")
    assert code == 1 and json.loads(out)["valid"] is False


def test_oracle_matches_solve(capsys):
    tiny = data_path("tiny_nogood.kb")
    for obj in ("card", "coh", "wa"):
        _, out, _ = run(capsys, "oracle", "-i", tiny, "--objective", obj)
        _, out2, _ = run(capsys, "solve", "-i", tiny, "--objective", obj)
        assert json.loads(out)["cost"] == json.loads(out2)["report"]["cost"]
    code, _, err = run(capsys, "oracle", "-i", EX1)
    assert code == 1 and "OracleLimit" in err


def test_bench_csv(capsys, tmp_path):
    out_file = tmp_path / "bench.csv"
    code, _, _ = run(capsys, "bench", EX1, data_path("cyclic.kb"), "--objectives", "card,wa",
                     "--policies", "p1,inf", "-o", str(out_file))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_file.read_text())))
    assert list(rows[0]) == BENCH_COLUMNS
    assert len(rows) == 8
    by_key = {(r["instance"], r["objective"], r["policy"]): r for r in rows}
    assert by_key[("example1.kb", "wa", "inf")]["cost"] == "188"
    # inf runs on the acyclic part of a cyclic theory
    assert by_key[("cyclic.kb", "wa", "inf")]["status"] == "optimal"


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert "horn-abduce" in capsys.readouterr().out
