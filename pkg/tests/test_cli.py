"""End-to-end checks of the command-line front end and its exit codes."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from hamrobust.cli import main, run, worker_cap
from hamrobust.errors import InputError
from hamrobust.graph_core import read_edge_list
from hamrobust.oracles import is_hamilton_cycle


def invoke(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def extremal17(tmp_path, capsys):
    graph, spec = tmp_path / "g17.txt", tmp_path / "g17.json"
    code, _ = invoke(capsys, "gen", "extremal", "--n", "17", "--graph-out", str(graph), "--spec-out", str(spec))
    assert code == 0
    return graph, spec


@pytest.fixture
def planted21(tmp_path, capsys):
    graph, spec = tmp_path / "p.txt", tmp_path / "p.json"
    code, _ = invoke(
        capsys, "gen", "planted", "--shape", "21", "--seed", "8", "--graph-out", str(graph), "--spec-out", str(spec)
    )
    assert code == 0
    return graph, spec


def test_gen_is_deterministic(capsys):
    argv = ["gen", "random", "--n", "20", "--degree", "5", "--seed", "11"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert report["outcome"] == "success" and report["graph"]["degree"] == 5


def test_gen_extremal_writes_files(extremal17):
    graph, spec = extremal17
    g = read_edge_list(graph)
    assert g.n == 17
    assert set(json.loads(spec.read_text())) >= {"expander", "bipartite"}


def test_gen_three_clique(capsys):
    code, report = invoke(capsys, "gen", "three-clique", "--k", "3")
    assert code == 0 and report["descriptor"]["k"] == 3


def test_gen_rejects_impossible_parameters(capsys):
    code, report = invoke(capsys, "gen", "random", "--n", "7", "--degree", "3", "--seed", "0")
    assert code == 2 and report["outcome"] == "input_error"
    code, report = invoke(capsys, "gen", "planted", "--shape", "13", "--seed", "0")
    assert code == 2


def test_bad_flags_are_input_errors(capsys):
    code, report = invoke(capsys, "oracle", "--find", "everything", "--graph", "x")
    assert code == 2 and "error" in report
    code, _ = invoke(capsys, "oracle", "--find", "hamilton", "--graph", "/nonexistent/graph.txt")
    assert code == 2


def test_verify_partition_and_system(planted21, capsys, tmp_path):
    graph, spec = planted21
    code, report = invoke(
        capsys, "verify", "partition", "--graph", str(graph), "--spec", str(spec), "--weak", "--eta", "0.1"
    )
    assert code in (0, 1) and "validator_report" in report
    code, built = invoke(
        capsys, "tour", "--shape", "21", "--graph", str(graph), "--spec", str(spec), "--skip-hypotheses", "--no-refine"
    )
    assert code == 0 and built["status"] == "validated_system"
    system = tmp_path / "system.json"
    system.write_text(json.dumps(built["system"]))
    code, report = invoke(
        capsys,
        "verify",
        "path-system",
        "--graph",
        str(graph),
        "--spec",
        str(spec),
        "--system",
        str(system),
        "--kind",
        "p123",
    )
    assert code == 0 and report["validator_report"]["holds"]
    system.write_text(json.dumps({"edges": []}))
    code, report = invoke(
        capsys,
        "verify",
        "path-system",
        "--graph",
        str(graph),
        "--spec",
        str(spec),
        "--system",
        str(system),
        "--kind",
        "p123",
    )
    assert code == 1 and report["outcome"] == "failure"


def test_weak_partition_check_needs_eta(planted21, capsys):
    graph, spec = planted21
    code, report = invoke(capsys, "verify", "partition", "--graph", str(graph), "--spec", str(spec), "--weak")
    assert code == 2 and "eta" in report["error"]["message"]


def test_tour_shape_mismatch(planted21, capsys):
    graph, spec = planted21
    code, _ = invoke(capsys, "tour", "--shape", "40", "--graph", str(graph), "--spec", str(spec))
    assert code == 2


def test_tour_hypotheses_and_structured_failure(extremal17, capsys):
    graph, spec = extremal17
    code, report = invoke(capsys, "tour", "--shape", "21", "--graph", str(graph), "--spec", str(spec))
    assert code == 1 and report["outcome"] == "failure"
    code, report = invoke(
        capsys, "tour", "--shape", "21", "--graph", str(graph), "--spec", str(spec), "--skip-hypotheses", "--no-refine"
    )
    assert code == 1 and report["error"]["step"]


def test_oracle_exit_codes(extremal17, capsys, tmp_path):
    graph, _ = extremal17
    code, report = invoke(capsys, "oracle", "--graph", str(graph), "--find", "hamilton")
    assert code == 1 and report["cycle"] is None
    code, report = invoke(capsys, "oracle", "--graph", str(graph), "--find", "longest", "--check-dominating")
    assert report["length"] > 0 and code == (0 if report["dominating"] else 1)
    big = tmp_path / "g33.txt"
    invoke(capsys, "gen", "extremal", "--n", "33", "--graph-out", str(big))
    code, report = invoke(capsys, "oracle", "--graph", str(big), "--find", "hamilton", "--budget", "1000")
    assert code == 3 and report["outcome"] == "indeterminate"


def test_oracle_finds_hamilton_cycle(capsys, tmp_path):
    graph = tmp_path / "r.txt"
    invoke(capsys, "gen", "random", "--n", "12", "--degree", "4", "--seed", "2", "--graph-out", str(graph))
    code, report = invoke(capsys, "oracle", "--graph", str(graph), "--find", "hamilton")
    assert code == 0 and is_hamilton_cycle(read_edge_list(graph), report["cycle"])


def test_match(capsys, tmp_path):
    graph = tmp_path / "c6.txt"
    graph.write_text("6 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n")
    code, report = invoke(capsys, "match", "--graph", str(graph))
    assert code == 0 and report["size"] == 3 and report["kind"] == "maximum"
    code, report = invoke(capsys, "match", "--graph", str(graph), "--delta", "2")
    assert code == 0 and report["size"] >= 3


def test_report_file_matches_stdout(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["--report", str(out), "gen", "three-clique", "--k", "2"])
    assert code == 0
    assert out.read_text() == capsys.readouterr().out


@pytest.mark.parametrize(("raw", "ok"), [(None, 1), ("4", 4), ("0", None), ("-2", None), ("two", None)])
def test_thread_cap(raw, ok):
    env = {} if raw is None else {"HAMROBUST_THREADS": raw}
    if ok is None:
        with pytest.raises(InputError):
            worker_cap(env)
    else:
        assert worker_cap(env) == ok


def test_thread_cap_is_checked_before_running(monkeypatch):
    monkeypatch.setenv("HAMROBUST_THREADS", "zero")
    code, report, _ = run(["gen", "three-clique", "--k", "2"])
    assert code == 2 and "HAMROBUST_THREADS" in report["error"]["message"]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hamrobust.cli", "gen", "extremal", "--n", "8"],
        capture_output=True,
        text=True,
        check=False,
    )
    # below nine vertices the extremal table is degenerate: a structured refusal
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["error"]["error"] == "ConstructionError"
