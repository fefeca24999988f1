"""Command line behavior: records, exit codes, determinism."""

import json
import os
import socket
import subprocess
import sys

import pytest

from conftest import FIXTURES, fixture_text

TGC = str(FIXTURES / "tgc.stv")
NOIN1 = str(FIXTURES / "tgc_noin1.stv")
IDENTITY = str(FIXTURES / "identity8.rel")
NOINIT = str(FIXTURES / "identity_noinit.rel")


def run_cli(*args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "stratcheck.cli", *args],
        capture_output=True, text=True, cwd=str(FIXTURES.parent.parent), **kw)


def record(proc):
    assert proc.stdout.count("\n") == 1, proc.stdout
    return json.loads(proc.stdout)


def test_verify_true_record_and_exit():
    proc = run_cli("verify", TGC, "--method", "bruteforce")
    assert proc.returncode == 0
    rec = record(proc)
    assert rec["formula"] == "<<Controller>> G !(in1 & in2)"
    assert rec["result"] is True
    assert rec["strategy"] == {"Controller": {"G": "a1", "R": "a2"}}
    assert "true" in proc.stderr
    assert "Controller: G -> a1, R -> a2" in proc.stderr


def test_verify_false_exit_code(tmp_path):
    # Lone train cannot avoid being sent into the tunnel.
    spec = fixture_text("tgc.stv").replace(
        "<<Controller>> G !(in1 & in2)", "<<Train2>> G !in1")
    path = tmp_path / "weak.stv"
    path.write_text(spec, encoding="utf-8")
    proc = run_cli("verify", str(path))
    assert proc.returncode == 1
    assert record(proc)["result"] is False


def test_verify_inconclusive_exit_code():
    # approx cannot decide <<Controller>> F in1: the lower bound's
    # uniform commitments fail and the perfect-information upper
    # bound still has a winning strategy.
    proc = run_cli("verify", str(FIXTURES / "tgc_fin1.stv"),
                   "--method", "approx")
    assert proc.returncode == 2
    assert record(proc)["result"] == "inconclusive"


def test_verify_timeout_exit_code():
    proc = run_cli("verify", TGC, "--timeout", "0.000001")
    assert proc.returncode == 3
    assert proc.stdout == ""
    assert "timeout" in proc.stderr


def test_verify_por_matches_full():
    full = run_cli("verify", TGC, "--method", "bruteforce")
    red = run_cli("verify", TGC, "--method", "bruteforce", "--por",
                  "--c3", "safe")
    assert record(full)["result"] is record(red)["result"] is True


def test_verify_missing_file_exits_64():
    proc = run_cli("verify", str(FIXTURES / "nope.stv"))
    assert proc.returncode == 64
    assert proc.stdout == ""
    assert "error:" in proc.stderr


def test_verify_unknown_agent_exits_64():
    proc = run_cli("verify", TGC, "--coalition", "Ghost")
    assert proc.returncode == 64


def test_verify_unknown_prop_exits_64():
    proc = run_cli("verify", TGC, "--por", "--props", "zap")
    assert proc.returncode == 64


def test_usage_error_exits_64():
    proc = run_cli("nosuchcmd")
    assert proc.returncode == 64
    proc = run_cli("verify", TGC, "--method", "psychic")
    assert proc.returncode == 64


def test_reduce_records():
    proc = run_cli("reduce", TGC, "--c3", "aggressive")
    assert proc.returncode == 0
    assert record(proc) == {
        "full_states": 8, "full_edges": 14,
        "reduced_states": 5, "reduced_edges": 6,
        "ratio": 0.625, "mode": "aggressive",
    }
    assert "full: 8 states / 14 edges; reduced: 5 / 6" in proc.stderr

    safe = record(run_cli("reduce", TGC, "--c3", "safe"))
    assert safe["reduced_states"] == 8

    # a3/b3 carry no effects, so making in1,in2 visible changes nothing
    pinned = record(run_cli("reduce", TGC, "--c3", "aggressive",
                            "--props", "in1,in2"))
    assert pinned["reduced_states"] == 5 and pinned["reduced_edges"] == 6


def test_reduce_writes_exports(tmp_path):
    prefix = str(tmp_path / "tgc")
    proc = run_cli("reduce", TGC, "--c3", "aggressive", "--format", "json",
                   "--out", prefix)
    assert proc.returncode == 0
    full = json.loads((tmp_path / "tgc.full.json").read_text())
    reduced = json.loads((tmp_path / "tgc.reduced.json").read_text())
    assert len(full["states"]) == 8
    assert sum(s["reduced"] for s in full["states"]) == 5
    assert len(reduced["states"]) == 5
    assert not any(s["reduced"] for s in reduced["states"])


def test_bisim_identity_ok():
    proc = run_cli("bisim", TGC, TGC, IDENTITY)
    assert proc.returncode == 0
    assert record(proc) == {"ok": True, "pairs": 8}
    assert "bisimilar for {Controller} over 8 pairs" in proc.stderr


def test_bisim_violation_exit_1():
    proc = run_cli("bisim", TGC, NOIN1, IDENTITY)
    assert proc.returncode == 1
    assert record(proc) == {
        "ok": False, "condition": "valuation", "direction": "L2R",
        "pair": ["(R,T,W)", "(R,T,W)"], "detail": "in1",
    }
    assert "violation: valuation" in proc.stderr


def test_bisim_missing_initial_exit_1():
    proc = run_cli("bisim", TGC, TGC, NOINIT)
    assert proc.returncode == 1
    assert record(proc)["condition"] == "initial"


def test_export_dot_highlight():
    proc = run_cli("export", TGC, "--por", "--c3", "aggressive")
    assert proc.returncode == 0
    assert proc.stdout.startswith("digraph M {")
    assert proc.stdout.count("color=blue") == 11  # 5 nodes + 6 edges


def test_export_json_roundtrip(tmp_path):
    out = tmp_path / "g.json"
    proc = run_cli("export", TGC, "--format", "json", "--out", str(out))
    assert proc.returncode == 0
    payload = json.loads(out.read_text())
    assert payload["initial"] == 0
    assert len(payload["edges"]) == 14


def test_bench_emits_parseable_spec(tmp_path):
    proc = run_cli("bench", "--n", "3")
    assert proc.returncode == 0
    assert "AGENT Train3:" in proc.stdout
    out = tmp_path / "tgc3.stv"
    out.write_text(proc.stdout, encoding="utf-8")
    red = record(run_cli("reduce", str(out), "--c3", "aggressive"))
    assert red["full_states"] == 20 and red["reduced_states"] == 7


def test_bench_rejects_bad_n():
    proc = run_cli("bench", "--n", "0")
    assert proc.returncode == 64


def test_serve_port_busy_exits_69():
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = str(blocker.getsockname()[1])
    try:
        proc = run_cli("serve", "--port", port)
        assert proc.returncode == 69
        assert "cannot bind" in proc.stderr
    finally:
        blocker.close()


@pytest.mark.parametrize("args", [
    ("verify", TGC),
    ("verify", TGC, "--method", "approx"),
    ("verify", TGC, "--method", "dfs", "--por", "--c3", "safe"),
    ("reduce", TGC, "--c3", "aggressive"),
    ("bisim", TGC, TGC, IDENTITY),
    ("bisim", TGC, NOIN1, IDENTITY),
    ("export", TGC, "--por", "--c3", "aggressive"),
    ("bench", "--n", "4"),
])
def test_stdout_deterministic(args):
    first = run_cli(*args)
    second = run_cli(*args)
    assert first.stdout == second.stdout
    assert first.returncode == second.returncode
