import io
import json
import subprocess
import sys

import pytest

from memlattice.cli import main
from memlattice.lattice import LATTICE_NODES, check_node, parse_model
from memlattice.verdict import Verdict

from conftest import CORPUS, corpus


def run(*argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv), out=out)
    return code, out.getvalue()


def litmus(name):
    return str(CORPUS / f"{name}.trace")


def test_check_sequential_prints_a_cycle():
    code, out = run("check", "sequential", litmus("processor"))
    assert code == 1
    assert out.splitlines()[0] == "SEQUENTIAL: violated"
    assert any(line.startswith("cycle: ") for line in out.splitlines())


def test_explain_gives_provenance_per_edge():
    code, out = run("check", "cache", litmus("pram_a"), "--explain")
    assert code == 1
    assert "[DO clause 3]" in out


def test_check_processor_witness_golden():
    code, out = run("check", "processor", litmus("processor"), "--witness")
    assert code == 0
    assert out == (
        "PROCESSOR: satisfied\n"
        "view p1:\n"
        "  p1 w x 1\n"
        "  p1 r y _\n"
        "  p2 w y 2\n"
        "view p2:\n"
        "  p2 w y 2\n"
        "  p2 r x _\n"
        "  p1 w x 1\n"
    )


def test_check_empty_trace_from_stdin(monkeypatch):
    assert run("check", "gdo", "-", stdin="", monkeypatch=monkeypatch)[0] == 0


def test_classify_output():
    code, out = run("classify", litmus("non_gpo"))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "maximal: GWO, GAO"
    assert len(lines) == 1 + len(LATTICE_NODES)


def test_classify_generated_sequential_trace(monkeypatch):
    code, text = run("gen", "--model", "sequential", "--procs", "2", "--ops", "3", "--seed", "4")
    code, out = run("classify", "-", stdin=text, monkeypatch=monkeypatch)
    assert code == 0 and out.splitlines()[0] == "maximal: SEQUENTIAL"


@pytest.mark.parametrize(
    "argv, expected",
    [
        (("lattice", "lub", "pram", "cache"), "GPO+GDO"),
        (("lattice", "compare", "gao", "gdo"), "GAO stronger than GDO"),
        (("lattice", "glb", "gpo", "gdo"), "SLOW"),
        (("lattice", "glb", "gwo", "slow"), "LOCAL"),
    ],
)
def test_lattice_algebra(argv, expected):
    assert run(*argv) == (0, expected + "\n")


def test_lattice_show():
    code, out = run("lattice", "show")
    assert code == 0 and len(out.splitlines()) == len(LATTICE_NODES)
    code, out = run("lattice", "show", "causal", "--json")
    assert json.loads(out)["covers"] == ["PRAM", "GWO"]


def test_drf():
    assert run("drf", litmus("drf"))[1].splitlines()[0] == "witnessed"
    assert run("drf", litmus("drf"))[0] == 0
    code, out = run("drf", litmus("not_weak"))
    assert code == 1 and out.splitlines()[0] == "violation"


def test_synchronized_variants():
    assert run("check", "weak", litmus("not_weak"))[0] == 0
    assert run("check", "weak", litmus("not_weak"), "--variant", "original")[0] == 1
    assert run("check", "location", litmus("location"))[0] == 0
    assert run("check", "entry", litmus("location"))[0] == 1


def test_gen_is_deterministic():
    a = run("gen", "--model", "pram", "--procs", "3", "--ops", "8", "--seed", "7")
    b = run("gen", "--model", "pram", "--procs", "3", "--ops", "8", "--seed", "7")
    assert a == b and a[0] == 0 and len(a[1].splitlines()) == 24


def test_explain_subcommand():
    code, out = run("explain", litmus("non_gpo"), "--relation", "wo")
    assert code == 0 and "(w,p9,e,2) -> (w,p10,d,3)  [WO]" in out
    payload = json.loads(run("explain", litmus("non_gpo"), "--json")[1])
    assert {"operations", "writes-to", "po", "do", "wo", "ao", "so"} <= set(payload)


def test_classical_and_oracle_flags():
    assert run("check", "sequential", litmus("executions_a"), "--classical")[0] == 0
    assert run("check", "sequential", litmus("executions_a"), "--oracle")[0] == 0
    assert run("check", "intersection", litmus("pram_and_cache_not_gpo_gdo"))[0] == 0


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "bogus", "x.trace"),
        ("check", "gdo"),
        ("check", "gdo", "/nonexistent/trace"),
        ("check", "gdo", "-", "--variant", "original"),
        ("check", "local", "-", "--classical", "--budget", "0"),
        ("lattice", "lub", "pram"),
        ("lattice", "glb", "processor", "pram"),
        ("frobnicate",),
        ("gen", "--model", "linearizable"),
    ],
)
def test_usage_errors_exit_64(argv, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert run(*argv)[0] == 64


def test_oracle_refusal_is_a_usage_error():
    assert run("check", "pram", litmus("adversarial"), "--oracle")[0] == 64


@pytest.mark.parametrize("text", ["p1 w x\n", "p1 w x 1\np2 w x 1\n", "p1 r x 7\n", "p1 w x _\n"])
def test_invalid_traces_exit_65(text, monkeypatch):
    assert run("check", "gdo", "-", stdin=text, monkeypatch=monkeypatch)[0] == 65


def test_invalid_trace_message_has_position(monkeypatch, capsys):
    run("check", "gdo", "-", stdin="p1 w x 1\np1 q x 2\n", monkeypatch=monkeypatch)
    assert "<stdin>: line 2, column 4" in capsys.readouterr().err


def test_json_round_trips():
    ex = corpus("gwo_gao")
    for model in ("sequential", "gwo+gao", "causal"):
        code, out = run("check", model, litmus("gwo_gao"), "--json")
        data = json.loads(out)
        verdict = Verdict.from_dict(data["verdict"])
        assert verdict == check_node(ex, parse_model(model))
        assert verdict.to_dict() == data["verdict"]
        assert Verdict.from_dict(json.loads(json.dumps(verdict.to_dict()))) == verdict


def test_witness_json_carries_ids():
    data = json.loads(run("check", "processor", litmus("processor"), "--json")[1])
    assert data["verdict"]["witness"] == {"p1": [0, 1, 2, 3, 4], "p2": [0, 1, 4, 5, 2]}
    assert data["operations"][2] == {"id": 2, "op": "(w,p1,x,1)"}


def test_console_script_and_module_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "memlattice", "lattice", "lub", "pram", "cache"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout == "GPO+GDO\n"
