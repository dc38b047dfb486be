import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from typeline.analyzer import fixture_path
from typeline.cli import main
from typeline.isa import parse_assembly


@pytest.fixture
def fig5(tmp_path, fig5_source, fig5_inputs):
    src = tmp_path / "fig5.mc"
    src.write_text(fig5_source)
    inp = tmp_path / "fig5.json"
    inp.write_text(json.dumps(fig5_inputs))
    return src, inp


def test_analyze_and_select(tmp_path, capsys):
    a = tmp_path / "a.mc"
    a.write_text("int x; float y; double z; char c; int w;")
    out = tmp_path / "stats.csv"
    assert main(["analyze", str(a), "--csv", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["unit"] == "a" and rows[0]["int"] == "2"
    assert main(["select-sdt", str(fixture_path("figure3a.csv")), "-k", "4"]) == 0
    lines = capsys.readouterr().out.split("\n")
    assert [ln.split("\t")[1] for ln in lines if ln] == ["int", "float", "char", "double"]


def test_analyze_to_stdout(tmp_path, capsys):
    a = tmp_path / "a.mc"
    a.write_text("int x;")
    assert main(["analyze", str(a)]) == 0
    assert capsys.readouterr().out.startswith("unit,int,")


def test_compile_run_compare(fig5, tmp_path, capsys):
    src, inp = fig5
    tla = tmp_path / "fig5.tla"
    assert main(["compile", str(src), "-o", str(tla)]) == 0
    prog = parse_assembly(tla.read_text())
    assert any(i.opcode.value == "CONV" for i in prog.instructions)
    trace = tmp_path / "t.jsonl"
    assert main(["run", str(tla), "--inputs", str(inp), "--trace", str(trace)]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["outputs"]["ratio"] == 2.5
    assert len(trace.read_text().splitlines()) > 0
    assert main(["compare", str(src), "--inputs", str(inp)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["unit"] == "fig5" and rep["cycles_typeline"] < rep["cycles_baseline"]
    assert main(["compare", str(src), "--inputs", str(inp), "--format", "csv", "--no-cluster"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert float(row["load_parallelism"]) == 0.0


def test_compile_is_deterministic(fig5, tmp_path):
    src, _ = fig5
    a, b = tmp_path / "a.tla", tmp_path / "b.tla"
    main(["compile", str(src), "-o", str(a)])
    main(["compile", str(src), "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_cost_table_flag(fig5, tmp_path, capsys):
    src, inp = fig5
    table = tmp_path / "cost.json"
    table.write_text(json.dumps({"DIV.ft": 30}))
    assert main(["compare", str(src), "--inputs", str(inp), "--cost-table", str(table)]) == 0
    slow = json.loads(capsys.readouterr().out)
    main(["compare", str(src), "--inputs", str(inp)])
    fast = json.loads(capsys.readouterr().out)
    assert slow["cycles_typeline"] == fast["cycles_typeline"] + 18
    table.write_text(json.dumps({"DIV.ft": 0}))
    assert main(["compare", str(src), "--cost-table", str(table)]) == 1


def test_bench(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(fixture_path("corpus"), corpus)
    assert main(["bench", str(corpus)]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[-1]["unit"] == "pooled" and len(rows) >= 2
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["bench", str(empty)]) == 0
    assert capsys.readouterr().out.strip() == ",".join(
        ["unit", "load_parallelism", "compute_parallelism", "cycle_reduction",
         "miss_handled_fraction", "cycles_typeline", "cycles_baseline"]
    )


def test_exit_codes(tmp_path):
    assert main([]) == 1
    assert main(["compile", str(tmp_path / "missing.mc")]) == 1
    bad = tmp_path / "bad.mc"
    bad.write_text("int x = ;")
    assert main(["compile", str(bad)]) == 2
    trap = tmp_path / "trap.mc"
    trap.write_text("int x; int z; x = 1 / z;")
    assert main(["compare", str(trap)]) == 3
    loop = tmp_path / "loop.tla"
    loop.write_text("PEN\n")
    assert main(["run", str(loop)]) == 4
    junk = tmp_path / "junk.tla"
    junk.write_text("FROB r1\n")
    assert main(["run", str(junk)]) == 4
    ok = tmp_path / "ok.mc"
    ok.write_text("int x;")
    inp = tmp_path / "in.json"
    inp.write_text(json.dumps({"y": 1}))
    assert main(["compare", str(ok), "--inputs", str(inp)]) == 1


def test_empty_select(tmp_path):
    csvf = tmp_path / "s.csv"
    csvf.write_text("unit,int,float,double,long,char,struct,enum,typedef\n")
    assert main(["select-sdt", str(csvf)]) == 1


def test_console_script_runs(fig5):
    src, _ = fig5
    proc = subprocess.run([sys.executable, "-m", "typeline.cli", "compile", str(src)], capture_output=True, text=True)
    assert proc.returncode == 0 and "VEN" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "typeline.cli", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 1
