import pytest

from art9.cli import BENCH_COLUMNS, benchmark_sources, bench_row, main

PROGRAM = """
    LI T1, 5
    LI T2, 0
loop:
    ADD T2, T1
    ADDI T1, -1
    BNE T1, 0, loop
    STORE T2, T0, 3
    HALT
"""


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split(": ", 1) for line in out.splitlines())


@pytest.fixture
def source(tmp_path):
    p = tmp_path / "prog.s"
    p.write_text(PROGRAM)
    return p


def test_asm_disasm_roundtrip(tmp_path, source, capsys):
    image = tmp_path / "prog.tmem"
    assert run_cli(capsys, "asm", source, "-o", image)[0] == 0
    listing = tmp_path / "prog.dis"
    assert run_cli(capsys, "disasm", image, "-o", listing)[0] == 0
    again = tmp_path / "again.tmem"
    assert run_cli(capsys, "asm", listing, "-o", again)[0] == 0
    assert again.read_bytes() == image.read_bytes()
    code, out, _ = run_cli(capsys, "disasm", image)
    assert code == 0 and out.splitlines()[-1] == "JAL T4, 0"


def test_run_modes_agree(tmp_path, source, capsys):
    code, out, _ = run_cli(capsys, "run", source)
    f = fields(out)
    assert code == 0 and f["mode"] == "functional"
    trace = tmp_path / "trace.csv"
    code, out, _ = run_cli(capsys, "run", source, "--mode", "pipeline", "--trace", trace,
                           "--iterations", 5)
    p = fields(out)
    assert code == 0 and p["digest"] == f["digest"] and p["retired"] == f["retired"]
    assert int(p["cycles"]) == (int(p["retired"]) + 4 + int(p["load_use_stalls"])
                                + int(p["branch_value_stalls"]) + int(p["branch_squashes"]))
    rows = trace.read_text().splitlines()
    assert rows[0] == "cycle,IF,ID,EX,MEM,WB,pc" and len(rows) == int(p["cycles"]) + 1
    assert float(p["cycles_per_iteration"]) == int(p["cycles"]) / 5


def test_run_tmem_with_data(tmp_path, capsys):
    (tmp_path / "d.s").write_text(".word 41\n")
    (tmp_path / "p.s").write_text("LOAD T1, T0, 0\nADDI T1, 1\nHALT\n")
    assert run_cli(capsys, "asm", tmp_path / "d.s", "--base", 9841, "-o", tmp_path / "d.tmem")[0] == 0
    assert run_cli(capsys, "asm", tmp_path / "p.s", "-o", tmp_path / "p.tmem")[0] == 0
    code, out, _ = run_cli(capsys, "run", tmp_path / "p.tmem", "--data", tmp_path / "d.tmem")
    assert code == 0 and fields(out)["trf"].split()[1] == "0000+---0"  # 42


def test_domain_errors_exit_1(tmp_path, capsys):
    loop = tmp_path / "loop.s"
    loop.write_text("top: NOP\nJAL T4, top\n")
    code, _, err = run_cli(capsys, "run", loop, "--max-cycles", 50)
    assert code == 1 and "art9: error:" in err
    bad = tmp_path / "bad.s"
    bad.write_text("ADDI T1, 99\n")
    code, _, err = run_cli(capsys, "asm", bad)
    assert code == 1 and "line 1" in err
    rv = tmp_path / "bad.rv"
    rv.write_text("mul x5, x6, x7\n")
    code, _, err = run_cli(capsys, "transpile", rv)
    assert code == 1 and "mul" in err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["run"],
    ["run", "missing.s"],
    ["estimate"],
    ["estimate", "--dmips-per-mhz", "1", "--cycles-per-iter", "3"],
    ["estimate", "--cycles", "100"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_trace_needs_pipeline(source, tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["run", str(source), "--trace", str(tmp_path / "t.csv")])
    assert e.value.code == 2


def test_estimate(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--dmips-per-mhz", 0.42, "--freq-mhz", 150,
                           "--power-w", 1.09)
    assert code == 0 and out.splitlines()[-1] == "dmips_per_w: 57.8"
    code, out, _ = run_cli(capsys, "estimate", "--cycles", 134200, "--iterations", 100)
    f = fields(out)
    assert f["total_gates"] == "652" and f["critical_delay_ps"] == "3215.43"
    assert f["dmips_per_mhz"] == "0.4241"


def test_transpile(tmp_path, capsys):
    rv = tmp_path / "p.rv"
    rv.write_text("addi x5, x0, 7\nsw x5, 0(x2)\nj .\n")
    code, out, _ = run_cli(capsys, "transpile", rv)
    assert code == 0 and "; memory_cells:" in out and "STORE" in out
    asm = tmp_path / "p.s"
    code, out, _ = run_cli(capsys, "transpile", rv, "-o", asm, "--no-peephole", "--stack-top", 0)
    assert code == 0 and out.startswith("rv_instructions: 3")
    code, out, _ = run_cli(capsys, "run", asm)
    assert code == 0


def test_bench(capsys):
    code, out, _ = run_cli(capsys, "bench", "--jobs", 2)
    lines = out.splitlines()
    assert code == 0 and lines[0].split() == list(BENCH_COLUMNS)
    assert [l.split()[0] for l in lines[1:]] == sorted(benchmark_sources())
    row = bench_row("bubble_sort", benchmark_sources()["bubble_sort"])
    assert lines[1].split() == [str(c) for c in row]
