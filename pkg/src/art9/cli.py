"""Command-line entry point: ``art9 {asm,disasm,run,transpile,estimate,bench}``."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import techmodel
from .asm import AsmError, ProgramImage, assemble_program, disassemble_program, read_tmem, write_tmem
from .pipeline import emit_trace, run_pipelined
from .sim import SimError, new_state, run_functional
from .transpiler import (DEFAULT_STACK_TOP, SPILL_TOP, RvError, TranspileError,
                         transpile_unit)

DATA = resources.files("art9") / "data"


class CliError(Exception):
    """Domain failure: reported on stderr, exit status 1."""


class UsageError(Exception):
    """Bad arguments discovered after parsing: exit status 2."""


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text()


def _data_file(path: str) -> str:
    """Read a path, falling back to the packaged file of the same name."""
    if Path(path).is_file():
        return Path(path).read_text()
    packaged = DATA / Path(path).name
    if packaged.is_file():
        return packaged.read_text()
    raise UsageError(f"no such file: {path}")


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_program(path: str) -> ProgramImage:
    """A ``.tmem`` image, or assembly source for anything else."""
    text = _read(path)
    return read_tmem(text) if path.endswith(".tmem") else assemble_program(text)


def cmd_asm(args):
    image = assemble_program(_read(args.source), base=args.base)
    _write(args.output, write_tmem(image))


def cmd_disasm(args):
    _write(args.output, disassemble_program(read_tmem(_read(args.image))))


def _stats_block(pairs) -> str:
    return "".join(f"{k}: {v}\n" for k, v in pairs)


def cmd_run(args):
    if args.iterations is not None and args.iterations <= 0:
        raise UsageError("--iterations must be positive")
    program = load_program(args.program)
    data = read_tmem(_read(args.data)) if args.data else None
    state = new_state(program, data)
    if args.mode == "functional":
        if args.trace:
            raise UsageError("--trace needs --mode pipeline")
        state, retired = run_functional(state, args.max_cycles)
        cycles = retired
        pairs = [("mode", "functional"), ("retired", retired)]
    else:
        state, stats = run_pipelined(state, args.max_cycles, trace=bool(args.trace))
        if args.trace:
            Path(args.trace).write_text(emit_trace(stats))
        cycles = stats.cycles
        pairs = [("mode", "pipeline"), ("retired", stats.retired), ("cycles", stats.cycles),
                 ("load_use_stalls", stats.load_use_stalls),
                 ("branch_value_stalls", stats.branch_value_stalls),
                 ("branch_squashes", stats.branch_squashes), ("ipc", f"{stats.ipc:.4f}")]
    if args.iterations:
        per = cycles / args.iterations
        pairs += [("cycles_per_iteration", f"{per:g}"),
                  ("dmips_per_mhz", f"{techmodel.dmips_per_mhz(per):.4f}")]
    pairs += [("pc", f"{state.pc} ({state.pc.unsigned})"),
              ("trf", " ".join(str(r) for r in state.trf)),
              ("digest", state.digest())]
    sys.stdout.write(_stats_block(pairs))


def cmd_transpile(args):
    unit = transpile_unit(_read(args.source), stack_top=args.stack_top,
                          peephole=not args.no_peephole, spill_top=args.spill_base)
    stats = "".join(line + "\n" for line in unit.stats.lines())
    if args.output and args.output != "-":
        Path(args.output).write_text(unit.text)
        sys.stdout.write(stats)
    else:
        sys.stdout.write(unit.text + "".join("; " + line for line in stats.splitlines(True)))


def cmd_estimate(args):
    given = [args.dmips_per_mhz is not None, args.cycles_per_iter is not None,
             args.cycles is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --dmips-per-mhz, --cycles-per-iter, --cycles")
    if args.cycles is not None:
        if args.iterations is None or args.iterations <= 0:
            raise UsageError("--cycles needs a positive --iterations")
        cpi = args.cycles / args.iterations
    else:
        cpi = args.cycles_per_iter
    dmips_mhz = args.dmips_per_mhz if args.dmips_per_mhz is not None else techmodel.dmips_per_mhz(cpi)
    lib = nl = None
    if args.freq_mhz is None or args.power_w is None:
        lib = techmodel.parse_tech_library(_data_file(args.tech))
        nl = techmodel.parse_netlist(_data_file(args.netlist))
    est = techmodel.estimate(lib, nl, dmips_mhz=dmips_mhz, freq_mhz=args.freq_mhz,
                             power_w=args.power_w)
    sys.stdout.write("".join(line + "\n" for line in est.lines()))


BENCH_COLUMNS = ("name", "instructions", "memory_cells", "retired", "cycles", "stalls", "ipc")


def benchmark_sources() -> dict[str, str]:
    folder = DATA / "benchmarks"
    return {p.name[:-2]: p.read_text() for p in sorted(folder.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".s")}


def bench_row(name: str, source: str, peephole: bool = True, max_cycles: int = 10_000_000):
    unit = transpile_unit(source, peephole=peephole)
    image = unit.image()
    fstate, retired = run_functional(new_state(image), max_cycles)
    pstate, stats = run_pipelined(new_state(image), max_cycles, trace=False)
    if pstate.architectural() != fstate.architectural():
        raise CliError(f"{name}: pipelined and functional final states differ")
    return (name, len(image), 9 * len(image), retired, stats.cycles, stats.stalls,
            f"{stats.ipc:.3f}")


def cmd_bench(args):
    sources = benchmark_sources()
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = list(pool.map(lambda kv: bench_row(*kv, peephole=not args.no_peephole),
                             sources.items()))
    table = [BENCH_COLUMNS] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(BENCH_COLUMNS))]
    for r in table:
        print("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                        for i, (c, w) in enumerate(zip(r, widths))).rstrip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="art9", description="ART-9 ternary processor toolchain")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("asm", help="assemble source into a .tmem image")
    a.add_argument("source")
    a.add_argument("-o", "--output")
    a.add_argument("--base", type=int, default=0)
    a.set_defaults(func=cmd_asm)

    d = sub.add_parser("disasm", help="disassemble a .tmem image")
    d.add_argument("image")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_disasm)

    r = sub.add_parser("run", help="simulate a program (.tmem or assembly)")
    r.add_argument("program")
    r.add_argument("--data", help=".tmem image loaded into data memory")
    r.add_argument("--mode", choices=("functional", "pipeline"), default="functional")
    r.add_argument("--max-cycles", type=int, default=1_000_000)
    r.add_argument("--trace", metavar="FILE", help="write the per-cycle CSV trace")
    r.add_argument("--iterations", type=int, help="report cycles per iteration")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("transpile", help="translate RV-32I assembly to ART-9 assembly")
    t.add_argument("source")
    t.add_argument("-o", "--output")
    t.add_argument("--no-peephole", action="store_true")
    t.add_argument("--stack-top", type=int, default=DEFAULT_STACK_TOP)
    t.add_argument("--spill-base", type=int, default=SPILL_TOP,
                   help="balanced address of spill slot 0 (slots grow downward)")
    t.set_defaults(func=cmd_transpile)

    e = sub.add_parser("estimate", help="gate-level performance and efficiency estimate")
    e.add_argument("--tech", default="cntfet32.tech")
    e.add_argument("--netlist", default="art9.struct")
    e.add_argument("--dmips-per-mhz", type=float)
    e.add_argument("--cycles-per-iter", type=float)
    e.add_argument("--cycles", type=float)
    e.add_argument("--iterations", type=int)
    e.add_argument("--freq-mhz", type=float)
    e.add_argument("--power-w", type=float)
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="transpile and simulate the fixture benchmarks")
    b.add_argument("--jobs", type=int, default=3)
    b.add_argument("--no-peephole", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (CliError, SimError, AsmError, RvError, TranspileError, techmodel.TechError,
            ValueError) as e:
        print(f"art9: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
