"""RV-32I assembly to ART-9 assembly.

Phases: parse, allocate registers, map each instruction (materializing
constants), eliminate redundancy, retarget branches, emit text.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..asm import ProgramImage, assemble_program
from ..isa import Instruction
from ..sim import MachineState
from ..ternary import MAX_VALUE, MODULUS
from .ir import Op
from .layout import LayoutError, emit_assembly, retarget_branches
from .lower import (SPILL_TOP, RegMap, TranspileError, allocate_registers,
                    lower_program, map_instruction, materialize_constant)
from .peephole import eliminate_redundancy
from .rv import RvError, RvInstruction, RvState, parse_rv32i, run_rv

DEFAULT_STACK_TOP = 9700


@dataclass
class TranspileStats:
    rv_instructions: int = 0
    rv_words: int = 0
    mapped: int = 0
    removed: int = 0
    instructions: int = 0
    spills: int = 0

    @property
    def memory_cells(self) -> int:
        return 9 * self.instructions

    @property
    def rv_bits(self) -> int:
        return 32 * self.rv_words

    def lines(self) -> list[str]:
        return [
            f"rv_instructions: {self.rv_instructions}",
            f"rv_bits: {self.rv_bits}",
            f"mapped: {self.mapped}",
            f"removed: {self.removed}",
            f"instructions: {self.instructions}",
            f"spills: {self.spills}",
            f"memory_cells: {self.memory_cells}",
        ]


@dataclass
class TranspileUnit:
    input: list[RvInstruction]
    regmap: RegMap
    ops: list[Op] = field(default_factory=list)
    output: list[tuple[Instruction, str | None, list[str]]] = field(default_factory=list)
    stats: TranspileStats = field(default_factory=TranspileStats)
    stack_top: int = DEFAULT_STACK_TOP

    @property
    def text(self) -> str:
        return emit_assembly(self.output)

    def image(self) -> ProgramImage:
        return assemble_program(self.text)


def transpile_unit(source: str, stack_top: int = DEFAULT_STACK_TOP,
                   peephole: bool = True, spill_top: int = SPILL_TOP) -> TranspileUnit:
    if not -MAX_VALUE <= stack_top <= MAX_VALUE:
        raise TranspileError(f"stack top {stack_top} outside ±{MAX_VALUE}")
    prog = parse_rv32i(source)
    regmap = allocate_registers(prog, spill_top)
    ops = lower_program(prog, regmap, stack_top)
    unit = TranspileUnit(prog, regmap, stack_top=stack_top)
    unit.stats.rv_instructions = len(prog)
    unit.stats.rv_words = sum(ins.words for ins in prog)
    unit.stats.mapped = len(ops)
    unit.stats.spills = len(regmap.spills)
    if peephole:
        ops, unit.stats.removed = eliminate_redundancy(ops)
    unit.ops = ops
    try:
        unit.output = retarget_branches(ops)
    except LayoutError as e:
        raise TranspileError(str(e)) from None
    unit.stats.instructions = len(unit.output)
    return unit


def transpile(source: str, stack_top: int = DEFAULT_STACK_TOP, peephole: bool = True,
              spill_top: int = SPILL_TOP) -> tuple[str, TranspileStats]:
    unit = transpile_unit(source, stack_top, peephole, spill_top)
    return unit.text, unit.stats


def rv_view(state: MachineState, regmap: RegMap) -> list[int]:
    """RV register file as seen through the allocation, from an ART-9 state."""
    regs = [0] * 32
    for r, t in regmap.regs.items():
        regs[r] = state.trf[t].value
    for r in regmap.spills:
        regs[r] = state.tdm[regmap.slot_address(r)].value
    return regs


def rv_memory(state: MachineState, addresses) -> dict[int, int]:
    """Values of RV word addresses in an ART-9 data memory."""
    return {a: state.tdm[(a + MAX_VALUE) % MODULUS].value for a in addresses}


__all__ = [
    "DEFAULT_STACK_TOP", "SPILL_TOP", "LayoutError", "RegMap", "RvError",
    "RvInstruction", "RvState", "TranspileError", "TranspileStats", "TranspileUnit",
    "allocate_registers", "eliminate_redundancy", "map_instruction",
    "materialize_constant", "parse_rv32i", "retarget_branches", "rv_memory",
    "rv_view", "run_rv", "transpile", "transpile_unit",
]
