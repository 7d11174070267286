"""Cycle-accurate model of the 5-stage ART-9 pipeline.

Single-issue and in order: IF, ID, EX, MEM, WB. The model moves real
values through the stage latches, so any forwarding mistake shows up as a
difference from the functional simulator rather than only as a wrong cycle
count.

Timing rules:

* TALU operands are forwarded from the EX/MEM and MEM/WB latches. The
  register file is write-first, so a value written in WB is visible to
  reads in the same cycle.
* Branches and jumps resolve in ID. Their condition/base register may come
  from the instruction currently in EX, from the EX/MEM latch, or from the
  register file.
* A taken transfer squashes the one instruction fetched behind it.
* A LOAD followed directly by an EX consumer stalls 1 cycle. A LOAD feeding
  an ID consumer (branch condition, JALR base) stalls 2 cycles at distance 1
  and 1 cycle at distance 2, because TDM data only exists after MEM.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .isa import IllegalInstruction, Instruction, decode_instruction
from .sim import MachineState, SimError, SimTimeout, Trap, alu
from .ternary import ONE, Word9, add_word, encode_balanced

BUBBLE = "BUBBLE"
SQUASH = "SQUASH"
STAGES = ("IF", "ID", "EX", "MEM", "WB")
TRACE_HEADER = ("cycle",) + STAGES + ("pc",)

_UNARY = {"MV", "PTI", "NTI", "STI"}


def ex_sources(ins: Instruction) -> tuple[int, ...]:
    """Registers the instruction reads in EX."""
    m, t = ins.mnemonic, ins.type
    if t == "R":
        return (ins.tb,) if m in _UNARY else (ins.ta, ins.tb)
    if t == "I":
        return () if m == "LUI" else (ins.ta,)
    if m == "LOAD":
        return (ins.tb,)
    if m == "STORE":
        return (ins.ta, ins.tb)
    return ()


def id_sources(ins: Instruction) -> tuple[int, ...]:
    """Registers the instruction reads in ID (branch condition, JALR base)."""
    if ins.mnemonic in ("BEQ", "BNE"):
        return (ins.ta,)
    if ins.mnemonic == "JALR":
        return (ins.tb,)
    return ()


def dest(ins: Instruction) -> int | None:
    if ins.mnemonic in ("BEQ", "BNE", "STORE"):
        return None
    return ins.ta


class _Slot:
    __slots__ = ("index", "pc", "word", "ins", "dest", "is_load", "result",
                 "addr", "store", "next_pc", "halts")

    def __init__(self, pc: Word9, word: Word9):
        self.index = pc.unsigned
        self.pc = pc
        self.word = word
        try:
            self.ins = decode_instruction(word)
        except IllegalInstruction:
            self.ins = None
        self.dest = dest(self.ins) if self.ins else None
        self.is_load = bool(self.ins) and self.ins.mnemonic == "LOAD"
        self.result = None
        self.addr = None
        self.store = None
        self.next_pc = add_word(pc, ONE)
        self.halts = False


@dataclass(frozen=True)
class TraceRow:
    cycle: int
    IF: str
    ID: str
    EX: str
    MEM: str
    WB: str
    pc: str


@dataclass
class PipelineStats:
    cycles: int = 0
    retired: int = 0
    load_use_stalls: int = 0
    branch_squashes: int = 0
    branch_value_stalls: int = 0
    trace: list[TraceRow] = field(default_factory=list)

    @property
    def stalls(self) -> int:
        return self.load_use_stalls + self.branch_value_stalls

    @property
    def ipc(self) -> float:
        return self.retired / self.cycles if self.cycles else 0.0

    def check_identity(self) -> bool:
        return self.cycles == (self.retired + 4 + self.load_use_stalls
                               + self.branch_squashes + self.branch_value_stalls)


def _label(slot) -> str:
    if slot is None:
        return BUBBLE
    if slot is SQUASH:
        return SQUASH
    return str(slot.index)


def run_pipelined(state: MachineState, max_cycles: int = 1_000_000, trace: bool = True):
    """Run to halt under the pipeline timing model. Returns ``(state, stats)``."""
    if state.halted:
        raise SimError("machine is halted")
    stats = PipelineStats()
    trf, tim, tdm = state.trf, state.tim, state.tdm
    fetch_pc = state.pc
    fetching = not state.halted
    if_id = id_ex = ex_mem = mem_wb = None
    cycle = 0

    while True:
        if cycle >= max_cycles:
            stats.cycles = cycle
            raise SimTimeout(max_cycles, state, stats)
        cycle += 1
        row_id, row_ex, row_mem, row_wb = _label(if_id), _label(id_ex), _label(ex_mem), _label(mem_wb)
        row_pc = str(fetch_pc)
        done = False

        # WB
        if mem_wb is not None:
            if mem_wb.ins is None:
                state.pc = mem_wb.pc
                raise Trap(mem_wb.pc, mem_wb.word)
            if mem_wb.dest is not None:
                trf[mem_wb.dest] = mem_wb.result
            state.retired += 1
            stats.retired += 1
            state.pc = mem_wb.next_pc
            if mem_wb.halts:
                done = True

        # MEM
        if ex_mem is not None and ex_mem.ins is not None:
            if ex_mem.is_load:
                ex_mem.result = tdm[ex_mem.addr]
            elif ex_mem.ins.mnemonic == "STORE":
                tdm.write(ex_mem.addr, ex_mem.store)

        # EX, operands through the forwarding muxes
        if id_ex is not None and id_ex.ins is not None:
            ins = id_ex.ins

            def operand(r):
                if ex_mem is not None and ex_mem.dest == r:
                    if ex_mem.is_load:
                        raise AssertionError("load-use hazard reached EX unstalled")
                    return ex_mem.result
                return trf[r]

            m, t = ins.mnemonic, ins.type
            if t == "R":
                a = operand(ins.ta) if m not in _UNARY else None
                id_ex.result = alu(ins, a, operand(ins.tb))
            elif t == "I":
                a = operand(ins.ta) if m != "LUI" else None
                id_ex.result = alu(ins, a, encode_balanced(ins.imm))
            elif t == "M":
                id_ex.addr = add_word(operand(ins.tb), encode_balanced(ins.imm)).unsigned
                if m == "STORE":
                    id_ex.store = operand(ins.ta)

        # ID: hazard detection and branch resolution
        stall = False
        redirect = None
        halting = False
        slot = if_id if if_id is not SQUASH else None
        if slot is not None and slot.ins is not None:
            ins = slot.ins
            srcs = id_sources(ins)
            if id_ex is not None and id_ex.is_load and id_ex.dest in ex_sources(ins):
                stall = True
                stats.load_use_stalls += 1
            elif any((id_ex is not None and id_ex.is_load and id_ex.dest == r)
                     or (ex_mem is not None and ex_mem.is_load and ex_mem.dest == r)
                     for r in srcs):
                stall = True
                stats.branch_value_stalls += 1
            elif ins.type == "B":
                def id_operand(r):
                    if id_ex is not None and id_ex.dest == r:
                        return id_ex.result
                    if ex_mem is not None and ex_mem.dest == r:
                        return ex_mem.result
                    return trf[r]

                m = ins.mnemonic
                target = None
                if m in ("BEQ", "BNE"):
                    hit = id_operand(ins.ta).trits[0] == ins.b
                    if hit == (m == "BEQ"):
                        target = add_word(slot.pc, encode_balanced(ins.imm))
                elif m == "JAL":
                    target = add_word(slot.pc, encode_balanced(ins.imm))
                    slot.result = slot.next_pc
                else:
                    target = add_word(id_operand(ins.tb), encode_balanced(ins.imm))
                    slot.result = slot.next_pc
                if target is not None:
                    slot.next_pc = target
                    redirect = target
                    halting = slot.halts = target == slot.pc
        elif slot is not None:
            halting = True  # illegal word: stop fetching, trap when it reaches WB

        # IF
        if stall:
            row_if = str(fetch_pc.unsigned)
            new_if_id, new_id_ex = if_id, None
        else:
            new_id_ex = slot
            if fetching:
                row_if = str(fetch_pc.unsigned)
                fetched = _Slot(fetch_pc, tim[fetch_pc.unsigned])
                if redirect is not None:
                    new_if_id = SQUASH
                    fetch_pc = redirect
                    if not halting:
                        stats.branch_squashes += 1
                elif halting:
                    new_if_id = SQUASH
                else:
                    new_if_id = fetched
                    fetch_pc = add_word(fetch_pc, ONE)
                if halting:
                    fetching = False
            else:
                row_if = BUBBLE
                new_if_id = None

        if trace:
            stats.trace.append(TraceRow(cycle, row_if, row_id, row_ex, row_mem, row_wb, row_pc))
        mem_wb, ex_mem, id_ex, if_id = ex_mem, id_ex, new_id_ex, new_if_id
        if done:
            state.halted = True
            stats.cycles = cycle
            return state, stats


def emit_trace(stats: PipelineStats, sink=None) -> str:
    """Write the per-cycle trace as CSV to ``sink`` (if given) and return it."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in stats.trace:
        w.writerow((r.cycle, r.IF, r.ID, r.EX, r.MEM, r.WB, r.pc))
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text
