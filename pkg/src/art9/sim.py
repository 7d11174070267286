"""Architectural state and the functional (one instruction per step) simulator."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .asm import ProgramImage
from .isa import IllegalInstruction, Instruction, decode_instruction
from .ternary import (MAX_VALUE, MODULUS, ONE, ZERO, InvertKind, LogicKind,
                      Word9, add_word, compare_word, encode_balanced, from_unsigned,
                      invert_word, logic_word, negate_word, shift_word)

RESET_PC = from_unsigned(0)


class SimError(Exception):
    pass


class Trap(SimError):
    def __init__(self, pc: Word9, word: Word9):
        super().__init__(f"illegal instruction {word} at pc {pc} ({pc.unsigned})")
        self.pc = pc
        self.word = word


class SimTimeout(SimError):
    def __init__(self, limit: int, state: "MachineState", stats=None):
        super().__init__(f"timeout: no halt within {limit} cycles")
        self.limit = limit
        self.state = state
        self.stats = stats


class Memory(dict):
    """Sparse 3**9-word store keyed by unsigned address; unwritten cells read zero."""

    def __missing__(self, addr):
        return ZERO

    def write(self, addr: int, w: Word9):
        if w.value == 0:
            self.pop(addr, None)
        else:
            self[addr] = w

    def digest(self) -> str:
        h = hashlib.sha256()
        for addr in sorted(self):
            h.update(f"{addr}:{self[addr]}\n".encode())
        return h.hexdigest()[:16]


@dataclass
class MachineState:
    pc: Word9 = RESET_PC
    trf: list[Word9] = field(default_factory=lambda: [ZERO] * 9)
    tim: Memory = field(default_factory=Memory)
    tdm: Memory = field(default_factory=Memory)
    halted: bool = False
    retired: int = 0

    def copy(self) -> "MachineState":
        return MachineState(self.pc, list(self.trf), Memory(self.tim),
                            Memory(self.tdm), self.halted, self.retired)

    def architectural(self):
        """Tuple used to compare two runs: pc, registers, data memory, retired."""
        return (self.pc, tuple(self.trf), dict(self.tdm), self.retired)

    def digest(self) -> str:
        regs = " ".join(str(r) for r in self.trf)
        h = hashlib.sha256(f"{self.pc}|{regs}|{self.tdm.digest()}".encode())
        return h.hexdigest()[:16]


def load_image(state: MachineState, image: ProgramImage, target: str = "tim") -> MachineState:
    if target not in ("tim", "tdm"):
        raise ValueError(f"unknown memory {target!r}")
    if image.base + len(image.words) > MODULUS:
        raise ValueError("image overflows memory")
    mem = getattr(state, target)
    for i, w in enumerate(image.words):
        mem.write(image.base + i, w)
    state.pc = RESET_PC
    state.halted = False
    return state


def new_state(program: ProgramImage | None = None, data: ProgramImage | None = None) -> MachineState:
    state = MachineState()
    if program is not None:
        load_image(state, program, "tim")
    if data is not None:
        load_image(state, data, "tdm")
    return state


def shift_amount(w: Word9) -> int:
    return w.field(1, 0)


def alu(ins: Instruction, a: Word9, b: Word9) -> Word9:
    """Result written to Ta by an R-type or I-type instruction.

    ``a`` is the old value of Ta; ``b`` is TRF[Tb] for R-type or the
    immediate as a word for I-type.
    """
    m = ins.mnemonic
    if m == "MV":
        return b
    if m in ("PTI", "NTI", "STI"):
        return invert_word(InvertKind[m], b)
    if m in ("AND", "ANDI"):
        return logic_word(LogicKind.AND, a, b)
    if m == "OR":
        return logic_word(LogicKind.OR, a, b)
    if m == "XOR":
        return logic_word(LogicKind.XOR, a, b)
    if m in ("ADD", "ADDI"):
        return add_word(a, b)
    if m == "SUB":
        return add_word(a, negate_word(b))
    if m in ("SR", "SRI"):
        return shift_word(a, shift_amount(b), "right")
    if m in ("SL", "SLI"):
        return shift_word(a, shift_amount(b), "left")
    if m == "COMP":
        return encode_balanced(compare_word(a, b))
    if m == "LUI":
        return encode_balanced(ins.imm * 243)
    if m == "LI":
        return encode_balanced(a.field(8, 5) * 243 + ins.imm)
    raise AssertionError(m)


def step_functional(state: MachineState) -> MachineState:
    if state.halted:
        raise SimError("machine is halted")
    pc = state.pc
    word = state.tim[pc.unsigned]
    try:
        ins = decode_instruction(word)
    except IllegalInstruction:
        raise Trap(pc, word) from None
    trf = state.trf
    m = ins.mnemonic
    next_pc = add_word(pc, ONE)
    kind = ins.type
    if kind == "R":
        trf[ins.ta] = alu(ins, trf[ins.ta], trf[ins.tb])
    elif kind == "I":
        trf[ins.ta] = alu(ins, trf[ins.ta], encode_balanced(ins.imm))
    elif m == "LOAD":
        trf[ins.ta] = state.tdm[add_word(trf[ins.tb], encode_balanced(ins.imm)).unsigned]
    elif m == "STORE":
        state.tdm.write(add_word(trf[ins.tb], encode_balanced(ins.imm)).unsigned, trf[ins.ta])
    elif m in ("BEQ", "BNE"):
        hit = trf[ins.ta].trits[0] == ins.b
        if hit == (m == "BEQ"):
            next_pc = add_word(pc, encode_balanced(ins.imm))
    elif m == "JAL":
        trf[ins.ta] = next_pc
        next_pc = add_word(pc, encode_balanced(ins.imm))
    else:  # JALR: target from the base register's value before the link write
        target = add_word(trf[ins.tb], encode_balanced(ins.imm))
        trf[ins.ta] = next_pc
        next_pc = target
    if kind == "B" and next_pc == pc:
        state.halted = True
    state.pc = next_pc
    state.retired += 1
    return state


def run_functional(state: MachineState, max_cycles: int = 1_000_000):
    """Step until halt. Returns ``(state, retired)``; raises SimTimeout."""
    while not state.halted:
        if state.retired >= max_cycles:
            raise SimTimeout(max_cycles, state)
        step_functional(state)
    return state, state.retired
