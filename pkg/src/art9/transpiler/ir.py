"""Symbolic ART-9 operations used between lowering and final layout.

An ``Op`` is an ART-9 instruction whose branch/jump immediate may still be
a label, and which carries the labels defined at its address. ``LUI``/``LI``
pairs can also refer to the absolute address of a label (``addr_of``);
layout fills those in.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..isa import Instruction, format_instruction
from ..ternary import MAX_VALUE, encode_balanced

ZERO, RA, SP = 0, 1, 2
STAGE2, SPILL_BASE, SCRATCH = 6, 7, 8


@dataclass
class Op:
    mnemonic: str
    ta: int | None = None
    tb: int | None = None
    b: int | None = None
    imm: int | None = None
    target: str | None = None
    addr_of: str | None = None   # LUI/LI: upper/lower part of a label's address
    labels: list[str] = field(default_factory=list)

    def key(self):
        return (self.mnemonic, self.ta, self.tb, self.b, self.imm, self.target, self.addr_of)

    def copy(self, **kw) -> "Op":
        kw.setdefault("labels", list(self.labels))
        return replace(self, **kw)

    def instruction(self, imm: int | None = None) -> Instruction:
        return Instruction(self.mnemonic, self.ta, self.tb, self.b,
                           self.imm if imm is None else imm)

    def __str__(self):
        if self.target is not None or self.addr_of is not None:
            ins = self.instruction(0)
            text = format_instruction(ins)
            ref = self.target if self.target is not None else f"%{self.mnemonic.lower()}({self.addr_of})"
            return text[: text.rindex(",") + 2] + ref if "," in text else text
        return format_instruction(self.instruction())


def split_constant(v: int) -> tuple[int, int]:
    """(LUI immediate, LI immediate) whose pair loads the word for ``v``."""
    if not -MAX_VALUE <= v <= MAX_VALUE:
        raise ValueError(f"constant {v} outside [-{MAX_VALUE}, {MAX_VALUE}]")
    w = encode_balanced(v)
    return w.field(8, 5), w.field(4, 0)


def address_value(index: int) -> int:
    """Balanced value of the PC word for instruction ``index``."""
    return index - MAX_VALUE


def uses(op: Op) -> set[int]:
    m = op.mnemonic
    if m in ("MV", "PTI", "NTI", "STI"):
        return {op.tb}
    if m in ("AND", "OR", "XOR", "ADD", "SUB", "SR", "SL", "COMP"):
        return {op.ta, op.tb}
    if m in ("ANDI", "ADDI", "SRI", "SLI", "LI"):
        return {op.ta}
    if m in ("BEQ", "BNE"):
        return {op.ta}
    if m in ("JALR", "LOAD"):
        return {op.tb}
    if m == "STORE":
        return {op.ta, op.tb}
    return set()


def defs(op: Op) -> set[int]:
    if op.mnemonic in ("BEQ", "BNE", "STORE"):
        return set()
    return {op.ta}
