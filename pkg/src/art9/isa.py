"""ART-9 instruction model and trit-level encoding.

Every instruction is one 9-trit word. The opcode is a prefix-free ternary
codeword at the most significant end; the operand fields follow it in the
order the mnemonic lists them, each field most significant trit first.

    R   MV..COMP  ``++`` + 3-trit function | Ta(2) | Tb(2)
    I   ANDI/ADDI 4-trit opcode            | Ta(2) | imm(3)
        SRI/SLI   5-trit opcode            | Ta(2) | imm(2)
        LUI       3-trit opcode            | Ta(2) | imm(4)
        LI        2-trit opcode            | Ta(2) | imm(5)
    B   BEQ/BNE   2-trit opcode            | Tc(2) | B(1) | imm(4)
        JAL       2-trit opcode            | Ta(2) | imm(5)
        JALR      2-trit opcode            | Ta(2) | Tb(2) | imm(3)
    M   LOAD/STORE 2-trit opcode           | Ta(2) | Tb(2) | imm(3)

Register fields hold the register number as an unsigned 2-trit value, so
``--`` is T0, ``00`` is T4 and ``++`` is T8.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ternary import Trit, Word9, int_to_trits, parse_trits, trits_value


class EncodingError(ValueError):
    pass


class IllegalInstruction(ValueError):
    def __init__(self, word: Word9):
        super().__init__(f"illegal instruction word {word}")
        self.word = word


OPCODES: dict[str, str] = {
    "LI": "--", "BEQ": "-0", "BNE": "-+", "JAL": "0-", "JALR": "00",
    "LOAD": "0+", "STORE": "+-",
    "LUI": "+0-",
    "ANDI": "+00-", "ADDI": "+000",
    "SRI": "+00+-", "SLI": "+00+0",
    "MV": "++---", "PTI": "++--0", "NTI": "++--+", "STI": "++-0-",
    "AND": "++-00", "OR": "++-0+", "XOR": "++-+-", "ADD": "++-+0",
    "SUB": "++-++", "SR": "++0--", "SL": "++0-0", "COMP": "++0-+",
}

# Operand layout per mnemonic: (field, width) in encoding order. ``c`` is the
# branch condition register, stored in the ``ta`` slot of Instruction.
_R = (("ta", 2), ("tb", 2))
FORMATS: dict[str, tuple[tuple[str, int], ...]] = {
    **{m: _R for m in ("MV", "PTI", "NTI", "STI", "AND", "OR", "XOR",
                       "ADD", "SUB", "SR", "SL", "COMP")},
    "ANDI": (("ta", 2), ("imm", 3)),
    "ADDI": (("ta", 2), ("imm", 3)),
    "SRI": (("ta", 2), ("imm", 2)),
    "SLI": (("ta", 2), ("imm", 2)),
    "LUI": (("ta", 2), ("imm", 4)),
    "LI": (("ta", 2), ("imm", 5)),
    "BEQ": (("ta", 2), ("b", 1), ("imm", 4)),
    "BNE": (("ta", 2), ("b", 1), ("imm", 4)),
    "JAL": (("ta", 2), ("imm", 5)),
    "JALR": (("ta", 2), ("tb", 2), ("imm", 3)),
    "LOAD": (("ta", 2), ("tb", 2), ("imm", 3)),
    "STORE": (("ta", 2), ("tb", 2), ("imm", 3)),
}

TYPES: dict[str, str] = {
    **{m: "R" for m in ("MV", "PTI", "NTI", "STI", "AND", "OR", "XOR",
                        "ADD", "SUB", "SR", "SL", "COMP")},
    **{m: "I" for m in ("ANDI", "ADDI", "SRI", "SLI", "LUI", "LI")},
    **{m: "B" for m in ("BEQ", "BNE", "JAL", "JALR")},
    "LOAD": "M", "STORE": "M",
}

MNEMONICS = tuple(OPCODES)


def imm_width(mnemonic: str) -> int | None:
    for name, width in FORMATS[mnemonic]:
        if name == "imm":
            return width
    return None


def imm_range(mnemonic: str) -> tuple[int, int] | None:
    w = imm_width(mnemonic)
    if w is None:
        return None
    m = (3 ** w - 1) // 2
    return -m, m


def kraft_sum() -> Fraction:
    return sum((Fraction(1, 3 ** len(code)) for code in OPCODES.values()), Fraction(0))


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    ta: int | None = None
    tb: int | None = None
    b: int | None = None
    imm: int | None = None

    def __post_init__(self):
        if self.mnemonic not in OPCODES:
            raise EncodingError(f"unknown mnemonic {self.mnemonic!r}")
        fields = {name for name, _ in FORMATS[self.mnemonic]}
        for name in ("ta", "tb", "b", "imm"):
            present = getattr(self, name) is not None
            if present != (name in fields):
                what = "missing" if name in fields else "unexpected"
                raise EncodingError(f"{self.mnemonic}: {what} field {name}")
        for name in ("ta", "tb"):
            r = getattr(self, name)
            if r is not None and not 0 <= r <= 8:
                raise EncodingError(f"{self.mnemonic}: register T{r} out of range")
        if self.b is not None and self.b not in (-1, 0, 1):
            raise EncodingError(f"{self.mnemonic}: branch trit {self.b} out of range")
        if self.imm is not None:
            lo, hi = imm_range(self.mnemonic)
            if not lo <= self.imm <= hi:
                raise EncodingError(
                    f"{self.mnemonic}: immediate {self.imm} outside [{lo}, {hi}]")

    @property
    def type(self) -> str:
        return TYPES[self.mnemonic]

    def __str__(self):
        return format_instruction(self)


def _reg_trits(r: int) -> tuple[Trit, ...]:
    # unsigned 2-trit digits (0..2 each) shifted onto the balanced levels
    return (Trit(r % 3 - 1), Trit(r // 3 - 1))


def _reg_value(trits) -> int:
    return (trits[0] + 1) + 3 * (trits[1] + 1)


def encode_instruction(ins: Instruction) -> Word9:
    parts: list[tuple[Trit, ...]] = [parse_trits(OPCODES[ins.mnemonic])]
    for name, width in FORMATS[ins.mnemonic]:
        v = getattr(ins, name)
        if name in ("ta", "tb"):
            parts.append(_reg_trits(v))
        else:
            parts.append(int_to_trits(v, width))
    msfirst = [t for p in parts for t in reversed(p)]
    assert len(msfirst) == 9
    return Word9(reversed(msfirst))


def _build_trie():
    root: dict = {}
    for mnem, code in OPCODES.items():
        node = root
        for c in code[:-1]:
            node = node.setdefault(Trit.from_char(c), {})
            if isinstance(node, str):
                raise AssertionError(f"opcode table is not prefix-free at {mnem}")
        leaf = Trit.from_char(code[-1])
        if leaf in node:
            raise AssertionError(f"opcode table is not prefix-free at {mnem}")
        node[leaf] = mnem
    return root


_TRIE = _build_trie()


def decode_instruction(w: Word9) -> Instruction:
    node = _TRIE
    pos = 8
    while isinstance(node, dict):
        if pos < 0 or w.trits[pos] not in node:
            raise IllegalInstruction(w)
        node = node[w.trits[pos]]
        pos -= 1
    mnem = node
    fields = {}
    for name, width in FORMATS[mnem]:
        chunk = w.trits[pos - width + 1:pos + 1]
        pos -= width
        if name in ("ta", "tb"):
            fields[name] = _reg_value(chunk)
        else:
            fields[name] = trits_value(chunk)
    return Instruction(mnem, **fields)


def format_instruction(ins: Instruction) -> str:
    m = ins.mnemonic
    if ins.type == "R":
        return f"{m} T{ins.ta}, T{ins.tb}"
    if m in ("BEQ", "BNE"):
        return f"{m} T{ins.ta}, {Trit(ins.b).char}, {ins.imm}"
    if m in ("JALR", "LOAD", "STORE"):
        return f"{m} T{ins.ta}, T{ins.tb}, {ins.imm}"
    return f"{m} T{ins.ta}, {ins.imm}"


NOP = Instruction("ADDI", ta=4, imm=0)
HALT = Instruction("JAL", ta=4, imm=0)
