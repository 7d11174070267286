"""Two-pass assembler, disassembler and the ``.tmem`` memory-image format.

Source syntax, one statement per line::

    loop:   ADDI T3, -1        ; comment
            BNE  T3, 0, loop   # branch targets are labels or offsets
            LUI  T2, 0t00++
            HALT
    table:  .word 0t0000++-0+

Mnemonics are case-insensitive. Immediates are signed decimals or ``0t``
trit literals. B-type targets are relative to the branch's own address.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .isa import (FORMATS, HALT, NOP, EncodingError, IllegalInstruction,
                  Instruction, decode_instruction, encode_instruction,
                  format_instruction, imm_range)
from .ternary import MODULUS, Trit, Word9, encode_balanced, parse_trits, trits_value


class AsmError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class ProgramImage:
    words: list[Word9] = field(default_factory=list)
    base: int = 0
    symbols: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.base < MODULUS:
            raise ValueError(f"image base {self.base} outside [0, {MODULUS})")
        if len(self.words) > MODULUS - self.base:
            raise ValueError(
                f"{len(self.words)} words at base {self.base} overflow the "
                f"{MODULUS}-word memory")

    def __len__(self):
        return len(self.words)


_LABEL = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:")
_REG = re.compile(r"^[Tt]([0-8])$")
_IDENT = re.compile(r"^[A-Za-z_.$][\w.$]*$")
_PSEUDO = {"NOP": NOP, "HALT": HALT}


def strip_comment(line: str) -> str:
    for mark in (";", "#"):
        i = line.find(mark)
        if i >= 0:
            line = line[:i]
    return line.strip()


def parse_int(text: str) -> int:
    text = text.strip()
    if text.startswith(("0t", "-0t", "+0t")):
        sign = -1 if text[0] == "-" else 1
        body = text[text.index("t") + 1:]
        if not body:
            raise ValueError("empty trit literal")
        return sign * trits_value(parse_trits(body))
    return int(text, 10)


def _parse_reg(text: str, lineno: int) -> int:
    m = _REG.match(text.strip())
    if not m:
        raise AsmError(f"expected register T0-T8, got {text.strip()!r}", lineno)
    return int(m.group(1))


def _parse_trit(text: str, lineno: int) -> int:
    text = text.strip()
    if text in ("-", "0", "+"):
        return int(Trit.from_char(text))
    if text in ("-1", "1", "+1"):
        return int(text)
    raise AsmError(f"expected branch trit (-, 0, +), got {text!r}", lineno)


def _parse_imm(text: str, lineno: int) -> int:
    try:
        return parse_int(text)
    except ValueError:
        raise AsmError(f"bad immediate {text.strip()!r}", lineno) from None


@dataclass
class _Stmt:
    lineno: int
    mnemonic: str
    operands: list[str]


def _split(source: str):
    """Yield (lineno, labels, statement-or-None)."""
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = strip_comment(raw)
        labels = []
        while True:
            m = _LABEL.match(line)
            if not m:
                break
            labels.append(m.group(1))
            line = line[m.end():].strip()
        stmt = None
        if line:
            parts = line.split(None, 1)
            ops = [o.strip() for o in parts[1].split(",")] if len(parts) > 1 else []
            if any(not o for o in ops):
                raise AsmError("empty operand", lineno)
            stmt = _Stmt(lineno, parts[0].upper(), ops)
        yield lineno, labels, stmt


def assemble_program(source: str, base: int = 0) -> ProgramImage:
    stmts: list[_Stmt] = []
    symbols: dict[str, int] = {}
    # pass 1: label addresses
    for lineno, labels, stmt in _split(source):
        for name in labels:
            if name in symbols:
                raise AsmError(f"duplicate label {name!r}", lineno)
            symbols[name] = base + len(stmts)
        if stmt is not None:
            stmts.append(stmt)
    # pass 2: encode
    words = []
    for index, stmt in enumerate(stmts):
        addr = base + index
        if stmt.mnemonic == ".WORD":
            if len(stmt.operands) != 1:
                raise AsmError(".word takes one operand", stmt.lineno)
            words.append(encode_balanced(_parse_imm(stmt.operands[0], stmt.lineno)))
            continue
        ins = _build(stmt, addr, symbols)
        try:
            words.append(encode_instruction(ins))
        except EncodingError as e:
            raise AsmError(str(e), stmt.lineno) from None
    try:
        return ProgramImage(words, base, symbols)
    except ValueError as e:
        raise AsmError(str(e)) from None


def _build(stmt: _Stmt, addr: int, symbols: dict[str, int]) -> Instruction:
    m, ops, n = stmt.mnemonic, stmt.operands, stmt.lineno
    if m in _PSEUDO:
        if ops:
            raise AsmError(f"{m} takes no operands", n)
        return _PSEUDO[m]
    if m not in FORMATS:
        raise AsmError(f"unknown mnemonic {m!r}", n)
    layout = FORMATS[m]
    if len(ops) != len(layout):
        raise AsmError(f"{m} expects {len(layout)} operands, got {len(ops)}", n)
    fields = {}
    for (name, _), text in zip(layout, ops):
        if name in ("ta", "tb"):
            fields[name] = _parse_reg(text, n)
        elif name == "b":
            fields[name] = _parse_trit(text, n)
        elif m in ("BEQ", "BNE", "JAL") and _IDENT.match(text):
            if text not in symbols:
                raise AsmError(f"undefined label {text!r}", n)
            fields[name] = symbols[text] - addr
        else:
            fields[name] = _parse_imm(text, n)
    rng = imm_range(m)
    if rng and not rng[0] <= fields["imm"] <= rng[1]:
        lo, hi = rng
        what = "branch offset" if m in ("BEQ", "BNE", "JAL") else "immediate"
        raise AsmError(f"{m}: {what} {fields['imm']} outside [{lo}, {hi}]", n)
    try:
        return Instruction(m, **fields)
    except EncodingError as e:
        raise AsmError(str(e), n) from None


def disassemble_word(w: Word9) -> str:
    try:
        return format_instruction(decode_instruction(w))
    except IllegalInstruction:
        return f".word 0t{w}"


def disassemble_program(image: ProgramImage) -> str:
    return "".join(disassemble_word(w) + "\n" for w in image.words)


def write_tmem(image: ProgramImage) -> str:
    lines = []
    if image.base:
        lines.append(f"base {image.base}")
    lines.extend(str(w) for w in image.words)
    return "".join(line + "\n" for line in lines)


def read_tmem(text: str) -> ProgramImage:
    base = 0
    words = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("base"):
            if words:
                raise AsmError("base must precede the first word", lineno)
            try:
                base = int(line.split()[1])
            except (IndexError, ValueError):
                raise AsmError(f"bad base line {raw.strip()!r}", lineno) from None
            continue
        try:
            words.append(Word9.parse(line))
        except ValueError as e:
            raise AsmError(str(e), lineno) from None
    try:
        return ProgramImage(words, base)
    except ValueError as e:
        raise AsmError(str(e)) from None
