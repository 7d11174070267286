"""RV-32I assembly front end and a small reference interpreter.

The interpreter exists only as a differential oracle for the transpiler.
It uses the same memory convention as the generated ternary code: memory
is word addressed, a register used as a base holds a word address, and
``lw``/``sw`` byte offsets must be multiples of 4 and are divided by 4.
Code addresses are instruction indices, so ``jal`` links ``pc + 1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

ABI_NAMES = ["zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1",
             "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7",
             "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11",
             "t3", "t4", "t5", "t6"]
REGISTERS = {name: i for i, name in enumerate(ABI_NAMES)}
REGISTERS.update({f"x{i}": i for i in range(32)})
REGISTERS["fp"] = 8

SUPPORTED = ("add", "sub", "and", "or", "xor", "addi", "andi", "xori",
             "slli", "srli", "lui", "li", "lw", "sw", "beq", "bne", "blt",
             "bge", "jal", "jalr")
BRANCHES = ("beq", "bne", "blt", "bge")
_IGNORED_DIRECTIVES = {".text", ".globl", ".global", ".align", ".p2align",
                       ".section", ".type", ".size", ".file", ".option",
                       ".attribute", ".ident", ".local"}


class RvError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class RvInstruction:
    mnemonic: str
    rd: int | None = None
    rs1: int | None = None
    rs2: int | None = None
    imm: int | None = None
    target: str | None = None
    labels: list[str] = field(default_factory=list)
    line: int | None = None

    @property
    def words(self) -> int:
        """32-bit words a binary assembler would emit for this instruction."""
        if self.mnemonic == "li" and not -2048 <= self.imm <= 2047:
            return 2
        return 1

    def reads(self) -> tuple[int, ...]:
        return tuple(r for r in (self.rs1, self.rs2) if r is not None)

    def __str__(self):
        m = self.mnemonic
        x = lambda r: f"x{r}"
        if m in ("add", "sub", "and", "or", "xor"):
            return f"{m} {x(self.rd)}, {x(self.rs1)}, {x(self.rs2)}"
        if m in ("addi", "andi", "xori", "slli", "srli"):
            return f"{m} {x(self.rd)}, {x(self.rs1)}, {self.imm}"
        if m in ("lui", "li"):
            return f"{m} {x(self.rd)}, {self.imm}"
        if m == "lw":
            return f"lw {x(self.rd)}, {self.imm}({x(self.rs1)})"
        if m == "sw":
            return f"sw {x(self.rs2)}, {self.imm}({x(self.rs1)})"
        if m in BRANCHES:
            return f"{m} {x(self.rs1)}, {x(self.rs2)}, {self.target}"
        if m == "jal":
            return f"jal {x(self.rd)}, {self.target}"
        return f"jalr {x(self.rd)}, {self.imm}({x(self.rs1)})"


_LABEL = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:")
_MEM = re.compile(r"^(-?\w*)\s*\(\s*(\w+)\s*\)$")
_TARGET = re.compile(r"^([A-Za-z_.$][\w.$]*|\.)$")


def _reg(tok: str, line: int) -> int:
    r = REGISTERS.get(tok.strip().lower())
    if r is None:
        raise RvError(f"unknown register {tok.strip()!r}", line)
    return r


def _imm(tok: str, line: int) -> int:
    try:
        return int(tok.strip(), 0)
    except ValueError:
        raise RvError(f"bad immediate {tok.strip()!r}", line) from None


def _mem(tok: str, line: int) -> tuple[int, int]:
    m = _MEM.match(tok.strip())
    if not m:
        raise RvError(f"expected offset(register), got {tok.strip()!r}", line)
    off = _imm(m.group(1), line) if m.group(1) else 0
    return off, _reg(m.group(2), line)


def _target(tok: str, line: int) -> str:
    tok = tok.strip()
    if not _TARGET.match(tok):
        raise RvError(f"bad branch target {tok!r}", line)
    return tok


def _check_range(v: int, lo: int, hi: int, what: str, line: int):
    if not lo <= v <= hi:
        raise RvError(f"{what} {v} outside [{lo}, {hi}]", line)


def _parse_one(m: str, ops: list[str], line: int) -> RvInstruction:
    def want(n):
        if len(ops) != n:
            raise RvError(f"{m} expects {n} operands, got {len(ops)}", line)

    R = lambda i: _reg(ops[i], line)
    if m in ("add", "sub", "and", "or", "xor"):
        want(3)
        return RvInstruction(m, rd=R(0), rs1=R(1), rs2=R(2))
    if m in ("addi", "andi", "xori"):
        want(3)
        imm = _imm(ops[2], line)
        _check_range(imm, -2048, 2047, "12-bit immediate", line)
        return RvInstruction(m, rd=R(0), rs1=R(1), imm=imm)
    if m in ("slli", "srli"):
        want(3)
        imm = _imm(ops[2], line)
        _check_range(imm, 0, 31, "shift amount", line)
        return RvInstruction(m, rd=R(0), rs1=R(1), imm=imm)
    if m == "lui":
        want(2)
        imm = _imm(ops[1], line)
        _check_range(imm, -(1 << 19), (1 << 20) - 1, "20-bit immediate", line)
        return RvInstruction(m, rd=R(0), imm=imm & 0xFFFFF)
    if m == "li":
        want(2)
        imm = _imm(ops[1], line)
        _check_range(imm, -(1 << 31), (1 << 32) - 1, "32-bit immediate", line)
        return RvInstruction(m, rd=R(0), imm=to_signed(imm))
    if m == "lw":
        want(2)
        off, base = _mem(ops[1], line)
        _check_range(off, -2048, 2047, "12-bit offset", line)
        return RvInstruction(m, rd=R(0), rs1=base, imm=off)
    if m == "sw":
        want(2)
        off, base = _mem(ops[1], line)
        _check_range(off, -2048, 2047, "12-bit offset", line)
        return RvInstruction(m, rs2=R(0), rs1=base, imm=off)
    if m in BRANCHES:
        want(3)
        return RvInstruction(m, rs1=R(0), rs2=R(1), target=_target(ops[2], line))
    if m in ("bgt", "ble"):
        want(3)
        real = "blt" if m == "bgt" else "bge"
        return RvInstruction(real, rs1=R(1), rs2=R(0), target=_target(ops[2], line))
    if m in ("beqz", "bnez"):
        want(2)
        return RvInstruction(m[:3], rs1=R(0), rs2=0, target=_target(ops[1], line))
    if m == "jal":
        if len(ops) == 1:
            return RvInstruction("jal", rd=1, target=_target(ops[0], line))
        want(2)
        return RvInstruction("jal", rd=R(0), target=_target(ops[1], line))
    if m == "jalr":
        if len(ops) == 1:
            return RvInstruction("jalr", rd=1, rs1=R(0), imm=0)
        if len(ops) == 2:
            off, base = _mem(ops[1], line)
            return RvInstruction("jalr", rd=R(0), rs1=base, imm=off)
        want(3)
        return RvInstruction("jalr", rd=R(0), rs1=R(1), imm=_imm(ops[2], line))
    if m == "mv":
        want(2)
        return RvInstruction("addi", rd=R(0), rs1=R(1), imm=0)
    if m == "nop":
        want(0)
        return RvInstruction("addi", rd=0, rs1=0, imm=0)
    if m == "j":
        want(1)
        return RvInstruction("jal", rd=0, target=_target(ops[0], line))
    if m == "call":
        want(1)
        return RvInstruction("jal", rd=1, target=_target(ops[0], line))
    if m == "ret":
        want(0)
        return RvInstruction("jalr", rd=0, rs1=1, imm=0)
    raise RvError(f"unsupported instruction {m!r}", line)


def parse_rv32i(source: str) -> list[RvInstruction]:
    """Parse the supported RV-32I subset. Labels attach to the next instruction."""
    out: list[RvInstruction] = []
    pending: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].split("//", 1)[0].strip()
        while True:
            m = _LABEL.match(line)
            if not m:
                break
            name = m.group(1)
            if name in seen:
                raise RvError(f"duplicate label {name!r}", lineno)
            seen.add(name)
            pending.append(name)
            line = line[m.end():].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        mnem = parts[0].lower()
        if mnem.startswith("."):
            if mnem in _IGNORED_DIRECTIVES:
                continue
            raise RvError(f"unsupported directive {mnem!r}", lineno)
        ops = [o.strip() for o in parts[1].split(",")] if len(parts) > 1 else []
        ins = _parse_one(mnem, ops, lineno)
        ins.line = lineno
        ins.labels, pending = pending, []
        out.append(ins)
    if pending:
        out.append(RvInstruction("addi", rd=0, rs1=0, imm=0, labels=pending))
    labels = {name for ins in out for name in ins.labels}
    for ins in out:
        if ins.target is not None and ins.target != "." and ins.target not in labels:
            raise RvError(f"undefined label {ins.target!r}", ins.line)
    return out


def to_signed(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v & 0x80000000 else v


class RvHalt(Exception):
    pass


class RvTimeout(RuntimeError):
    pass


@dataclass
class RvState:
    regs: list[int]
    mem: dict[int, int]
    pc: int = 0
    steps: int = 0
    halted: bool = False
    max_abs: int = 0          # largest magnitude written to a register or memory
    srl_negative: bool = False


def label_table(prog: list[RvInstruction]) -> dict[str, int]:
    return {name: i for i, ins in enumerate(prog) for name in ins.labels}


def run_rv(prog: list[RvInstruction], stack_top: int = 0, max_steps: int = 1_000_000) -> RvState:
    """Execute until a self-targeting jump/branch or the end of the program."""
    labels = label_table(prog)
    st = RvState([0] * 32, {})
    st.regs[2] = stack_top

    def write(rd, v):
        v = to_signed(v)
        if rd:
            st.regs[rd] = v
            st.max_abs = max(st.max_abs, abs(v))

    while 0 <= st.pc < len(prog):
        if st.steps >= max_steps:
            raise RvTimeout(f"no halt within {max_steps} steps")
        ins = prog[st.pc]
        x = st.regs
        m = ins.mnemonic
        nxt = st.pc + 1
        if m == "add":
            write(ins.rd, x[ins.rs1] + x[ins.rs2])
        elif m == "sub":
            write(ins.rd, x[ins.rs1] - x[ins.rs2])
        elif m == "and":
            write(ins.rd, x[ins.rs1] & x[ins.rs2])
        elif m == "or":
            write(ins.rd, x[ins.rs1] | x[ins.rs2])
        elif m == "xor":
            write(ins.rd, x[ins.rs1] ^ x[ins.rs2])
        elif m == "addi":
            write(ins.rd, x[ins.rs1] + ins.imm)
        elif m == "andi":
            write(ins.rd, x[ins.rs1] & ins.imm)
        elif m == "xori":
            write(ins.rd, x[ins.rs1] ^ ins.imm)
        elif m == "slli":
            write(ins.rd, x[ins.rs1] << ins.imm)
        elif m == "srli":
            if x[ins.rs1] < 0 and ins.imm:
                st.srl_negative = True
            write(ins.rd, (x[ins.rs1] & 0xFFFFFFFF) >> ins.imm)
        elif m == "lui":
            write(ins.rd, ins.imm << 12)
        elif m == "li":
            write(ins.rd, ins.imm)
        elif m == "lw":
            write(ins.rd, st.mem.get(x[ins.rs1] + ins.imm // 4, 0))
        elif m == "sw":
            v = x[ins.rs2]
            st.mem[x[ins.rs1] + ins.imm // 4] = v
            st.max_abs = max(st.max_abs, abs(v))
        elif m in BRANCHES:
            a, b = x[ins.rs1], x[ins.rs2]
            taken = {"beq": a == b, "bne": a != b, "blt": a < b, "bge": a >= b}[m]
            if taken:
                nxt = st.pc if ins.target == "." else labels[ins.target]
        elif m == "jal":
            nxt = st.pc if ins.target == "." else labels[ins.target]
            write(ins.rd, st.pc + 1)
        elif m == "jalr":
            nxt = x[ins.rs1] + ins.imm
            write(ins.rd, st.pc + 1)
        else:
            raise AssertionError(m)
        st.steps += 1
        if nxt == st.pc and m in BRANCHES + ("jal", "jalr"):
            st.halted = True
            return st
        st.pc = nxt
    st.halted = True
    return st
