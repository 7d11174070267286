"""Register allocation and RV-32I to ART-9 instruction mapping."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..isa import imm_range
from ..ternary import MAX_VALUE
from .ir import RA, SCRATCH, SP, SPILL_BASE, STAGE2, ZERO, Op, split_constant
from .rv import RvInstruction, label_table, to_signed
from .runtime import HELPERS


class TranspileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


PINNED = {0: ZERO, 1: RA, 2: SP}
SPILL_SLOTS = 27   # offsets +13 .. -13 from the spill base register
SPILL_TOP = MAX_VALUE  # slot 0; slot k sits k words below (unsigned 19682 - k by default)


@dataclass
class RegMap:
    regs: dict[int, int] = field(default_factory=dict)     # RV register -> T register
    spills: dict[int, int] = field(default_factory=dict)   # RV register -> slot index
    spill_top: int = SPILL_TOP

    @property
    def spill_base(self) -> int:
        """Value held by the spill base register."""
        return self.spill_top - 13

    @property
    def spill_mode(self) -> bool:
        return bool(self.spills)

    def offset(self, r: int) -> int:
        return 13 - self.spills[r]

    def slot_address(self, r: int) -> int:
        """Unsigned TDM index of a spilled register."""
        return self.spill_top - self.spills[r] + MAX_VALUE

    def describe(self) -> dict[int, str]:
        out = {r: f"T{t}" for r, t in self.regs.items()}
        out.update({r: f"slot{k}" for r, k in self.spills.items()})
        return dict(sorted(out.items()))


def allocate_registers(prog: list[RvInstruction], spill_top: int = SPILL_TOP) -> RegMap:
    """x0/ra/sp are pinned to T0/T1/T2; the rest go to T3-T7 by use count.

    When more than five other registers appear, T6 and T7 are taken for
    spill staging and the spill-slot base, leaving T3-T5 allocatable.
    """
    counts: Counter[int] = Counter()
    for ins in prog:
        for r in (ins.rd, ins.rs1, ins.rs2):
            if r is not None:
                counts[r] += 1
    if not -MAX_VALUE + SPILL_SLOTS <= spill_top <= MAX_VALUE:
        raise TranspileError(f"spill top {spill_top} leaves no room for {SPILL_SLOTS} slots")
    rm = RegMap(regs=dict(PINNED), spill_top=spill_top)
    others = sorted((r for r in counts if r not in PINNED), key=lambda r: (-counts[r], r))
    free = [3, 4, 5, 6, 7] if len(others) <= 5 else [3, 4, 5]
    for r in others:
        if free:
            rm.regs[r] = free.pop(0)
        else:
            rm.spills[r] = len(rm.spills)
    if len(rm.spills) > SPILL_SLOTS:
        raise TranspileError(f"{len(rm.spills)} spilled registers exceed {SPILL_SLOTS} slots")
    return rm


def materialize_constant(v: int, dest: int) -> list[Op]:
    """LUI/LI pair leaving ``v`` in ``dest`` whatever it held before."""
    try:
        hi, lo = split_constant(v)
    except ValueError as e:
        raise TranspileError(str(e)) from None
    return [Op("LUI", ta=dest, imm=hi), Op("LI", ta=dest, imm=lo)]


def _fits(m: str, v: int) -> bool:
    lo, hi = imm_range(m)
    return lo <= v <= hi


class Lowerer:
    """Maps one RV instruction at a time, appending to ``self.ops``."""

    def __init__(self, prog: list[RvInstruction], regmap: RegMap):
        self.prog = prog
        self.rm = regmap
        self.labels = label_table(prog)
        self.ops: list[Op] = []
        self.pending: list[str] = []
        self.helpers: set[str] = set()
        self._n = 0

    def fresh(self, stem: str = "L") -> str:
        self._n += 1
        return f"__{stem}{self._n}"

    def emit(self, op: Op) -> Op:
        op.labels = self.pending + op.labels
        self.pending = []
        self.ops.append(op)
        return op

    def emit_all(self, ops):
        for op in ops:
            self.emit(op)

    # operand access
    def src(self, r: int, stage: int) -> int:
        if r in self.rm.regs:
            return self.rm.regs[r]
        self.emit(Op("LOAD", ta=stage, tb=SPILL_BASE, imm=self.rm.offset(r)))
        return stage

    def dst(self, r: int) -> int:
        return self.rm.regs.get(r, SCRATCH)

    def writeback(self, r: int, reg: int):
        if r in self.rm.spills:
            self.emit(Op("STORE", ta=reg, tb=SPILL_BASE, imm=self.rm.offset(r)))

    def move(self, d: int, s: int):
        if d != s:
            self.emit(Op("MV", ta=d, tb=s))

    def const(self, v: int, dest: int, line=None):
        if not -MAX_VALUE <= v <= MAX_VALUE:
            raise TranspileError(f"constant {v} outside the 9-trit range ±{MAX_VALUE}", line)
        self.emit_all(materialize_constant(v, dest))

    def target(self, ins: RvInstruction, index: int) -> tuple[str, bool]:
        """Label for a transfer; the flag marks a self-target (halt)."""
        if ins.target == "." or self.labels.get(ins.target) == index:
            return self.fresh("self"), True
        return ins.target, False

    def transfer(self, op: Op, ins: RvInstruction, index: int):
        label, self_target = self.target(ins, index)
        op.target = label
        if self_target:
            op.labels.append(label)
        self.emit(op)

    # mapping
    def lower(self, index: int, ins: RvInstruction):
        self.pending.extend(ins.labels)
        getattr(self, "_" + ins.mnemonic)(ins, index)

    def _add(self, ins, index):
        self._rr(ins, "ADD")

    def _sub(self, ins, index):
        self._rr(ins, "SUB")

    def _rr(self, ins, m):
        if ins.rd == 0:
            return
        s1 = self.src(ins.rs1, SCRATCH)
        s2 = self.src(ins.rs2, STAGE2)
        if ins.rd in self.rm.spills:
            self.move(SCRATCH, s1)
            self.emit(Op(m, ta=SCRATCH, tb=s2))
            self.writeback(ins.rd, SCRATCH)
            return
        d = self.rm.regs[ins.rd]
        if s1 == d:
            self.emit(Op(m, ta=d, tb=s2))
        elif s2 == d:
            if m == "SUB":
                self.emit(Op("STI", ta=d, tb=d))
            self.emit(Op("ADD", ta=d, tb=s1))
        else:
            self.emit(Op("MV", ta=d, tb=s1))
            self.emit(Op(m, ta=d, tb=s2))

    def _addi(self, ins, index):
        if ins.rd == 0:
            return
        if ins.rs1 == 0:
            self._li(RvInstruction("li", rd=ins.rd, imm=ins.imm, line=ins.line), index)
            return
        s1 = self.src(ins.rs1, SCRATCH)
        w = self.dst(ins.rd)
        self.move(w, s1)
        if ins.imm and _fits("ADDI", ins.imm):
            self.emit(Op("ADDI", ta=w, imm=ins.imm))
        elif ins.imm:
            c = STAGE2 if w == SCRATCH else SCRATCH
            self.const(ins.imm, c, ins.line)
            self.emit(Op("ADD", ta=w, tb=c))
        self.writeback(ins.rd, w)

    def _li(self, ins, index):
        if ins.rd == 0:
            return
        w = self.dst(ins.rd)
        self.const(ins.imm, w, ins.line)
        self.writeback(ins.rd, w)

    def _lui(self, ins, index):
        v = to_signed(ins.imm << 12)
        if not -MAX_VALUE <= v <= MAX_VALUE:
            raise TranspileError(f"lui value {v} outside the 9-trit range ±{MAX_VALUE}", ins.line)
        self._li(RvInstruction("li", rd=ins.rd, imm=v, line=ins.line), index)

    def _slli(self, ins, index):
        if ins.rd == 0:
            return
        s1 = self.src(ins.rs1, SCRATCH)
        w = self.dst(ins.rd)
        self.move(w, s1)
        for _ in range(ins.imm):
            self.emit(Op("ADD", ta=w, tb=w))
        self.writeback(ins.rd, w)

    def _helper(self, ins, name, second):
        """Binary-semantics operation through a runtime routine.

        Arguments go to sp-1 and sp-2, the result comes back in sp-3.
        """
        if ins.rd == 0:
            return
        s1 = self.src(ins.rs1, SCRATCH)
        self.emit(Op("STORE", ta=s1, tb=SP, imm=-1))
        if ins.rs2 is None:
            self.const(second, SCRATCH, ins.line)
            s2 = SCRATCH
        else:
            s2 = self.src(ins.rs2, SCRATCH)
        self.emit(Op("STORE", ta=s2, tb=SP, imm=-2))
        self.helpers.add(name)
        self.emit(Op("JAL", ta=SCRATCH, target=name))
        w = self.dst(ins.rd)
        self.emit(Op("LOAD", ta=w, tb=SP, imm=-3))
        self.writeback(ins.rd, w)

    def _and(self, ins, index):
        self._helper(ins, "__rt_and", None)

    def _or(self, ins, index):
        self._helper(ins, "__rt_or", None)

    def _xor(self, ins, index):
        self._helper(ins, "__rt_xor", None)

    def _andi(self, ins, index):
        self._helper(ins, "__rt_and", ins.imm)

    def _xori(self, ins, index):
        self._helper(ins, "__rt_xor", ins.imm)

    def _srli(self, ins, index):
        if ins.imm == 0:
            self._addi(RvInstruction("addi", rd=ins.rd, rs1=ins.rs1, imm=0), index)
        else:
            self._helper(ins, "__rt_srl", ins.imm)

    def _word_offset(self, ins) -> int:
        if ins.imm % 4:
            raise TranspileError(f"offset {ins.imm} is not a multiple of 4", ins.line)
        return ins.imm // 4

    def _lw(self, ins, index):
        k = self._word_offset(ins)
        if ins.rd == 0:
            return
        base = self.src(ins.rs1, SCRATCH)
        w = self.dst(ins.rd)
        if _fits("LOAD", k):
            self.emit(Op("LOAD", ta=w, tb=base, imm=k))
        else:
            c = STAGE2 if base == SCRATCH else SCRATCH
            self.const(k, c, ins.line)
            self.emit(Op("ADD", ta=c, tb=base))
            self.emit(Op("LOAD", ta=w, tb=c, imm=0))
        self.writeback(ins.rd, w)

    def _sw(self, ins, index):
        k = self._word_offset(ins)
        base = self.src(ins.rs1, STAGE2)
        if _fits("STORE", k):
            v = self.src(ins.rs2, SCRATCH)
            self.emit(Op("STORE", ta=v, tb=base, imm=k))
        else:
            self.const(k, SCRATCH, ins.line)
            self.emit(Op("ADD", ta=SCRATCH, tb=base))
            v = self.src(ins.rs2, STAGE2)
            self.emit(Op("STORE", ta=v, tb=SCRATCH, imm=0))

    def _branch(self, ins, index):
        s1 = self.src(ins.rs1, SCRATCH)
        s2 = self.src(ins.rs2, STAGE2)
        self.move(SCRATCH, s1)
        self.emit(Op("COMP", ta=SCRATCH, tb=s2))
        m, b = {"beq": ("BEQ", 0), "bne": ("BNE", 0),
                "blt": ("BEQ", -1), "bge": ("BNE", -1)}[ins.mnemonic]
        self.transfer(Op(m, ta=SCRATCH, b=b), ins, index)

    _beq = _bne = _blt = _bge = _branch

    def link(self, rd: int) -> int:
        """Link register for a transfer; x0 links into the scratch register."""
        return SCRATCH if rd == 0 else self.rm.regs.get(rd, SCRATCH)

    def _link_spilled(self, ins, reg):
        ret = self.fresh("ret")
        self.emit(Op("LUI", ta=reg, addr_of=ret))
        self.emit(Op("LI", ta=reg, addr_of=ret))
        self.writeback(ins.rd, reg)
        return ret

    def _jal(self, ins, index):
        ret = None
        if ins.rd in self.rm.spills:
            ret = self._link_spilled(ins, SCRATCH)
        self.transfer(Op("JAL", ta=self.link(ins.rd)), ins, index)
        if ret:
            self.pending.append(ret)

    def _jalr(self, ins, index):
        if ins.imm != 0:
            raise TranspileError("jalr with a nonzero offset is not supported", ins.line)
        base = self.src(ins.rs1, SCRATCH)
        if ins.rd in self.rm.spills:
            ret = self._link_spilled(ins, STAGE2)
            self.emit(Op("JALR", ta=STAGE2, tb=base, imm=0))
            self.pending.append(ret)
        else:
            self.emit(Op("JALR", ta=self.link(ins.rd), tb=base, imm=0))


def prologue(regmap: RegMap, stack_top: int) -> list[Op]:
    ops = [Op("LUI", ta=ZERO, imm=0)]
    ops += materialize_constant(stack_top, SP)
    if regmap.spill_mode:
        ops += materialize_constant(regmap.spill_base, SPILL_BASE)
    return ops


def map_instruction(ins: RvInstruction, regmap: RegMap) -> list[Op]:
    """ART-9 sequence for one RV instruction (labels and helpers not attached)."""
    low = Lowerer([ins], regmap)
    low.lower(0, ins)
    return low.ops


def lower_program(prog: list[RvInstruction], regmap: RegMap, stack_top: int) -> list[Op]:
    low = Lowerer(prog, regmap)
    low.emit_all(prologue(regmap, stack_top))
    for i, ins in enumerate(prog):
        low.lower(i, ins)
    halt = low.fresh("halt")
    low.emit(Op("JAL", ta=SCRATCH, target=halt, labels=[halt]))
    for name in sorted(low.helpers):
        low.emit_all(HELPERS[name]())
    return low.ops
