"""Runtime routines giving RV bitwise/shift semantics on ternary words.

Ternary AND/OR/XOR act per trit and have nothing to do with two's
complement bits, so ``and``/``or``/``xor``/``andi``/``xori``/``srli`` call
these subroutines instead of mapping to a single instruction.

Calling convention: arguments in TDM[sp-1], TDM[sp-2]; result in
TDM[sp-3]; return address in T8. Every other register is preserved. The
routines use sp-1 .. sp-13 as scratch.

Bits are peeled off by halving. For 0 <= v < 3**9, multiplying by the
inverse of 2 mod 3**9 (which is -9841) gives h; h >= 0 means v was even
and h = v/2, otherwise floor(v/2) = h + 9841. The multiply is
v * 9841 = v * (1+3)(1+9)(1+81)(1+6561), i.e. four shift-and-add steps.
"""
from __future__ import annotations

from .ir import SCRATCH, SP, ZERO, Op

A, B, RES, LINK = -1, -2, -3, -4
SAVE = {3: -5, 4: -6, 5: -7, 6: -8, 7: -9}
SIGN_A, SIGN_B, COUNT, BIT_A = -10, -11, -12, -13
BITS = 14  # magnitude bits needed for |v| <= 9841


def _halve(x: int, tmp: int, odd: list[Op], label: str) -> list[Op]:
    """x := floor(x/2) for 0 <= x; ``odd`` runs only when x was odd."""
    ops = []
    for shift in (1, 2, 4, 8):
        ops.append(Op("MV", ta=tmp, tb=x))
        for _ in range(shift // 4):
            ops.append(Op("SLI", ta=tmp, imm=4))
        if shift % 4:
            ops.append(Op("SLI", ta=tmp, imm=shift % 4))
        ops.append(Op("ADD", ta=x, tb=tmp))
    ops += [Op("STI", ta=x, tb=x),
            Op("MV", ta=tmp, tb=x),
            Op("COMP", ta=tmp, tb=ZERO),
            Op("BNE", ta=tmp, b=-1, target=label),
            Op("LUI", ta=tmp, imm=40),   # 9841 = LUI 40, LI 121
            Op("LI", ta=tmp, imm=121),
            Op("ADD", ta=x, tb=tmp)]
    ops += odd
    return ops


def _enter(name: str, regs) -> list[Op]:
    ops = [Op("STORE", ta=SCRATCH, tb=SP, imm=LINK, labels=[name])]
    ops += [Op("STORE", ta=r, tb=SP, imm=SAVE[r]) for r in regs]
    return ops


def _leave(result: int, regs) -> list[Op]:
    ops = [Op("STORE", ta=result, tb=SP, imm=RES)]
    ops += [Op("LOAD", ta=r, tb=SP, imm=SAVE[r]) for r in regs]
    ops += [Op("LOAD", ta=SCRATCH, tb=SP, imm=LINK),
            Op("JALR", ta=SCRATCH, tb=SCRATCH, imm=0)]
    return ops


def _attach(label: str, ops: list[Op]) -> list[Op]:
    ops[0].labels.insert(0, label)
    return ops


def srl() -> list[Op]:
    """floor(a / 2**b) for a >= 0."""
    n = "__rt_srl"
    regs = (3, 4, 5)
    ops = _enter(n, regs)
    ops += [Op("LOAD", ta=3, tb=SP, imm=A),
            Op("LOAD", ta=4, tb=SP, imm=B),
            Op("MV", ta=5, tb=4, labels=[n + "_loop"]),
            Op("COMP", ta=5, tb=ZERO),
            Op("BNE", ta=5, b=1, target=n + "_done")]
    ops += _halve(3, 5, [], n + "_even")
    ops += _attach(n + "_even", [Op("ADDI", ta=4, imm=-1),
                                 Op("BEQ", ta=ZERO, b=0, target=n + "_loop")])
    ops += _attach(n + "_done", _leave(3, regs))
    return ops


def _combine(kind: str, x: int, y: int, label: str) -> list[Op]:
    """x := x kind y for x, y in {0, 1}."""
    if kind == "and":
        return [Op("AND", ta=x, tb=y)]
    if kind == "or":
        return [Op("OR", ta=x, tb=y)]
    # 0+0, 0+1, 1+1 end in trits 0, +, - respectively
    return [Op("ADD", ta=x, tb=y),
            Op("BNE", ta=x, b=-1, target=label),
            Op("LUI", ta=x, imm=0)]


def _split_sign(n: str, reg: int, arg: int, slot: int, tag: str) -> list[Op]:
    """reg := a if a >= 0 else -a-1 (bitwise NOT); the sign bit goes to ``slot``."""
    pos = f"{n}_{tag}pos"
    return [Op("LOAD", ta=reg, tb=SP, imm=arg),
            Op("MV", ta=7, tb=reg),
            Op("COMP", ta=7, tb=ZERO),
            Op("LUI", ta=SCRATCH, imm=0),
            Op("BNE", ta=7, b=-1, target=pos),
            Op("STI", ta=reg, tb=reg),
            Op("ADDI", ta=reg, imm=-1),
            Op("ADDI", ta=SCRATCH, imm=1),
            Op("STORE", ta=SCRATCH, tb=SP, imm=slot, labels=[pos])]


def _bit(n: str, reg: int, sign_slot: int, tag: str):
    """Next bit of the two's complement operand into T8; reg is halved."""
    even, keep = f"{n}_{tag}even", f"{n}_{tag}keep"
    ops = [Op("LUI", ta=SCRATCH, imm=0)]
    ops += _halve(reg, 7, [Op("ADDI", ta=SCRATCH, imm=1)], even)
    ops += _attach(even, [Op("LOAD", ta=7, tb=SP, imm=sign_slot),
                          Op("BEQ", ta=7, b=0, target=keep),
                          Op("STI", ta=SCRATCH, tb=SCRATCH),
                          Op("ADDI", ta=SCRATCH, imm=1)])
    return ops, keep


def bitop(kind: str):
    def build() -> list[Op]:
        n = f"__rt_{kind}"
        regs = (3, 4, 5, 6, 7)
        ops = _enter(n, regs)
        ops += _split_sign(n, 3, A, SIGN_A, "a")
        ops += _split_sign(n, 4, B, SIGN_B, "b")
        ops += [Op("LUI", ta=5, imm=0),
                Op("LUI", ta=6, imm=0),
                Op("ADDI", ta=6, imm=1),
                Op("LUI", ta=7, imm=0),
                Op("LI", ta=7, imm=BITS),
                Op("STORE", ta=7, tb=SP, imm=COUNT)]
        body, keep = _bit(n, 3, SIGN_A, "a")
        body[0].labels.append(n + "_loop")
        ops += body
        ops += _attach(keep, [Op("STORE", ta=SCRATCH, tb=SP, imm=BIT_A)])
        body, keep = _bit(n, 4, SIGN_B, "b")
        ops += body
        ops += _attach(keep, [Op("LOAD", ta=7, tb=SP, imm=BIT_A)])
        ops += _combine(kind, SCRATCH, 7, n + "_bit")
        ops += _attach(n + "_bit", [Op("BEQ", ta=SCRATCH, b=0, target=n + "_zero"),
                                    Op("ADD", ta=5, tb=6)])
        ops += _attach(n + "_zero", [Op("ADD", ta=6, tb=6),
                                     Op("LOAD", ta=7, tb=SP, imm=COUNT),
                                     Op("ADDI", ta=7, imm=-1),
                                     Op("STORE", ta=7, tb=SP, imm=COUNT),
                                     Op("COMP", ta=7, tb=ZERO),
                                     Op("BNE", ta=7, b=0, target=n + "_loop")])
        # sign bit, weight -2**14
        ops += [Op("LOAD", ta=SCRATCH, tb=SP, imm=SIGN_A),
                Op("LOAD", ta=7, tb=SP, imm=SIGN_B)]
        ops += _combine(kind, SCRATCH, 7, n + "_sbit")
        ops += _attach(n + "_sbit", [Op("BEQ", ta=SCRATCH, b=0, target=n + "_out"),
                                     Op("SUB", ta=5, tb=6)])
        ops += _attach(n + "_out", _leave(5, regs))
        return ops
    return build


HELPERS = {
    "__rt_and": bitop("and"),
    "__rt_or": bitop("or"),
    "__rt_xor": bitop("xor"),
    "__rt_srl": srl,
}
