"""Final layout: branch offsets, trampolines and assembly text."""
from __future__ import annotations

from ..isa import Instruction, format_instruction, imm_range
from ..ternary import MODULUS
from .ir import SCRATCH, Op, address_value, split_constant

_B_RANGE = imm_range("BEQ")[1]     # 40
_J_RANGE = imm_range("JAL")[1]     # 121


class LayoutError(ValueError):
    pass


def _size(op: Op, form: str) -> int:
    if op.target is None:
        return 1
    if op.mnemonic in ("BEQ", "BNE"):
        return {"near": 1, "tramp": 2, "far": 4}[form]
    return {"near": 1, "far": 3}[form]


def _positions(ops, forms):
    pos, where, n = [], {}, 0
    for op, form in zip(ops, forms):
        pos.append(n)
        for name in op.labels:
            where[name] = n
        n += _size(op, form)
    return pos, where, n


def retarget_branches(ops: list[Op]) -> list[tuple[Instruction, str | None, list[str]]]:
    """Lay out ``ops`` with every transfer immediate in range.

    Out-of-range conditional branches become an inverted branch over a JAL
    (or over a LUI/LI/JALR absolute jump); out-of-range JALs become
    LUI/LI into T8 plus JALR. Forms only ever grow, so the iteration ends.
    Returns ``(instruction, target label or None, labels)`` triples.
    """
    forms = ["near"] * len(ops)
    while True:
        pos, where, total = _positions(ops, forms)
        changed = False
        for i, op in enumerate(ops):
            if op.target is None:
                continue
            if op.target not in where:
                raise LayoutError(f"undefined label {op.target!r}")
            form = forms[i]
            if op.mnemonic in ("BEQ", "BNE"):
                if form == "near" and abs(where[op.target] - pos[i]) > _B_RANGE:
                    forms[i] = "tramp"
                    changed = True
                elif form == "tramp" and abs(where[op.target] - (pos[i] + 1)) > _J_RANGE:
                    forms[i] = "far"
                    changed = True
            elif form == "near" and abs(where[op.target] - pos[i]) > _J_RANGE:
                forms[i] = "far"
                changed = True
        if not changed:
            break
    if total > MODULUS:
        raise LayoutError(f"program of {total} words exceeds instruction memory")

    out = []
    for i, op in enumerate(ops):
        p, form = pos[i], forms[i]
        labels = list(op.labels)
        if op.addr_of is not None:
            hi, lo = split_constant(address_value(where[op.addr_of]))
            out.append((op.instruction(hi if op.mnemonic == "LUI" else lo), None, labels))
            continue
        if op.target is None:
            out.append((op.instruction(), None, labels))
            continue
        t = where[op.target]
        m = op.mnemonic
        if form == "near":
            out.append((op.instruction(t - p), op.target, labels))
            continue
        hi, lo = split_constant(address_value(t))
        far = [Instruction("LUI", ta=SCRATCH, imm=hi), Instruction("LI", ta=SCRATCH, imm=lo)]
        if m == "JAL":
            seq = far + [Instruction("JALR", ta=op.ta, tb=SCRATCH, imm=0)]
            out.append((seq[0], None, labels))
            out.extend((ins, None, []) for ins in seq[1:])
            continue
        inverse = "BNE" if m == "BEQ" else "BEQ"
        skip = 2 if form == "tramp" else 4
        out.append((Instruction(inverse, ta=op.ta, b=op.b, imm=skip), None, labels))
        if form == "tramp":
            out.append((Instruction("JAL", ta=SCRATCH, imm=t - (p + 1)), op.target, []))
        else:
            out.extend((ins, None, []) for ins in far)
            out.append((Instruction("JALR", ta=SCRATCH, tb=SCRATCH, imm=0), None, []))
    return out


def emit_assembly(laid_out) -> str:
    lines = []
    for ins, target, labels in laid_out:
        for name in labels:
            lines.append(f"{name}:")
        text = format_instruction(ins)
        if target is not None:
            text = text[: text.rindex(",") + 2] + target
        lines.append("    " + text)
    return "\n".join(lines) + "\n"
