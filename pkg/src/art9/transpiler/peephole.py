"""Redundancy elimination on symbolic ART-9 code."""
from __future__ import annotations

from .ir import Op, defs, uses

ALL = frozenset(range(9))
_IDEMPOTENT = ("MV", "LI", "LUI")
_IDENTITY = ("ADDI", "SRI", "SLI")
_PURE_DEST = ("MV", "PTI", "NTI", "STI", "LUI", "LOAD")   # write Ta without reading it
_R_SOURCES = ("MV", "PTI", "NTI", "STI", "AND", "OR", "XOR", "ADD", "SUB", "SR", "SL", "COMP")


def _successors(ops: list[Op], where: dict[str, int]):
    out = []
    for i, op in enumerate(ops):
        m = op.mnemonic
        if m == "JALR":
            out.append(None)                # anywhere: everything stays live
        elif op.target is not None:
            t = where[op.target]
            if t == i:
                out.append(None)            # halt: final state is observable
            elif m == "JAL":
                out.append([t])
            else:
                out.append([t] + ([i + 1] if i + 1 < len(ops) else []))
        else:
            out.append([i + 1] if i + 1 < len(ops) else None)
    return out


def liveness(ops: list[Op]) -> list[frozenset[int]]:
    """Registers live after each op."""
    where = {name: i for i, op in enumerate(ops) for name in op.labels}
    succ = _successors(ops, where)
    live_in = [frozenset()] * len(ops)
    live_out = [frozenset()] * len(ops)
    changed = True
    while changed:
        changed = False
        for i in range(len(ops) - 1, -1, -1):
            s = succ[i]
            out = ALL if s is None else frozenset().union(*(live_in[j] for j in s))
            inn = (out - defs(ops[i])) | uses(ops[i])
            if out != live_out[i] or inn != live_in[i]:
                live_out[i], live_in[i] = out, inn
                changed = True
    return live_out


def _one_pass(ops: list[Op]) -> list[Op] | None:
    """Apply the first matching rewrite; None when nothing applies."""
    for i, op in enumerate(ops):
        m = op.mnemonic
        last = i + 1 == len(ops)
        # (a) MV Ta, Ta   (c) shift/add by zero
        if not last and ((m == "MV" and op.ta == op.tb)
                         or (m in _IDENTITY and op.imm == 0 and op.target is None)):
            nxt = ops[i + 1].copy(labels=op.labels + ops[i + 1].labels)
            return ops[:i] + [nxt] + ops[i + 2:]
        if last:
            break
        nxt = ops[i + 1]
        # (b) duplicated idempotent op
        if m in _IDEMPOTENT and not nxt.labels and op.key() == nxt.key() and op.ta != op.tb:
            return ops[:i + 1] + ops[i + 2:]
        # (b') reload of the word just stored from the same register
        if (m == "STORE" and nxt.mnemonic == "LOAD" and not nxt.labels
                and (op.ta, op.tb, op.imm) == (nxt.ta, nxt.tb, nxt.imm)):
            return ops[:i + 1] + ops[i + 2:]
    live = None
    for i, op in enumerate(ops[:-1]):
        nxt = ops[i + 1]
        if nxt.labels or op.addr_of is not None:
            continue
        x = op.ta
        if op.mnemonic == "MV" and nxt.mnemonic in _R_SOURCES and nxt.tb == x and nxt.ta != x:
            # (d) MV x, y; OP z, x  ->  OP z, y
            merged = nxt.copy(tb=op.tb, labels=op.labels)
        elif op.mnemonic in _PURE_DEST and nxt.mnemonic == "MV" and nxt.tb == x and nxt.ta != x:
            # (d) P x, ...; MV z, x  ->  P z, ...
            merged = op.copy(ta=nxt.ta)
        else:
            continue
        if live is None:
            live = liveness(ops)
        if x in live[i + 1]:
            continue
        return ops[:i] + [merged] + ops[i + 2:]
    return None


def eliminate_redundancy(ops: list[Op]) -> tuple[list[Op], int]:
    """Run the rewrites to a fixpoint. Returns ``(ops, removed)``."""
    ops = [op.copy() for op in ops]
    n = len(ops)
    while True:
        out = _one_pass(ops)
        if out is None:
            return ops, n - len(ops)
        ops = out
