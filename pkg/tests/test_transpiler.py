import random
from importlib import resources

import pytest

from art9.asm import assemble_program
from art9.isa import Instruction
from art9.sim import new_state, run_functional
from art9.transpiler import (RvError, TranspileError, allocate_registers,
                             eliminate_redundancy, map_instruction, materialize_constant,
                             parse_rv32i, retarget_branches, run_rv, transpile,
                             transpile_unit)
from art9.transpiler.ir import Op
from art9.transpiler.layout import emit_assembly
from art9.transpiler.rv import RvInstruction

from programs import differential, rv_source, rv_straight_line

BENCH = resources.files("art9") / "data" / "benchmarks"


def fixture(name):
    return (BENCH / f"{name}.s").read_text()


def text(ops):
    return [str(op) for op in ops]


# parsing

def test_parse_examples():
    (ins,) = parse_rv32i("addi x5, x0, 7")
    assert (ins.mnemonic, ins.rd, ins.rs1, ins.imm) == ("addi", 5, 0, 7)
    (ins,) = parse_rv32i("loop: bne x5, x0, loop")
    assert ins.labels == ["loop"] and ins.target == "loop"


@pytest.mark.parametrize("src", [
    "mul x5, x6, x7", "csrrw x1, mstatus, x2", "lb x5, 0(x6)", "bltu x1, x2, l",
    "ecall", "auipc x5, 1", "sh x5, 0(x6)",
])
def test_unsupported(src):
    with pytest.raises(RvError, match="unsupported"):
        parse_rv32i(src + "\nl: nop")


def test_parse_pseudos_abi_names_and_directives():
    src = """
        .text
        .globl main
    main:   li   a0, -5000     # comment
            mv   s1, a0
            j    end
            call fn
            beqz t0, end
            bgt  a0, a1, end
    fn:     ret
    end:    nop
    """
    prog = parse_rv32i(src)
    assert [i.mnemonic for i in prog] == ["li", "addi", "jal", "jal", "beq", "blt", "jalr", "addi"]
    assert prog[0].rd == 10 and prog[0].words == 2
    assert prog[1].rd == 9 and prog[1].imm == 0
    assert prog[2].rd == 0 and prog[3].rd == 1
    assert (prog[5].rs1, prog[5].rs2) == (11, 10)
    assert (prog[6].rd, prog[6].rs1) == (0, 1)


@pytest.mark.parametrize("src,msg", [
    ("addi x5, x0, 5000", "12-bit"),
    ("slli x5, x5, 40", "shift amount"),
    ("add x5, x6", "expects 3"),
    ("add x5, x6, q7", "unknown register"),
    ("beq x5, x6, nowhere", "undefined label"),
    ("a: nop\na: nop", "duplicate label"),
    ("lw x5, x6", "offset"),
    (".data", "directive"),
])
def test_parse_errors(src, msg):
    with pytest.raises(RvError, match=msg):
        parse_rv32i(src)


def test_trailing_label_reaches_halt():
    prog = parse_rv32i("j out\naddi x5, x0, 1\nout:")
    assert prog[-1].labels == ["out"]
    unit, state, rv, bad = differential("j out\naddi x5, x0, 1\nout:")
    assert not bad and state.halted


# mapping, constants, allocation

def regmap_for(src):
    return allocate_registers(parse_rv32i(src))


def test_allocation():
    rm = regmap_for("add x5, x6, x0")
    assert rm.regs[0] == 0 and rm.regs[5] == 3 and rm.regs[6] == 4 and not rm.spills
    rm = regmap_for("add x6, x6, x6\nadd x5, x0, x0")
    assert rm.regs[6] == 3 and rm.regs[5] == 4
    many = "\n".join(f"addi x{r}, x0, 1" for r in range(5, 14))
    rm = regmap_for(many)
    assert len(rm.spills) >= 4 and all(t in (3, 4, 5) for r, t in rm.regs.items() if r > 2)
    assert sorted(rm.slot_address(r) for r in rm.spills)[-1] == 19682


def test_map_examples():
    rm = regmap_for("add x5, x5, x7\nadd x5, x6, x7")
    t5, t6, t7 = rm.regs[5], rm.regs[6], rm.regs[7]
    assert text(map_instruction(RvInstruction("add", rd=5, rs1=5, rs2=7), rm)) == [f"ADD T{t5}, T{t7}"]
    assert text(map_instruction(RvInstruction("add", rd=5, rs1=6, rs2=7), rm)) == [
        f"MV T{t5}, T{t6}", f"ADD T{t5}, T{t7}"]
    assert text(map_instruction(RvInstruction("add", rd=7, rs1=6, rs2=7), rm)) == [f"ADD T{t7}, T{t6}"]
    assert text(map_instruction(RvInstruction("blt", rs1=5, rs2=6, target="L"), rm)) == [
        f"MV T8, T{t5}", f"COMP T8, T{t6}", "BEQ T8, -, L"]
    assert text(map_instruction(RvInstruction("bge", rs1=5, rs2=6, target="L"), rm))[-1] == "BNE T8, -, L"
    assert text(map_instruction(RvInstruction("lw", rd=5, rs1=6, imm=8), rm)) == [f"LOAD T{t5}, T{t6}, 2"]
    big = text(map_instruction(RvInstruction("sw", rs2=5, rs1=6, imm=400), rm))
    assert big == ["LUI T8, 0", "LI T8, 100", f"ADD T8, T{t6}", f"STORE T{t5}, T8, 0"]


def test_materialize_examples():
    assert text(materialize_constant(100, 3)) == ["LUI T3, 0", "LI T3, 100"]
    assert text(materialize_constant(1000, 3)) == ["LUI T3, 4", "LI T3, 28"]
    assert text(materialize_constant(0, 3)) == ["LUI T3, 0", "LI T3, 0"]
    with pytest.raises(TranspileError):
        materialize_constant(9842, 3)
    for v in (-9841, -122, -121, 121, 122, 9841):
        image = assemble_program("\n".join(text(materialize_constant(v, 5))) + "\nHALT")
        state, _ = run_functional(new_state(image))
        assert state.trf[5].value == v


# peephole

def test_peephole_examples():
    ops, removed = eliminate_redundancy([Op("MV", ta=3, tb=4), Op("MV", ta=3, tb=4),
                                         Op("JAL", ta=8, target="h", labels=["h"])])
    assert text(ops)[:1] == ["MV T3, T4"] and removed == 1
    ops, removed = eliminate_redundancy([Op("ADDI", ta=3, imm=0, labels=["x"]),
                                         Op("JAL", ta=8, target="h", labels=["h"])])
    assert removed == 1 and ops[0].labels == ["x", "h"]
    keep = [Op("MV", ta=3, tb=4), Op("ADD", ta=3, tb=5), Op("JAL", ta=8, target="h", labels=["h"])]
    assert eliminate_redundancy(keep) == (keep, 0)


def test_peephole_respects_liveness():
    halt = Op("JAL", ta=8, target="h", labels=["h"])
    # T8 dead after the ADD: the copy folds into the consumer
    ops, removed = eliminate_redundancy([Op("MV", ta=8, tb=4), Op("ADD", ta=3, tb=8),
                                         Op("LUI", ta=8, imm=0), halt])
    assert removed == 1 and text(ops)[0] == "ADD T3, T4"
    # T8 read later: keep it
    ops, removed = eliminate_redundancy([Op("MV", ta=8, tb=4), Op("ADD", ta=3, tb=8),
                                         Op("ADD", ta=5, tb=8), halt])
    assert removed == 0


def test_peephole_keeps_labelled_duplicate():
    ops = [Op("LI", ta=3, imm=5), Op("LI", ta=3, imm=5, labels=["t"]),
           Op("JAL", ta=8, target="h", labels=["h"])]
    assert eliminate_redundancy(ops)[1] == 0


# retargeting

def laid_text(ops):
    return emit_assembly(retarget_branches(ops))


def test_retarget_offsets_follow_removal():
    ops = [Op("BEQ", ta=3, b=0, target="t"), Op("ADDI", ta=3, imm=0),
           Op("ADD", ta=3, tb=4, labels=["t"]), Op("JAL", ta=8, target="h", labels=["h"])]
    assert retarget_branches(ops)[0][0].imm == 2
    ops, _ = eliminate_redundancy(ops)
    assert retarget_branches(ops)[0][0].imm == 1


def test_retarget_trampolines():
    filler = [Op("ADDI", ta=3, imm=1) for _ in range(59)]
    ops = [Op("BEQ", ta=3, b=1, target="t")] + filler + [
        Op("ADDI", ta=4, imm=1, labels=["t"]), Op("JAL", ta=8, target="h", labels=["h"])]
    laid = retarget_branches(ops)
    assert str(laid[0][0]) == "BNE T3, +, 2"
    assert laid[1][0].mnemonic == "JAL" and laid[1][0].imm == 60
    assemble_program(emit_assembly(laid))

    far = [Op("JAL", ta=1, target="t")] + [Op("ADDI", ta=3, imm=1) for _ in range(9000)] + [
        Op("JAL", ta=8, target="t", labels=["t"])]
    laid = retarget_branches(far)
    assert [i.mnemonic for i, _, _ in laid[:3]] == ["LUI", "LI", "JALR"]
    image = assemble_program(emit_assembly(laid))
    state, _ = run_functional(new_state(image))
    assert state.pc.unsigned == 9003 and state.trf[1].unsigned == 3


def test_far_conditional_branch_runs():
    body = "\n".join("addi x6, x6, 1" for _ in range(150))
    src = f"li x5, 1\nbne x5, x0, skip\n{body}\nskip: addi x7, x0, 3\n"
    unit, state, rv, bad = differential(src)
    assert not bad and rv.regs[6] == 0 and rv.regs[7] == 3
    assert "BEQ T8, 0, 4\n    LUI T8, -40\n    LI T8, 40\n    JALR T8, T8, 0" in unit.text


# whole programs

def test_transpile_examples():
    unit, state, rv, bad = differential("addi x5,x0,7\nsw x5,0(x2)\nj .")
    assert not bad and list(rv.mem.values()) == [7]
    asm, stats = transpile("")
    assert [line.strip() for line in asm.splitlines() if not line.endswith(":")] == [
        "LUI T0, 0", "LUI T2, 40", "LI T2, -20", "JAL T8, __halt1"]
    assert stats.rv_instructions == 0 and stats.memory_cells == 9 * stats.instructions
    with pytest.raises(TranspileError, match="range"):
        transpile("li x5, 1000000")
    with pytest.raises(TranspileError, match="range"):
        transpile("lui x5, 3")
    with pytest.raises(TranspileError, match="multiple of 4"):
        transpile("lw x5, 2(x2)")
    with pytest.raises(TranspileError, match="jalr"):
        transpile("jalr x1, 4(x5)")


def test_stack_top_and_spill_options():
    src = "\n".join(f"addi x{r}, x0, {r}" for r in range(5, 15)) + "\nsw x14, 0(x2)"
    unit = transpile_unit(src, stack_top=-500, spill_top=9000)
    state, _ = run_functional(new_state(unit.image()))
    assert state.trf[2].value == -500
    assert state.tdm[-500 + 9841].value == 14
    assert {unit.regmap.slot_address(r) for r in unit.regmap.spills} <= set(range(9000 - 26 + 9841, 9000 + 9842))
    with pytest.raises(TranspileError):
        transpile_unit(src, stack_top=20000)


BITWISE_VALUES = [0, 1, 2, 5, 6, 100, 4095, 8191, -1, -2, -7, -100, -4096, -8192, 9841, -9841]


@pytest.mark.parametrize("op", ["and", "or", "xor"])
def test_bitwise_helpers(op):
    lines, checks = [], []
    for i, a in enumerate(BITWISE_VALUES):
        for b in BITWISE_VALUES[i::3]:
            expect = {"and": a & b, "or": a | b, "xor": a ^ b}[op]
            if abs(expect) > 9841:
                continue
            k = len(checks)
            lines += [f"li x5, {a}", f"li x6, {b}", f"{op} x7, x5, x6", f"sw x7, {4 * k}(x2)"]
            checks.append(expect)
    unit, state, rv, bad = differential("\n".join(lines))
    assert not bad
    assert [rv.mem[unit.stack_top + k] for k in range(len(checks))] == checks


def test_immediate_bitwise_and_srli():
    src = """
        li x5, -1234
        andi x6, x5, 255
        xori x7, x5, -1
        li x8, 9841
        srli x9, x8, 5
        srli x10, x8, 0
        slli x11, x9, 3
    """
    unit, state, rv, bad = differential(src)
    assert not bad
    assert rv.regs[6:12] == [-1234 & 255, -1234 ^ -1, 9841, 9841 >> 5, 9841, (9841 >> 5) << 3]


def test_calls_with_spilled_link():
    decls = "\n".join(f"li x{r}, {r}" for r in range(5, 14))
    src = f"""
        {decls}
        jal  x13, leaf        # link register is spilled
        addi x5, x5, 100
        jal  x1, leaf2
        j    .
    leaf:
        addi x6, x6, 1
        jalr x12, 0(x13)      # return; x12 (spilled) receives a link too
    leaf2:
        addi x7, x7, 1
        ret
    """
    unit, state, rv, bad = differential(src, registers=[5, 6, 7, 8, 9, 10, 11])
    assert unit.regmap.spill_mode and 13 in unit.regmap.spills
    assert not bad and rv.regs[5:8] == [105, 7, 8]


def test_x0_is_never_written():
    unit, state, rv, bad = differential("addi x0, x0, 5\nadd x0, x5, x5\nlw x0, 0(x2)\nj l\nl: addi x5, x0, 1")
    assert not bad and state.trf[0].value == 0 and rv.regs[5] == 1


@pytest.mark.parametrize("name", ["bubble_sort", "gemm4x4", "sobel8x8"])
def test_fixture_peephole_ab(name):
    on, _, rv, bad_on = differential(fixture(name), peephole=True)
    off, _, _, bad_off = differential(fixture(name), peephole=False)
    assert not bad_on and not bad_off
    assert on.stats.instructions <= off.stats.instructions
    assert on.stats.instructions + on.stats.removed <= off.stats.instructions + 2


def test_fixture_outputs():
    _, _, rv, _ = differential(fixture("bubble_sort"))
    out = [rv.mem[64 + i] for i in range(12)]
    assert out == sorted([503, -17, 88, 0, 9000, -4120, 77, 77, 12, -9800, 341, 5])
    _, _, rv, _ = differential(fixture("gemm4x4"))
    A = [[3, -1, 4, 1], [5, -9, 2, 6], [-5, 3, 5, 8], [9, -7, 9, 3]]
    B = [[2, 7, 1, 8], [2, 8, 1, 8], [2, 8, 4, 5], [9, 0, 4, 5]]
    C = [sum(A[i][k] * B[k][j] for k in range(4)) for i in range(4) for j in range(4)]
    assert [rv.mem[132 + i] for i in range(16)] == C


@pytest.mark.parametrize("seed", range(25))
def test_random_straight_line(seed):
    prog = rv_straight_line(random.Random(seed), 9700)
    src = rv_source(prog)
    for peephole in (True, False):
        unit, state, rv, bad = differential(src, peephole=peephole)
        assert not bad, (src, bad)


def test_oracle_halts_and_times_out():
    from art9.transpiler.rv import RvTimeout
    st = run_rv(parse_rv32i("addi x5, x0, 1\nl: beq x0, x0, l\naddi x5, x0, 9"))
    assert st.halted and st.regs[5] == 1
    with pytest.raises(RvTimeout):
        run_rv(parse_rv32i("a: j b\nb: j a"), max_steps=50)


def test_emitted_text_reassembles_to_same_words():
    unit = transpile_unit(fixture("sobel8x8"))
    words = [Instruction(*(getattr(i, f) for f in ("mnemonic", "ta", "tb", "b", "imm")))
             for i, _, _ in unit.output]
    from art9.isa import encode_instruction
    assert [encode_instruction(i) for i in words] == unit.image().words
