import json

import pytest

from typeline.isa import (
    AssemblyError,
    ConvMask,
    CostTable,
    Imm,
    Instruction,
    InvalidCostTable,
    LaneMismatch,
    MalformedOperand,
    Mem,
    MissingCostEntry,
    Opcode,
    Program,
    Reg,
    SdtKind,
    UnknownOpcode,
    VecLen,
    category,
    check_assembly,
    format_assembly,
    instruction_cost,
    parse_assembly,
    parse_instruction,
    validate,
)

TABLE2 = {
    "integer": "LD.in ST.in MOV.in ADD.in SUB.in MUL.in DIV.in CMPE.in CMPEG.in CMPEs.in CMPS.in "
    "AND.in OR.in XOR.in NOR.in XNOR.in SRA.in SRL.in",
    "float": "LD.ft ST.ft MOV.ft ADD.ft SUB.ft MUL.ft DIV.ft CMP.ft",
    "double": "LD.db ST.db MOV.db ADD.db SUB.db MUL.db CMP.db",
    "char": "LD.ch ST.ch MOV.ch ADD.ch SUB.ch CMPE.ch CMPEG.ch CMPEs.ch CMPS.ch AND.ch OR.ch XOR.ch NOR.ch XNOR.ch",
    "control": "VEN VDS PEN PDS FTEN DBEN CHEN FTDS DBDS CHDS CONV",
    "memory": "OBJ.n OBJ.r",
}


def r(i):
    return Reg(SdtKind.INT, i)


def f(i):
    return Reg(SdtKind.FLOAT, i)


def test_sdt_order():
    assert list(SdtKind) == [SdtKind.CHAR, SdtKind.INT, SdtKind.FLOAT, SdtKind.DOUBLE]
    assert SdtKind.CHAR < SdtKind.INT < SdtKind.FLOAT < SdtKind.DOUBLE


def test_opcode_set_is_closed():
    expected = {m for ms in TABLE2.values() for m in ms.split()}
    assert {op.value for op in Opcode} == expected
    for cat, ms in TABLE2.items():
        for m in ms.split():
            assert category(Opcode(m)).value == cat


def test_parse_add():
    ins = parse_instruction("ADD.in r3, r1, r2")
    assert ins == Instruction(Opcode("ADD.in"), (r(3), r(1), r(2)))


@pytest.mark.parametrize("text", ["DIV.db d1, d2, d3", "FOO r1", "ADD.xx r1, r1, r1", "LD.lg t0, [3]"])
def test_unknown_opcode(text):
    with pytest.raises(UnknownOpcode):
        parse_instruction(text)


def test_lane_mismatch():
    with pytest.raises(LaneMismatch):
        parse_instruction("ADD.in f3, r1, r2")


@pytest.mark.parametrize("text", ["ADD.in r3, r1", "ADD.in r99, r1, r2", "LD.in r1, [x]", "CONV 0000001"])
def test_malformed(text):
    with pytest.raises(AssemblyError):
        parse_instruction(text)


def test_check_assembly_lists_every_error():
    errs = check_assembly("ADD.in r1, r1, r1\nDIV.db d0, d0, d0\nADD.in f0, r0, r0\n")
    assert [type(e) for e in errs] == [UnknownOpcode, LaneMismatch]


def test_format_empty():
    assert format_assembly(Program()) == ""
    assert parse_assembly("") == Program()


def test_conv_mask_text():
    prog = Program((Instruction(Opcode("CONV"), (ConvMask(1),)),))
    assert format_assembly(prog).strip() == "CONV 00000001"
    assert parse_assembly("CONV 00000001") == prog


def test_conv_mask_bits():
    m = ConvMask.for_directions({(SdtKind.INT, SdtKind.FLOAT), (SdtKind.FLOAT, SdtKind.DOUBLE)})
    assert str(m) == "00000101"
    assert m.enabled(SdtKind.INT, SdtKind.FLOAT)
    assert not m.enabled(SdtKind.INT, SdtKind.DOUBLE)
    assert not m.enabled(SdtKind.DOUBLE, SdtKind.INT)
    assert ConvMask.parse("00000010").enabled(SdtKind.INT, SdtKind.DOUBLE)


def test_operand_ranges():
    with pytest.raises(ValueError):
        Reg(SdtKind.INT, 32)
    with pytest.raises(ValueError):
        VecLen(17)
    with pytest.raises(ValueError):
        VecLen(0)
    with pytest.raises(ValueError):
        Mem(-1)


SAMPLE = """\
; comment line
@data a int 16 1 = 6
@data x float 17 2 = 1.5 -0.25
VEN 2
@cluster 0
LD.in r0, [16]
LD.in r1, [17]   ; trailing comment
VDS
PEN
@cluster 1
CONV 00000001
ADD.in r2, r0, r1
DIV.ft f0, f1, f2
PDS
ST.in r2, [18+r0]
L9:
T.BZ r2, L9
"""


def test_round_trip_sample():
    p = parse_assembly(SAMPLE)
    text = format_assembly(p)
    assert parse_assembly(text) == p
    assert format_assembly(parse_assembly(text)) == text
    assert p.symbol("x").init == (1.5, -0.25)
    assert [i.cluster for i in p.instructions][:3] == [None, 0, 0]


def _cluster(ops, tag=0):
    return [Instruction(Opcode(m), o, tag) for m, o in ops]


def test_validate_mixed_types():
    body = _cluster(
        [
            ("ADD.in", (r(1), r(2), r(3))),
            ("SUB.in", (r(4), r(2), r(3))),
            ("ADD.ft", (f(1), f(2), f(3))),
        ]
    )
    p = Program(tuple([Instruction(Opcode("PEN"))] + body + [Instruction(Opcode("PDS"))]))
    rules = {v.rule for v in validate(p)}
    assert "cluster-types" in rules
    assert any("neither all-same nor all-distinct" in v.message for v in validate(p))


def test_validate_load_cap():
    loads = _cluster([("LD.in", (r(i), Mem(100 + i))) for i in range(17)])
    p = Program(tuple([Instruction(Opcode("VEN"), (VecLen(16),))] + loads + [Instruction(Opcode("VDS"))]))
    msgs = [v.message for v in validate(p)]
    assert "load cluster exceeds 16" in msgs
    assert validate(p, load_cap=17, relax=True) == [v for v in validate(p, relax=True) if v.rule == "vector-length"]


def test_validate_fig5_cluster_clean():
    body = _cluster(
        [
            ("CONV", (ConvMask(1),)),
            ("ADD.in", (r(4), r(0), r(1))),
            ("DIV.ft", (f(0), f(1), f(2))),
        ]
    )
    p = Program(tuple([Instruction(Opcode("PEN"))] + body + [Instruction(Opcode("PDS"))]))
    assert validate(p) == []


def test_validate_reserved_conv_bits():
    p = Program((Instruction(Opcode("CONV"), (ConvMask(0b1000),)),))
    assert validate(p)


def test_validate_hazard_in_cluster():
    body = _cluster([("ADD.in", (r(1), r(2), r(3))), ("SUB.ft", (f(1), f(2), f(3))), ("MUL.in", (r(5), r(1), r(1)))])
    p = Program(tuple([Instruction(Opcode("PEN"))] + body + [Instruction(Opcode("PDS"))]))
    assert "cluster-hazard" in {v.rule for v in validate(p)}


def test_validate_mode_nesting():
    p = parse_assembly("PEN\nVEN 2\nVDS\nPDS\n")
    assert "mode-nesting" in {v.rule for v in validate(p)}
    assert "mode-unclosed" in {v.rule for v in validate(parse_assembly("PEN\n"))}


def test_costs():
    t = CostTable.default()
    assert instruction_cost(Instruction(Opcode("CONV"), (ConvMask(1),)), t) == 1
    assert instruction_cost(parse_instruction("ADD.in r1, r2, r3"), t) == 1
    assert instruction_cost(parse_instruction("DIV.ft f1, f2, f3"), t) == 12
    assert t["LD.in"] == t["ST.db"] == 3
    assert t["MUL.in"] == 7 and t["DIV.in"] == 20 and t["MUL.db"] == 4
    assert t["OBJ.n"] == 10 and t["OBJ.r"] == 5
    # traditional ops pay their base cost plus the overhead
    assert instruction_cost(parse_instruction("T.ADD t1, t2, t3"), t) == 3
    assert instruction_cost(parse_instruction("T.BR L0"), t) == 1


def test_cost_table_constraints(tmp_path):
    with pytest.raises(InvalidCostTable):
        CostTable.with_overrides({"ADD.in": 12})
    with pytest.raises(InvalidCostTable):
        CostTable.with_overrides({"CONV": 2})
    with pytest.raises(InvalidCostTable):
        CostTable.with_overrides({"NOPE": 1})
    with pytest.raises(InvalidCostTable):
        CostTable.with_overrides({"LD.in": 0})
    with pytest.raises(MissingCostEntry):
        CostTable({})["ADD.in"]
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"DIV.ft": 30}))
    assert CostTable.load(path)["DIV.ft"] == 30


def test_immediate_round_trip():
    ins = Instruction(Opcode("MOV.ft"), (f(1), Imm(0.1, SdtKind.FLOAT)))
    assert parse_instruction(str(ins)) == ins
    with pytest.raises(MalformedOperand):
        parse_instruction("MOV.in r1, #abc:in")
