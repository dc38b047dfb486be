import itertools
import math
import struct

import pytest

from ast_oracle import interpret
from typeline.frontend import (
    ArityMismatch,
    MiniCSyntaxError,
    NonSdtArithmetic,
    UndeclaredVariable,
    UnsupportedConstruct,
    compile_source,
    parse_minic,
    result_type,
    type_check,
    walk,
)
from typeline.frontend import ast as A
from typeline.frontend.ir import BIN, CONV, LOAD, NEW, RELEASE
from typeline.frontend.types import CHAR, DOUBLE, FLOAT, INT
from typeline.fuzz import random_program
from typeline.isa import SdtKind
from typeline.machine import run_baseline


def nodes(prog, cls):
    return [n for n in walk(prog) if isinstance(n, cls)]


def test_smallest_program():
    p = parse_minic("int x = 3;")
    (decl,) = p.items
    assert isinstance(decl, A.DeclStmt)
    assert decl.decls[0].spec.base == "int" and decl.decls[0].name == "x"


def test_loop_and_array():
    p = parse_minic("int a[8]; for(int i=0;i<8;i++){a[i]=i;}")
    assert len(nodes(p, A.For)) == 1
    assert len(nodes(p, A.Index)) == 1


def test_goto_unsupported():
    with pytest.raises(UnsupportedConstruct):
        parse_minic("goto l;")


def test_syntax_error_position():
    with pytest.raises(MiniCSyntaxError) as exc:
        parse_minic("int x = ;\n")
    assert exc.value.pos[0] == 1


@pytest.mark.parametrize(
    "op,l,r,want",
    [("*", FLOAT, CHAR, FLOAT), ("+", INT, INT, INT), ("-", INT, DOUBLE, DOUBLE), ("<", DOUBLE, CHAR, INT)],
)
def test_result_type(op, l, r, want):
    assert result_type(op, l, r) == want


def test_result_type_lattice_laws():
    kinds = list(SdtKind)
    for a, b in itertools.product(kinds, repeat=2):
        assert result_type("+", a, b) == result_type("+", b, a) == max(a, b)
    for a, b, c in itertools.product(kinds, repeat=3):
        assert result_type("*", result_type("*", a, b), c) == result_type("*", a, result_type("*", b, c))


def _conversions(expr):
    out = []
    while isinstance(expr, A.Convert):
        out.append((expr.expr.ty.kind, expr.ty.kind))
        expr = expr.expr
    return out


def test_mixed_product_conversions():
    t = type_check(parse_minic("int i; char c; float f = i * c;"))
    decl = t.program.items[2].decls[0]
    # (float)(i * (int)c)
    assert _conversions(decl.init) == [("int", "float")]
    product = decl.init.expr
    assert product.ty == INT
    assert _conversions(product.right) == [("char", "int")]


def test_no_conversion_for_same_types():
    t = type_check(parse_minic("int x = 1 + 2; int y; int z = x + y;"))
    assert not nodes(t.program, A.Convert)


def test_conversion_minimality():
    for seed in range(40):
        g, _ = random_program(seed)
        t = type_check(parse_minic(g.source))
        for c in nodes(t.program, A.Convert):
            assert c.ty != c.expr.ty


def test_type_errors():
    with pytest.raises(UndeclaredVariable):
        type_check(parse_minic("x = 1;"))
    with pytest.raises(ArityMismatch):
        type_check(parse_minic("int f(int a) { return a; } int y = f(1, 2);"))
    with pytest.raises(NonSdtArithmetic):
        type_check(parse_minic("struct S { int a; }; struct S s; int y = s + 1;"))


def test_lower_add():
    ir = compile_source("int main() { int a = 1; int b = 2; int c = a + b; return c; }")
    assert [(o.op, o.stem) for o in ir.ops] == [("const", None), ("const", None), (BIN, "ADD")]
    # initialized globals live in data memory and are loaded
    ir = compile_source("int a = 1; int b = 2; int c = a + b;")
    assert [o.op for o in ir.ops] == [LOAD, LOAD, BIN, "store"]


def test_lower_fig5(fig5_source):
    ir = compile_source(fig5_source)
    ops = ir.ops
    region = [o for o in ops if o.op != "store"][:7]
    assert [o.op for o in region] == [LOAD, LOAD, BIN, LOAD, CONV, BIN, LOAD]
    assert sum(o.op == CONV for o in ops) == 1
    assert len(ops) == 10


def test_pointer_is_nonsdt():
    ir = compile_source("int x; int *p; p = &x;")
    assert all(o.kind is None for o in ir.ops)


def test_new_and_delete():
    ir = compile_source("int n; int main() { int *p = new int[n]; p[0] = 1; delete p; return 0; }")
    kinds = [o.op for o in ir.ops]
    assert NEW in kinds and RELEASE in kinds
    size = next(o for o in ir.ops if o.op == BIN and o.stem == "MUL")
    assert size.args[1].value == 4  # bytes per int


def _same(a, b):
    if isinstance(a, list):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and math.isnan(a):
        return isinstance(b, float) and math.isnan(b)
    return struct.pack("<d", a) == struct.pack("<d", b)


@pytest.mark.parametrize("seed", range(0, 200, 4))
def test_lowering_preserves_semantics(seed):
    g, ir = random_program(seed)
    want = interpret(g.source, g.inputs)
    got = run_baseline(ir, g.inputs).outputs
    assert set(want) == set(got)
    assert all(_same(want[k], got[k]) for k in want)


def test_oracle_on_handwritten(fig5_source):
    src = """
    int s; float f; char c; long big; int arr[6];
    int sq(int x) { return x * x; }
    int main() {
        for (int i = 0; i < 6; i++) { arr[i] = sq(i) - 3; if (arr[i] > 10) break; }
        int k = 0;
        while (k < 6) { k++; if (k == 2) continue; s += arr[k % 6]; }
        f = s / 7.0f; c = 250; c += 10; big = s; big = big << 40;
        return 0;
    }
    """
    want = interpret(src)
    assert want["c"] == 4 and want["s"] == 14 and want["big"] == 14 * 2**40
    got = run_baseline(compile_source(src), {}).outputs
    assert all(_same(want[k], got[k]) for k in want)
