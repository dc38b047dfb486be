"""TYPELINE instruction set: opcodes, operands, textual assembly and cost table.

Two opcode namespaces exist. ``Opcode`` holds exactly the typed, control and
memory mnemonics of the TYPELINE instruction table. ``BaseOp`` holds the
``T.``-prefixed instructions executed by the traditional (fallback) lane:
branches, long/enum/pointer/struct operations, double division and the
conversions the type-conversion unit cannot perform.

Assembly text (``.tla``)::

    @data a int 16 1 = 6
    L0:
    VEN 4
    @cluster 0
    LD.in r0, [16]
    ...
    VDS
    T.BZ r3, L2
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

NUM_REGISTERS = 32
MAX_VECTOR = 16
LOAD_CLUSTER_CAP = 16
OP_CLUSTER_CAP = 4


class SdtKind(enum.IntEnum):
    """The four significant data types, ordered for promotion."""

    CHAR = 0
    INT = 1
    FLOAT = 2
    DOUBLE = 3

    @property
    def suffix(self) -> str:
        return _SUFFIX[self]

    @property
    def reg_prefix(self) -> str:
        return _REG_PREFIX[self]

    @classmethod
    def from_suffix(cls, suffix: str) -> "SdtKind":
        return _FROM_SUFFIX[suffix]


_SUFFIX = {SdtKind.CHAR: "ch", SdtKind.INT: "in", SdtKind.FLOAT: "ft", SdtKind.DOUBLE: "db"}
_FROM_SUFFIX = {v: k for k, v in _SUFFIX.items()}
_REG_PREFIX = {SdtKind.CHAR: "c", SdtKind.INT: "r", SdtKind.FLOAT: "f", SdtKind.DOUBLE: "d"}
# ``t`` registers belong to the traditional lane (64-bit integers: long, enum)
_PREFIX_LANE: dict[str, SdtKind | None] = {v: k for k, v in _REG_PREFIX.items()}
_PREFIX_LANE["t"] = None


class Category(enum.Enum):
    INTEGER = "integer"
    FLOAT = "float"
    DOUBLE = "double"
    CHAR = "char"
    CONTROL = "control"
    MEMORY = "memory"


_TABLE2: dict[Category, list[str]] = {
    Category.INTEGER: (
        "LD.in ST.in MOV.in ADD.in SUB.in MUL.in DIV.in CMPE.in CMPEG.in CMPEs.in "
        "CMPS.in AND.in OR.in XOR.in NOR.in XNOR.in SRA.in SRL.in"
    ).split(),
    Category.FLOAT: "LD.ft ST.ft MOV.ft ADD.ft SUB.ft MUL.ft DIV.ft CMP.ft".split(),
    Category.DOUBLE: "LD.db ST.db MOV.db ADD.db SUB.db MUL.db CMP.db".split(),
    Category.CHAR: (
        "LD.ch ST.ch MOV.ch ADD.ch SUB.ch CMPE.ch CMPEG.ch CMPEs.ch CMPS.ch "
        "AND.ch OR.ch XOR.ch NOR.ch XNOR.ch"
    ).split(),
    Category.CONTROL: "VEN VDS PEN PDS FTEN DBEN CHEN FTDS DBDS CHDS CONV".split(),
    Category.MEMORY: "OBJ.n OBJ.r".split(),
}


def _member_name(mnemonic: str) -> str:
    # CMPEs and CMPS differ only by case
    return mnemonic.replace(".", "_").replace("CMPEs", "CMPES_LE").upper()


Opcode = enum.Enum(  # type: ignore[misc]
    "Opcode",
    [(_member_name(m), m) for ms in _TABLE2.values() for m in ms],
    type=str,
)
Opcode.__doc__ = "Every mnemonic of the TYPELINE instruction table."

_CATEGORY: dict[str, Category] = {m: cat for cat, ms in _TABLE2.items() for m in ms}

BaseOp = enum.Enum(  # type: ignore[misc]
    "BaseOp",
    [
        (m.replace("T.", "T_"), m)
        for m in (
            "T.LD T.ST T.MOV T.CVT T.LEA T.ADD T.SUB T.MUL T.DIV T.REM T.AND T.OR "
            "T.XOR T.NOR T.SHL T.SHR T.CMP T.BR T.BZ T.BNZ"
        ).split()
    ],
    type=str,
)
BaseOp.__doc__ = "Traditional-lane instructions (fallback base ISA)."

FLOW_OPS = frozenset({BaseOp("T.BR"), BaseOp("T.BZ"), BaseOp("T.BNZ")})
_OPCODES = {op.value: op for op in Opcode}
_BASEOPS = {op.value: op for op in BaseOp}

AnyOp = Union["Opcode", "BaseOp"]


def category(op: AnyOp) -> Category | None:
    """Table category of ``op``; None for traditional-lane instructions."""
    return _CATEGORY.get(op.value)


def opcode_kind(op: AnyOp) -> SdtKind | None:
    """SDT lane of a typed opcode (from its suffix), else None."""
    head, _, suffix = op.value.rpartition(".")
    if head and suffix in _FROM_SUFFIX and not op.value.startswith("T."):
        return _FROM_SUFFIX[suffix]
    return None


def base_name(op: AnyOp) -> str:
    """Mnemonic stem without lane suffix or ``T.`` prefix: ``ADD.in`` -> ``ADD``."""
    v = op.value
    if v.startswith("T."):
        return v[2:]
    return v.split(".")[0]


def is_load(op: AnyOp) -> bool:
    return base_name(op) == "LD"


def is_store(op: AnyOp) -> bool:
    return base_name(op) == "ST"


_COMPUTE_STEMS = frozenset(
    "ADD SUB MUL DIV REM AND OR XOR NOR XNOR SRA SRL SHL SHR CMP CMPE CMPEG CMPEs CMPS".split()
)


def is_compute(op: AnyOp) -> bool:
    """Arithmetic, logical, shift or compare."""
    return base_name(op) in _COMPUTE_STEMS


def is_clusterable(op: AnyOp) -> bool:
    """Typed arithmetic/logical/compare ops that may join an op cluster."""
    return isinstance(op, Opcode) and opcode_kind(op) is not None and is_compute(op)


CONV_DIRECTIONS: dict[tuple[SdtKind, SdtKind], int] = {
    (SdtKind.INT, SdtKind.FLOAT): 0,
    (SdtKind.INT, SdtKind.DOUBLE): 1,
    (SdtKind.FLOAT, SdtKind.DOUBLE): 2,
}
CONDITIONS = ("eq", "ne", "lt", "le", "gt", "ge")


# ---------------------------------------------------------------------------
# Operands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reg:
    lane: SdtKind | None  # None: traditional ``t`` register file
    index: int

    def __post_init__(self) -> None:
        if not 0 <= self.index < NUM_REGISTERS:
            raise ValueError(f"register index {self.index} out of range 0..{NUM_REGISTERS - 1}")

    def __str__(self) -> str:
        prefix = "t" if self.lane is None else self.lane.reg_prefix
        return f"{prefix}{self.index}"


@dataclass(frozen=True)
class Imm:
    value: int | float
    kind: SdtKind | None  # None: 64-bit traditional integer

    def __str__(self) -> str:
        tag = "lg" if self.kind is None else self.kind.suffix
        return f"#{self.value!r}:{tag}"


@dataclass(frozen=True)
class Mem:
    addr: int
    index: Reg | None = None

    def __post_init__(self) -> None:
        if self.addr < 0:
            raise ValueError("memory address must be a non-negative word index")

    def __str__(self) -> str:
        return f"[{self.addr}+{self.index}]" if self.index is not None else f"[{self.addr}]"


@dataclass(frozen=True)
class Handle:
    id: int

    def __str__(self) -> str:
        return f"${self.id}"


@dataclass(frozen=True)
class ConvMask:
    """Eight conversion switches; bit 0 is the rightmost character."""

    bits: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.bits < 256:
            raise ValueError("conversion mask is 8 bits wide")

    @classmethod
    def parse(cls, text: str) -> "ConvMask":
        if len(text) != 8 or set(text) - {"0", "1"}:
            raise ValueError(f"conversion mask must be 8 binary digits, got {text!r}")
        return cls(int(text, 2))

    @classmethod
    def for_directions(cls, directions: Iterable[tuple[SdtKind, SdtKind]]) -> "ConvMask":
        bits = 0
        for d in directions:
            bits |= 1 << CONV_DIRECTIONS[d]
        return cls(bits)

    def enabled(self, src: SdtKind, dst: SdtKind) -> bool:
        bit = CONV_DIRECTIONS.get((src, dst))
        return bit is not None and bool(self.bits >> bit & 1)

    @property
    def reserved_bits(self) -> int:
        return self.bits & 0b11111000

    def __str__(self) -> str:
        return format(self.bits, "08b")


@dataclass(frozen=True)
class VecLen:
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_VECTOR:
            raise ValueError(f"vector length must be in 1..{MAX_VECTOR}")

    def __str__(self) -> str:
        return str(self.n)


@dataclass(frozen=True)
class Cond:
    code: str

    def __post_init__(self) -> None:
        if self.code not in CONDITIONS:
            raise ValueError(f"unknown condition {self.code!r}")

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True)
class LabelRef:
    name: str

    def __str__(self) -> str:
        return self.name


Operand = Union[Reg, Imm, Mem, Handle, ConvMask, VecLen, Cond, LabelRef]


@dataclass(frozen=True)
class Instruction:
    opcode: AnyOp
    operands: tuple[Operand, ...] = ()
    cluster: int | None = None

    def __str__(self) -> str:
        ops = ", ".join(str(o) for o in self.operands)
        return f"{self.opcode.value} {ops}".rstrip()

    def regs_read(self) -> list[Reg]:
        return _regs_read(self)

    def regs_written(self) -> list[Reg]:
        return _regs_written(self)


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class Symbol:
    """A statically placed memory object."""

    name: str
    vtype: str  # char int float double long ptr
    addr: int
    length: int = 1
    scope: str = "global"  # global | local | spill
    init: tuple[int | float, ...] = ()


SYMBOL_TYPES = ("char", "int", "float", "double", "long", "ptr")
_SCOPE_DIRECTIVE = {"global": "@data", "local": "@local", "spill": "@spill"}
_DIRECTIVE_SCOPE = {v: k for k, v in _SCOPE_DIRECTIVE.items()}


@dataclass(frozen=True)
class Program:
    items: tuple[Instruction | Label, ...] = ()
    symbols: tuple[Symbol, ...] = ()

    @property
    def instructions(self) -> list[Instruction]:
        return [i for i in self.items if isinstance(i, Instruction)]

    def symbol(self, name: str) -> Symbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)


def _regs_read(ins: Instruction) -> list[Reg]:
    ops = ins.operands
    name = ins.opcode.value
    out: list[Reg] = []
    for o in ops:
        if isinstance(o, Mem) and o.index is not None:
            out.append(o.index)
    if name == "CONV":
        out.extend(o for o in ops[2::2] if isinstance(o, Reg))
        return out
    if base_name(ins.opcode) in ("ST", "BZ", "BNZ") or name == "OBJ.r":
        if ops and isinstance(ops[0], Reg):
            out.append(ops[0])
        return out
    out.extend(o for o in ops[1:] if isinstance(o, Reg))
    return out


def _regs_written(ins: Instruction) -> list[Reg]:
    ops = ins.operands
    name = ins.opcode.value
    if name == "CONV":
        return [o for o in ops[1::2] if isinstance(o, Reg)]
    if base_name(ins.opcode) in ("ST", "BZ", "BNZ", "BR") or name == "OBJ.r":
        return []
    if ops and isinstance(ops[0], Reg):
        return [ops[0]]
    return []


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class AssemblyError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownOpcode(AssemblyError):
    pass


class MalformedOperand(AssemblyError):
    pass


class LaneMismatch(AssemblyError):
    pass


class MissingCostEntry(KeyError):
    pass


class InvalidCostTable(ValueError):
    pass


# ---------------------------------------------------------------------------
# Operand signatures
# ---------------------------------------------------------------------------
# Signature letters: R=register  S=register-or-immediate  M=memory  V=vector
# length  K=conv mask  C=condition  L=label  H=register-or-handle

_SIGNATURES: dict[str, str] = {}
for _m in _OPCODES:
    _stem = _m.split(".")[0]
    if _stem in ("LD", "ST"):
        _SIGNATURES[_m] = "RM"
    elif _stem == "MOV":
        _SIGNATURES[_m] = "RS"
    elif _stem == "CMP":
        _SIGNATURES[_m] = "RSSC"
    elif _m in ("VEN",):
        _SIGNATURES[_m] = "V"
    elif _m == "CONV":
        _SIGNATURES[_m] = "K*"
    elif _m == "OBJ.n":
        _SIGNATURES[_m] = "RS"
    elif _m == "OBJ.r":
        _SIGNATURES[_m] = "H"
    elif _CATEGORY[_m] is Category.CONTROL:
        _SIGNATURES[_m] = ""
    else:
        _SIGNATURES[_m] = "RSS"
_SIGNATURES.update(
    {
        "T.LD": "RM",
        "T.ST": "RM",
        "T.MOV": "RS",
        "T.CVT": "RR",
        "T.LEA": "RM",
        "T.CMP": "RSSC",
        "T.BR": "L",
        "T.BZ": "RL",
        "T.BNZ": "RL",
    }
)
for _m in ("T.ADD", "T.SUB", "T.MUL", "T.DIV", "T.REM", "T.AND", "T.OR", "T.XOR", "T.NOR", "T.SHL", "T.SHR"):
    _SIGNATURES[_m] = "RSS"


def signature(op: AnyOp) -> str:
    return _SIGNATURES[op.value]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_REG_RE = re.compile(r"^([rfdct])(\d+)$")
_MEM_RE = re.compile(r"^\[\s*(\d+)\s*(?:\+\s*([rfdct]\d+)\s*)?\]$")
_LABEL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_IMM_TAGS = {"in": SdtKind.INT, "ft": SdtKind.FLOAT, "db": SdtKind.DOUBLE, "ch": SdtKind.CHAR, "lg": None}


def _parse_reg(text: str, line: int) -> Reg:
    m = _REG_RE.match(text)
    if not m:
        raise MalformedOperand(f"expected register, got {text!r}", line)
    try:
        return Reg(_PREFIX_LANE[m.group(1)], int(m.group(2)))
    except ValueError as exc:
        raise MalformedOperand(str(exc), line) from None


def _parse_number(text: str, kind: SdtKind | None) -> int | float:
    if kind in (SdtKind.FLOAT, SdtKind.DOUBLE):
        return float(text)
    return int(text)


def _parse_operand(text: str, letter: str, line: int, opname: str) -> Operand:
    try:
        if letter == "R":
            return _parse_reg(text, line)
        if letter in ("S", "H"):
            if text.startswith("#"):
                body, sep, tag = text[1:].rpartition(":")
                if not sep or tag not in _IMM_TAGS:
                    raise MalformedOperand(f"immediate needs a :in/:ft/:db/:ch/:lg tag: {text!r}", line)
                kind = _IMM_TAGS[tag]
                return Imm(_parse_number(body, kind), kind)
            if letter == "H" and text.startswith("$"):
                return Handle(int(text[1:]))
            return _parse_reg(text, line)
        if letter == "M":
            m = _MEM_RE.match(text)
            if not m:
                raise MalformedOperand(f"expected memory operand [addr] or [addr+reg], got {text!r}", line)
            idx = _parse_reg(m.group(2), line) if m.group(2) else None
            return Mem(int(m.group(1)), idx)
        if letter == "V":
            return VecLen(int(text))
        if letter == "K":
            return ConvMask.parse(text)
        if letter == "C":
            return Cond(text)
        if letter == "L":
            if not _LABEL_RE.match(text):
                raise MalformedOperand(f"bad label {text!r}", line)
            return LabelRef(text)
    except AssemblyError:
        raise
    except ValueError as exc:
        raise MalformedOperand(f"{opname}: {exc}", line) from None
    raise AssertionError(letter)


def _check_lanes(ins: Instruction, line: int | None) -> None:
    """Typed opcodes keep all register operands in their own lane."""
    kind = opcode_kind(ins.opcode)
    if kind is None:
        return
    name = ins.opcode.value
    for pos, o in enumerate(ins.operands):
        if isinstance(o, Mem):
            if o.index is not None and o.index.lane is not SdtKind.INT:
                raise LaneMismatch(f"{name}: address index must be an integer register, got {o.index}", line)
            continue
        if isinstance(o, Reg):
            if o.lane is kind:
                continue
            # char->int widening through the data path
            if name == "MOV.in" and pos == 1 and o.lane is SdtKind.CHAR:
                continue
            raise LaneMismatch(f"{name}: register {o} is not in the {kind.suffix} lane", line)
        if isinstance(o, Imm) and o.kind is not kind:
            raise LaneMismatch(f"{name}: immediate {o} is not of kind {kind.suffix}", line)


def parse_instruction(text: str, line: int | None = None, cluster: int | None = None) -> Instruction:
    text = text.strip()
    mnemonic, _, rest = text.partition(" ")
    op = _OPCODES.get(mnemonic) or _BASEOPS.get(mnemonic)
    if op is None:
        raise UnknownOpcode(f"unknown opcode {mnemonic!r}", line)
    args = [a.strip() for a in rest.split(",")] if rest.strip() else []
    sig = _SIGNATURES[mnemonic]
    operands: list[Operand] = []
    if sig.endswith("*"):
        if not args:
            raise MalformedOperand(f"{mnemonic} needs a conversion mask", line)
        operands.append(_parse_operand(args[0], "K", line, mnemonic))
        if (len(args) - 1) % 2:
            raise MalformedOperand(f"{mnemonic} conversion operands come in dst, src pairs", line)
        operands.extend(_parse_reg(a, line) for a in args[1:])
    else:
        if len(args) != len(sig):
            raise MalformedOperand(f"{mnemonic} takes {len(sig)} operands, got {len(args)}", line)
        operands.extend(_parse_operand(a, s, line, mnemonic) for a, s in zip(args, sig))
    ins = Instruction(op, tuple(operands), cluster)
    _check_lanes(ins, line)
    return ins


_TERMINATES_TAG = frozenset({"VEN", "VDS", "PEN", "PDS"})


def _parse_symbol(directive: str, rest: str, line: int) -> Symbol:
    head, _, init = rest.partition("=")
    parts = head.split()
    if len(parts) != 4 or parts[1] not in SYMBOL_TYPES:
        raise MalformedOperand(f"{directive} expects NAME TYPE ADDR LEN", line)
    name, vtype, addr, length = parts
    kind = SdtKind.FLOAT if vtype in ("float", "double") else SdtKind.INT
    try:
        values = tuple(_parse_number(v, kind) for v in init.split())
        return Symbol(name, vtype, int(addr), int(length), _DIRECTIVE_SCOPE[directive], values)
    except ValueError as exc:
        raise MalformedOperand(str(exc), line) from None


def _iter_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split(";", 1)[0].strip()
        if body:
            yield lineno, body


def check_assembly(text: str) -> list[AssemblyError]:
    """All line-level errors in ``text`` (empty when it parses)."""
    errors: list[AssemblyError] = []
    for lineno, body in _iter_lines(text):
        try:
            _parse_line(body, lineno, None)
        except AssemblyError as exc:
            errors.append(exc)
    return errors


def _parse_line(body: str, lineno: int, tag: int | None):
    if body.startswith("@"):
        directive, _, rest = body.partition(" ")
        if directive == "@cluster":
            try:
                return ("tag", int(rest))
            except ValueError:
                raise MalformedOperand(f"bad cluster id {rest!r}", lineno) from None
        if directive == "@end":
            return ("tag", None)
        if directive in _DIRECTIVE_SCOPE:
            return ("sym", _parse_symbol(directive, rest, lineno))
        raise UnknownOpcode(f"unknown directive {directive!r}", lineno)
    if body.endswith(":"):
        name = body[:-1].strip()
        if not _LABEL_RE.match(name):
            raise MalformedOperand(f"bad label {name!r}", lineno)
        return ("label", Label(name))
    return ("ins", parse_instruction(body, lineno, tag))


def parse_assembly(text: str) -> Program:
    """Parse ``.tla`` text; raises the first AssemblyError found."""
    items: list[Instruction | Label] = []
    symbols: list[Symbol] = []
    tag: int | None = None
    for lineno, body in _iter_lines(text):
        kind, value = _parse_line(body, lineno, tag)
        if kind == "tag":
            tag = value
        elif kind == "sym":
            symbols.append(value)
        elif kind == "label":
            tag = None
            items.append(value)
        else:
            if value.opcode.value in _TERMINATES_TAG:
                tag = None
                value = Instruction(value.opcode, value.operands, None)
            items.append(value)
    return Program(tuple(items), tuple(symbols))


def _format_value(v: int | float) -> str:
    return repr(v)


def format_assembly(program: Program) -> str:
    lines: list[str] = []
    for s in program.symbols:
        line = f"{_SCOPE_DIRECTIVE[s.scope]} {s.name} {s.vtype} {s.addr} {s.length}"
        if s.init:
            line += " = " + " ".join(_format_value(v) for v in s.init)
        lines.append(line)
    tag: int | None = None
    for item in program.items:
        if isinstance(item, Label):
            lines.append(f"{item.name}:")
            tag = None
            continue
        if item.opcode.value in _TERMINATES_TAG:
            lines.append(str(item))
            tag = None
            continue
        if item.cluster != tag:
            lines.append("@end" if item.cluster is None else f"@cluster {item.cluster}")
            tag = item.cluster
        lines.append(str(item))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    index: int  # position in Program.items
    rule: str
    message: str


def _operand_letter_ok(o: Operand, letter: str) -> bool:
    return {
        "R": isinstance(o, Reg),
        "S": isinstance(o, (Reg, Imm)),
        "H": isinstance(o, (Reg, Handle)),
        "M": isinstance(o, Mem),
        "V": isinstance(o, VecLen),
        "K": isinstance(o, ConvMask),
        "C": isinstance(o, Cond),
        "L": isinstance(o, LabelRef),
    }[letter]


def _instruction_violations(idx: int, ins: Instruction) -> list[Violation]:
    out: list[Violation] = []
    name = ins.opcode.value
    sig = _SIGNATURES[name]
    ops = ins.operands
    if sig.endswith("*"):
        shape_ok = (
            len(ops) >= 1
            and isinstance(ops[0], ConvMask)
            and len(ops) % 2 == 1
            and all(isinstance(o, Reg) for o in ops[1:])
        )
    else:
        shape_ok = len(ops) == len(sig) and all(_operand_letter_ok(o, s) for o, s in zip(ops, sig))
    if not shape_ok:
        return [Violation(idx, "operand-shape", f"{name}: operands do not match signature {sig!r}")]
    try:
        _check_lanes(ins, None)
    except LaneMismatch as exc:
        out.append(Violation(idx, "lane-mismatch", str(exc)))
    if name == "CONV":
        mask = ops[0]
        if mask.reserved_bits:
            out.append(Violation(idx, "conv-reserved-bits", f"CONV mask {mask} sets reserved bits 3-7"))
        for dst, src in zip(ops[1::2], ops[2::2]):
            if src.lane is None or dst.lane is None or (src.lane, dst.lane) not in CONV_DIRECTIONS:
                out.append(Violation(idx, "conv-direction", f"CONV cannot convert {src} -> {dst}"))
            elif not mask.enabled(src.lane, dst.lane):
                out.append(Violation(idx, "conv-disabled", f"CONV mask {mask} does not enable {src} -> {dst}"))
    elif name in ("OBJ.n", "OBJ.r"):
        for o in ops:
            if isinstance(o, Reg) and o.lane is not SdtKind.INT:
                out.append(Violation(idx, "lane-mismatch", f"{name}: {o} is not an integer register"))
            if isinstance(o, Imm) and o.kind is not SdtKind.INT:
                out.append(Violation(idx, "lane-mismatch", f"{name}: {o} is not an integer immediate"))
    elif isinstance(ins.opcode, BaseOp):
        out.extend(_base_violations(idx, ins))
    return out


def _lane_of(o: Operand):
    if isinstance(o, Reg):
        return o.lane
    if isinstance(o, Imm):
        return o.kind
    return "?"


def _base_violations(idx: int, ins: Instruction) -> list[Violation]:
    name = ins.opcode.value
    ops = ins.operands
    out: list[Violation] = []
    for o in ops:
        if isinstance(o, Mem) and o.index is not None and o.index.lane is not SdtKind.INT:
            out.append(Violation(idx, "lane-mismatch", f"{name}: address index must be an integer register"))
    if name == "T.LEA" and ops[0].lane is not SdtKind.INT:
        out.append(Violation(idx, "lane-mismatch", "T.LEA writes an integer register"))
    elif name == "T.CMP":
        if _lane_of(ops[1]) != _lane_of(ops[2]):
            out.append(Violation(idx, "lane-mismatch", "T.CMP sources must share a lane"))
    elif name in ("T.MOV",) or (len(_SIGNATURES[name]) == 3 and _SIGNATURES[name] == "RSS"):
        lanes = {_lane_of(o) for o in ops}
        if len(lanes) != 1:
            out.append(Violation(idx, "lane-mismatch", f"{name}: operands must share one lane"))
    return out


def _mode_of(name: str) -> str | None:
    return {"VEN": "vector", "PEN": "parallel"}.get(name)


def _hazard_free(members: Sequence[Instruction], allow_conv_raw: bool) -> bool:
    """No RAW/WAR/WAW between any two members (CONV results may feed members)."""
    for i, a in enumerate(members):
        wa = set(a.regs_written())
        ra = set(a.regs_read())
        for b in members[i + 1 :]:
            wb = set(b.regs_written())
            rb = set(b.regs_read())
            raw = wa & rb
            if raw and not (allow_conv_raw and a.opcode.value == "CONV"):
                return False
            if (ra & wb) or (wa & wb):
                return False
    return True


def validate(
    program: Program,
    *,
    load_cap: int = LOAD_CLUSTER_CAP,
    op_cap: int = OP_CLUSTER_CAP,
    relax: bool = False,
) -> list[Violation]:
    """Every instruction and cluster rule the program breaks.

    Caps other than the defaults are honoured only with ``relax=True``.
    """
    if not relax:
        load_cap, op_cap = LOAD_CLUSTER_CAP, OP_CLUSTER_CAP
    out: list[Violation] = []
    labels = {i.name for i in program.items if isinstance(i, Label)}
    mode: str | None = None
    vlen: int | None = None
    seen_tags: set[int] = set()
    group: list[tuple[int, Instruction]] = []

    def close_group() -> None:
        nonlocal group
        if group:
            out.extend(_group_violations(group, mode, vlen, load_cap, op_cap))
        group = []

    for idx, item in enumerate(program.items):
        if isinstance(item, Label):
            close_group()
            if mode is not None:
                out.append(Violation(idx, "label-in-mode", f"label {item.name} inside {mode} mode"))
            continue
        out.extend(_instruction_violations(idx, item))
        name = item.opcode.value
        for o in item.operands:
            if isinstance(o, LabelRef) and o.name not in labels:
                out.append(Violation(idx, "undefined-label", f"branch to undefined label {o.name}"))
        if group and item.cluster != group[0][1].cluster:
            close_group()
        if name in ("VEN", "VDS", "PEN", "PDS"):
            close_group()
            if item.cluster is not None:
                out.append(Violation(idx, "tagged-wrapper", f"{name} cannot belong to a cluster"))
            if name == "VEN":
                if mode == "parallel":
                    out.append(Violation(idx, "mode-nesting", "VEN inside parallel mode"))
                mode, vlen = "vector", item.operands[0].n if item.operands else None
            elif name == "PEN":
                if mode is not None:
                    out.append(Violation(idx, "mode-nesting", f"PEN inside {mode} mode"))
                mode, vlen = "parallel", None
            elif name == "VDS":
                if mode != "vector":
                    out.append(Violation(idx, "mode-nesting", "VDS outside vector mode"))
                mode, vlen = None, None
            else:
                if mode != "parallel":
                    out.append(Violation(idx, "mode-nesting", "PDS outside parallel mode"))
                mode = None
            continue
        if item.cluster is None:
            if mode is not None:
                out.append(Violation(idx, "untagged-in-mode", f"{name} inside {mode} mode is not in a cluster"))
            continue
        if not group:
            if item.cluster in seen_tags:
                out.append(Violation(idx, "cluster-split", f"cluster {item.cluster} is not contiguous"))
            seen_tags.add(item.cluster)
        group.append((idx, item))
    close_group()
    if mode is not None:
        out.append(Violation(len(program.items), "mode-unclosed", f"program ends in {mode} mode"))
    return out


def _group_violations(group, mode, vlen, load_cap, op_cap) -> list[Violation]:
    first = group[0][0]
    members = [ins for _, ins in group]
    out: list[Violation] = []
    loads = [m for m in members if isinstance(m.opcode, Opcode) and is_load(m.opcode)]
    if loads and len(loads) == len(members):
        if mode != "vector":
            out.append(Violation(first, "cluster-mode", "load cluster outside vector mode"))
        if len({m.opcode for m in members}) != 1:
            out.append(Violation(first, "load-cluster-type", "load cluster mixes datatypes"))
        if len(members) > load_cap:
            out.append(Violation(first, "load-cluster-cap", f"load cluster exceeds {load_cap}"))
        if len(members) < 2:
            out.append(Violation(first, "cluster-size", "cluster needs at least 2 members"))
        if vlen is not None and vlen != len(members):
            out.append(Violation(first, "vector-length", f"VEN {vlen} does not match cluster of {len(members)}"))
        if not _hazard_free(members, False):
            out.append(Violation(first, "cluster-hazard", "cluster members have a data hazard"))
        return out
    if mode != "parallel":
        out.append(Violation(first, "cluster-mode", "op cluster outside parallel mode"))
    convs = [m for m in members if m.opcode.value == "CONV"]
    ops = [m for m in members if m.opcode.value != "CONV"]
    if convs and (len(convs) > 1 or members[0].opcode.value != "CONV"):
        out.append(Violation(first, "conv-position", "an op cluster has at most one CONV and it comes first"))
    bad = [m for m in ops if not is_clusterable(m.opcode)]
    if bad:
        out.append(Violation(first, "cluster-member", f"{bad[0].opcode.value} cannot join an op cluster"))
    if len(ops) > op_cap:
        out.append(Violation(first, "op-cluster-cap", f"op cluster exceeds {op_cap}"))
    if len(ops) < 2:
        out.append(Violation(first, "cluster-size", "cluster needs at least 2 members"))
    kinds = [opcode_kind(m.opcode) for m in ops]
    if len(set(kinds)) not in (1, len(kinds)):
        out.append(
            Violation(first, "cluster-types", "cluster types neither all-same nor all-distinct")
        )
    if not _hazard_free(members, True):
        out.append(Violation(first, "cluster-hazard", "cluster members have a data hazard"))
    return out


# ---------------------------------------------------------------------------
# Cost table
# ---------------------------------------------------------------------------

TRAD_OVERHEAD_KEY = "T.overhead"


def _default_costs() -> dict[str, int]:
    costs: dict[str, int] = {}
    for m in _OPCODES:
        stem = m.split(".")[0]
        cat = _CATEGORY[m]
        if stem in ("LD", "ST"):
            c = 3
        elif cat is Category.CONTROL:
            c = 1
        elif m == "OBJ.n":
            c = 10
        elif m == "OBJ.r":
            c = 5
        elif stem in ("ADD", "SUB") and cat in (Category.FLOAT, Category.DOUBLE):
            c = 4
        elif stem == "MUL":
            c = 7 if cat is Category.INTEGER else 4
        elif stem == "DIV":
            c = 20 if cat is Category.INTEGER else 12
        else:
            c = 1
        costs[m] = c
    costs.update(
        {
            "T.LD": 3,
            "T.ST": 3,
            "T.MOV": 1,
            "T.CVT": 4,
            "T.LEA": 1,
            "T.ADD": 1,
            "T.SUB": 1,
            "T.MUL": 7,
            "T.DIV": 20,
            "T.REM": 20,
            "T.AND": 1,
            "T.OR": 1,
            "T.XOR": 1,
            "T.NOR": 1,
            "T.SHL": 1,
            "T.SHR": 1,
            "T.CMP": 1,
            "T.BR": 1,
            "T.BZ": 1,
            "T.BNZ": 1,
            TRAD_OVERHEAD_KEY: 2,
        }
    )
    return costs


KNOWN_COST_KEYS = frozenset(_default_costs())


@dataclass(frozen=True)
class CostTable:
    """Cycle cost per mnemonic. Traditional-lane ops pay ``T.overhead`` extra."""

    entries: Mapping[str, int] = field(default_factory=_default_costs)

    def __post_init__(self) -> None:
        unknown = set(self.entries) - KNOWN_COST_KEYS
        if unknown:
            raise InvalidCostTable(f"unknown cost keys: {sorted(unknown)}")
        for k, v in self.entries.items():
            if not isinstance(v, int) or isinstance(v, bool) or (v <= 0 and k != TRAD_OVERHEAD_KEY) or v < 0:
                raise InvalidCostTable(f"cost of {k} must be a positive integer, got {v!r}")
        if self.entries.get("CONV", 1) != 1:
            raise InvalidCostTable("CONV executes in exactly 1 cycle")
        add, div = self.entries.get("ADD.in"), self.entries.get("DIV.ft")
        if add is not None and div is not None and not add < div:
            raise InvalidCostTable("cost(ADD.in) must be below cost(DIV.ft)")

    @classmethod
    def default(cls) -> "CostTable":
        return cls()

    @classmethod
    def with_overrides(cls, overrides: Mapping[str, int]) -> "CostTable":
        entries = _default_costs()
        unknown = set(overrides) - KNOWN_COST_KEYS
        if unknown:
            raise InvalidCostTable(f"unknown cost keys: {sorted(unknown)}")
        entries.update(overrides)
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "CostTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise InvalidCostTable("cost table file must hold a JSON object")
        return cls.with_overrides(data)

    def __getitem__(self, mnemonic: str) -> int:
        try:
            return self.entries[mnemonic]
        except KeyError:
            raise MissingCostEntry(mnemonic) from None

    @property
    def overhead(self) -> int:
        return self.entries.get(TRAD_OVERHEAD_KEY, 0)

    def traditional(self, mnemonic: str) -> int:
        """Cost of running ``mnemonic`` on the traditional lane."""
        return self[mnemonic] + self.overhead


def instruction_cost(instr: Instruction, table: CostTable) -> int:
    """Scalar cycle cost of one instruction."""
    op = instr.opcode
    if isinstance(op, BaseOp) and op not in FLOW_OPS:
        return table.traditional(op.value)
    return table[op.value]
