"""MiniC frontend: parser, type checker and lowering to IR."""

from .ast import walk
from .ir import IRProgram, IROp, VReg, flow_ops
from .lower import LowerOptions, lower
from .parser import FrontendError, MiniCSyntaxError, UnsupportedConstruct, parse_minic
from .typecheck import (
    ArityMismatch,
    InvalidOperands,
    NonSdtArithmetic,
    NotAssignable,
    Redeclaration,
    TypeCheckError,
    UndeclaredVariable,
    type_check,
)
from .types import Ty, result_type


def compile_source(source: str, options: LowerOptions | None = None) -> IRProgram:
    """Parse, type-check and lower MiniC source text."""
    return lower(type_check(parse_minic(source)), options)


__all__ = [
    "ArityMismatch",
    "FrontendError",
    "IROp",
    "IRProgram",
    "InvalidOperands",
    "LowerOptions",
    "MiniCSyntaxError",
    "NonSdtArithmetic",
    "NotAssignable",
    "Redeclaration",
    "Ty",
    "TypeCheckError",
    "UndeclaredVariable",
    "UnsupportedConstruct",
    "VReg",
    "compile_source",
    "flow_ops",
    "lower",
    "parse_minic",
    "result_type",
    "type_check",
    "walk",
]
