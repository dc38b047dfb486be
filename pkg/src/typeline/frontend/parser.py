"""Recursive-descent parser for MiniC.

Grammar (EBNF)::

    program    = { struct_def | enum_def | typedef | function | statement } ;
    struct_def = "struct" IDENT "{" { type_spec declarator ";" } "}" ";" ;
    enum_def   = "enum" IDENT "{" IDENT [ "=" ["-"] INT ] { "," IDENT [ "=" ["-"] INT ] } "}" ";" ;
    typedef    = "typedef" type_spec [ "*" ] IDENT ";" ;
    function   = type_spec [ "*" ] IDENT "(" [ param { "," param } ] ")" block ;
    param      = type_spec [ "*" ] IDENT [ "[" "]" ] ;
    type_spec  = { "static" | "const" | "unsigned" }
                 ( "int" | "float" | "double" | "long" | "char" | "void"
                 | "struct" IDENT | "enum" IDENT | TYPEDEF_NAME ) ;
    declaration= type_spec declarator { "," declarator } ";" ;
    declarator = [ "*" ] IDENT [ "[" [ INT ] "]" ] [ "=" ( expr | "{" expr { "," expr } "}" ) ] ;
    statement  = block | declaration | if | for | while
               | "return" [ expr ] ";" | "break" ";" | "continue" ";"
               | "delete" expr ";" | simple ";" | ";" ;
    if         = "if" "(" expr ")" statement [ "else" statement ] ;
    for        = "for" "(" [ declaration_nosemi | simple ] ";" [ expr ] ";" [ simple ] ")" statement ;
    while      = "while" "(" expr ")" statement ;
    simple     = lvalue assign_op expr | lvalue ( "++" | "--" ) | ( "++" | "--" ) lvalue | expr ;
    expr       = C operator precedence over || && | ^ & == != < <= > >= << >> + - * / %
                 unary ( - ! ~ * & ) postfix ( [] . () ) ;
    primary    = INT | FLOAT | CHAR | IDENT | "(" expr ")" | "new" type_spec "[" expr "]" ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast as A


class FrontendError(Exception):
    def __init__(self, message: str, pos=(0, 0)):
        self.pos = pos
        self.message = message
        super().__init__(f"{pos[0]}:{pos[1]}: {message}")


class MiniCSyntaxError(FrontendError):
    pass


class UnsupportedConstruct(FrontendError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # int float char ident kw op eof
    text: str
    pos: tuple


KEYWORDS = frozenset(
    "int float double long char void struct enum typedef static const unsigned "
    "if else for while return break continue new delete".split()
)
UNSUPPORTED_WORDS = frozenset(
    "goto switch case default do sizeof class template union short signed volatile "
    "extern register auto inline namespace using public private protected this "
    "operator try catch throw virtual bool typename friend".split()
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*|/\*.*?\*/)
  | (?P<float>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fF]?|\d+[eE][+-]?\d+[fF]?)
  | (?P<int>0[xX][0-9a-fA-F]+[lL]?|\d+[lL]?)
  | (?P<char>'(?:\\.|[^\\'\n])')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<=|>>=|->|::|\+\+|--|\+=|-=|\*=|/=|%=|&=|\|=|\^=|&&|\|\||==|!=|<=|>=|<<|>>|[-+*/%&|^~!<>=()\[\]{};,.?:\#])
    """,
    re.VERBOSE | re.DOTALL,
)
_UNSUPPORTED_OPS = frozenset({"->", "::", "?", ":", "#"})
_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise UnsupportedConstruct(f"unexpected character {source[pos]!r}", (line, col))
        kind = m.lastgroup
        text = m.group()
        if kind == "op" and text in _UNSUPPORTED_OPS:
            raise UnsupportedConstruct(f"operator {text!r} is not part of MiniC", (line, col))
        if kind == "ident":
            if text in UNSUPPORTED_WORDS:
                raise UnsupportedConstruct(f"'{text}' is not part of MiniC", (line, col))
            if text in KEYWORDS:
                kind = "kw"
        if kind != "ws":
            tokens.append(Token(kind, text, (line, col)))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", (line, pos - line_start + 1)))
    return tokens


_BINARY_PREC = {
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "<<": 8,
    ">>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}
ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>=".split())
_TYPE_WORDS = frozenset("int float double long char void struct enum static const unsigned".split())


class Parser:
    """Single-use parser over one source text."""

    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        self.typedef_names: set[str] = set()

    # -- token helpers --
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise MiniCSyntaxError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise MiniCSyntaxError(f"expected identifier, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.advance()

    def starts_type(self) -> bool:
        t = self.tok
        if t.kind == "kw" and t.text in _TYPE_WORDS:
            return True
        return t.kind == "ident" and t.text in self.typedef_names

    # -- top level --
    def parse_program(self) -> A.Program:
        items = []
        start = self.tok.pos
        while self.tok.kind != "eof":
            items.extend(self.top_level())
        return A.Program(items, pos=start)

    def top_level(self) -> list:
        t = self.tok
        if self.at("typedef"):
            return [self.typedef()]
        if self.at("struct") and self.peek().kind == "ident" and self.peek(2).text == "{":
            return [self.struct_def()]
        if self.at("enum") and self.peek().kind == "ident" and self.peek(2).text == "{":
            return [self.enum_def()]
        if self.starts_type():
            save = self.i
            spec = self.type_spec()
            pointer = False
            if self.at("*"):
                self.advance()
                pointer = True
            if self.tok.kind == "ident" and self.peek().text == "(":
                return [self.function(spec, pointer)]
            self.i = save
        return [self.statement()]

    def typedef(self) -> A.TypedefDecl:
        pos = self.expect("typedef").pos
        spec = self.type_spec()
        pointer = False
        if self.at("*"):
            self.advance()
            pointer = True
        name = self.ident().text
        self.expect(";")
        self.typedef_names.add(name)
        return A.TypedefDecl(name, spec, pointer, pos=pos)

    def struct_def(self) -> A.StructDef:
        pos = self.expect("struct").pos
        name = self.ident().text
        self.expect("{")
        fields = []
        while not self.at("}"):
            spec = self.type_spec()
            while True:
                fields.append(self.declarator(spec, allow_init=False))
                if not self.at(","):
                    break
                self.advance()
            self.expect(";")
        self.expect("}")
        self.expect(";")
        return A.StructDef(name, fields, pos=pos)

    def enum_def(self) -> A.EnumDef:
        pos = self.expect("enum").pos
        name = self.ident().text
        self.expect("{")
        members = []
        value = 0
        while True:
            member = self.ident().text
            if self.at("="):
                self.advance()
                sign = 1
                if self.at("-"):
                    self.advance()
                    sign = -1
                if self.tok.kind != "int":
                    raise MiniCSyntaxError("enumerator value must be an integer literal", self.tok.pos)
                value = sign * _int_value(self.advance().text)
            members.append((member, value))
            value += 1
            if not self.at(","):
                break
            self.advance()
            if self.at("}"):
                break
        self.expect("}")
        self.expect(";")
        return A.EnumDef(name, members, pos=pos)

    def type_spec(self) -> A.TypeSpec:
        pos = self.tok.pos
        quals = []
        while self.at("static", "const", "unsigned"):
            quals.append(self.advance().text)
        t = self.tok
        if self.at("int", "float", "double", "long", "char", "void"):
            self.advance()
            base = t.text
            if base == "long" and self.at("int"):
                self.advance()
            return A.TypeSpec(base, None, tuple(quals), pos=pos)
        if self.at("struct", "enum"):
            self.advance()
            tag = self.ident().text
            return A.TypeSpec(t.text, tag, tuple(quals), pos=pos)
        if t.kind == "ident" and t.text in self.typedef_names:
            self.advance()
            return A.TypeSpec(t.text, None, tuple(quals), True, pos=pos)
        if "unsigned" in quals:
            return A.TypeSpec("int", None, tuple(quals), pos=pos)
        raise MiniCSyntaxError(f"expected a type, found {t.text or 'end of input'!r}", t.pos)

    def declarator(self, spec: A.TypeSpec, allow_init: bool = True) -> A.VarDecl:
        pos = self.tok.pos
        pointer = False
        if self.at("*"):
            self.advance()
            pointer = True
            if self.at("*"):
                raise UnsupportedConstruct("pointers to pointers are not part of MiniC", self.tok.pos)
        name = self.ident().text
        array_len = None
        if self.at("["):
            self.advance()
            if self.tok.kind == "int":
                array_len = _int_value(self.advance().text)
                if array_len <= 0:
                    raise MiniCSyntaxError("array length must be positive", pos)
            else:
                array_len = -1
            self.expect("]")
            if self.at("["):
                raise UnsupportedConstruct("multi-dimensional arrays are not part of MiniC", self.tok.pos)
        init = None
        if allow_init and self.at("="):
            self.advance()
            if self.at("{"):
                self.advance()
                init = [self.expr()]
                while self.at(","):
                    self.advance()
                    if self.at("}"):
                        break
                    init.append(self.expr())
                self.expect("}")
            else:
                init = self.expr()
        if array_len == -1:
            if not isinstance(init, list):
                raise MiniCSyntaxError(f"array {name} needs a length or an initializer list", pos)
            array_len = len(init)
        return A.VarDecl(spec, name, pointer, array_len, init, pos=pos)

    def declaration(self) -> A.DeclStmt:
        pos = self.tok.pos
        spec = self.type_spec()
        decls = [self.declarator(spec)]
        while self.at(","):
            self.advance()
            decls.append(self.declarator(spec))
        return A.DeclStmt(decls, pos=pos)

    def function(self, spec: A.TypeSpec, ret_pointer: bool) -> A.FuncDef:
        name_tok = self.ident()
        self.expect("(")
        params = []
        if self.at("void") and self.peek().text == ")":
            self.advance()
        while not self.at(")"):
            ppos = self.tok.pos
            pspec = self.type_spec()
            pointer = False
            if self.at("*"):
                self.advance()
                pointer = True
            pname = self.ident().text
            if self.at("["):
                self.advance()
                self.expect("]")
                pointer = True
            params.append(A.Param(pspec, pname, pointer, pos=ppos))
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        body = self.block()
        return A.FuncDef(name_tok.text, spec, params, body, ret_pointer, pos=spec.pos)

    # -- statements --
    def block(self) -> A.Block:
        pos = self.expect("{").pos
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise MiniCSyntaxError("unterminated block", pos)
            stmts.append(self.statement())
        self.expect("}")
        return A.Block(stmts, pos=pos)

    def statement(self) -> A.Stmt:
        t = self.tok
        pos = t.pos
        if self.at("{"):
            return self.block()
        if self.at(";"):
            self.advance()
            return A.Empty(pos=pos)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.statement()
            return A.If(cond, then, orelse, pos=pos)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return A.While(cond, self.statement(), pos=pos)
        if self.at("for"):
            self.advance()
            self.expect("(")
            init = None
            if not self.at(";"):
                init = self.declaration() if self.starts_type() else self.simple()
            self.expect(";")
            cond = None if self.at(";") else self.expr()
            self.expect(";")
            step = None if self.at(")") else self.simple()
            self.expect(")")
            return A.For(init, cond, step, self.statement(), pos=pos)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, pos=pos)
        if self.at("break"):
            self.advance()
            self.expect(";")
            return A.Break(pos=pos)
        if self.at("continue"):
            self.advance()
            self.expect(";")
            return A.Continue(pos=pos)
        if self.at("delete"):
            self.advance()
            if self.at("["):
                self.advance()
                self.expect("]")
            target = self.expr()
            self.expect(";")
            return A.Delete(target, pos=pos)
        if self.at("typedef", "struct", "enum") and not (self.at("struct", "enum") and self.peek(2).text != "{"):
            if self.at("typedef"):
                raise UnsupportedConstruct("typedef is only allowed at top level", pos)
            raise UnsupportedConstruct(f"{t.text} definitions are only allowed at top level", pos)
        if self.starts_type():
            d = self.declaration()
            self.expect(";")
            return d
        s = self.simple()
        self.expect(";")
        return s

    def simple(self) -> A.Stmt:
        pos = self.tok.pos
        if self.at("++", "--"):
            op = self.advance().text
            return A.IncDec(self.unary(), op, pos=pos)
        e = self.expr()
        if self.tok.kind == "op" and self.tok.text in ASSIGN_OPS:
            op = self.advance().text
            return A.Assign(e, op, self.expr(), pos=pos)
        if self.at("++", "--"):
            return A.IncDec(e, self.advance().text, pos=pos)
        return A.ExprStmt(e, pos=pos)

    # -- expressions --
    def expr(self) -> A.Expr:
        return self.logical_or()

    def logical_or(self) -> A.Expr:
        left = self.logical_and()
        while self.at("||"):
            pos = self.advance().pos
            left = A.Logical("||", left, self.logical_and(), pos=pos)
        return left

    def logical_and(self) -> A.Expr:
        left = self.binary(0)
        while self.at("&&"):
            pos = self.advance().pos
            left = A.Logical("&&", left, self.binary(0), pos=pos)
        return left

    def binary(self, min_prec: int) -> A.Expr:
        left = self.unary()
        while self.tok.kind == "op" and _BINARY_PREC.get(self.tok.text, -1) > min_prec:
            op_tok = self.advance()
            prec = _BINARY_PREC[op_tok.text]
            right = self.binary(prec)
            left = A.Binary(op_tok.text, left, right, pos=op_tok.pos)
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if self.at("-", "!", "~", "*", "&"):
            self.advance()
            return A.Unary(t.text, self.unary(), pos=t.pos)
        if self.at("+"):
            self.advance()
            return self.unary()
        if self.at("++", "--"):
            raise UnsupportedConstruct("increment inside an expression is not part of MiniC", t.pos)
        if self.at("(") and self.peek().kind == "kw" and self.peek().text in _TYPE_WORDS:
            raise UnsupportedConstruct("casts are not part of MiniC", t.pos)
        return self.postfix(self.primary())

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            if self.at("["):
                pos = self.advance().pos
                idx = self.expr()
                self.expect("]")
                e = A.Index(e, idx, pos=pos)
            elif self.at("."):
                pos = self.advance().pos
                e = A.Field(e, self.ident().text, pos=pos)
            elif self.at("("):
                if not isinstance(e, A.Name):
                    raise UnsupportedConstruct("only named functions can be called", self.tok.pos)
                self.advance()
                args = []
                while not self.at(")"):
                    args.append(self.expr())
                    if not self.at(","):
                        break
                    self.advance()
                self.expect(")")
                e = A.Call(e.id, args, pos=e.pos)
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(_int_value(t.text), t.text[-1] in "lL", pos=t.pos)
        if t.kind == "float":
            self.advance()
            is_float = t.text[-1] in "fF"
            return A.FloatLit(float(t.text.rstrip("fF")), is_float, pos=t.pos)
        if t.kind == "char":
            self.advance()
            body = t.text[1:-1]
            if body.startswith("\\"):
                if body[1] not in _ESCAPES:
                    raise MiniCSyntaxError(f"unknown escape {body!r}", t.pos)
                value = _ESCAPES[body[1]]
            else:
                value = ord(body)
            if value > 255:
                raise MiniCSyntaxError("character literal outside 8 bits", t.pos)
            return A.CharLit(value, pos=t.pos)
        if t.kind == "ident":
            self.advance()
            return A.Name(t.text, pos=t.pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("new"):
            self.advance()
            spec = self.type_spec()
            self.expect("[")
            count = self.expr()
            self.expect("]")
            return A.New(spec, count, pos=t.pos)
        raise MiniCSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos)


def _int_value(text: str) -> int:
    text = text.rstrip("lL")
    return int(text, 16) if text.lower().startswith("0x") else int(text)


def parse_minic(source: str) -> A.Program:
    """Parse MiniC source into an Ast; raises MiniCSyntaxError or UnsupportedConstruct."""
    return Parser(source).parse_program()
