"""AST node definitions and the canonical pretty-printer.

Position fields never participate in equality so that a pretty-print /
re-parse round trip compares structurally equal.
"""

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Node:
    line: int = field(compare=False, repr=False, kw_only=True, default=0)
    column: int = field(compare=False, repr=False, kw_only=True, default=0)


# --- expressions ---


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class RealLit(Node):
    value: float


@dataclass(frozen=True)
class StrLit(Node):
    value: str


@dataclass(frozen=True)
class Name(Node):
    name: str


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Index(Node):
    base: "Expr"
    index: "Expr"


@dataclass(frozen=True)
class Accessor(Node):
    """A.localblocks, A.localblockid[j], A[bid].low, A[bid].high"""

    base: "Expr"
    which: str  # localblocks | localblockid | low | high
    arg: Optional["Expr"]


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple


Expr = Union[IntLit, RealLit, StrLit, Name, BinOp, Index, Accessor, Call]


# --- type expressions ---


@dataclass(frozen=True)
class TypeApp(Node):
    """One constructor application: name plus bracketed arguments.

    An argument is either an expression or a nested TypeExpr chain.
    `has_args` distinguishes `async` (no brackets) from `row[]`.
    """

    ctor: str
    args: tuple
    has_args: bool


@dataclass(frozen=True)
class TypeExpr(Node):
    """A `::`-joined sequence of constructor applications, left to right."""

    apps: tuple


# --- statements ---


@dataclass(frozen=True)
class VarDecl(Node):
    name: str
    type_expr: Optional[TypeExpr]
    init: Optional[Expr]


@dataclass(frozen=True)
class Assign(Node):
    target: Expr  # Name or Index chains; validated by the checker
    value: Expr


@dataclass(frozen=True)
class For(Node):
    var: str
    start: Expr
    stop: Expr  # inclusive
    body: tuple


@dataclass(frozen=True)
class ProcBlock(Node):
    rank: Expr
    body: tuple


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr


@dataclass(frozen=True)
class Sync(Node):
    var: Optional[str]


@dataclass(frozen=True)
class Param(Node):
    name: str
    type_expr: TypeExpr


@dataclass(frozen=True)
class FuncDef(Node):
    name: str
    params: tuple
    body: tuple


Stmt = Union[VarDecl, Assign, For, ProcBlock, ExprStmt, Sync, FuncDef]


@dataclass(frozen=True)
class Program(Node):
    statements: tuple


# --- pretty printing ---

_PRECEDENCE = {
    "==": 1, "!=": 1, "<": 1, "<=": 1, ">": 1, ">=": 1,
    "+": 2, "-": 2,
    "*": 3, "/": 3,
}


def _fmt_expr(e, parent_prec=0):
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, RealLit):
        return repr(e.value)
    if isinstance(e, StrLit):
        return '"' + e.value + '"'
    if isinstance(e, Name):
        return e.name
    if isinstance(e, BinOp):
        prec = _PRECEDENCE[e.op]
        s = f"{_fmt_expr(e.left, prec)} {e.op} {_fmt_expr(e.right, prec + 1)}"
        return f"({s})" if prec < parent_prec else s
    if isinstance(e, Index):
        return f"{_fmt_expr(e.base, 99)}[{_fmt_expr(e.index)}]"
    if isinstance(e, Accessor):
        base = _fmt_expr(e.base, 99)
        if e.arg is not None:
            return f"{base}.{e.which}[{_fmt_expr(e.arg)}]"
        return f"{base}.{e.which}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(_fmt_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def _fmt_type_app(app):
    if not app.has_args:
        return app.ctor
    parts = []
    for a in app.args:
        if isinstance(a, TypeExpr):
            parts.append(format_type(a))
        else:
            parts.append(_fmt_expr(a))
    return f"{app.ctor}[{', '.join(parts)}]"


def format_type(te: TypeExpr) -> str:
    return " :: ".join(_fmt_type_app(a) for a in te.apps)


def _fmt_stmt(s, indent):
    pad = "    " * indent
    if isinstance(s, VarDecl):
        out = pad + "var " + s.name
        if s.type_expr is not None:
            out += " : " + format_type(s.type_expr)
        if s.init is not None:
            out += " := " + _fmt_expr(s.init)
        return out + ";"
    if isinstance(s, Assign):
        return f"{pad}{_fmt_expr(s.target)} := {_fmt_expr(s.value)};"
    if isinstance(s, For):
        head = f"{pad}for {s.var} from {_fmt_expr(s.start)} to {_fmt_expr(s.stop)}"
        if len(s.body) == 1 and not isinstance(s.body[0], (For, ProcBlock)):
            return head + " " + _fmt_stmt(s.body[0], 0)
        return head + " " + _fmt_block(s.body, indent) + ";"
    if isinstance(s, ProcBlock):
        return f"{pad}proc {_fmt_expr(s.rank)} " + _fmt_block(s.body, indent) + ";"
    if isinstance(s, ExprStmt):
        return f"{pad}{_fmt_expr(s.expr)};"
    if isinstance(s, Sync):
        return f"{pad}sync{' ' + s.var if s.var else ''};"
    if isinstance(s, FuncDef):
        params = ", ".join(f"{p.name} : {format_type(p.type_expr)}" for p in s.params)
        return f"{pad}function {s.name}({params}) " + _fmt_block(s.body, indent)
    raise TypeError(f"not a statement: {s!r}")


def _fmt_block(body, indent):
    if not body:
        return "{ }"
    inner = "\n".join(_fmt_stmt(s, indent + 1) for s in body)
    return "{\n" + inner + "\n" + "    " * indent + "}"


def format_program(program: Program) -> str:
    return "\n".join(_fmt_stmt(s, 0) for s in program.statements) + "\n"
