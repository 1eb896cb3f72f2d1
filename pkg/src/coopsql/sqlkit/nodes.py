"""AST node types for single SELECT statements, plus the deterministic renderer.

Nodes are frozen dataclasses, so structural equality doubles as AST equality
in round-trip tests. ``render`` is the inverse of parsing: for any tree built
by the parser, ``parse(render(tree)) == tree``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .lexer import KEYWORDS

# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Column:
    table: Optional[str]
    name: str


@dataclass(frozen=True)
class Star:
    table: Optional[str] = None


@dataclass(frozen=True)
class Literal:
    value: str
    kind: str  # number | string | null | bool


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple["Expr", ...]
    distinct: bool = False


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Unary:
    op: str  # '-', '+', 'not'
    operand: "Expr"


@dataclass(frozen=True)
class Between:
    expr: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class InList:
    expr: "Expr"
    items: tuple["Expr", ...]
    negated: bool = False


@dataclass(frozen=True)
class InSubquery:
    expr: "Expr"
    query: "SelectStmt"
    negated: bool = False


@dataclass(frozen=True)
class Exists:
    query: "SelectStmt"
    negated: bool = False


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class Case:
    operand: Optional["Expr"]
    whens: tuple[tuple["Expr", "Expr"], ...]
    else_: Optional["Expr"] = None


@dataclass(frozen=True)
class Cast:
    expr: "Expr"
    type_name: str


@dataclass(frozen=True)
class ScalarSubquery:
    query: "SelectStmt"


Expr = Union[
    Column, Star, Literal, FuncCall, Binary, Unary, Between, InList,
    InSubquery, Exists, IsNull, Case, Cast, ScalarSubquery,
]

# -- clauses -----------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class TableSource:
    name: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class SubquerySource:
    query: "SelectStmt"
    alias: Optional[str] = None


Source = Union[TableSource, SubquerySource]


@dataclass(frozen=True)
class Join:
    kind: str  # 'join' | 'inner join' | 'left join' | 'left outer join' | 'cross join' | ','
    source: Source
    on: Optional[Expr] = None


@dataclass(frozen=True)
class FromClause:
    base: Source
    joins: tuple[Join, ...] = ()

    @property
    def sources(self) -> tuple[Source, ...]:
        return (self.base, *(j.source for j in self.joins))


@dataclass(frozen=True)
class SelectCore:
    projections: tuple[Projection, ...]
    distinct: bool = False
    from_clause: Optional[FromClause] = None
    where: Optional[Expr] = None
    group_by: tuple[Expr, ...] = ()
    having: Optional[Expr] = None


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    desc: bool = False


@dataclass(frozen=True)
class Compound:
    op: str  # 'union' | 'union all' | 'intersect' | 'except'
    core: SelectCore


@dataclass(frozen=True)
class SelectStmt:
    core: SelectCore
    compounds: tuple[Compound, ...] = ()
    order_by: tuple[OrderItem, ...] = ()
    limit: Optional[Expr] = None


# -- rendering ---------------------------------------------------------------

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_CMP = 4
_PREC_ADD = 5
_PREC_MUL = 6
_PREC_UNARY = 7
_PREC_PRIMARY = 8

_BINARY_PREC = {
    "or": _PREC_OR,
    "and": _PREC_AND,
    "=": _PREC_CMP, "==": _PREC_CMP, "!=": _PREC_CMP, "<>": _PREC_CMP,
    "<": _PREC_CMP, ">": _PREC_CMP, "<=": _PREC_CMP, ">=": _PREC_CMP,
    "like": _PREC_CMP, "not like": _PREC_CMP,
    "+": _PREC_ADD, "-": _PREC_ADD, "||": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL, "%": _PREC_MUL,
}

_WORD = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _ident(name: str, lowercase: bool) -> str:
    out = name.lower() if lowercase else name
    if _WORD.match(out) and out.lower() not in KEYWORDS:
        return out
    return '"' + out.replace('"', '""') + '"'


def _kw(word: str, lowercase: bool) -> str:
    return word.lower() if lowercase else word.upper()


def expr_precedence(node: Expr) -> int:
    if isinstance(node, Binary):
        return _BINARY_PREC[node.op]
    if isinstance(node, Unary):
        return _PREC_NOT if node.op == "not" else _PREC_UNARY
    if isinstance(node, (Between, InList, InSubquery, IsNull)):
        return _PREC_CMP
    return _PREC_PRIMARY


def render(node, lowercase: bool = False) -> str:
    """Deterministic SQL text for any AST node."""
    return _Renderer(lowercase).any(node)


class _Renderer:
    def __init__(self, lowercase: bool):
        self.lower = lowercase

    def any(self, node) -> str:
        if isinstance(node, SelectStmt):
            return self.statement(node)
        if isinstance(node, SelectCore):
            return self.core(node)
        return self.expr(node)

    # expressions

    def expr(self, node: Expr) -> str:
        kw = lambda w: _kw(w, self.lower)
        if isinstance(node, Column):
            name = _ident(node.name, self.lower)
            if node.table:
                return f"{_ident(node.table, self.lower)}.{name}"
            return name
        if isinstance(node, Star):
            if node.table:
                return f"{_ident(node.table, self.lower)}.*"
            return "*"
        if isinstance(node, Literal):
            if node.kind == "string":
                return "'" + node.value.replace("'", "''") + "'"
            if node.kind == "null":
                return kw("NULL")
            if node.kind == "bool":
                return kw(node.value.upper())
            return node.value
        if isinstance(node, FuncCall):
            name = node.name.lower() if self.lower else node.name
            args = ", ".join(self.expr(a) for a in node.args)
            if node.distinct:
                return f"{name}({kw('DISTINCT')} {args})"
            return f"{name}({args})"
        if isinstance(node, Binary):
            prec = _BINARY_PREC[node.op]
            left = self.wrap(node.left, prec, allow_equal=True)
            right = self.wrap(node.right, prec, allow_equal=False)
            op = kw(node.op.upper()) if node.op in ("and", "or", "like", "not like") else node.op
            return f"{left} {op} {right}"
        if isinstance(node, Unary):
            if node.op == "not":
                return f"{kw('NOT')} {self.wrap(node.operand, _PREC_NOT, allow_equal=True)}"
            return f"{node.op}{self.wrap(node.operand, _PREC_UNARY, allow_equal=True)}"
        if isinstance(node, Between):
            head = self.wrap(node.expr, _PREC_CMP, allow_equal=False)
            word = kw("NOT BETWEEN") if node.negated else kw("BETWEEN")
            low = self.wrap(node.low, _PREC_ADD, allow_equal=True)
            high = self.wrap(node.high, _PREC_ADD, allow_equal=True)
            return f"{head} {word} {low} {kw('AND')} {high}"
        if isinstance(node, InList):
            head = self.wrap(node.expr, _PREC_CMP, allow_equal=False)
            word = kw("NOT IN") if node.negated else kw("IN")
            return f"{head} {word} ({', '.join(self.expr(i) for i in node.items)})"
        if isinstance(node, InSubquery):
            head = self.wrap(node.expr, _PREC_CMP, allow_equal=False)
            word = kw("NOT IN") if node.negated else kw("IN")
            return f"{head} {word} ({self.statement(node.query)})"
        if isinstance(node, Exists):
            word = kw("NOT EXISTS") if node.negated else kw("EXISTS")
            return f"{word} ({self.statement(node.query)})"
        if isinstance(node, IsNull):
            head = self.wrap(node.expr, _PREC_CMP, allow_equal=False)
            word = kw("IS NOT NULL") if node.negated else kw("IS NULL")
            return f"{head} {word}"
        if isinstance(node, Case):
            parts = [kw("CASE")]
            if node.operand is not None:
                parts.append(self.expr(node.operand))
            for cond, result in node.whens:
                parts.append(f"{kw('WHEN')} {self.expr(cond)} {kw('THEN')} {self.expr(result)}")
            if node.else_ is not None:
                parts.append(f"{kw('ELSE')} {self.expr(node.else_)}")
            parts.append(kw("END"))
            return " ".join(parts)
        if isinstance(node, Cast):
            tname = node.type_name.lower() if self.lower else node.type_name
            return f"{kw('CAST')}({self.expr(node.expr)} {kw('AS')} {tname})"
        if isinstance(node, ScalarSubquery):
            return f"({self.statement(node.query)})"
        raise TypeError(f"cannot render {type(node).__name__}")

    def wrap(self, node: Expr, parent_prec: int, allow_equal: bool) -> str:
        prec = expr_precedence(node)
        text = self.expr(node)
        if prec < parent_prec or (prec == parent_prec and not allow_equal):
            return f"({text})"
        return text

    # clauses

    def source(self, src: Source) -> str:
        kw = lambda w: _kw(w, self.lower)
        if isinstance(src, TableSource):
            text = _ident(src.name, self.lower)
        else:
            text = f"({self.statement(src.query)})"
        if src.alias:
            return f"{text} {kw('AS')} {_ident(src.alias, self.lower)}"
        return text

    def core(self, core: SelectCore) -> str:
        kw = lambda w: _kw(w, self.lower)
        parts = [kw("SELECT")]
        if core.distinct:
            parts.append(kw("DISTINCT"))
        projs = []
        for p in core.projections:
            text = self.expr(p.expr)
            if p.alias:
                text += f" {kw('AS')} {_ident(p.alias, self.lower)}"
            projs.append(text)
        parts.append(", ".join(projs))
        if core.from_clause is not None:
            parts.append(kw("FROM"))
            parts.append(self.source(core.from_clause.base))
            for join in core.from_clause.joins:
                if join.kind == ",":
                    parts[-1] += ","
                    parts.append(self.source(join.source))
                else:
                    parts.append(kw(join.kind.upper()))
                    parts.append(self.source(join.source))
                if join.on is not None:
                    parts.append(kw("ON"))
                    parts.append(self.expr(join.on))
        if core.where is not None:
            parts.append(kw("WHERE"))
            parts.append(self.expr(core.where))
        if core.group_by:
            parts.append(kw("GROUP BY"))
            parts.append(", ".join(self.expr(e) for e in core.group_by))
        if core.having is not None:
            parts.append(kw("HAVING"))
            parts.append(self.expr(core.having))
        return " ".join(parts)

    def statement(self, stmt: SelectStmt) -> str:
        kw = lambda w: _kw(w, self.lower)
        parts = [self.core(stmt.core)]
        for comp in stmt.compounds:
            parts.append(kw(comp.op.upper()))
            parts.append(self.core(comp.core))
        if stmt.order_by:
            items = []
            for item in stmt.order_by:
                text = self.expr(item.expr)
                if item.desc:
                    text += f" {kw('DESC')}"
                items.append(text)
            parts.append(kw("ORDER BY"))
            parts.append(", ".join(items))
        if stmt.limit is not None:
            parts.append(kw("LIMIT"))
            parts.append(self.expr(stmt.limit))
        return " ".join(parts)
