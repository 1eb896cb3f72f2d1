"""Recursive-descent parser for single SELECT statements.

Covers the dialect subset found in text-to-SQL benchmark gold queries:
joins, filters, grouping, ordering, set operations, subqueries, CASE and
CAST. Anything else (DDL, DML, vendor extensions, multiple statements) is
a syntax error with the offending position.
"""

from __future__ import annotations

from ..errors import SqlSyntaxError
from .lexer import Token, tokenize
from .nodes import (
    Between, Binary, Case, Cast, Column, Compound, Exists, FromClause,
    FuncCall, InList, InSubquery, IsNull, Join, Literal, OrderItem,
    Projection, ScalarSubquery, SelectCore, SelectStmt, Source, Star,
    SubquerySource, TableSource, Unary,
)

_CMP_OPS = ("=", "==", "!=", "<>", "<", ">", "<=", ">=")


def parse_sql(text: str) -> SelectStmt:
    """Parse one SELECT statement; reject anything else."""
    if not text or not text.strip():
        raise SqlSyntaxError("empty SQL text", 0, 1)
    parser = _Parser(tokenize(text))
    stmt = parser.statement()
    if parser.cur.kind == "symbol" and parser.cur.text == ";":
        parser.advance()
    if parser.cur.kind != "eof":
        raise SqlSyntaxError(
            "multiple statements are not supported" if parser.cur.text.lower() in
            ("select", "drop", "insert", "update", "delete", "create")
            else f"unexpected trailing input {parser.cur.text!r}",
            parser.cur.pos, parser.cur.index,
        )
    return stmt


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.text in words

    def take_keyword(self, *words: str) -> bool:
        if self.at_keyword(*words):
            self.advance()
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.take_keyword(word):
            self.fail(f"expected {word.upper()}")

    def at_symbol(self, *symbols: str) -> bool:
        return self.cur.kind == "symbol" and self.cur.text in symbols

    def take_symbol(self, *symbols: str) -> bool:
        if self.at_symbol(*symbols):
            self.advance()
            return True
        return False

    def expect_symbol(self, symbol: str) -> None:
        if not self.take_symbol(symbol):
            self.fail(f"expected {symbol!r}")

    def expect_ident(self, what: str = "identifier") -> str:
        if self.cur.kind != "ident":
            self.fail(f"expected {what}")
        return self.advance().text

    def fail(self, message: str):
        tok = self.cur
        found = tok.text if tok.kind != "eof" else "end of input"
        raise SqlSyntaxError(f"{message}, found {found!r}", tok.pos, tok.index)

    # -- statements ----------------------------------------------------------

    def statement(self) -> SelectStmt:
        core = self.select_core()
        compounds = []
        while self.at_keyword("union", "intersect", "except"):
            op = self.advance().text
            if op == "union" and self.take_keyword("all"):
                op = "union all"
            compounds.append(Compound(op, self.select_core()))
        order_by: tuple[OrderItem, ...] = ()
        if self.take_keyword("order"):
            self.expect_keyword("by")
            items = [self.order_item()]
            while self.take_symbol(","):
                items.append(self.order_item())
            order_by = tuple(items)
        limit = None
        if self.take_keyword("limit"):
            limit = self.additive()
        return SelectStmt(core, tuple(compounds), order_by, limit)

    def order_item(self) -> OrderItem:
        expr = self.expr()
        if self.take_keyword("desc"):
            return OrderItem(expr, desc=True)
        self.take_keyword("asc")
        return OrderItem(expr)

    def select_core(self) -> SelectCore:
        if not self.take_keyword("select"):
            self.fail("expected SELECT")
        distinct = False
        if self.take_keyword("distinct"):
            distinct = True
        else:
            self.take_keyword("all")
        projections = [self.projection()]
        while self.take_symbol(","):
            projections.append(self.projection())
        from_clause = None
        if self.take_keyword("from"):
            from_clause = self.from_clause()
        where = self.expr() if self.take_keyword("where") else None
        group_by: tuple = ()
        if self.take_keyword("group"):
            self.expect_keyword("by")
            exprs = [self.expr()]
            while self.take_symbol(","):
                exprs.append(self.expr())
            group_by = tuple(exprs)
        having = self.expr() if self.take_keyword("having") else None
        return SelectCore(tuple(projections), distinct, from_clause, where, group_by, having)

    def projection(self) -> Projection:
        if self.at_symbol("*"):
            self.advance()
            return Projection(Star())
        if (
            self.cur.kind == "ident"
            and self.peek().kind == "symbol" and self.peek().text == "."
            and self.peek(2).kind == "symbol" and self.peek(2).text == "*"
        ):
            table = self.advance().text
            self.advance()
            self.advance()
            return Projection(Star(table))
        expr = self.expr()
        alias = None
        if self.take_keyword("as"):
            alias = self.expect_ident("alias")
        elif self.cur.kind == "ident":
            alias = self.advance().text
        return Projection(expr, alias)

    # -- FROM ----------------------------------------------------------------

    def from_clause(self) -> FromClause:
        base = self.source()
        joins = []
        while True:
            if self.take_symbol(","):
                joins.append(Join(",", self.source()))
                continue
            kind = self.join_kind()
            if kind is None:
                break
            source = self.source()
            on = self.expr() if self.take_keyword("on") else None
            joins.append(Join(kind, source, on))
        return FromClause(base, tuple(joins))

    def join_kind(self) -> str | None:
        if self.take_keyword("join"):
            return "join"
        if self.at_keyword("inner") and self.peek().text == "join":
            self.advance(); self.advance()
            return "inner join"
        if self.at_keyword("cross") and self.peek().text == "join":
            self.advance(); self.advance()
            return "cross join"
        if self.at_keyword("left"):
            self.advance()
            if self.take_keyword("outer"):
                self.expect_keyword("join")
                return "left outer join"
            self.expect_keyword("join")
            return "left join"
        return None

    def source(self) -> Source:
        if self.take_symbol("("):
            query = self.statement()
            self.expect_symbol(")")
            alias = self.source_alias()
            return SubquerySource(query, alias)
        name = self.expect_ident("table name")
        return TableSource(name, self.source_alias())

    def source_alias(self) -> str | None:
        if self.take_keyword("as"):
            return self.expect_ident("alias")
        if self.cur.kind == "ident":
            return self.advance().text
        return None

    # -- expressions ---------------------------------------------------------

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        node = self.and_expr()
        while self.take_keyword("or"):
            node = Binary("or", node, self.and_expr())
        return node

    def and_expr(self):
        node = self.not_expr()
        while self.take_keyword("and"):
            node = Binary("and", node, self.not_expr())
        return node

    def not_expr(self):
        if self.at_keyword("not"):
            if self.peek().text == "exists":
                self.advance()
                return self.exists(negated=True)
            self.advance()
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self):
        node = self.additive()
        if self.at_symbol(*_CMP_OPS):
            op = self.advance().text
            return Binary(op, node, self.additive())
        negated = False
        if self.at_keyword("not") and self.peek().text in ("like", "in", "between"):
            self.advance()
            negated = True
        if self.take_keyword("like"):
            return Binary("not like" if negated else "like", node, self.additive())
        if self.take_keyword("between"):
            low = self.additive()
            self.expect_keyword("and")
            return Between(node, low, self.additive(), negated)
        if self.take_keyword("in"):
            self.expect_symbol("(")
            if self.at_keyword("select"):
                query = self.statement()
                self.expect_symbol(")")
                return InSubquery(node, query, negated)
            items = [self.expr()]
            while self.take_symbol(","):
                items.append(self.expr())
            self.expect_symbol(")")
            return InList(node, tuple(items), negated)
        if negated:
            self.fail("expected LIKE, IN or BETWEEN after NOT")
        if self.take_keyword("is"):
            neg = self.take_keyword("not")
            self.expect_keyword("null")
            return IsNull(node, neg)
        return node

    def additive(self):
        node = self.multiplicative()
        while self.at_symbol("+", "-", "||"):
            op = self.advance().text
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self):
        node = self.unary()
        while self.at_symbol("*", "/", "%"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.at_symbol("-", "+"):
            op = self.advance().text
            return Unary(op, self.unary())
        return self.primary()

    def exists(self, negated: bool) -> Exists:
        self.expect_keyword("exists")
        self.expect_symbol("(")
        query = self.statement()
        self.expect_symbol(")")
        return Exists(query, negated)

    def primary(self):
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return Literal(tok.text, "number")
        if tok.kind == "string":
            self.advance()
            return Literal(tok.text, "string")
        if self.take_keyword("null"):
            return Literal("null", "null")
        if self.at_keyword("true", "false"):
            return Literal(self.advance().text, "bool")
        if self.at_keyword("exists"):
            return self.exists(negated=False)
        if self.at_keyword("case"):
            return self.case_expr()
        if self.at_keyword("cast"):
            self.advance()
            self.expect_symbol("(")
            inner = self.expr()
            self.expect_keyword("as")
            type_name = self.expect_ident("type name")
            self.expect_symbol(")")
            return Cast(inner, type_name)
        if self.take_symbol("("):
            if self.at_keyword("select"):
                query = self.statement()
                self.expect_symbol(")")
                return ScalarSubquery(query)
            inner = self.expr()
            self.expect_symbol(")")
            return inner
        if tok.kind == "ident":
            if self.peek().kind == "symbol" and self.peek().text == "(":
                return self.func_call()
            name = self.advance().text
            if self.take_symbol("."):
                return Column(name, self.expect_ident("column name"))
            return Column(None, name)
        self.fail("expected an expression")

    def func_call(self) -> FuncCall:
        name = self.advance().text
        self.expect_symbol("(")
        distinct = self.take_keyword("distinct")
        if self.take_symbol("*"):
            args: tuple = (Star(),)
        elif self.at_symbol(")"):
            args = ()
        else:
            items = [self.expr()]
            while self.take_symbol(","):
                items.append(self.expr())
            args = tuple(items)
        self.expect_symbol(")")
        return FuncCall(name, args, distinct)

    def case_expr(self) -> Case:
        self.expect_keyword("case")
        operand = None
        if not self.at_keyword("when"):
            operand = self.expr()
        whens = []
        while self.take_keyword("when"):
            cond = self.expr()
            self.expect_keyword("then")
            whens.append((cond, self.expr()))
        if not whens:
            self.fail("CASE needs at least one WHEN")
        else_ = self.expr() if self.take_keyword("else") else None
        self.expect_keyword("end")
        return Case(operand, tuple(whens), else_)
