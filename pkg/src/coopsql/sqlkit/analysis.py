"""Identifier resolution, schema checks, difficulty profiling, canonical form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..schema import ColumnRef, Schema, norm
from .nodes import (
    Between, Binary, Case, Cast, Column, Compound, Exists, FromClause,
    FuncCall, InList, InSubquery, IsNull, Join, Literal, OrderItem,
    Projection, ScalarSubquery, SelectCore, SelectStmt, Star, SubquerySource,
    TableSource, Unary, render,
)

AGGREGATE_FUNCTIONS = {"count", "sum", "avg", "min", "max", "total", "group_concat"}


@dataclass(frozen=True)
class Finding:
    """One mechanical problem discovered in a query."""

    kind: str  # missing_table | missing_column | ambiguous_column | parse_failure | semantic_doubt | hallucinated_identifier
    subject: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        return cls(data["kind"], data["subject"], data.get("detail", ""))


BLOCKING_FINDINGS = {"missing_table", "missing_column", "ambiguous_column", "parse_failure"}


@dataclass(frozen=True)
class ReferencedIdentifiers:
    """Tables and columns a query touches, aliases resolved to base tables."""

    tables: tuple[str, ...]
    columns: tuple[ColumnRef, ...]
    ambiguous: tuple[str, ...]  # bare columns that could belong to several sources


class _Scope:
    """Visible FROM sources for one SELECT core (innermost scope last)."""

    def __init__(self, parent: Optional["_Scope"]):
        self.parent = parent
        self.tables: list[tuple[str, Optional[str]]] = []  # (table name, alias)
        self.derived: list[str] = []  # subquery aliases

    def add_source(self, source) -> None:
        if isinstance(source, TableSource):
            self.tables.append((source.name, source.alias))
        elif isinstance(source, SubquerySource) and source.alias:
            self.derived.append(source.alias)

    def resolve_qualifier(self, qualifier: str) -> tuple[str, Optional[str]]:
        """Map a qualifier to ('table', base) / ('derived', alias) / ('unknown', qualifier)."""
        scope: Optional[_Scope] = self
        q = norm(qualifier)
        while scope is not None:
            for name, alias in scope.tables:
                if (alias is not None and norm(alias) == q) or (alias is None and norm(name) == q):
                    return ("table", name)
            for alias in scope.derived:
                if norm(alias) == q:
                    return ("derived", alias)
            scope = scope.parent
        return ("unknown", qualifier)

    def base_tables(self) -> list[str]:
        return [name for name, _ in self.tables]


class _Resolver:
    def __init__(self, schema: Optional[Schema]):
        self.schema = schema
        self.tables: dict[str, str] = {}  # norm -> display
        self.columns: dict[tuple[str, str], ColumnRef] = {}
        self.ambiguous: dict[str, str] = {}
        self.findings: list[Finding] = []

    def note_table(self, name: str) -> None:
        self.tables.setdefault(norm(name), name)

    def note_column(self, table: str, column: str) -> None:
        ref = ColumnRef(table, column)
        self.columns.setdefault(ref.key, ref)

    def finding(self, kind: str, subject: str, detail: str) -> None:
        f = Finding(kind, subject, detail)
        if f not in self.findings:
            self.findings.append(f)

    # -- traversal ------------------------------------------------------------

    def statement(self, stmt: SelectStmt, parent: Optional[_Scope]) -> None:
        scopes = [self.core(stmt.core, parent)]
        for comp in stmt.compounds:
            scopes.append(self.core(comp.core, parent))
        for item in stmt.order_by:
            self.expr(item.expr, scopes[0])
        if stmt.limit is not None:
            self.expr(stmt.limit, scopes[0])

    def core(self, core: SelectCore, parent: Optional[_Scope]) -> _Scope:
        scope = _Scope(parent)
        if core.from_clause is not None:
            for source in core.from_clause.sources:
                scope.add_source(source)
                if isinstance(source, TableSource):
                    self.note_table(source.name)
                    self.check_table(source.name)
                else:
                    self.statement(source.query, scope)
            for join in core.from_clause.joins:
                if join.on is not None:
                    self.expr(join.on, scope)
        for proj in core.projections:
            self.expr(proj.expr, scope)
        if core.where is not None:
            self.expr(core.where, scope)
        for e in core.group_by:
            self.expr(e, scope)
        if core.having is not None:
            self.expr(core.having, scope)
        return scope

    def expr(self, node, scope: _Scope) -> None:
        if isinstance(node, Column):
            self.column(node, scope)
        elif isinstance(node, Star):
            if node.table:
                kind, base = scope.resolve_qualifier(node.table)
                if kind == "table":
                    self.note_table(base)
                elif kind == "unknown":
                    self.note_table(node.table)
                    self.finding("missing_table", node.table, "qualifier does not match any FROM source")
        elif isinstance(node, Literal):
            pass
        elif isinstance(node, FuncCall):
            for a in node.args:
                self.expr(a, scope)
        elif isinstance(node, Binary):
            self.expr(node.left, scope)
            self.expr(node.right, scope)
        elif isinstance(node, Unary):
            self.expr(node.operand, scope)
        elif isinstance(node, Between):
            self.expr(node.expr, scope)
            self.expr(node.low, scope)
            self.expr(node.high, scope)
        elif isinstance(node, InList):
            self.expr(node.expr, scope)
            for item in node.items:
                self.expr(item, scope)
        elif isinstance(node, InSubquery):
            self.expr(node.expr, scope)
            self.statement(node.query, scope)
        elif isinstance(node, Exists):
            self.statement(node.query, scope)
        elif isinstance(node, IsNull):
            self.expr(node.expr, scope)
        elif isinstance(node, Case):
            if node.operand is not None:
                self.expr(node.operand, scope)
            for cond, result in node.whens:
                self.expr(cond, scope)
                self.expr(result, scope)
            if node.else_ is not None:
                self.expr(node.else_, scope)
        elif isinstance(node, Cast):
            self.expr(node.expr, scope)
        elif isinstance(node, ScalarSubquery):
            self.statement(node.query, scope)

    def column(self, node: Column, scope: _Scope) -> None:
        if node.table is not None:
            kind, base = scope.resolve_qualifier(node.table)
            if kind == "derived":
                return  # the derived table's own output, not a schema reference
            if kind == "unknown":
                self.note_table(node.table)
                self.note_column(node.table, node.name)
                self.finding("missing_table", node.table, "qualifier does not match any FROM source")
                return
            self.note_column(base, node.name)
            self.check_column(base, node.name)
            return
        # bare column: resolve among the innermost scope's table sources
        candidates = scope.base_tables()
        if self.schema is not None:
            with_col = [
                t for t in candidates
                if self.schema.table(t) is not None and self.schema.table(t).has_column(node.name)
            ]
            if len(with_col) == 1:
                self.note_column(with_col[0], node.name)
                return
            if len(with_col) > 1:
                self.ambiguous.setdefault(norm(node.name), node.name)
                self.finding(
                    "ambiguous_column", node.name,
                    "present in several FROM tables: " + ", ".join(sorted(with_col, key=norm)),
                )
                return
            if len(candidates) == 1:
                self.note_column(candidates[0], node.name)
                self.check_column(candidates[0], node.name)
                return
            self.finding("missing_column", node.name, "not found in any FROM table")
            return
        if len(candidates) == 1:
            self.note_column(candidates[0], node.name)
        elif candidates:
            self.ambiguous.setdefault(norm(node.name), node.name)

    # -- schema checks ---------------------------------------------------------

    def check_table(self, name: str) -> None:
        if self.schema is not None and not self.schema.has_table(name):
            self.finding("missing_table", name, "table not present in schema")

    def check_column(self, table: str, column: str) -> None:
        if self.schema is None:
            return
        tdef = self.schema.table(table)
        if tdef is not None and not tdef.has_column(column):
            self.finding("missing_column", f"{table}.{column}", f"table {table} has no column {column}")


def referenced_identifiers(ast: SelectStmt, schema: Schema | None = None) -> ReferencedIdentifiers:
    """Every table and column the query touches, with aliases resolved.

    Bare columns are attributed to their table when only one FROM source can
    own them (or when `schema` pins them down); otherwise they are reported
    as ambiguous rather than guessed.
    """
    resolver = _Resolver(schema)
    resolver.statement(ast, None)
    return ReferencedIdentifiers(
        tables=tuple(resolver.tables.values()),
        columns=tuple(resolver.columns.values()),
        ambiguous=tuple(resolver.ambiguous.values()),
    )


def semantic_check(ast: SelectStmt, schema: Schema) -> tuple[Finding, ...]:
    """Mechanical screen: unresolved tables/columns and ambiguous bare columns.

    An empty result means the query resolves cleanly against the schema.
    """
    resolver = _Resolver(schema)
    resolver.statement(ast, None)
    return tuple(resolver.findings)


# -- difficulty ----------------------------------------------------------------


@dataclass(frozen=True)
class StructuralProfile:
    join_table_count: int
    nesting_depth: int
    has_set_operation: bool
    aggregate_count: int
    selected_column_count: int


DIFFICULTY_RUBRIC = (
    "easy: single table, no nesting or set ops, at most one aggregate; "
    "medium: at most two tables, no nesting; "
    "hard: three or more joined tables, or one level of nesting; "
    "extra: nesting combined with joins, or any set operation"
)


def structural_profile(ast: SelectStmt) -> StructuralProfile:
    cores = [ast.core] + [c.core for c in ast.compounds]
    join_tables = max(
        (len([s for s in core.from_clause.sources if isinstance(s, TableSource)])
         if core.from_clause else 0)
        for core in cores
    )
    return StructuralProfile(
        join_table_count=join_tables,
        nesting_depth=_stmt_depth(ast) - 1,
        has_set_operation=bool(ast.compounds),
        aggregate_count=_count_aggregates(ast),
        selected_column_count=len(ast.core.projections),
    )


def _expr_depth(node) -> int:
    if isinstance(node, (ScalarSubquery, InSubquery, Exists)):
        return _stmt_depth(node.query)
    children = []
    if isinstance(node, Binary):
        children = [node.left, node.right]
    elif isinstance(node, Unary):
        children = [node.operand]
    elif isinstance(node, Between):
        children = [node.expr, node.low, node.high]
    elif isinstance(node, InList):
        children = [node.expr, *node.items]
    elif isinstance(node, IsNull):
        children = [node.expr]
    elif isinstance(node, FuncCall):
        children = list(node.args)
    elif isinstance(node, Case):
        children = [e for pair in node.whens for e in pair]
        if node.operand is not None:
            children.append(node.operand)
        if node.else_ is not None:
            children.append(node.else_)
    elif isinstance(node, Cast):
        children = [node.expr]
    if isinstance(node, InSubquery):
        children.append(node.expr)
    return max((_expr_depth(c) for c in children), default=0)


def _stmt_depth(stmt: SelectStmt) -> int:
    depth = 0
    for core in [stmt.core] + [c.core for c in stmt.compounds]:
        exprs = [p.expr for p in core.projections]
        if core.where is not None:
            exprs.append(core.where)
        if core.having is not None:
            exprs.append(core.having)
        exprs.extend(core.group_by)
        if core.from_clause is not None:
            for source in core.from_clause.sources:
                if isinstance(source, SubquerySource):
                    depth = max(depth, _stmt_depth(source.query))
            for join in core.from_clause.joins:
                if join.on is not None:
                    exprs.append(join.on)
        for e in exprs:
            depth = max(depth, _expr_depth(e))
    for item in stmt.order_by:
        depth = max(depth, _expr_depth(item.expr))
    return depth + 1


def _count_aggregates(node) -> int:
    count = 0
    if isinstance(node, SelectStmt):
        for core in [node.core] + [c.core for c in node.compounds]:
            count += _count_aggregates(core)
        for item in node.order_by:
            count += _count_aggregates(item.expr)
        return count
    if isinstance(node, SelectCore):
        for p in node.projections:
            count += _count_aggregates(p.expr)
        for e in node.group_by:
            count += _count_aggregates(e)
        if node.where is not None:
            count += _count_aggregates(node.where)
        if node.having is not None:
            count += _count_aggregates(node.having)
        if node.from_clause is not None:
            for source in node.from_clause.sources:
                if isinstance(source, SubquerySource):
                    count += _count_aggregates(source.query)
            for join in node.from_clause.joins:
                if join.on is not None:
                    count += _count_aggregates(join.on)
        return count
    if isinstance(node, FuncCall):
        inner = sum(_count_aggregates(a) for a in node.args)
        return inner + (1 if node.name.lower() in AGGREGATE_FUNCTIONS else 0)
    if isinstance(node, Binary):
        return _count_aggregates(node.left) + _count_aggregates(node.right)
    if isinstance(node, Unary):
        return _count_aggregates(node.operand)
    if isinstance(node, Between):
        return sum(_count_aggregates(e) for e in (node.expr, node.low, node.high))
    if isinstance(node, InList):
        return _count_aggregates(node.expr) + sum(_count_aggregates(i) for i in node.items)
    if isinstance(node, InSubquery):
        return _count_aggregates(node.expr) + _count_aggregates(node.query)
    if isinstance(node, Exists):
        return _count_aggregates(node.query)
    if isinstance(node, IsNull):
        return _count_aggregates(node.expr)
    if isinstance(node, Case):
        total = sum(_count_aggregates(e) for pair in node.whens for e in pair)
        if node.operand is not None:
            total += _count_aggregates(node.operand)
        if node.else_ is not None:
            total += _count_aggregates(node.else_)
        return total
    if isinstance(node, Cast):
        return _count_aggregates(node.expr)
    if isinstance(node, ScalarSubquery):
        return _count_aggregates(node.query)
    return 0


def classify_difficulty(ast: SelectStmt) -> str:
    """Bucket a query as easy/medium/hard/extra from its structure alone."""
    p = structural_profile(ast)
    if p.has_set_operation or (p.nesting_depth >= 1 and p.join_table_count >= 2):
        return "extra"
    if p.nesting_depth >= 1 or p.join_table_count >= 3:
        return "hard"
    if p.join_table_count == 2 or p.aggregate_count > 1:
        return "medium"
    return "easy"


# -- canonical form --------------------------------------------------------------


def canonicalize(ast: SelectStmt) -> str:
    """Render a query in canonical form for exact-match comparison.

    Lowercases keywords and identifiers, inlines table aliases when the base
    table appears once in the scope (self-join aliases are kept, lowercased),
    qualifies bare columns in single-table scopes, drops projection aliases,
    normalizes `<>`/`==`, orders the operands of symmetric comparisons, and
    sorts AND/OR conjuncts and IN-list items lexicographically. Idempotent:
    canonicalizing the canonical text is a no-op.
    """
    return render(_canon_stmt(ast, _AliasEnv(None, {})), lowercase=True)


class _AliasEnv:
    """Alias rewrites visible while canonicalizing one scope."""

    def __init__(self, parent: Optional["_AliasEnv"], mapping: dict[str, str]):
        self.parent = parent
        self.mapping = mapping  # norm(alias or table) -> replacement qualifier
        self.single_table: Optional[str] = None

    def lookup(self, qualifier: str) -> Optional[str]:
        env: Optional[_AliasEnv] = self
        while env is not None:
            if norm(qualifier) in env.mapping:
                return env.mapping[norm(qualifier)]
            env = env.parent
        return None


def _key(node) -> str:
    return render(node, lowercase=True)


def _flatten(op: str, node):
    if isinstance(node, Binary) and node.op == op:
        return _flatten(op, node.left) + _flatten(op, node.right)
    return [node]


def _rebuild(op: str, operands: list):
    node = operands[0]
    for right in operands[1:]:
        node = Binary(op, node, right)
    return node


def _canon_stmt(stmt: SelectStmt, parent_env: _AliasEnv) -> SelectStmt:
    core, env = _canon_core(stmt.core, parent_env)
    compounds = tuple(
        Compound(c.op, _canon_core(c.core, parent_env)[0]) for c in stmt.compounds
    )
    order_by = tuple(
        OrderItem(_canon_order_expr(item.expr, env, stmt.core), item.desc)
        for item in stmt.order_by
    )
    limit = _canon_expr(stmt.limit, env) if stmt.limit is not None else None
    return SelectStmt(core, compounds, order_by, limit)


def _canon_order_expr(expr, env: _AliasEnv, original_core: SelectCore):
    # expand ORDER BY ordinals and projection-alias references
    if isinstance(expr, Literal) and expr.kind == "number" and expr.value.isdigit():
        idx = int(expr.value)
        if 1 <= idx <= len(original_core.projections):
            target = original_core.projections[idx - 1].expr
            if not isinstance(target, (Star, Literal)):
                return _canon_expr(target, env)
        return expr
    if isinstance(expr, Column) and expr.table is None:
        for proj in original_core.projections:
            if proj.alias and norm(proj.alias) == norm(expr.name):
                return _canon_expr(proj.expr, env)
    return _canon_expr(expr, env)


def _canon_core(core: SelectCore, parent_env: _AliasEnv) -> tuple[SelectCore, _AliasEnv]:
    env = _AliasEnv(parent_env, {})
    from_clause = core.from_clause
    if from_clause is not None:
        base_counts: dict[str, int] = {}
        for source in from_clause.sources:
            if isinstance(source, TableSource):
                base_counts[norm(source.name)] = base_counts.get(norm(source.name), 0) + 1

        def canon_source(source):
            if isinstance(source, TableSource):
                name = source.name.lower()
                if source.alias is not None:
                    if base_counts[norm(source.name)] == 1:
                        env.mapping[norm(source.alias)] = name
                        return TableSource(name, None)
                    alias = source.alias.lower()
                    env.mapping[norm(source.alias)] = alias
                    return TableSource(name, alias)
                env.mapping.setdefault(norm(source.name), name)
                return TableSource(name, None)
            alias = source.alias.lower() if source.alias else None
            if source.alias:
                env.mapping[norm(source.alias)] = alias
            return SubquerySource(_canon_stmt(source.query, env), alias)

        new_base = canon_source(from_clause.base)
        new_joins = []
        for join in from_clause.joins:
            new_joins.append(Join(join.kind, canon_source(join.source), join.on))
        if len(new_joins) == 0:
            if isinstance(new_base, TableSource):
                env.single_table = new_base.alias or new_base.name
            elif new_base.alias is not None:
                env.single_table = new_base.alias
        # resolve ON expressions after the whole FROM is mapped
        new_joins = [
            Join(j.kind, j.source, _canon_expr(j.on, env) if j.on is not None else None)
            for j in new_joins
        ]
        from_clause = FromClause(new_base, tuple(new_joins))

    projections = tuple(
        Projection(_canon_expr(p.expr, env), None) for p in core.projections
    )
    where = _canon_expr(core.where, env) if core.where is not None else None
    group_by = tuple(_canon_group_expr(e, env, core) for e in core.group_by)
    having = _canon_having(core.having, env, core) if core.having is not None else None
    return SelectCore(projections, core.distinct, from_clause, where, group_by, having), env


def _canon_group_expr(expr, env: _AliasEnv, original_core: SelectCore):
    if isinstance(expr, Column) and expr.table is None:
        for proj in original_core.projections:
            if proj.alias and norm(proj.alias) == norm(expr.name):
                return _canon_expr(proj.expr, env)
    return _canon_expr(expr, env)


def _canon_having(expr, env: _AliasEnv, original_core: SelectCore):
    if isinstance(expr, Column) and expr.table is None:
        for proj in original_core.projections:
            if proj.alias and norm(proj.alias) == norm(expr.name):
                return _canon_expr(proj.expr, env)
        return _canon_expr(expr, env)
    return _canon_expr(expr, env)


_SYMMETRIC_OPS = {"=", "!="}


def _canon_expr(node, env: _AliasEnv):
    if isinstance(node, Column):
        if node.table is not None:
            mapped = env.lookup(node.table)
            table = mapped if mapped is not None else node.table.lower()
            return Column(table, node.name.lower())
        if env.single_table is not None:
            return Column(env.single_table, node.name.lower())
        return Column(None, node.name.lower())
    if isinstance(node, Star):
        if node.table is not None:
            mapped = env.lookup(node.table)
            return Star(mapped if mapped is not None else node.table.lower())
        return node
    if isinstance(node, Literal):
        if node.kind in ("null", "bool"):
            return Literal(node.value.lower(), node.kind)
        return node
    if isinstance(node, FuncCall):
        return FuncCall(node.name.lower(), tuple(_canon_expr(a, env) for a in node.args), node.distinct)
    if isinstance(node, Binary):
        op = {"<>": "!=", "==": "="}.get(node.op, node.op)
        if op in ("and", "or"):
            operands = [_canon_expr(x, env) for x in _flatten(node.op, node)]
            operands.sort(key=_key)
            return _rebuild(op, operands)
        left = _canon_expr(node.left, env)
        right = _canon_expr(node.right, env)
        if op in _SYMMETRIC_OPS and _key(right) < _key(left):
            left, right = right, left
        return Binary(op, left, right)
    if isinstance(node, Unary):
        return Unary(node.op, _canon_expr(node.operand, env))
    if isinstance(node, Between):
        return Between(
            _canon_expr(node.expr, env), _canon_expr(node.low, env),
            _canon_expr(node.high, env), node.negated,
        )
    if isinstance(node, InList):
        items = sorted((_canon_expr(i, env) for i in node.items), key=_key)
        return InList(_canon_expr(node.expr, env), tuple(items), node.negated)
    if isinstance(node, InSubquery):
        return InSubquery(_canon_expr(node.expr, env), _canon_stmt(node.query, env), node.negated)
    if isinstance(node, Exists):
        return Exists(_canon_stmt(node.query, env), node.negated)
    if isinstance(node, IsNull):
        return IsNull(_canon_expr(node.expr, env), node.negated)
    if isinstance(node, Case):
        return Case(
            _canon_expr(node.operand, env) if node.operand is not None else None,
            tuple((_canon_expr(c, env), _canon_expr(r, env)) for c, r in node.whens),
            _canon_expr(node.else_, env) if node.else_ is not None else None,
        )
    if isinstance(node, Cast):
        return Cast(_canon_expr(node.expr, env), node.type_name.lower())
    if isinstance(node, ScalarSubquery):
        return ScalarSubquery(_canon_stmt(node.query, env))
    return node


def exact_match(pred_ast: SelectStmt, gold_ast: SelectStmt) -> bool:
    """Canonical-string equality; a strict lower bound on query equivalence."""
    return canonicalize(pred_ast) == canonicalize(gold_ast)
