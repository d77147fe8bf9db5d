"""Compilation of interpretations into parameterized SQL plans.

Each interpretation falls into one of three shapes: all terms on one
relation, terms across related relations (reciprocal key-membership
constraints, chained through intermediate relations when there is no
direct key), or a repeated attribute (a disjunction on the repeated
relation plus per-value existential intersection through a related
many-side relation).  Ranking augmentation rewrites result queries
with a correlated count column or an application sort order.

All value literals travel as positional parameters; the emitted SQL
uses only plain selects, =/<> comparisons, in/exists subqueries,
correlated count subqueries, and order by.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .catalog import ForeignKeySpec, JoinPath, SchemaCatalog
from .engine import SortOrderSpec
from .errors import IntersectionImpossibleError, UnrelatedRelationsError
from .lexicon import value_predicate
from .parser import Interpretation


class QueryClass(enum.Enum):
    SINGLE_RELATION = "single_relation"
    MULTI_RELATION = "multi_relation"
    REPEATED_ATTRIBUTE = "repeated_attribute"


@dataclass(frozen=True)
class GeneratedQuery:
    """One executable statement of a plan.

    ``where_sql`` and ``order_sql`` keep the composed clauses apart so
    ranking augmentation can rebuild the statement without parsing it.
    ``select_columns`` records (table_id, column_id) per select-list
    entry so execution does not need the catalog.
    """

    target: int
    target_name: str
    sql: str
    params: tuple
    select_columns: tuple[tuple[int, int], ...]
    role: str = "result"
    where_sql: str = ""
    order_sql: str = ""
    has_rank: bool = False


@dataclass(frozen=True)
class QueryPlan:
    query_class: QueryClass
    queries: tuple[GeneratedQuery, ...]
    join_path_used: JoinPath | None = None
    alternate_paths: tuple[JoinPath, ...] = ()
    extrapolated: bool = False
    notes: tuple[str, ...] = ()


class _Aliases:
    """Per-statement counter handing out unique subquery aliases."""

    def __init__(self) -> None:
        self.n = 0

    def next(self, prefix: str) -> str:
        self.n += 1
        return f"{prefix}{self.n}"


def classify(interp: Interpretation) -> QueryClass:
    """Assign one of the three processing categories.

    A repeated attribute means the same (relation, attribute) carries
    two or more distinct non-negated values; negated terms stay plain
    predicates and never make a query repeated.
    """
    values: dict[tuple[int, int], set[str]] = {}
    for t in interp.terms:
        if t.value is not None and not t.negated and t.attribute is not None:
            values.setdefault((t.relation, t.attribute), set()).add(t.value)
    if any(len(v) >= 2 for v in values.values()):
        return QueryClass.REPEATED_ATTRIBUTE
    if len({t.relation for t in interp.terms}) == 1:
        return QueryClass.SINGLE_RELATION
    return QueryClass.MULTI_RELATION


def _relation_order(interp: Interpretation) -> list[int]:
    order: list[int] = []
    for t in interp.terms:
        if t.relation not in order:
            order.append(t.relation)
    return order


def _positive_groups(interp: Interpretation, tid: int) -> list[tuple[int, list[str]]]:
    """Non-negated value terms of one relation grouped by attribute,
    keeping first-occurrence order of attributes and values."""
    order: list[int] = []
    groups: dict[int, list[str]] = {}
    for t in interp.terms:
        if t.relation != tid or t.value is None or t.negated or t.attribute is None:
            continue
        if t.attribute not in groups:
            order.append(t.attribute)
            groups[t.attribute] = []
        if t.value not in groups[t.attribute]:
            groups[t.attribute].append(t.value)
    return [(cid, groups[cid]) for cid in order]


def repeated_groups(interp: Interpretation, tid: int) -> list[tuple[int, list[str]]]:
    return [(cid, vals) for cid, vals in _positive_groups(interp, tid) if len(vals) >= 2]


def _relation_where(
    catalog: SchemaCatalog, interp: Interpretation, tid: int, alias: str
) -> tuple[list[str], list]:
    """Predicates one relation's own terms contribute.

    Attributes carrying several values turn into one parenthesized
    disjunction (conjoining them would always yield the empty set);
    everything else conjoins.
    """
    frags: list[str] = []
    params: list = []
    for cid, vals in _positive_groups(interp, tid):
        col = catalog.column(tid, cid)
        parts: list[str] = []
        for v in vals:
            frag, p = value_predicate(f'{alias}."{col.name}"', col.data_type, v)
            parts.append(frag)
            params.extend(p)
        frags.append(f"({' or '.join(parts)})" if len(parts) > 1 else parts[0])
    for t in interp.terms:
        if t.relation == tid and t.value is not None and t.negated:
            col = catalog.column(tid, t.attribute)
            frag, p = value_predicate(f'{alias}."{col.name}"', col.data_type, t.value, negated=True)
            frags.append(frag)
            params.extend(p)
    return frags, params


def _pk_order(catalog: SchemaCatalog, tid: int, alias: str = "t") -> str:
    pk = catalog.primary_key(tid)
    cids = pk.columns if pk else tuple(c.column_id for c in catalog.columns_of(tid))
    return ", ".join(f'{alias}."{catalog.column(tid, cid).name}" asc' for cid in cids)


def _compose(catalog: SchemaCatalog, tid: int, where_sql: str, order_sql: str,
             rank_expr: str | None = None) -> str:
    table = catalog.table(tid)
    cols = ", ".join(f't."{c.name}"' for c in catalog.columns_of(tid))
    if rank_expr is not None:
        cols += f", ({rank_expr}) as c"
    sql = f'select {cols} from "{table.name}" t'
    if where_sql:
        sql += f" where {where_sql}"
    if order_sql:
        sql += f" order by {order_sql}"
    return sql


def _make_query(
    catalog: SchemaCatalog,
    tid: int,
    where_sql: str,
    order_sql: str,
    params,
    rank_expr: str | None = None,
    has_rank: bool = False,
) -> GeneratedQuery:
    return GeneratedQuery(
        target=tid,
        target_name=catalog.table(tid).name,
        sql=_compose(catalog, tid, where_sql, order_sql, rank_expr),
        params=tuple(params),
        select_columns=tuple(
            (c.table_id, c.column_id) for c in catalog.columns_of(tid)
        ),
        where_sql=where_sql,
        order_sql=order_sql,
        has_rank=has_rank,
    )


def _col_names(catalog: SchemaCatalog, tid: int, cids) -> list[str]:
    return [catalog.column(tid, cid).name for cid in cids]


def _edge_equalities(
    catalog: SchemaCatalog,
    left_alias: str,
    left_tid: int,
    right_alias: str,
    right_tid: int,
    fk: ForeignKeySpec,
) -> list[str]:
    """Join conditions for one key edge between two aliased tables."""
    from_names = _col_names(catalog, fk.from_table, fk.from_columns)
    to_names = _col_names(catalog, fk.to_table, fk.to_columns)
    if fk.from_table == left_tid and fk.to_table == right_tid:
        return [
            f'{left_alias}."{f}" = {right_alias}."{k}"' for f, k in zip(from_names, to_names)
        ]
    if fk.from_table == right_tid and fk.to_table == left_tid:
        return [
            f'{left_alias}."{k}" = {right_alias}."{f}"' for f, k in zip(from_names, to_names)
        ]
    raise UnrelatedRelationsError(
        catalog.table(left_tid).name, catalog.table(right_tid).name
    )


def _membership(
    catalog: SchemaCatalog,
    outer_alias: str,
    outer_cols: list[str],
    inner_tid: int,
    inner_cols: list[str],
    inner_frags: list[str],
    inner_params: list,
    a: str,
) -> tuple[str, list]:
    """Key-membership condition: outer columns match some filtered inner row.

    Single-column keys compile to an ``in`` subquery, composite keys to
    an existential subquery (tuple membership is not portable).
    """
    inner_name = catalog.table(inner_tid).name
    if len(outer_cols) == 1:
        where = f" where {' and '.join(inner_frags)}" if inner_frags else ""
        frag = (
            f'{outer_alias}."{outer_cols[0]}" in '
            f'(select {a}."{inner_cols[0]}" from "{inner_name}" {a}{where})'
        )
        return frag, list(inner_params)
    eqs = [
        f'{a}."{ic}" = {outer_alias}."{oc}"' for oc, ic in zip(outer_cols, inner_cols)
    ]
    conj = " and ".join(eqs + inner_frags)
    return f'exists (select * from "{inner_name}" {a} where {conj})', list(inner_params)


def _pair_constraint(
    catalog: SchemaCatalog,
    interp: Interpretation,
    x: int,
    y: int,
    aliases: _Aliases,
) -> tuple[str, list, JoinPath | None]:
    """Constraint added to relation x's query so its rows have
    counterparts among relation y's selected rows."""
    fk = catalog.direct_relationship(x, y)
    if fk is not None:
        if fk.from_table == x:
            outer_cols = _col_names(catalog, x, fk.from_columns)
            inner_cols = _col_names(catalog, y, fk.to_columns)
        else:
            outer_cols = _col_names(catalog, x, fk.to_columns)
            inner_cols = _col_names(catalog, y, fk.from_columns)
        a = aliases.next("s")
        inner_frags, inner_params = _relation_where(catalog, interp, y, a)
        frag, params = _membership(
            catalog, "t", outer_cols, y, inner_cols, inner_frags, inner_params, a
        )
        return frag, params, None

    paths = catalog.find_paths(x, y)
    if not paths:
        raise UnrelatedRelationsError(catalog.table(x).name, catalog.table(y).name)
    path = paths[0]
    froms: list[str] = []
    hop_aliases: list[str] = []
    for tid in path.tables[1:]:
        a = aliases.next("s")
        hop_aliases.append(a)
        froms.append(f'"{catalog.table(tid).name}" {a}')
    conj: list[str] = []
    params: list = []
    left_alias = "t"
    for i, edge in enumerate(path.edges):
        fk_edge = catalog.fk_edge(*edge)
        right_alias = hop_aliases[i]
        conj.extend(
            _edge_equalities(
                catalog, left_alias, path.tables[i], right_alias, path.tables[i + 1], fk_edge
            )
        )
        left_alias = right_alias
    far_frags, far_params = _relation_where(catalog, interp, y, hop_aliases[-1])
    conj.extend(far_frags)
    params.extend(far_params)
    frag = f"exists (select * from {', '.join(froms)} where {' and '.join(conj)})"
    return frag, params, path


def plan_single(interp: Interpretation, catalog: SchemaCatalog) -> QueryPlan:
    tid = interp.terms[0].relation
    frags, params = _relation_where(catalog, interp, tid, "t")
    where = " and ".join(frags)
    order = _pk_order(catalog, tid)
    query = _make_query(catalog, tid, where, order, params)
    return QueryPlan(QueryClass.SINGLE_RELATION, (query,))


def plan_multi(interp: Interpretation, catalog: SchemaCatalog) -> QueryPlan:
    rels = _relation_order(interp)
    queries: list[GeneratedQuery] = []
    join_path_used: JoinPath | None = None
    alternates: tuple[JoinPath, ...] = ()
    notes: list[str] = []
    for x in rels:
        aliases = _Aliases()
        frags, params = _relation_where(catalog, interp, x, "t")
        for y in rels:
            if y == x:
                continue
            frag, p, path = _pair_constraint(catalog, interp, x, y, aliases)
            frags.append(frag)
            params.extend(p)
            if path is not None and join_path_used is None:
                join_path_used = path
                alternates = catalog.find_paths(x, y)[1:]
                route = " - ".join(catalog.table(tid).name for tid in path.tables)
                notes.append(
                    f"{catalog.table(x).name} and {catalog.table(y).name} joined through "
                    f"{route}"
                )
        where = " and ".join(frags)
        order = _pk_order(catalog, x)
        queries.append(_make_query(catalog, x, where, order, params))
    return QueryPlan(
        QueryClass.MULTI_RELATION,
        tuple(queries),
        join_path_used=join_path_used,
        alternate_paths=alternates,
        notes=tuple(notes),
    )


def _find_partner(
    catalog: SchemaCatalog, interp: Interpretation, repeated_tid: int
) -> tuple[int, str, ForeignKeySpec]:
    """Choose the relation through which repeated values intersect.

    Pattern "holds": partner S holds a foreign key to the repeated
    relation and S's primary key keeps identity columns besides the
    key, so several S rows can tie one entity to several repeated
    rows.  Pattern "referenced": the repeated relation holds a foreign
    key to S, so several repeated rows can point at one S row.
    Relations already in the interpretation are preferred, in term
    order; other tables follow by id.
    """
    in_interp = [tid for tid in _relation_order(interp) if tid != repeated_tid]
    others = [
        t.table_id
        for t in catalog.tables
        if t.table_id != repeated_tid and t.table_id not in in_interp
    ]
    for s in in_interp + others:
        for fk in catalog.fks_of(s):
            if fk.to_table != repeated_tid:
                continue
            pk = catalog.primary_key(s)
            if pk is None:
                continue
            identity = [cid for cid in pk.columns if cid not in fk.from_columns]
            if identity:
                return s, "holds", fk
        for fk in catalog.fks_of(repeated_tid):
            if fk.to_table == s:
                return s, "referenced", fk
    raise IntersectionImpossibleError(
        f"no relation related to {catalog.table(repeated_tid).name!r} can intersect "
        "the repeated values"
    )


def _intersection_clause(
    catalog: SchemaCatalog,
    repeated_tid: int,
    attr_cid: int,
    value: str,
    pattern: str,
    fk: ForeignKeySpec,
    aliases: _Aliases,
) -> tuple[str, list]:
    """One existential clause tying the partner row to one repeated value."""
    r_name = catalog.table(repeated_tid).name
    col = catalog.column(repeated_tid, attr_cid)
    if pattern == "referenced":
        # repeated relation holds the key to the partner
        q = aliases.next("q")
        eqs = [
            f'{q}."{f}" = t."{k}"'
            for f, k in zip(
                _col_names(catalog, repeated_tid, fk.from_columns),
                _col_names(catalog, fk.to_table, fk.to_columns),
            )
        ]
        pred, params = value_predicate(f'{q}."{col.name}"', col.data_type, value)
        conj = " and ".join(eqs + [pred])
        return f'exists (select * from "{r_name}" {q} where {conj})', params

    # partner holds the key; entity identity is its pk minus the key columns
    s_tid = fk.from_table
    s_name = catalog.table(s_tid).name
    pk = catalog.primary_key(s_tid)
    identity = [cid for cid in pk.columns if cid not in fk.from_columns]
    q = aliases.next("q")
    eqs = [f'{q}."{n}" = t."{n}"' for n in _col_names(catalog, s_tid, identity)]
    fk_names = _col_names(catalog, s_tid, fk.from_columns)
    key_names = _col_names(catalog, repeated_tid, fk.to_columns)
    r = aliases.next("r")
    pred, params = value_predicate(f'{r}."{col.name}"', col.data_type, value)
    if len(fk_names) == 1:
        link = (
            f'{q}."{fk_names[0]}" in '
            f'(select {r}."{key_names[0]}" from "{r_name}" {r} where {pred})'
        )
    else:
        inner = " and ".join(
            [f'{r}."{k}" = {q}."{f}"' for f, k in zip(fk_names, key_names)] + [pred]
        )
        link = f'exists (select * from "{r_name}" {r} where {inner})'
    conj = " and ".join(eqs + [link])
    return f'exists (select * from "{s_name}" {q} where {conj})', params


def plan_repeated(interp: Interpretation, catalog: SchemaCatalog) -> QueryPlan:
    rels = _relation_order(interp)
    repeated_rels = [tid for tid in rels if repeated_groups(interp, tid)]
    repeated_tid = repeated_rels[0]
    partner_tid, pattern, fk = _find_partner(catalog, interp, repeated_tid)

    targets = list(rels)
    if partner_tid not in targets:
        targets.append(partner_tid)

    notes: list[str] = [
        f"repeated values intersected through {catalog.table(partner_tid).name}"
    ]
    join_path_used: JoinPath | None = None
    alternates: tuple[JoinPath, ...] = ()
    extrapolated = len(repeated_rels) > 1 or any(
        tid not in (repeated_tid, partner_tid) for tid in rels
    )

    queries: list[GeneratedQuery] = []
    for tid in targets:
        aliases = _Aliases()
        frags, params = _relation_where(catalog, interp, tid, "t")
        if tid == partner_tid:
            for cid, vals in repeated_groups(interp, repeated_tid):
                for v in vals:
                    frag, p = _intersection_clause(
                        catalog, repeated_tid, cid, v, pattern, fk, aliases
                    )
                    frags.append(frag)
                    params.extend(p)
        elif tid != repeated_tid:
            # relations outside the repeated core keep a one-way tie to
            # the repeated relation's disjunctive selection
            frag, p, path = _pair_constraint(catalog, interp, tid, repeated_tid, aliases)
            frags.append(frag)
            params.extend(p)
            if path is not None and join_path_used is None:
                join_path_used = path
                alternates = catalog.find_paths(tid, repeated_tid)[1:]
        where = " and ".join(frags)
        order = _pk_order(catalog, tid)
        queries.append(_make_query(catalog, tid, where, order, params))
    return QueryPlan(
        QueryClass.REPEATED_ATTRIBUTE,
        tuple(queries),
        join_path_used=join_path_used,
        alternate_paths=alternates,
        extrapolated=extrapolated,
        notes=tuple(notes),
    )


def plan_interpretation(interp: Interpretation, catalog: SchemaCatalog) -> QueryPlan:
    cls = classify(interp)
    if cls is QueryClass.SINGLE_RELATION:
        return plan_single(interp, catalog)
    if cls is QueryClass.MULTI_RELATION:
        return plan_multi(interp, catalog)
    return plan_repeated(interp, catalog)


def _rank_expr(catalog: SchemaCatalog, tid: int) -> str:
    """Correlated count of referencing rows, summed across referencing keys."""
    terms: list[str] = []
    aliases = _Aliases()
    for fk in catalog.fks_into(tid):
        owner = catalog.table(fk.from_table)
        a = aliases.next("c")
        eqs = " and ".join(
            f'{a}."{f}" = t."{k}"'
            for f, k in zip(
                _col_names(catalog, fk.from_table, fk.from_columns),
                _col_names(catalog, tid, fk.to_columns),
            )
        )
        terms.append(f'(select count(*) from "{owner.name}" {a} where {eqs})')
    return " + ".join(terms) if terms else "0"


def attach_ranking(
    plan: QueryPlan,
    catalog: SchemaCatalog,
    mode: str,
    sort_orders: tuple[SortOrderSpec, ...] = (),
) -> QueryPlan:
    """Augment a plan's result queries with an ordering discipline.

    ``fk_count`` adds the correlated count column and orders by it
    descending (primary key breaks ties); ``app_sort`` orders by the
    recorded sort columns; ``none`` returns the plan untouched.
    """
    if mode == "none":
        return plan
    if mode not in ("fk_count", "app_sort"):
        raise ValueError(f"unknown ranking mode {mode!r}")
    queries: list[GeneratedQuery] = []
    notes = list(plan.notes)
    for q in plan.queries:
        if q.role != "result":
            queries.append(q)
            continue
        if mode == "fk_count":
            expr = _rank_expr(catalog, q.target)
            order = f"c desc, {_pk_order(catalog, q.target)}"
            queries.append(
                replace(
                    q,
                    sql=_compose(catalog, q.target, q.where_sql, order, rank_expr=expr),
                    order_sql=order,
                    has_rank=True,
                )
            )
            continue
        specs = [s for s in sort_orders if s.table_id == q.target]
        if not specs:
            notes.append(
                f"no sort order recorded for {catalog.table(q.target).name}; left unranked"
            )
            queries.append(q)
            continue
        parts = [
            f't."{catalog.column(s.table_id, s.column_id).name}" '
            f"{'desc' if s.direction == 'descending' else 'asc'}"
            for s in specs
        ]
        order = ", ".join(parts + [_pk_order(catalog, q.target)])
        queries.append(
            replace(
                q,
                sql=_compose(catalog, q.target, q.where_sql, order),
                order_sql=order,
            )
        )
    return replace(plan, queries=tuple(queries), notes=tuple(notes))
