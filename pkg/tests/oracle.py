"""Independent brute-force reference semantics for small databases.

Everything here is re-derived from the intended meaning of keyword
interpretations, not from the production planner or engine: rows are
materialized into memory and filtered by exhaustive enumeration.  The
only shared vocabulary is the catalog model, so a planner bug cannot
hide inside the reference results.

Two evaluation depths exist on purpose.  ``brute_eval`` applies one
round of mutual reduction between relations (each relation keeps rows
with counterparts among the other relations' own-predicate rows),
which is what the reciprocal membership subqueries compute.
``brute_eval_fixpoint`` iterates that reduction until stable; tests
use it to document where the two semantics part ways.
"""

from __future__ import annotations

from dataclasses import dataclass

from dbsearch.catalog import ForeignKeySpec, SchemaCatalog

MAX_TABLES = 12
MAX_ROWS_PER_TABLE = 2000


@dataclass
class MemoryDb:
    """Full materialization of a small database."""

    catalog: SchemaCatalog
    rows: dict[int, list[tuple]]


def load_memory_db(gateway, catalog: SchemaCatalog) -> MemoryDb:
    if len(catalog.tables) > MAX_TABLES:
        raise ValueError(f"database exceeds the oracle bound of {MAX_TABLES} tables")
    rows: dict[int, list[tuple]] = {}
    for t in catalog.tables:
        cols = ", ".join(f'"{c.name}"' for c in catalog.columns_of(t.table_id))
        got = gateway.run_select(f'select {cols} from "{t.name}"')
        if len(got) > MAX_ROWS_PER_TABLE:
            raise ValueError(
                f"table {t.name} exceeds the oracle bound of {MAX_ROWS_PER_TABLE} rows"
            )
        rows[t.table_id] = [tuple(r) for r in got]
    return MemoryDb(catalog=catalog, rows=rows)


def _norm(value) -> str:
    return str(value).strip().casefold()


def brute_find(db: MemoryDb, keyword: str) -> list[tuple[str, str, int]]:
    """Every (table, column, row index) where the keyword occurs as a
    stored value under normalization, across all columns."""
    wanted = _norm(keyword)
    hits: list[tuple[str, str, int]] = []
    for t in db.catalog.tables:
        cols = db.catalog.columns_of(t.table_id)
        for ri, row in enumerate(db.rows[t.table_id]):
            for ci, col in enumerate(cols):
                if row[ci] is not None and _norm(row[ci]) == wanted:
                    hits.append((t.name, col.name, ri))
    return hits


def _matches(cell, value: str, data_type: str) -> bool:
    """Typed predicate semantics: what a generated comparison selects."""
    if cell is None:
        return False
    if data_type == "integer":
        try:
            return cell == int(value)
        except (TypeError, ValueError):
            return False
    if data_type == "decimal":
        try:
            return float(cell) == float(value)
        except (TypeError, ValueError):
            return False
    if data_type == "date":
        return str(cell) == value
    return _norm(cell) == _norm(value)


def _raw_eq(a, b) -> bool:
    """Key-join equality: nulls never join, text is case-sensitive."""
    if a is None or b is None:
        return False
    return a == b


def _col_pos(db: MemoryDb, tid: int) -> dict[int, int]:
    return {c.column_id: i for i, c in enumerate(db.catalog.columns_of(tid))}


def _col_types(db: MemoryDb, tid: int) -> dict[int, str]:
    return {c.column_id: c.data_type for c in db.catalog.columns_of(tid)}


def _pos_groups(interp, tid: int) -> list[tuple[int, list[str]]]:
    order: list[int] = []
    groups: dict[int, list[str]] = {}
    for t in interp.terms:
        if t.relation != tid or t.value is None or t.negated or t.attribute is None:
            continue
        groups.setdefault(t.attribute, [])
        if t.attribute not in order:
            order.append(t.attribute)
        if t.value not in groups[t.attribute]:
            groups[t.attribute].append(t.value)
    return [(cid, groups[cid]) for cid in order]


def _own_rows(db: MemoryDb, interp, tid: int) -> set[int]:
    """Rows satisfying the relation's own terms.

    Several values on one attribute select disjunctively; negated
    terms exclude matches and null cells (an inequality comparison
    against null selects nothing).
    """
    pos = _col_pos(db, tid)
    types = _col_types(db, tid)
    groups = _pos_groups(interp, tid)
    negs = [
        (t.attribute, t.value)
        for t in interp.terms
        if t.relation == tid and t.value is not None and t.negated
    ]
    keep: set[int] = set()
    for ri, row in enumerate(db.rows[tid]):
        ok = True
        for cid, vals in groups:
            if not any(_matches(row[pos[cid]], v, types[cid]) for v in vals):
                ok = False
                break
        if ok:
            for cid, v in negs:
                cell = row[pos[cid]]
                if cell is None or _matches(cell, v, types[cid]):
                    ok = False
                    break
        if ok:
            keep.add(ri)
    return keep


def _edge_match(
    db: MemoryDb, fk: ForeignKeySpec, left_tid: int, left_row: tuple, right_tid: int, right_row: tuple
) -> bool:
    lpos = _col_pos(db, left_tid)
    rpos = _col_pos(db, right_tid)
    if fk.from_table == left_tid and fk.to_table == right_tid:
        pairs = [(lpos[f], rpos[k]) for f, k in fk.column_pairs]
    elif fk.from_table == right_tid and fk.to_table == left_tid:
        pairs = [(lpos[k], rpos[f]) for f, k in fk.column_pairs]
    else:
        raise ValueError("edge does not connect the given tables")
    return all(_raw_eq(left_row[i], right_row[j]) for i, j in pairs)


def _pair_route(db: MemoryDb, x: int, y: int):
    """The hop sequence the planner would use between two relations:
    the direct key when one exists, else the first stored path."""
    fk = db.catalog.direct_relationship(x, y)
    if fk is not None:
        return (x, y), ((fk.from_table, fk.fk_no),)
    paths = db.catalog.find_paths(x, y)
    if not paths:
        return None
    return paths[0].tables, paths[0].edges


def _reach(db: MemoryDb, tables, edges, start: int) -> set[int]:
    """Row indices of the far table reachable from one starting row,
    intermediate hops unconstrained."""
    frontier = {start}
    for i, edge in enumerate(edges):
        fk = db.catalog.fk_edge(*edge)
        lt, rt = tables[i], tables[i + 1]
        nxt: set[int] = set()
        for li in frontier:
            lrow = db.rows[lt][li]
            for ri, rrow in enumerate(db.rows[rt]):
                if _edge_match(db, fk, lt, lrow, rt, rrow):
                    nxt.add(ri)
        frontier = nxt
        if not frontier:
            break
    return frontier


def _connected(db: MemoryDb, x: int, xi: int, y: int, allowed: set[int]) -> bool:
    route = _pair_route(db, x, y)
    if route is None:
        raise ValueError(
            f"no route between table ids {x} and {y}; the interpretation is invalid"
        )
    tables, edges = route
    return bool(_reach(db, tables, edges, xi) & allowed)


def _relation_order(interp) -> list[int]:
    order: list[int] = []
    for t in interp.terms:
        if t.relation not in order:
            order.append(t.relation)
    return order


def _repeated_relation(interp) -> int | None:
    for tid in _relation_order(interp):
        if any(len(vals) >= 2 for _cid, vals in _pos_groups(interp, tid)):
            return tid
    return None


def _find_partner(db: MemoryDb, interp, repeated_tid: int):
    """The relation through which repeated values must intersect:
    in-interpretation relations first (term order), then other tables
    by id; a table holding a key to the repeated relation with spare
    identity columns wins over one the repeated relation points at."""
    in_interp = [tid for tid in _relation_order(interp) if tid != repeated_tid]
    others = [
        t.table_id
        for t in db.catalog.tables
        if t.table_id != repeated_tid and t.table_id not in in_interp
    ]
    for s in in_interp + others:
        for fk in db.catalog.fks_of(s):
            if fk.to_table != repeated_tid:
                continue
            pk = db.catalog.primary_key(s)
            if pk is None:
                continue
            if [cid for cid in pk.columns if cid not in fk.from_columns]:
                return s, "holds", fk
        for fk in db.catalog.fks_of(repeated_tid):
            if fk.to_table == s:
                return s, "referenced", fk
    return None


def _intersects(
    db: MemoryDb,
    repeated_tid: int,
    attr_cid: int,
    value: str,
    pattern: str,
    fk: ForeignKeySpec,
    partner_tid: int,
    partner_idx: int,
) -> bool:
    """Does this partner row tie to some repeated-relation row holding
    the given value?"""
    r_pos = _col_pos(db, repeated_tid)
    r_types = _col_types(db, repeated_tid)
    s_row = db.rows[partner_tid][partner_idx]
    s_pos = _col_pos(db, partner_tid)
    if pattern == "referenced":
        # repeated relation holds the key to the partner
        key_vals = [s_row[s_pos[k]] for _f, k in fk.column_pairs]
        for r_row in db.rows[repeated_tid]:
            if not _matches(r_row[r_pos[attr_cid]], value, r_types[attr_cid]):
                continue
            fk_vals = [r_row[r_pos[f]] for f, _k in fk.column_pairs]
            if all(_raw_eq(a, b) for a, b in zip(fk_vals, key_vals)):
                return True
        return False
    # partner holds the key; rows sharing this row's identity may each
    # point at a different repeated-relation row
    pk = db.catalog.primary_key(partner_tid)
    identity = [cid for cid in pk.columns if cid not in fk.from_columns]
    for q_row in db.rows[partner_tid]:
        if not all(_raw_eq(q_row[s_pos[cid]], s_row[s_pos[cid]]) for cid in identity):
            continue
        q_fk = [q_row[s_pos[f]] for f, _k in fk.column_pairs]
        for r_row in db.rows[repeated_tid]:
            if not _matches(r_row[r_pos[attr_cid]], value, r_types[attr_cid]):
                continue
            r_key = [r_row[r_pos[k]] for _f, k in fk.column_pairs]
            if all(_raw_eq(a, b) for a, b in zip(q_fk, r_key)):
                return True
    return False


def brute_eval(db: MemoryDb, interp) -> dict[int, list[int]]:
    """Expected row indices per relation under one-round semantics."""
    rels = _relation_order(interp)
    own = {tid: _own_rows(db, interp, tid) for tid in rels}
    repeated = _repeated_relation(interp)

    if repeated is None:
        if len(rels) == 1:
            return {rels[0]: sorted(own[rels[0]])}
        out: dict[int, list[int]] = {}
        for x in rels:
            out[x] = [
                xi
                for xi in sorted(own[x])
                if all(_connected(db, x, xi, y, own[y]) for y in rels if y != x)
            ]
        return out

    found = _find_partner(db, interp, repeated)
    if found is None:
        raise ValueError("no relation can intersect the repeated values")
    partner, pattern, fk = found
    values = [
        (cid, v)
        for cid, vals in _pos_groups(interp, repeated)
        if len(vals) >= 2
        for v in vals
    ]
    targets = rels + ([partner] if partner not in rels else [])
    out = {}
    for tid in targets:
        base = own[tid] if tid in own else set(range(len(db.rows[tid])))
        if tid == repeated:
            out[tid] = sorted(base)
        elif tid == partner:
            out[tid] = [
                si
                for si in sorted(base)
                if all(
                    _intersects(db, repeated, cid, v, pattern, fk, partner, si)
                    for cid, v in values
                )
            ]
        else:
            out[tid] = [
                xi for xi in sorted(base) if _connected(db, tid, xi, repeated, own[repeated])
            ]
    return out


def brute_eval_fixpoint(db: MemoryDb, interp) -> dict[int, list[int]]:
    """Iterate the mutual reduction until nothing shrinks further."""
    if _repeated_relation(interp) is not None:
        raise ValueError("fixpoint semantics are defined for non-repeated queries")
    rels = _relation_order(interp)
    allowed = {tid: _own_rows(db, interp, tid) for tid in rels}
    if len(rels) == 1:
        return {rels[0]: sorted(allowed[rels[0]])}
    changed = True
    while changed:
        changed = False
        for x in rels:
            keep = {
                xi
                for xi in allowed[x]
                if all(_connected(db, x, xi, y, allowed[y]) for y in rels if y != x)
            }
            if keep != allowed[x]:
                allowed[x] = keep
                changed = True
    return {tid: sorted(s) for tid, s in allowed.items()}


def brute_rank(db: MemoryDb, tid: int, row_index: int) -> int:
    """Count of rows in referencing relations related to one row,
    summed over every key pointing at the relation."""
    row = db.rows[tid][row_index]
    pos = _col_pos(db, tid)
    total = 0
    for fk in db.catalog.fks_into(tid):
        opos = _col_pos(db, fk.from_table)
        key_vals = [row[pos[k]] for _f, k in fk.column_pairs]
        for o_row in db.rows[fk.from_table]:
            fk_vals = [o_row[opos[f]] for f, _k in fk.column_pairs]
            if all(_raw_eq(a, b) for a, b in zip(fk_vals, key_vals)):
                total += 1
    return total
