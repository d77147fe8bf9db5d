"""Application-database gateway and search-system persistence (SS-DB).

The gateway wraps one provider-neutral connection URI and exposes the
two things the rest of the system needs: catalog introspection and
read-only select execution.  The SS-DB is an embedded SQLite file
holding everything registration produced: schema metadata, join
paths, the value-attribute index, vocabulary, and sort orders.
"""

from __future__ import annotations

import logging
import os
import sqlite3
import threading
from typing import Sequence

import sqlalchemy
from sqlalchemy import inspect as sa_inspect

from .catalog import (
    ColumnMeta,
    ForeignKeySpec,
    JoinPath,
    KeySpec,
    SchemaCatalog,
    TableMeta,
)
from .engine import SortOrderSpec
from .errors import ExecutionError, StoreError
from .lexicon import Lexicon, VMapEntry, VocEntry

log = logging.getLogger("dbsearch.store")


class SqlGateway:
    """One application database, reachable through a connection URI.

    Every statement runs on its own connection, so concurrent calls
    are safe.  All issued statements are recorded in ``statement_log``
    which lets tests assert the gateway never mutates application
    data.
    """

    def __init__(self, uri: str, query_timeout: float | None = None) -> None:
        self.uri = uri
        self.query_timeout = query_timeout
        try:
            self._engine = sqlalchemy.create_engine(uri)
        except Exception as exc:
            raise StoreError(f"cannot open database {uri!r}: {exc}") from exc
        self.statement_log: list[tuple[str, tuple]] = []
        self._log_lock = threading.Lock()

    def dispose(self) -> None:
        self._engine.dispose()

    def introspect(self) -> list[dict]:
        """Raw schema description: tables with columns, keys and FKs.

        Tables come back name-sorted so internal id assignment does not
        depend on provider listing order.
        """
        try:
            insp = sa_inspect(self._engine)
            names = sorted(insp.get_table_names())
            out = []
            for name in names:
                columns = [(c["name"], str(c["type"])) for c in insp.get_columns(name)]
                pkey = list(insp.get_pk_constraint(name).get("constrained_columns") or [])
                try:
                    uniques = [
                        list(u["column_names"])
                        for u in insp.get_unique_constraints(name)
                        if u.get("column_names")
                    ]
                except NotImplementedError:
                    uniques = []
                try:
                    fkeys = [
                        {
                            "columns": list(fk["constrained_columns"]),
                            "ref_table": fk["referred_table"],
                            "ref_columns": list(fk["referred_columns"]),
                        }
                        for fk in insp.get_foreign_keys(name)
                    ]
                except NotImplementedError:
                    fkeys = []
                    log.warning("provider reports no foreign keys for %s; "
                                "declare them in annotations if needed", name)
                out.append(
                    {
                        "name": name,
                        "columns": columns,
                        "pkey": pkey,
                        "uniques": uniques,
                        "fkeys": fkeys,
                    }
                )
            return out
        except sqlalchemy.exc.SQLAlchemyError as exc:
            raise StoreError(f"introspection failed: {exc}") from exc

    def run_select(
        self, sql: str, params: Sequence = (), row_limit: int | None = None
    ) -> list[tuple]:
        """Execute one select statement with positional parameters.

        Placeholders are ``?`` in statement order.  Generated SQL never
        carries literals, so a ``?`` can only be a placeholder here.
        """
        if not sql.lstrip().lower().startswith("select"):
            raise ExecutionError(f"gateway is read-only, refusing: {sql.split()[0]!r}", relation="")
        expected = sql.count("?")
        if expected != len(params):
            raise ExecutionError(
                f"statement has {expected} placeholders but {len(params)} parameters given",
                relation="",
            )
        named_sql = sql
        bind: dict[str, object] = {}
        for i, value in enumerate(params):
            named_sql = named_sql.replace("?", f":p{i}", 1)
            bind[f"p{i}"] = value
        with self._log_lock:
            self.statement_log.append((sql, tuple(params)))
        try:
            with self._engine.connect() as conn:
                result = conn.execute(sqlalchemy.text(named_sql), bind)
                if row_limit is not None:
                    rows = result.fetchmany(row_limit)
                else:
                    rows = result.fetchall()
                return [tuple(r) for r in rows]
        except sqlalchemy.exc.SQLAlchemyError as exc:
            raise ExecutionError(f"statement failed: {exc}", relation="") from exc


# ---- SS-DB persistence ----

_SSDB_DDL = (
    "create table ss_tbl (tid integer, name text, description text)",
    "create table ss_col (tid integer, cid integer, name text, type text, description text)",
    "create table ss_pkey (tid integer, kno integer, cid integer)",
    "create table ss_fkey (t1id integer, fno integer, cid1 integer,"
    " t2id integer, kno integer, cid2 integer)",
    "create table ss_path (path text)",
    "create table ss_vmap (value text, attribute text, relation text)",
    "create index ss_vmap_value on ss_vmap (value)",
    "create table ss_voc (internal text, external text, scope text)",
    "create index ss_voc_external on ss_voc (external)",
    "create table ss_sortorder (tbl text, col text, direction text)",
)

_SSDB_TABLES = ("ss_tbl", "ss_col", "ss_pkey", "ss_fkey", "ss_path",
                "ss_vmap", "ss_voc", "ss_sortorder")

_ssdb_write_lock = threading.Lock()


def save_ssdb(
    catalog: SchemaCatalog,
    lexicon: Lexicon,
    sort_orders: Sequence[SortOrderSpec],
    location: str,
) -> None:
    """Persist one registration to the embedded store, replacing any
    prior content at the location."""
    with _ssdb_write_lock:
        try:
            conn = sqlite3.connect(location)
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open store {location!r}: {exc}") from exc
        try:
            with conn:
                for name in _SSDB_TABLES:
                    conn.execute(f"drop table if exists {name}")
                conn.execute("drop index if exists ss_vmap_value")
                conn.execute("drop index if exists ss_voc_external")
                for ddl in _SSDB_DDL:
                    conn.execute(ddl)
                conn.executemany(
                    "insert into ss_tbl values (?, ?, ?)",
                    [(t.table_id, t.name, t.description) for t in catalog.tables],
                )
                conn.executemany(
                    "insert into ss_col values (?, ?, ?, ?, ?)",
                    [
                        (c.table_id, c.column_id, c.name, c.data_type, c.description)
                        for c in catalog.columns
                    ],
                )
                conn.executemany(
                    "insert into ss_pkey values (?, ?, ?)",
                    [
                        (k.table_id, k.key_no, cid)
                        for k in catalog.keys
                        for cid in k.columns
                    ],
                )
                conn.executemany(
                    "insert into ss_fkey values (?, ?, ?, ?, ?, ?)",
                    [
                        (f.from_table, f.fk_no, cid1, f.to_table, f.to_key_no, cid2)
                        for f in catalog.foreign_keys
                        for cid1, cid2 in f.column_pairs
                    ],
                )
                conn.executemany(
                    "insert into ss_path values (?)",
                    [(catalog.path_string(p),) for p in catalog.paths],
                )
                tname = {t.table_id: t.name for t in catalog.tables}
                cname = {(c.table_id, c.column_id): c.name for c in catalog.columns}
                conn.executemany(
                    "insert into ss_vmap values (?, ?, ?)",
                    [
                        (e.value, cname[(e.table_id, e.column_id)], tname[e.table_id])
                        for e in lexicon.vmap
                    ],
                )
                conn.executemany(
                    "insert into ss_voc values (?, ?, ?)",
                    [(e.internal, e.external, e.scope) for e in lexicon.voc],
                )
                conn.executemany(
                    "insert into ss_sortorder values (?, ?, ?)",
                    [
                        (tname[s.table_id], cname[(s.table_id, s.column_id)], s.direction)
                        for s in sort_orders
                    ],
                )
        except (sqlite3.Error, KeyError) as exc:
            raise StoreError(f"saving store {location!r} failed: {exc}") from exc
        finally:
            conn.close()


def append_vmap(
    location: str, catalog: SchemaCatalog, entries: Sequence[VMapEntry]
) -> int:
    """Append fallback-scan repairs to a persisted VMAP, skipping
    bindings already present."""
    if not entries:
        return 0
    tname = {t.table_id: t.name for t in catalog.tables}
    cname = {(c.table_id, c.column_id): c.name for c in catalog.columns}
    with _ssdb_write_lock:
        conn = _open_existing(location)
        try:
            with conn:
                added = 0
                for e in entries:
                    row = (e.value, cname[(e.table_id, e.column_id)], tname[e.table_id])
                    cur = conn.execute(
                        "select 1 from ss_vmap where value = ? and attribute = ? and relation = ?",
                        row,
                    )
                    if cur.fetchone() is None:
                        conn.execute("insert into ss_vmap values (?, ?, ?)", row)
                        added += 1
                return added
        except sqlite3.Error as exc:
            raise StoreError(f"updating store {location!r} failed: {exc}") from exc
        finally:
            conn.close()


def _open_existing(location: str) -> sqlite3.Connection:
    if location != ":memory:" and not os.path.exists(location):
        raise StoreError(f"store not found at {location!r}")
    try:
        return sqlite3.connect(location)
    except sqlite3.Error as exc:
        raise StoreError(f"cannot open store {location!r}: {exc}") from exc


def load_ssdb(location: str) -> tuple[SchemaCatalog, Lexicon, tuple[SortOrderSpec, ...]]:
    """Load a persisted registration back into memory.

    A missing or structurally damaged store raises; it never degrades
    into an empty catalog.
    """
    conn = _open_existing(location)
    try:
        def rows(sql: str) -> list[tuple]:
            return conn.execute(sql).fetchall()

        tables = tuple(
            TableMeta(table_id=tid, name=name, description=desc)
            for tid, name, desc in rows("select tid, name, description from ss_tbl order by rowid")
        )
        columns = tuple(
            ColumnMeta(table_id=tid, column_id=cid, name=name, data_type=dt, description=desc)
            for tid, cid, name, dt, desc in rows(
                "select tid, cid, name, type, description from ss_col order by rowid"
            )
        )
        key_groups: dict[tuple[int, int], list[int]] = {}
        for tid, kno, cid in rows("select tid, kno, cid from ss_pkey order by rowid"):
            key_groups.setdefault((tid, kno), []).append(cid)
        keys = tuple(
            KeySpec(table_id=tid, key_no=kno, columns=tuple(cids))
            for (tid, kno), cids in sorted(key_groups.items())
        )
        fk_groups: dict[tuple[int, int], dict] = {}
        for t1id, fno, cid1, t2id, kno, cid2 in rows(
            "select t1id, fno, cid1, t2id, kno, cid2 from ss_fkey order by rowid"
        ):
            g = fk_groups.setdefault((t1id, fno), {"to": t2id, "kno": kno, "pairs": []})
            if g["to"] != t2id or g["kno"] != kno:
                raise StoreError(f"inconsistent foreign key rows for f{t1id}.{fno}")
            g["pairs"].append((cid1, cid2))
        foreign_keys = tuple(
            ForeignKeySpec(
                from_table=t1id,
                fk_no=fno,
                column_pairs=tuple(g["pairs"]),
                to_table=g["to"],
                to_key_no=g["kno"],
            )
            for (t1id, fno), g in sorted(fk_groups.items())
        )
        catalog = SchemaCatalog(
            tables=tables, columns=columns, keys=keys, foreign_keys=foreign_keys, paths=()
        )
        paths = tuple(
            catalog.parse_path(p) for (p,) in rows("select path from ss_path order by rowid")
        )
        if paths:
            catalog = SchemaCatalog(
                tables=tables,
                columns=columns,
                keys=keys,
                foreign_keys=foreign_keys,
                paths=paths,
            )

        tid_by_name = {t.name: t.table_id for t in catalog.tables}
        cid_by_name = {
            (c.table_id, c.name): c.column_id for c in catalog.columns
        }
        lexicon = Lexicon()
        for value, attribute, relation in rows(
            "select value, attribute, relation from ss_vmap order by rowid"
        ):
            tid = tid_by_name.get(relation)
            cid = cid_by_name.get((tid, attribute)) if tid is not None else None
            if tid is None or cid is None:
                raise StoreError(
                    f"VMAP entry references unknown column {relation}.{attribute}"
                )
            lexicon.add_vmap_entry(VMapEntry(value, tid, cid))
        for internal, external, scope in rows(
            "select internal, external, scope from ss_voc order by rowid"
        ):
            lexicon.add_voc_entry(VocEntry(external=external, internal=internal, scope=scope))

        sort_orders = []
        for tbl, col, direction in rows(
            "select tbl, col, direction from ss_sortorder order by rowid"
        ):
            tid = tid_by_name.get(tbl)
            cid = cid_by_name.get((tid, col)) if tid is not None else None
            if tid is None or cid is None:
                raise StoreError(f"sort order references unknown column {tbl}.{col}")
            if direction not in ("ascending", "descending"):
                raise StoreError(f"bad sort direction {direction!r} for {tbl}.{col}")
            sort_orders.append(SortOrderSpec(table_id=tid, column_id=cid, direction=direction))
        return catalog, lexicon, tuple(sort_orders)
    except sqlite3.Error as exc:
        raise StoreError(f"store at {location!r} is unreadable or corrupt: {exc}") from exc
    finally:
        conn.close()
