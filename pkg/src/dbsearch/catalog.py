"""Relational schema metadata and join-path discovery.

The catalog is built once, at registration time, from backend
introspection plus optional annotations.  Everything downstream
(keyword mapping, query planning, ranking, display) reads only this
model and never touches backend-specific metadata again.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cached_property

from .errors import RegistrationError, StoreError, UnknownColumnError, UnknownTableError

#: Portable type families every backend type is collapsed onto.
DATA_TYPES = ("text", "integer", "decimal", "date", "other")


def normalize_data_type(raw: str) -> str:
    """Collapse a backend type name onto one of the portable families.

    Types that fit none of the families map to ``other``; such columns
    are never scanned by the fallback keyword search.
    """
    t = raw.strip().lower()
    if not t:
        return "other"
    if "int" in t or "bool" in t or t == "serial":
        return "integer"
    if any(k in t for k in ("real", "floa", "doub", "numeric", "decim", "money")):
        return "decimal"
    if "date" in t or "time" in t:
        return "date"
    if any(k in t for k in ("char", "text", "clob", "string", "uuid", "enum", "json")):
        return "text"
    return "other"


@dataclass(frozen=True)
class TableMeta:
    """One registered table: internal id, stored name, admin description."""

    table_id: int
    name: str
    description: str


@dataclass(frozen=True)
class ColumnMeta:
    """One column of a registered table."""

    table_id: int
    column_id: int
    name: str
    data_type: str
    description: str


@dataclass(frozen=True)
class KeySpec:
    """A candidate key of a table; key_no 1 is the primary key."""

    table_id: int
    key_no: int
    columns: tuple[int, ...]


@dataclass(frozen=True)
class ForeignKeySpec:
    """A foreign key relating ``from_table`` to a candidate key of ``to_table``.

    ``column_pairs`` aligns each owning column with the referenced key
    column, in the referenced key's column order.
    """

    from_table: int
    fk_no: int
    column_pairs: tuple[tuple[int, int], ...]
    to_table: int
    to_key_no: int

    @property
    def from_columns(self) -> tuple[int, ...]:
        return tuple(p[0] for p in self.column_pairs)

    @property
    def to_columns(self) -> tuple[int, ...]:
        return tuple(p[1] for p in self.column_pairs)


@dataclass(frozen=True)
class JoinPath:
    """A simple path through the foreign-key graph.

    ``tables`` holds table ids from source to destination; ``edges``
    holds one (owning table id, fk_no) pair per hop.  Edge direction is
    implicit: the hop runs with the key when the owning table is the
    hop's left endpoint, against it otherwise.
    """

    tables: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def hops(self) -> int:
        return len(self.edges)

    @property
    def src(self) -> int:
        return self.tables[0]

    @property
    def dst(self) -> int:
        return self.tables[-1]

    def reversed(self) -> "JoinPath":
        return JoinPath(tuple(reversed(self.tables)), tuple(reversed(self.edges)))


_PATH_EDGE_RE = re.compile(r"^f(\d+)\.(\d+)$")


@dataclass(frozen=True)
class SchemaCatalog:
    """Snapshot of one application database's searchable structure."""

    tables: tuple[TableMeta, ...]
    columns: tuple[ColumnMeta, ...]
    keys: tuple[KeySpec, ...]
    foreign_keys: tuple[ForeignKeySpec, ...]
    paths: tuple[JoinPath, ...] = ()

    # ---- lookup maps ----

    @cached_property
    def tables_by_id(self) -> dict[int, TableMeta]:
        return {t.table_id: t for t in self.tables}

    @cached_property
    def tables_by_name(self) -> dict[str, TableMeta]:
        return {t.name.casefold(): t for t in self.tables}

    @cached_property
    def columns_by_table(self) -> dict[int, tuple[ColumnMeta, ...]]:
        out: dict[int, list[ColumnMeta]] = {t.table_id: [] for t in self.tables}
        for c in self.columns:
            out[c.table_id].append(c)
        return {tid: tuple(sorted(cols, key=lambda c: c.column_id)) for tid, cols in out.items()}

    @cached_property
    def _columns_by_id(self) -> dict[tuple[int, int], ColumnMeta]:
        return {(c.table_id, c.column_id): c for c in self.columns}

    def table(self, table_id: int) -> TableMeta:
        try:
            return self.tables_by_id[table_id]
        except KeyError:
            raise UnknownTableError(f"no table with id {table_id}", table_id=table_id) from None

    def table_named(self, name: str) -> TableMeta:
        t = self.tables_by_name.get(name.casefold())
        if t is None:
            raise UnknownTableError(f"no table named {name!r}", table=name)
        return t

    def find_table(self, name: str) -> TableMeta | None:
        return self.tables_by_name.get(name.casefold())

    def columns_of(self, table_id: int) -> tuple[ColumnMeta, ...]:
        self.table(table_id)
        return self.columns_by_table.get(table_id, ())

    def column(self, table_id: int, column_id: int) -> ColumnMeta:
        c = self._columns_by_id.get((table_id, column_id))
        if c is None:
            raise UnknownColumnError(
                f"table id {table_id} has no column id {column_id}",
                table_id=table_id,
                column_id=column_id,
            )
        return c

    def column_named(self, table_id: int, name: str) -> ColumnMeta:
        folded = name.casefold()
        for c in self.columns_of(table_id):
            if c.name.casefold() == folded:
                return c
        raise UnknownColumnError(
            f"table {self.table(table_id).name!r} has no column {name!r}",
            table=self.table(table_id).name,
            column=name,
        )

    def keys_of(self, table_id: int) -> tuple[KeySpec, ...]:
        return tuple(sorted((k for k in self.keys if k.table_id == table_id), key=lambda k: k.key_no))

    def primary_key(self, table_id: int) -> KeySpec | None:
        for k in self.keys:
            if k.table_id == table_id and k.key_no == 1:
                return k
        return None

    def key_of(self, table_id: int, key_no: int) -> KeySpec:
        for k in self.keys:
            if k.table_id == table_id and k.key_no == key_no:
                return k
        raise StoreError(f"table id {table_id} has no key number {key_no}")

    def fks_of(self, table_id: int) -> tuple[ForeignKeySpec, ...]:
        return tuple(
            sorted((f for f in self.foreign_keys if f.from_table == table_id), key=lambda f: f.fk_no)
        )

    def fks_into(self, table_id: int) -> tuple[ForeignKeySpec, ...]:
        return tuple(
            sorted(
                (f for f in self.foreign_keys if f.to_table == table_id),
                key=lambda f: (f.from_table, f.fk_no),
            )
        )

    def fk_edge(self, owner_table_id: int, fk_no: int) -> ForeignKeySpec:
        for f in self.foreign_keys:
            if f.from_table == owner_table_id and f.fk_no == fk_no:
                return f
        raise StoreError(f"no foreign key f{owner_table_id}.{fk_no}")

    # ---- join paths ----

    def find_paths(self, t1: int, t2: int) -> tuple[JoinPath, ...]:
        """Stored join paths from ``t1`` to ``t2``, shortest first."""
        self.table(t1)
        self.table(t2)
        return tuple(p for p in self.paths if p.src == t1 and p.dst == t2)

    def direct_relationship(self, t1: int, t2: int) -> ForeignKeySpec | None:
        """The foreign key directly linking two tables, either direction.

        The returned spec's ``from_table`` tells which side holds the
        key.  With several direct keys the lowest (owner, fk_no) wins.
        """
        self.table(t1)
        self.table(t2)
        candidates = [
            f
            for f in self.foreign_keys
            if {f.from_table, f.to_table} == {t1, t2}
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda f: (f.from_table, f.fk_no))

    def path_string(self, path: JoinPath) -> str:
        """Render a path as ``(1, f1.1, 3, f3.1, 2)``."""
        parts = [str(path.tables[0])]
        for i, (owner, fk_no) in enumerate(path.edges):
            parts.append(f"f{owner}.{fk_no}")
            parts.append(str(path.tables[i + 1]))
        return "(" + ", ".join(parts) + ")"

    def parse_path(self, text: str) -> JoinPath:
        """Inverse of :meth:`path_string`."""
        bad = StoreError(f"malformed join path string: {text!r}", path=text)
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise bad
        tokens = [tok.strip() for tok in body[1:-1].split(",")]
        if len(tokens) % 2 == 0 or not tokens:
            raise bad
        tables: list[int] = []
        edges: list[tuple[int, int]] = []
        for i, tok in enumerate(tokens):
            if i % 2 == 0:
                if not tok.isdigit():
                    raise bad
                tables.append(self.table(int(tok)).table_id)
            else:
                m = _PATH_EDGE_RE.match(tok)
                if not m:
                    raise bad
                edge = (int(m.group(1)), int(m.group(2)))
                self.fk_edge(*edge)
                edges.append(edge)
        return JoinPath(tuple(tables), tuple(edges))


def compute_paths(catalog: SchemaCatalog, max_hops: int = 3) -> SchemaCatalog:
    """Enumerate every simple foreign-key path of at most ``max_hops`` edges.

    Paths exist for every ordered pair of distinct tables reachable
    through the key graph, with edges traversable in both directions.
    The result list is sorted ascending by hop count, then by the table
    name sequence, then by edge identity, so the first stored path for
    any pair is a shortest one and the ordering is reproducible.
    """
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    # adjacency over both edge directions
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {t.table_id: [] for t in catalog.tables}
    for f in catalog.foreign_keys:
        edge = (f.from_table, f.fk_no)
        adj[f.from_table].append((f.to_table, edge))
        adj[f.to_table].append((f.from_table, edge))

    found: list[JoinPath] = []

    def walk(tables: list[int], edges: list[tuple[int, int]]) -> None:
        if len(edges) >= max_hops:
            return
        for nxt, edge in adj[tables[-1]]:
            if nxt in tables:
                continue
            tables.append(nxt)
            edges.append(edge)
            found.append(JoinPath(tuple(tables), tuple(edges)))
            walk(tables, edges)
            tables.pop()
            edges.pop()

    for t in sorted(catalog.tables, key=lambda x: x.table_id):
        walk([t.table_id], [])

    names = {t.table_id: t.name for t in catalog.tables}

    def sort_key(p: JoinPath):
        return (p.hops, tuple(names[tid] for tid in p.tables), p.edges)

    found.sort(key=sort_key)
    return replace(catalog, paths=tuple(found))


def _check_unique_ci(kind: str, names: list[str], where: str) -> None:
    seen: dict[str, str] = {}
    for n in names:
        f = n.casefold()
        if f in seen:
            raise RegistrationError(
                f"{kind} names {seen[f]!r} and {n!r} collide case-insensitively in {where}"
            )
        seen[f] = n


def register_database(gateway, annotations=None) -> SchemaCatalog:
    """Introspect the application database and build its catalog.

    ``annotations`` may supply human descriptions and extra foreign
    keys for backends that never declared them; structure always comes
    from the backend itself.  Paths are left empty until
    :func:`compute_paths`.
    """
    raw = gateway.introspect()
    ann_tables = annotations.tables if annotations is not None else {}
    extra_fks = list(annotations.foreign_keys) if annotations is not None else []

    _check_unique_ci("table", [item["name"] for item in raw], "the database")

    tables: list[TableMeta] = []
    columns: list[ColumnMeta] = []
    keys: list[KeySpec] = []
    fkeys: list[ForeignKeySpec] = []
    tid_by_name: dict[str, int] = {}
    cid_by_name: dict[tuple[int, str], int] = {}

    for table_id, item in enumerate(raw, start=1):
        name = item["name"]
        if not item["columns"]:
            raise RegistrationError(f"table {name!r} exposes no readable columns", table=name)
        _check_unique_ci("column", [c for c, _ in item["columns"]], f"table {name!r}")
        t_ann = ann_tables.get(name)
        tables.append(
            TableMeta(
                table_id=table_id,
                name=name,
                description=(t_ann.description if t_ann and t_ann.description else name.lower()),
            )
        )
        tid_by_name[name] = table_id
        col_anns = t_ann.columns if t_ann is not None else {}
        unknown_cols = set(col_anns) - {c for c, _ in item["columns"]}
        if unknown_cols:
            raise RegistrationError(
                f"annotations describe unknown columns on {name!r}: "
                f"{', '.join(sorted(unknown_cols))}",
                table=name,
            )
        for column_id, (col_name, raw_type) in enumerate(item["columns"], start=1):
            c_ann = col_anns.get(col_name)
            columns.append(
                ColumnMeta(
                    table_id=table_id,
                    column_id=column_id,
                    name=col_name,
                    data_type=normalize_data_type(raw_type),
                    description=(
                        c_ann.description if c_ann and c_ann.description else col_name.lower()
                    ),
                )
            )
            cid_by_name[(table_id, col_name)] = column_id

    def col_ids(table_id: int, names_: list[str], context: str) -> tuple[int, ...]:
        out = []
        for n in names_:
            cid = cid_by_name.get((table_id, n))
            if cid is None:
                raise RegistrationError(f"{context} names unknown column {n!r}")
            out.append(cid)
        return tuple(out)

    # candidate keys: the primary key is key_no 1; unique constraints
    # follow; a missing primary key promotes the first unique key.
    key_lookup: dict[int, list[KeySpec]] = {}
    for table_id, item in enumerate(raw, start=1):
        name = item["name"]
        specs: list[tuple[int, ...]] = []
        if item["pkey"]:
            specs.append(col_ids(table_id, item["pkey"], f"primary key of {name!r}"))
        for uniq in sorted(item.get("uniques", ()), key=tuple):
            ids = col_ids(table_id, list(uniq), f"unique key of {name!r}")
            if ids not in specs:
                specs.append(ids)
        table_keys = [
            KeySpec(table_id=table_id, key_no=no, columns=ids)
            for no, ids in enumerate(specs, start=1)
        ]
        keys.extend(table_keys)
        key_lookup[table_id] = table_keys

    def resolve_fk(owner_name: str, fk_no: int, decl: dict) -> ForeignKeySpec:
        owner_id = tid_by_name[owner_name]
        ref_name = decl["ref_table"]
        ref_id = tid_by_name.get(ref_name)
        if ref_id is None:
            raise RegistrationError(
                f"foreign key on {owner_name!r} references unknown table {ref_name!r}",
                table=owner_name,
            )
        if len(decl["columns"]) != len(decl["ref_columns"]) or not decl["columns"]:
            raise RegistrationError(
                f"foreign key on {owner_name!r} has mismatched column lists", table=owner_name
            )
        from_ids = col_ids(owner_id, list(decl["columns"]), f"foreign key of {owner_name!r}")
        to_ids = col_ids(ref_id, list(decl["ref_columns"]), f"foreign key of {owner_name!r}")
        # pick the referenced candidate key; an FK onto undeclared
        # unique columns registers those columns as a further key
        target = None
        for k in key_lookup[ref_id]:
            if k.columns == to_ids:
                target = k
                break
            if set(k.columns) == set(to_ids):
                order = {cid: i for i, cid in enumerate(k.columns)}
                paired = sorted(zip(from_ids, to_ids), key=lambda p: order[p[1]])
                from_ids = tuple(p[0] for p in paired)
                to_ids = tuple(p[1] for p in paired)
                target = k
                break
        if target is None:
            target = KeySpec(table_id=ref_id, key_no=len(key_lookup[ref_id]) + 1, columns=to_ids)
            key_lookup[ref_id].append(target)
            keys.append(target)
        return ForeignKeySpec(
            from_table=owner_id,
            fk_no=fk_no,
            column_pairs=tuple(zip(from_ids, to_ids)),
            to_table=ref_id,
            to_key_no=target.key_no,
        )

    for table_id, item in enumerate(raw, start=1):
        name = item["name"]
        declared = list(item["fkeys"]) + [
            {"columns": d.columns, "ref_table": d.ref_table, "ref_columns": d.ref_columns}
            for d in extra_fks
            if d.table == name
        ]
        seen: set[tuple] = set()
        fk_no = 0
        for decl in declared:
            sig = (tuple(decl["columns"]), decl["ref_table"], tuple(decl["ref_columns"]))
            if sig in seen:
                continue
            seen.add(sig)
            fk_no += 1
            fkeys.append(resolve_fk(name, fk_no, decl))

    unknown_ann = set(ann_tables) - set(tid_by_name)
    if unknown_ann:
        raise RegistrationError(
            f"annotations describe unknown tables: {', '.join(sorted(unknown_ann))}"
        )

    return SchemaCatalog(
        tables=tuple(tables),
        columns=tuple(columns),
        keys=tuple(sorted(keys, key=lambda k: (k.table_id, k.key_no))),
        foreign_keys=tuple(fkeys),
        paths=(),
    )
