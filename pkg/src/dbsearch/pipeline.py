"""The shared search pipeline behind the CLI and the HTTP server.

One service object owns the loaded catalog, lexicon and gateway and
runs the full flow: tokenize, bind, interpret, plan, rank, execute,
annotate.  Both entry points serialize its output identically, so a
command-line search and an HTTP search return the same bytes.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from . import annotations as ann_mod
from . import parser, planner, presenter, store
from .catalog import SchemaCatalog, compute_paths, register_database
from .config import Config
from .engine import SortOrderSpec, TupleSet, execute_plan, row_limit_apply
from .errors import InvalidRequestError
from .lexicon import Lexicon, normalize, value_predicate
from .presenter import ResultDocument

RANK_MODES = ("fk_count", "app_sort", "none")
INTERP_MODES = ("best", "all")


def register_and_save(
    uri: str,
    ssdb_path: str,
    annotations_path: str | None = None,
    max_hops: int = 3,
) -> dict[str, int]:
    """Full registration: introspect, annotate, index, persist.

    Returns the content counts an operator wants echoed back.
    """
    annotations = (
        ann_mod.load_annotations(annotations_path)
        if annotations_path is not None
        else ann_mod.AdminAnnotations()
    )
    gateway = store.SqlGateway(uri)
    try:
        catalog = register_database(gateway, annotations)
        catalog = compute_paths(catalog, max_hops=max_hops)
        lexicon = Lexicon()
        policy = ann_mod.build_policy(annotations, catalog)
        vmap_count = lexicon.build_vmap(gateway, catalog, policy)
        for entry in ann_mod.voc_entries(annotations, catalog):
            lexicon.add_voc_entry(entry)
        for ct in annotations.code_tables:
            lexicon.import_code_table(gateway, catalog, ct.table, ct.code, ct.description)
        sort_orders = ann_mod.sort_order_specs(annotations, catalog)
        store.save_ssdb(catalog, lexicon, sort_orders, ssdb_path)
        return {
            "tables": len(catalog.tables),
            "columns": len(catalog.columns),
            "foreign_keys": len(catalog.foreign_keys),
            "paths": len(catalog.paths),
            "vmap_entries": vmap_count,
            "voc_entries": len(lexicon.voc),
            "sort_orders": len(sort_orders),
        }
    finally:
        gateway.dispose()


@dataclass
class SearchService:
    """Loaded registration plus a live gateway, ready to answer queries."""

    config: Config
    catalog: SchemaCatalog
    lexicon: Lexicon
    sort_orders: tuple[SortOrderSpec, ...]
    gateway: store.SqlGateway
    _lexicon_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def open(cls, config: Config) -> "SearchService":
        if not config.ssdb:
            raise InvalidRequestError("no SS-DB path configured")
        if not config.uri:
            raise InvalidRequestError("no application database URI configured")
        catalog, lexicon, sort_orders = store.load_ssdb(config.ssdb)
        gateway = store.SqlGateway(config.uri, query_timeout=config.query_timeout)
        return cls(
            config=config,
            catalog=catalog,
            lexicon=lexicon,
            sort_orders=sort_orders,
            gateway=gateway,
        )

    def close(self) -> None:
        self.gateway.dispose()

    # ---- search ----

    def _check_search_args(self, q: str, rank: str, interp: str, limit: int, offset: int) -> None:
        if not q or not q.strip():
            raise InvalidRequestError("query text must be non-empty")
        if rank not in RANK_MODES:
            raise InvalidRequestError(
                f"rank must be one of {', '.join(RANK_MODES)}; got {rank!r}"
            )
        if interp not in INTERP_MODES:
            raise InvalidRequestError(
                f"interp must be one of {', '.join(INTERP_MODES)}; got {interp!r}"
            )
        if limit < 1 or limit > self.config.row_limit:
            raise InvalidRequestError(
                f"limit must be in 1..{self.config.row_limit}; got {limit}"
            )
        if offset < 0:
            raise InvalidRequestError(f"offset must be >= 0; got {offset}")

    def _interpret(self, q: str) -> list[parser.Interpretation]:
        policy = self.config.unmapped_keyword
        tokens = parser.tokenize(q)
        before = len(self.lexicon.vmap)
        with self._lexicon_lock:
            pairs = parser.interpret(
                tokens,
                self.lexicon,
                self.catalog,
                cap=self.config.interpretation_cap,
                policy=policy,
                gateway=self.gateway if policy == "scan" else None,
            )
            repairs = self.lexicon.vmap[before:]
        if repairs and self.config.ssdb:
            store.append_vmap(self.config.ssdb, self.catalog, repairs)
        return [interp for interp, _tree in pairs]

    def _run_interpretation(
        self, interp: parser.Interpretation, q: str, rank: str, limit: int, offset: int
    ) -> ResultDocument:
        plan = planner.plan_interpretation(interp, self.catalog)
        plan = planner.attach_ranking(plan, self.catalog, rank, self.sort_orders)
        tuple_sets = execute_plan(plan, self.gateway)
        tuple_sets = [row_limit_apply(ts, limit, offset) for ts in tuple_sets]
        notes = list(plan.notes)
        if plan.extrapolated:
            notes.append("repeated-value intersection extended across extra relations")
        return presenter.annotate(
            tuple_sets,
            self.catalog,
            self.lexicon,
            query=q,
            interpretation=interp,
            notes=notes,
        )

    def search(
        self,
        q: str,
        rank: str = "fk_count",
        interp: str = "best",
        limit: int | None = None,
        offset: int = 0,
    ) -> tuple[dict, list[ResultDocument]]:
        """Run a keyword query; returns the response envelope and the
        per-interpretation documents it was built from."""
        limit = self.config.row_limit if limit is None else limit
        self._check_search_args(q, rank, interp, limit, offset)
        interps = self._interpret(q)
        chosen = interps[:1] if interp == "best" else interps
        docs = [self._run_interpretation(it, q, rank, limit, offset) for it in chosen]
        envelope = {
            "query": q,
            "rank": rank,
            "interp": interp,
            "groups": [presenter.document_dict(d) for d in docs],
        }
        return envelope, docs

    # ---- drill-down and browsing ----

    def _key_filtered(
        self, table_name: str, pairs: list[tuple[str, str]], require: tuple[int, ...] | None = None
    ) -> TupleSet:
        """Rows of one table matching column=value pairs from a link."""
        table = self.catalog.table_named(table_name)
        if not pairs:
            raise InvalidRequestError(f"no key values given for {table.name}")
        frags: list[str] = []
        params: list = []
        seen: list[int] = []
        for name, raw in pairs:
            col = self.catalog.column_named(table.table_id, name)
            frag, p = value_predicate(f't."{col.name}"', col.data_type, normalize(raw))
            frags.append(frag)
            params.extend(p)
            seen.append(col.column_id)
        if require is not None and sorted(seen) != sorted(require):
            names = ", ".join(
                self.catalog.column(table.table_id, cid).name for cid in require
            )
            raise InvalidRequestError(
                f"key values for {table.name} must name exactly: {names}"
            )
        cols = ", ".join(f't."{c.name}"' for c in self.catalog.columns_of(table.table_id))
        pk = self.catalog.primary_key(table.table_id)
        order_cols = pk.columns if pk else tuple(
            c.column_id for c in self.catalog.columns_of(table.table_id)
        )
        order = ", ".join(
            f't."{self.catalog.column(table.table_id, cid).name}" asc' for cid in order_cols
        )
        sql = (
            f'select {cols} from "{table.name}" t where {" and ".join(frags)} order by {order}'
        )
        rows = self.gateway.run_select(sql, tuple(params))
        return TupleSet(
            relation=table.table_id,
            columns=tuple(
                (c.table_id, c.column_id) for c in self.catalog.columns_of(table.table_id)
            ),
            rows=tuple(tuple(r) for r in rows),
            total=len(rows),
        )

    def drill_row(self, table_name: str, pairs: list[tuple[str, str]]) -> ResultDocument:
        """The keyed row of a table, annotated like a search result."""
        ts = self._key_filtered(table_name, pairs)
        echo = f"{table_name} " + ", ".join(f"{n}={v}" for n, v in pairs)
        return presenter.annotate([ts], self.catalog, self.lexicon, query=echo)

    def drill_related(
        self, table_name: str, fk_no: int, pairs: list[tuple[str, str]]
    ) -> ResultDocument:
        """All rows of a referencing table tied to one referenced key."""
        table = self.catalog.table_named(table_name)
        fk = next((f for f in self.catalog.fks_of(table.table_id) if f.fk_no == fk_no), None)
        if fk is None:
            raise InvalidRequestError(f"table {table.name} has no foreign key number {fk_no}")
        ts = self._key_filtered(table_name, pairs, require=fk.from_columns)
        echo = f"{table_name} via key {fk_no}: " + ", ".join(f"{n}={v}" for n, v in pairs)
        return presenter.annotate([ts], self.catalog, self.lexicon, query=echo)

    def browse(self, table_name: str, limit: int, offset: int = 0) -> ResultDocument:
        """One page of a table in primary-key order."""
        if limit < 1 or limit > self.config.row_limit:
            raise InvalidRequestError(
                f"limit must be in 1..{self.config.row_limit}; got {limit}"
            )
        if offset < 0:
            raise InvalidRequestError(f"offset must be >= 0; got {offset}")
        table = self.catalog.table_named(table_name)
        cols = ", ".join(f't."{c.name}"' for c in self.catalog.columns_of(table.table_id))
        pk = self.catalog.primary_key(table.table_id)
        order_cols = pk.columns if pk else tuple(
            c.column_id for c in self.catalog.columns_of(table.table_id)
        )
        order = ", ".join(
            f't."{self.catalog.column(table.table_id, cid).name}" asc' for cid in order_cols
        )
        sql = f'select {cols} from "{table.name}" t order by {order}'
        rows = self.gateway.run_select(sql)
        ts = TupleSet(
            relation=table.table_id,
            columns=tuple(
                (c.table_id, c.column_id) for c in self.catalog.columns_of(table.table_id)
            ),
            rows=tuple(tuple(r) for r in rows),
            total=len(rows),
        )
        ts = row_limit_apply(ts, limit, offset)
        return presenter.annotate(
            [ts], self.catalog, self.lexicon, query=f"browse {table.name}"
        )

    # ---- inspection ----

    def path_names(self, path) -> str:
        """Human form of a join path: names joined by its key edges."""
        parts = [self.catalog.table(path.tables[0]).name]
        for i, (owner, fk_no) in enumerate(path.edges):
            parts.append(f"-(f{owner}.{fk_no})-")
            parts.append(self.catalog.table(path.tables[i + 1]).name)
        return " ".join(parts)

    def paths_between(self, name1: str, name2: str) -> list[str]:
        t1 = self.catalog.table_named(name1)
        t2 = self.catalog.table_named(name2)
        return [self.path_names(p) for p in self.catalog.find_paths(t1.table_id, t2.table_id)]

    def vmap_lookup(self, value: str) -> list[tuple[str, str]]:
        out = []
        for tid, cid in self.lexicon.lookup_value(value):
            out.append(
                (self.catalog.table(tid).name, self.catalog.column(tid, cid).name)
            )
        return out

    def schema_info(self) -> dict:
        """The registered structure, suitable for the schema endpoint."""
        tables = []
        for t in self.catalog.tables:
            keys = [
                {"key_no": k.key_no, "columns": [
                    self.catalog.column(t.table_id, cid).name for cid in k.columns
                ]}
                for k in self.catalog.keys_of(t.table_id)
            ]
            fks = []
            for f in self.catalog.fks_of(t.table_id):
                fks.append(
                    {
                        "fk_no": f.fk_no,
                        "columns": [
                            self.catalog.column(t.table_id, cid).name
                            for cid in f.from_columns
                        ],
                        "ref_table": self.catalog.table(f.to_table).name,
                        "ref_columns": [
                            self.catalog.column(f.to_table, cid).name
                            for cid in f.to_columns
                        ],
                    }
                )
            tables.append(
                {
                    "name": t.name,
                    "description": t.description,
                    "columns": [
                        {"name": c.name, "type": c.data_type, "description": c.description}
                        for c in self.catalog.columns_of(t.table_id)
                    ],
                    "keys": keys,
                    "foreign_keys": fks,
                }
            )
        return {
            "tables": tables,
            "paths": [self.path_names(p) for p in self.catalog.paths],
            "vocabulary": [
                {"external": e.external, "internal": e.internal, "scope": e.scope}
                for e in self.lexicon.voc
            ],
        }


def dumps(payload: dict) -> str:
    """The one JSON serialization both entry points use."""
    return json.dumps(payload, indent=2, ensure_ascii=False)
