"""Value-to-attribute index (VMAP) and application vocabulary (VOC).

The VMAP maps normalized stored values onto the columns that contain
them, so a query keyword can be bound to schema locations without
touching the application database.  The VOC translates user-facing
terms ("female") into internal codes ("F") and readable names into
schema names.  When a keyword is absent from the VMAP, an optional
exhaustive fallback scan searches every type-compatible column and
repairs the index incrementally.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .catalog import ColumnMeta, SchemaCatalog
from .errors import RegistrationError

log = logging.getLogger("dbsearch.lexicon")

SCOPES = ("value-code", "table-name", "column-name")

#: Column families the index and fallback scan may touch; ``other``
#: typed columns are never searchable.
INDEXABLE_TYPES = ("text", "integer", "decimal", "date")

_INT_RE = re.compile(r"^[+-]?\d+$")
_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def normalize(value) -> str:
    """Canonical keyword/value form: text, trimmed, case-folded."""
    return str(value).strip().casefold()


@dataclass(frozen=True)
class VMapEntry:
    """One value-attribute binding: the normalized value occurs in the column."""

    value: str
    table_id: int
    column_id: int


@dataclass(frozen=True)
class VocEntry:
    """One vocabulary translation from a user-facing term to an internal name."""

    external: str
    internal: str
    scope: str


@dataclass(frozen=True)
class IndexPolicy:
    """The admin's choice of columns whose values enter the VMAP."""

    columns: tuple[tuple[int, int], ...]

    def validate(self, catalog: SchemaCatalog) -> None:
        for table_id, column_id in self.columns:
            col = catalog.column(table_id, column_id)
            if col.data_type not in INDEXABLE_TYPES:
                raise RegistrationError(
                    f"column {catalog.table(table_id).name}.{col.name} has "
                    f"unindexable type {col.data_type!r}"
                )


def compatible_types(keyword: str) -> tuple[str, ...]:
    """Column families whose stored values could normalize to ``keyword``.

    An integer literal can only have come from integer or text storage
    (a stored decimal normalizes with its fraction digits), a decimal
    literal from decimal or text, a date literal from date or text;
    everything else is text-only.
    """
    if _INT_RE.match(keyword):
        return ("integer", "text")
    if _DECIMAL_RE.match(keyword):
        return ("decimal", "text")
    if _DATE_RE.match(keyword):
        return ("date", "text")
    return ("text",)


def value_predicate(col_sql: str, data_type: str, value: str, negated: bool = False):
    """One SQL comparison for a normalized value against a column.

    Text columns compare through lower(trim(..)) so stored values match
    the normalized keyword; numeric and date columns compare raw typed
    parameters.  Returns the predicate fragment and its parameters.
    """
    op = "<>" if negated else "="
    if data_type == "integer":
        try:
            return f"{col_sql} {op} ?", [int(value)]
        except ValueError:
            return f"{col_sql} {op} ?", [value]
    if data_type == "decimal":
        try:
            return f"{col_sql} {op} ?", [float(value)]
        except ValueError:
            return f"{col_sql} {op} ?", [value]
    if data_type == "date":
        return f"{col_sql} {op} ?", [value]
    return f"lower(trim({col_sql})) {op} ?", [value]


@dataclass
class Lexicon:
    """Mutable holder of VMAP and VOC content.

    Entry lists keep insertion order; lookups preserve it, which makes
    interpretation order reproducible (index-policy order first, then
    fallback-scan repairs).
    """

    vmap: list[VMapEntry] = field(default_factory=list)
    voc: list[VocEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_value: dict[str, list[tuple[int, int]]] = {}
        self._vmap_seen: set[VMapEntry] = set()
        for e in self.vmap:
            self._index_vmap(e)
        self._voc_by_scope: dict[tuple[str, str], VocEntry] = {}
        for e in self.voc:
            self._voc_by_scope[(e.external, e.scope)] = e

    def _index_vmap(self, entry: VMapEntry) -> None:
        self._vmap_seen.add(entry)
        self._by_value.setdefault(entry.value, []).append((entry.table_id, entry.column_id))

    # ---- VMAP ----

    def add_vmap_entry(self, entry: VMapEntry) -> bool:
        """Append one binding; duplicates are ignored. True when added."""
        if not entry.value:
            raise RegistrationError("VMAP values must be non-empty")
        if entry in self._vmap_seen:
            return False
        self.vmap.append(entry)
        self._index_vmap(entry)
        return True

    def build_vmap(self, gateway, catalog: SchemaCatalog, policy: IndexPolicy) -> int:
        """Populate the VMAP from the selected columns; returns entries added."""
        policy.validate(catalog)
        added = 0
        for table_id, column_id in policy.columns:
            table = catalog.table(table_id)
            col = catalog.column(table_id, column_id)
            try:
                rows = gateway.run_select(f'select distinct "{col.name}" from "{table.name}"')
            except Exception as exc:
                log.warning("skipping unreadable column %s.%s: %s", table.name, col.name, exc)
                continue
            values = sorted({normalize(r[0]) for r in rows if r[0] is not None} - {""})
            for v in values:
                if self.add_vmap_entry(VMapEntry(v, table_id, column_id)):
                    added += 1
        return added

    def lookup_value(self, keyword: str) -> list[tuple[int, int]]:
        """All (table_id, column_id) bindings for the normalized keyword."""
        return list(self._by_value.get(normalize(keyword), ()))

    def fallback_scan(self, gateway, catalog: SchemaCatalog, keyword: str) -> list[tuple[int, int]]:
        """Search every type-compatible column for an unindexed keyword.

        Every column that holds the value is reported, and newly found
        bindings are appended to the VMAP, so repeating the scan is a
        no-op.  Scan order is catalog order, keeping repairs and result
        order deterministic.
        """
        value = normalize(keyword)
        if not value:
            return []
        families = compatible_types(value)
        hits: list[tuple[int, int]] = []
        for table in catalog.tables:
            for col in catalog.columns_of(table.table_id):
                if col.data_type not in families:
                    continue
                pred, params = value_predicate(f'"{col.name}"', col.data_type, value)
                sql = f'select 1 from "{table.name}" where {pred}'
                rows = gateway.run_select(sql, params, row_limit=1)
                if rows:
                    hits.append((table.table_id, col.column_id))
                    self.add_vmap_entry(VMapEntry(value, table.table_id, col.column_id))
        return hits

    # ---- VOC ----

    def add_voc_entry(self, entry: VocEntry) -> bool:
        """Add one translation; exact duplicates are ignored.

        A second, different internal value for the same (external,
        scope) pair is a registration mistake and is rejected.
        """
        if entry.scope not in SCOPES:
            raise RegistrationError(f"unknown vocabulary scope {entry.scope!r}")
        key = (entry.external, entry.scope)
        existing = self._voc_by_scope.get(key)
        if existing is not None:
            if existing.internal == entry.internal:
                return False
            raise RegistrationError(
                f"vocabulary term {entry.external!r} ({entry.scope}) maps to both "
                f"{existing.internal!r} and {entry.internal!r}"
            )
        self.voc.append(entry)
        self._voc_by_scope[key] = entry
        return True

    def translate(self, term: str, scopes: tuple[str, ...] | None = None) -> list[VocEntry]:
        """All vocabulary entries matching the normalized term."""
        folded = normalize(term)
        allowed = SCOPES if scopes is None else scopes
        return [e for e in self.voc if e.external == folded and e.scope in allowed]

    def import_code_table(
        self, gateway, catalog: SchemaCatalog, table_name: str, code_column: str, description_column: str
    ) -> int:
        """Load a code/expansion table into the VOC as value-code entries."""
        table = catalog.table_named(table_name)
        code_col = catalog.column_named(table.table_id, code_column)
        desc_col = catalog.column_named(table.table_id, description_column)
        rows = gateway.run_select(
            f'select distinct "{code_col.name}", "{desc_col.name}" from "{table.name}"'
        )
        added = 0
        for code, desc in rows:
            if code is None or desc is None:
                continue
            external = normalize(desc)
            if not external:
                continue
            if self.add_voc_entry(VocEntry(external, str(code), "value-code")):
                added += 1
        return added
