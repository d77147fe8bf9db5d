"""Admin annotation file: the human-supplied half of a registration.

The file is YAML with five optional sections: ``tables`` (descriptions
and per-column descriptions plus index flags), ``foreign_keys`` (for
databases that never declared them), ``vocabulary`` (external term to
internal name translations), ``code_tables`` (tables whose code and
expansion columns seed the vocabulary), and ``sort_orders`` (preferred
presentation order per table).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .catalog import SchemaCatalog
from .engine import SortOrderSpec
from .errors import RegistrationError
from .lexicon import INDEXABLE_TYPES, SCOPES, IndexPolicy, VocEntry, normalize


@dataclass(frozen=True)
class ColumnAnnotation:
    description: str | None = None
    index: bool | None = None


@dataclass(frozen=True)
class TableAnnotation:
    description: str | None = None
    columns: dict[str, ColumnAnnotation] = field(default_factory=dict)


@dataclass(frozen=True)
class FkAnnotation:
    table: str
    columns: tuple[str, ...]
    ref_table: str
    ref_columns: tuple[str, ...]


@dataclass(frozen=True)
class VocAnnotation:
    external: str
    internal: str
    scope: str = "value-code"


@dataclass(frozen=True)
class CodeTableAnnotation:
    table: str
    code: str
    description: str


@dataclass(frozen=True)
class SortOrderAnnotation:
    table: str
    column: str
    direction: str


@dataclass(frozen=True)
class AdminAnnotations:
    tables: dict[str, TableAnnotation] = field(default_factory=dict)
    foreign_keys: tuple[FkAnnotation, ...] = ()
    vocabulary: tuple[VocAnnotation, ...] = ()
    code_tables: tuple[CodeTableAnnotation, ...] = ()
    sort_orders: tuple[SortOrderAnnotation, ...] = ()


def _require_mapping(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise RegistrationError(f"{what} must be a mapping, got {type(value).__name__}")
    return value


def _require_list(value, what: str) -> list:
    if not isinstance(value, list):
        raise RegistrationError(f"{what} must be a list, got {type(value).__name__}")
    return value


def _require_str(value, what: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise RegistrationError(f"{what} must be a non-empty string")
    return value


def _check_keys(mapping: dict, allowed: tuple[str, ...], what: str) -> None:
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise RegistrationError(
            f"{what} has unknown keys: {', '.join(sorted(map(str, unknown)))}"
        )


def _str_list(value, what: str) -> tuple[str, ...]:
    items = _require_list(value, what)
    return tuple(_require_str(v, f"entry of {what}") for v in items)


def parse_annotations(data: dict | None) -> AdminAnnotations:
    """Validate raw parsed YAML into the annotation model."""
    if data is None:
        return AdminAnnotations()
    _require_mapping(data, "annotation file")
    _check_keys(
        data,
        ("tables", "foreign_keys", "vocabulary", "code_tables", "sort_orders"),
        "annotation file",
    )

    tables: dict[str, TableAnnotation] = {}
    for tname, tbody in _require_mapping(data.get("tables") or {}, "tables").items():
        tbody = _require_mapping(tbody or {}, f"table {tname!r}")
        _check_keys(tbody, ("description", "columns"), f"table {tname!r}")
        columns: dict[str, ColumnAnnotation] = {}
        for cname, cbody in _require_mapping(
            tbody.get("columns") or {}, f"columns of {tname!r}"
        ).items():
            cbody = _require_mapping(cbody or {}, f"column {tname}.{cname}")
            _check_keys(cbody, ("description", "index"), f"column {tname}.{cname}")
            desc = cbody.get("description")
            if desc is not None:
                desc = _require_str(desc, f"description of {tname}.{cname}")
            idx = cbody.get("index")
            if idx is not None and not isinstance(idx, bool):
                raise RegistrationError(f"index flag of {tname}.{cname} must be a boolean")
            columns[str(cname)] = ColumnAnnotation(description=desc, index=idx)
        desc = tbody.get("description")
        if desc is not None:
            desc = _require_str(desc, f"description of table {tname!r}")
        tables[str(tname)] = TableAnnotation(description=desc, columns=columns)

    fks = []
    for i, item in enumerate(_require_list(data.get("foreign_keys") or [], "foreign_keys")):
        what = f"foreign_keys[{i}]"
        item = _require_mapping(item, what)
        _check_keys(item, ("table", "columns", "ref_table", "ref_columns"), what)
        fks.append(
            FkAnnotation(
                table=_require_str(item.get("table"), f"{what}.table"),
                columns=_str_list(item.get("columns"), f"{what}.columns"),
                ref_table=_require_str(item.get("ref_table"), f"{what}.ref_table"),
                ref_columns=_str_list(item.get("ref_columns"), f"{what}.ref_columns"),
            )
        )

    voc = []
    for i, item in enumerate(_require_list(data.get("vocabulary") or [], "vocabulary")):
        what = f"vocabulary[{i}]"
        item = _require_mapping(item, what)
        _check_keys(item, ("external", "internal", "scope"), what)
        scope = item.get("scope", "value-code")
        if scope not in SCOPES:
            raise RegistrationError(
                f"{what}.scope must be one of {', '.join(SCOPES)}; got {scope!r}"
            )
        voc.append(
            VocAnnotation(
                external=_require_str(item.get("external"), f"{what}.external"),
                internal=_require_str(item.get("internal"), f"{what}.internal"),
                scope=scope,
            )
        )

    code_tables = []
    for i, item in enumerate(_require_list(data.get("code_tables") or [], "code_tables")):
        what = f"code_tables[{i}]"
        item = _require_mapping(item, what)
        _check_keys(item, ("table", "code", "description"), what)
        code_tables.append(
            CodeTableAnnotation(
                table=_require_str(item.get("table"), f"{what}.table"),
                code=_require_str(item.get("code"), f"{what}.code"),
                description=_require_str(item.get("description"), f"{what}.description"),
            )
        )

    sort_orders = []
    for i, item in enumerate(_require_list(data.get("sort_orders") or [], "sort_orders")):
        what = f"sort_orders[{i}]"
        item = _require_mapping(item, what)
        _check_keys(item, ("table", "column", "direction"), what)
        direction = _require_str(item.get("direction"), f"{what}.direction")
        if direction not in ("ascending", "descending"):
            raise RegistrationError(
                f"{what}.direction must be ascending or descending; got {direction!r}"
            )
        sort_orders.append(
            SortOrderAnnotation(
                table=_require_str(item.get("table"), f"{what}.table"),
                column=_require_str(item.get("column"), f"{what}.column"),
                direction=direction,
            )
        )

    return AdminAnnotations(
        tables=tables,
        foreign_keys=tuple(fks),
        vocabulary=tuple(voc),
        code_tables=tuple(code_tables),
        sort_orders=tuple(sort_orders),
    )


def load_annotations(path: str) -> AdminAnnotations:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise RegistrationError(f"cannot read annotation file {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise RegistrationError(f"annotation file {path!r} is not valid YAML: {exc}") from exc
    try:
        return parse_annotations(data)
    except RegistrationError as exc:
        raise RegistrationError(f"{path}: {exc.message}", **exc.detail) from exc


def build_policy(annotations: AdminAnnotations, catalog: SchemaCatalog) -> IndexPolicy:
    """Index policy from the annotation flags.

    Columns flagged true form the policy, in file order.  With no true
    flag anywhere, every indexable-typed column is selected in catalog
    order, minus any flagged false.
    """
    chosen: list[tuple[int, int]] = []
    excluded: set[tuple[int, int]] = set()
    for tname, t_ann in annotations.tables.items():
        table = catalog.table_named(tname)
        for cname, c_ann in t_ann.columns.items():
            if c_ann.index is None:
                continue
            col = catalog.column_named(table.table_id, cname)
            ref = (table.table_id, col.column_id)
            if c_ann.index:
                chosen.append(ref)
            else:
                excluded.add(ref)
    if chosen:
        return IndexPolicy(tuple(chosen))
    cols = [
        (c.table_id, c.column_id)
        for t in catalog.tables
        for c in catalog.columns_of(t.table_id)
        if c.data_type in INDEXABLE_TYPES and (c.table_id, c.column_id) not in excluded
    ]
    return IndexPolicy(tuple(cols))


def voc_entries(annotations: AdminAnnotations, catalog: SchemaCatalog) -> list[VocEntry]:
    """Vocabulary entries with internals checked against the catalog.

    Table-name internals must name a table; column-name internals must
    name a column somewhere; value-code internals are free text.
    External forms are normalized the way query keywords are.
    """
    out: list[VocEntry] = []
    for v in annotations.vocabulary:
        if v.scope == "table-name" and catalog.find_table(v.internal) is None:
            raise RegistrationError(
                f"vocabulary maps {v.external!r} to unknown table {v.internal!r}"
            )
        if v.scope == "column-name":
            tname, dot, cname = v.internal.partition(".")
            if dot:
                table = catalog.find_table(tname)
                found = table is not None and any(
                    c.name.casefold() == cname.casefold()
                    for c in catalog.columns_of(table.table_id)
                )
            else:
                folded = v.internal.casefold()
                found = any(
                    c.name.casefold() == folded
                    for t in catalog.tables
                    for c in catalog.columns_of(t.table_id)
                )
            if not found:
                raise RegistrationError(
                    f"vocabulary maps {v.external!r} to unknown column {v.internal!r}"
                )
        out.append(VocEntry(external=normalize(v.external), internal=v.internal, scope=v.scope))
    return out


def sort_order_specs(
    annotations: AdminAnnotations, catalog: SchemaCatalog
) -> tuple[SortOrderSpec, ...]:
    specs = []
    for s in annotations.sort_orders:
        table = catalog.table_named(s.table)
        col = catalog.column_named(table.table_id, s.column)
        specs.append(
            SortOrderSpec(table_id=table.table_id, column_id=col.column_id, direction=s.direction)
        )
    return tuple(specs)
