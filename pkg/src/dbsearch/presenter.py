"""Annotation of tuple sets with navigation links and serialization.

Three display rules drive annotation: rows stay in rank order, every
foreign-key cell links to the referenced table's keyed row, and each
row gains a drill-down line per referencing table absent from the
result.  Captions come from the registered descriptions and the
vocabulary, never from internal identifiers.
"""

from __future__ import annotations

import html as html_mod
import json
import urllib.parse
from dataclasses import dataclass, field
from typing import Iterable

from .catalog import ColumnMeta, SchemaCatalog
from .engine import TupleSet
from .lexicon import Lexicon
from .parser import Interpretation

_HTML_STYLE = """
body { font-family: sans-serif; margin: 1.5em; color: #222; }
h1 { font-size: 1.3em; }
h2 { font-size: 1.1em; margin-bottom: 0.3em; }
p.interp { color: #555; }
table { border-collapse: collapse; margin-bottom: 0.4em; }
th, td { border: 1px solid #999; padding: 0.25em 0.6em; text-align: left; }
th { background: #eee; }
td.null { color: #999; font-style: italic; }
tr.drill td { border: none; font-size: 0.9em; padding-top: 0; }
ul.diagnostics { color: #777; font-size: 0.85em; }
""".strip()


@dataclass(frozen=True)
class LinkAnnotation:
    """One navigable annotation on a frame.

    ``source`` is (row index, column_id) for a cell link and a bare
    row index for a drill line.  ``key_values`` keeps column ids for
    invariant checks; ``params`` carries the same data resolved to
    column names, ready for a URL query string.
    """

    kind: str
    source: tuple[int, int] | int
    target_table: int
    key_values: tuple[tuple[int, object], ...]
    target_name: str
    label: str
    params: tuple[tuple[str, object], ...]
    fk_no: int | None = None


@dataclass(frozen=True)
class Frame:
    """One tuple set with its resolved captions and links."""

    tuple_set: TupleSet
    links: tuple[LinkAnnotation, ...]
    relation_name: str
    relation_description: str
    columns: tuple[ColumnMeta, ...]


@dataclass(frozen=True)
class ResultDocument:
    query: str
    interpretation: str
    frames: tuple[Frame, ...]
    diagnostics: tuple[str, ...] = field(default=())


def external_form(lexicon: Lexicon, internal: str, scope: str) -> str | None:
    """First vocabulary external whose internal form matches, if any."""
    wanted = internal.strip().casefold()
    for entry in lexicon.voc:
        if entry.scope == scope and entry.internal.strip().casefold() == wanted:
            return entry.external
    return None


def describe_interpretation(
    interp: Interpretation | None, catalog: SchemaCatalog, lexicon: Lexicon
) -> str:
    """Render an interpretation as readable (relation, attribute, value)
    triples, vocabulary applied to values."""
    if interp is None:
        return ""
    parts = []
    for t in interp.terms:
        bits = [catalog.table(t.relation).description]
        if t.attribute is not None:
            bits.append(catalog.column(t.relation, t.attribute).description)
        if t.value is not None:
            shown = external_form(lexicon, t.value, "value-code") or t.value
            bits.append(f"not {shown}" if t.negated else shown)
        parts.append("(" + ", ".join(bits) + ")")
    return " and ".join(parts)


def _row_key_values(
    ts: TupleSet, row: tuple, cids: Iterable[int]
) -> list[object] | None:
    """Cell values of the given columns, or None when any is null."""
    pos = {cid: i for i, (_tid, cid) in enumerate(ts.columns)}
    out = []
    for cid in cids:
        if cid not in pos:
            return None
        v = row[pos[cid]]
        if v is None:
            return None
        out.append(v)
    return out


def annotate(
    tuple_sets: Iterable[TupleSet],
    catalog: SchemaCatalog,
    lexicon: Lexicon,
    *,
    query: str = "",
    interpretation: Interpretation | None = None,
    notes: Iterable[str] = (),
) -> ResultDocument:
    """Build the annotated result document for a plan's tuple sets."""
    sets = list(tuple_sets)
    present = {ts.relation for ts in sets}
    frames: list[Frame] = []
    diagnostics = list(notes)
    for ts in sets:
        table = catalog.table(ts.relation)
        columns = tuple(catalog.column(tid, cid) for tid, cid in ts.columns)
        links: list[LinkAnnotation] = []
        for fk in catalog.fks_of(ts.relation):
            to_table = catalog.table(fk.to_table)
            to_cols = [catalog.column(fk.to_table, cid) for cid in fk.to_columns]
            for i, row in enumerate(ts.rows):
                values = _row_key_values(ts, row, fk.from_columns)
                if values is None:
                    continue
                key_values = tuple(
                    (c.column_id, v) for c, v in zip(to_cols, values)
                )
                params = tuple((c.name, v) for c, v in zip(to_cols, values))
                for cid in fk.from_columns:
                    links.append(
                        LinkAnnotation(
                            kind="fk_cell",
                            source=(i, cid),
                            target_table=fk.to_table,
                            key_values=key_values,
                            target_name=to_table.name,
                            label=to_table.description,
                            params=params,
                        )
                    )
        for fk in catalog.fks_into(ts.relation):
            if fk.from_table in present or fk.from_table == ts.relation:
                continue
            ref_table = catalog.table(fk.from_table)
            fk_cols = [catalog.column(fk.from_table, cid) for cid in fk.from_columns]
            label = f"all {ref_table.description} information"
            for i, row in enumerate(ts.rows):
                values = _row_key_values(ts, row, fk.to_columns)
                if values is None:
                    continue
                links.append(
                    LinkAnnotation(
                        kind="drill_line",
                        source=i,
                        target_table=fk.from_table,
                        key_values=tuple(
                            (c.column_id, v) for c, v in zip(fk_cols, values)
                        ),
                        target_name=ref_table.name,
                        label=label,
                        params=tuple(
                            (c.name, v) for c, v in zip(fk_cols, values)
                        ),
                        fk_no=fk.fk_no,
                    )
                )
        frames.append(
            Frame(
                tuple_set=ts,
                links=tuple(links),
                relation_name=table.name,
                relation_description=table.description,
                columns=columns,
            )
        )
    if not frames:
        diagnostics.append("no results")
    elif all(not f.tuple_set.rows for f in frames):
        diagnostics.append("no matching rows")
    return ResultDocument(
        query=query,
        interpretation=describe_interpretation(interpretation, catalog, lexicon),
        frames=tuple(frames),
        diagnostics=tuple(diagnostics),
    )


def link_href(link: LinkAnnotation, base_url: str = "", html: bool = False) -> str:
    """Server endpoint URL for one link, composite keys percent-encoded
    as ordered query parameters."""
    qs = urllib.parse.urlencode(
        [(name, str(value)) for name, value in link.params],
        quote_via=urllib.parse.quote,
    )
    if link.kind == "fk_cell":
        path = f"/api/row/{urllib.parse.quote(link.target_name)}"
    else:
        path = f"/api/related/{urllib.parse.quote(link.target_name)}/{link.fk_no}"
    url = f"{base_url}{path}?{qs}"
    if html:
        url += "&format=html"
    return url


def document_dict(doc: ResultDocument) -> dict:
    """The stable JSON shape of a result document."""
    frames = []
    for f in doc.frames:
        ts = f.tuple_set
        links = []
        for link in f.links:
            links.append(
                {
                    "kind": link.kind,
                    "row": link.source[0] if link.kind == "fk_cell" else link.source,
                    "column": (
                        next(
                            c.name for c in f.columns
                            if c.column_id == link.source[1]
                        )
                        if link.kind == "fk_cell"
                        else None
                    ),
                    "target": link.target_name,
                    "label": link.label,
                    "fk_no": link.fk_no,
                    "params": [[name, value] for name, value in link.params],
                    "href": link_href(link),
                }
            )
        frames.append(
            {
                "relation": f.relation_name,
                "description": f.relation_description,
                "columns": [
                    {"name": c.name, "description": c.description, "type": c.data_type}
                    for c in f.columns
                ],
                "rows": [list(row) for row in ts.rows],
                "rank_counts": list(ts.rank_counts) if ts.rank_counts is not None else None,
                "total": ts.total,
                "links": links,
            }
        )
    return {
        "query": doc.query,
        "interpretation": doc.interpretation,
        "frames": frames,
        "diagnostics": list(doc.diagnostics),
    }


def render_json(doc: ResultDocument) -> str:
    return json.dumps(document_dict(doc), indent=2, ensure_ascii=False)


def _cell_html(value: object) -> str:
    if value is None:
        return '<td class="null">(null)</td>'
    return f"<td>{html_mod.escape(str(value))}</td>"


def _document_body(doc: ResultDocument, base_url: str) -> list[str]:
    """Frame tables, drill lines and diagnostics of one document."""
    esc = html_mod.escape
    out: list[str] = []
    if doc.interpretation:
        out.append(f'<p class="interp">reading: {esc(doc.interpretation)}</p>')
    if not doc.frames or all(not f.tuple_set.rows for f in doc.frames):
        out.append(f"<p>no results for <strong>{esc(doc.query)}</strong></p>")
    for f in doc.frames:
        ts = f.tuple_set
        cell_links: dict[tuple[int, int], LinkAnnotation] = {}
        drill_links: dict[int, list[LinkAnnotation]] = {}
        for link in f.links:
            if link.kind == "fk_cell":
                cell_links[link.source] = link
            else:
                drill_links.setdefault(link.source, []).append(link)
        out.append(f"<h2>{esc(f.relation_description)}</h2>")
        out.append("<table>")
        header = "".join(f"<th>{esc(c.description)}</th>" for c in f.columns)
        if ts.rank_counts is not None:
            header += "<th>count</th>"
        out.append(f"<thead><tr>{header}</tr></thead><tbody>")
        ncols = len(f.columns) + (1 if ts.rank_counts is not None else 0)
        for i, row in enumerate(ts.rows):
            cells = []
            for c, value in zip(f.columns, row):
                link = cell_links.get((i, c.column_id))
                if link is not None and value is not None:
                    href = esc(link_href(link, base_url, html=True), quote=True)
                    title = esc(link.label, quote=True)
                    cells.append(
                        f'<td><a href="{href}" title="{title}">{esc(str(value))}</a></td>'
                    )
                else:
                    cells.append(_cell_html(value))
            if ts.rank_counts is not None:
                cells.append(f"<td>{ts.rank_counts[i]}</td>")
            out.append(f"<tr>{''.join(cells)}</tr>")
            for link in drill_links.get(i, ()):
                href = esc(link_href(link, base_url, html=True), quote=True)
                out.append(
                    f'<tr class="drill"><td colspan="{ncols}">'
                    f'<a href="{href}">{esc(link.label)}</a></td></tr>'
                )
        out.append("</tbody></table>")
        if ts.total > len(ts.rows):
            out.append(f"<p>{len(ts.rows)} of {ts.total} rows shown</p>")
    if doc.diagnostics:
        out.append("<ul class=\"diagnostics\">")
        out.extend(f"<li>{esc(d)}</li>" for d in doc.diagnostics)
        out.append("</ul>")
    return out


def _page(title: str, body: list[str]) -> str:
    esc = html_mod.escape
    return "\n".join(
        [
            "<!doctype html>",
            '<html><head><meta charset="utf-8">',
            f"<title>{esc(title)}</title>",
            f"<style>{_HTML_STYLE}</style>",
            "</head><body>",
            f"<h1>{esc(title)}</h1>",
            *body,
            "</body></html>",
        ]
    )


def render_html(doc: ResultDocument, base_url: str = "") -> str:
    """Self-contained HTML page: one table per frame, linked cells and
    drill lines as anchors to the server's drill endpoints."""
    return _page(f"search: {doc.query}", _document_body(doc, base_url))


def render_groups_html(docs: list[ResultDocument], query: str, base_url: str = "") -> str:
    """One page showing every executed interpretation as its own group."""
    if len(docs) == 1:
        return render_html(docs[0], base_url)
    body: list[str] = []
    for i, doc in enumerate(docs, start=1):
        body.append(f"<h2>reading {i}</h2>")
        body.extend(_document_body(doc, base_url))
    if not docs:
        body.append("<p>no results</p>")
    return _page(f"search: {query}", body)
