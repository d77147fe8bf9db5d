"""Operator command line: registration, inspection, search, serving.

Exit codes: 0 success, 1 runtime failure (one-line diagnostic on
stderr), 2 usage error.
"""

from __future__ import annotations

import functools
import sys
from dataclasses import replace

import click

from . import pipeline, presenter
from .config import load_config
from .errors import DbSearchError
from .pipeline import SearchService
from .presenter import ResultDocument


def _handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except DbSearchError as exc:
            click.echo(f"error: {exc.message}", err=True)
            sys.exit(1)

    return wrapper


def _connection_options(f):
    f = click.option(
        "--config", "config_path", type=click.Path(), default=None,
        help="Configuration file; environment variables override it.",
    )(f)
    f = click.option("--uri", default=None, help="Application database URI.")(f)
    f = click.option("--ssdb", default=None, help="Search store location.")(f)
    return f


def _open_service(config_path: str | None, uri: str | None, ssdb: str | None) -> SearchService:
    cfg = load_config(config_path)
    if uri:
        cfg = replace(cfg, uri=uri)
    if ssdb:
        cfg = replace(cfg, ssdb=ssdb)
    return SearchService.open(cfg)


@click.group()
def main() -> None:
    """Keyword search over relational databases, no schema knowledge needed."""


@main.command()
@click.argument("uri")
@click.option("--annotations", type=click.Path(), default=None,
              help="Annotation file with descriptions, vocabulary, index flags.")
@click.option("--ssdb", required=True, type=click.Path(),
              help="Where to write the search store.")
@click.option("--max-hops", default=3, show_default=True,
              help="Longest join path recorded between two tables.")
@_handle_errors
def register(uri: str, annotations: str | None, ssdb: str, max_hops: int) -> None:
    """Register an application database and build its search store."""
    counts = pipeline.register_and_save(uri, ssdb, annotations, max_hops=max_hops)
    for key in (
        "tables", "columns", "foreign_keys", "paths",
        "vmap_entries", "voc_entries", "sort_orders",
    ):
        click.echo(f"{key.replace('_', ' ')}: {counts[key]}")


@main.command()
@click.argument("table1")
@click.argument("table2")
@_connection_options
@_handle_errors
def paths(table1: str, table2: str, config_path, uri, ssdb) -> None:
    """Print the stored join paths between two tables, shortest first."""
    service = _open_service(config_path, uri, ssdb)
    try:
        lines = service.paths_between(table1, table2)
        if not lines:
            click.echo(f"no stored path between {table1} and {table2}")
            return
        for line in lines:
            click.echo(line)
    finally:
        service.close()


def _text_cell(value) -> str:
    return "(null)" if value is None else str(value)


def _text_tables(docs: list[ResultDocument]) -> str:
    out: list[str] = []
    for doc in docs:
        if doc.interpretation:
            out.append(f"reading: {doc.interpretation}")
        for frame in doc.frames:
            ts = frame.tuple_set
            header = [c.description for c in frame.columns]
            if ts.rank_counts is not None:
                header.append("count")
            body = []
            for i, row in enumerate(ts.rows):
                cells = [_text_cell(v) for v in row]
                if ts.rank_counts is not None:
                    cells.append(str(ts.rank_counts[i]))
                body.append(cells)
            widths = [
                max(len(header[j]), *(len(r[j]) for r in body)) if body else len(header[j])
                for j in range(len(header))
            ]
            out.append("")
            out.append(frame.relation_description)
            out.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
            for cells in body:
                out.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
            for link in frame.links:
                row_index = link.source[0] if link.kind == "fk_cell" else link.source
                out.append(
                    f"  [row {row_index + 1}] {link.label}: {presenter.link_href(link)}"
                )
            if ts.total > len(ts.rows):
                out.append(f"  ({len(ts.rows)} of {ts.total} rows shown)")
        for note in doc.diagnostics:
            out.append(f"note: {note}")
    return "\n".join(out).lstrip("\n")


@main.command()
@click.argument("query")
@click.option("--rank", type=click.Choice(["fk_count", "app_sort", "none"]),
              default="fk_count", show_default=True, help="Result ordering discipline.")
@click.option("--interp", type=click.Choice(["best", "all"]),
              default="best", show_default=True, help="Run the best reading or all of them.")
@click.option("--limit", type=int, default=None, help="Rows per relation.")
@click.option("--offset", type=int, default=0, help="Rows to skip per relation.")
@click.option("--json", "fmt", flag_value="json", help="Machine-readable output.")
@click.option("--html", "fmt", flag_value="html", help="Self-contained HTML page.")
@click.option("--table", "fmt", flag_value="table", default=True,
              help="Plain-text tables (default).")
@_connection_options
@_handle_errors
def search(query, rank, interp, limit, offset, fmt, config_path, uri, ssdb) -> None:
    """Run a keyword query against the registered database."""
    service = _open_service(config_path, uri, ssdb)
    try:
        envelope, docs = service.search(
            query, rank=rank, interp=interp, limit=limit, offset=offset
        )
        if fmt == "json":
            click.echo(pipeline.dumps(envelope))
        elif fmt == "html":
            click.echo(presenter.render_groups_html(docs, query))
        else:
            click.echo(_text_tables(docs))
    finally:
        service.close()


@main.group()
def vmap() -> None:
    """Inspect the value index."""


@vmap.command("lookup")
@click.argument("value")
@_connection_options
@_handle_errors
def vmap_lookup(value: str, config_path, uri, ssdb) -> None:
    """Show which columns contain a value, in index order."""
    service = _open_service(config_path, uri, ssdb)
    try:
        hits = service.vmap_lookup(value)
        if not hits:
            click.echo(f"value {value!r} is not in the index")
            return
        for table, column in hits:
            click.echo(f"{table}.{column}")
    finally:
        service.close()


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Configuration file; environment variables override it.")
@click.option("--assets", type=click.Path(), default=None,
              help="Directory with the browser UI build.")
@_handle_errors
def serve(config_path: str | None, assets: str | None) -> None:
    """Start the HTTP service for the registered database."""
    import uvicorn

    from .server import create_app_from_config

    cfg = load_config(config_path)
    app = create_app_from_config(cfg, assets_dir=assets)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


if __name__ == "__main__":
    main()
