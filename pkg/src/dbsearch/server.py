"""Read-only HTTP service over one registered database.

Search, drill-down and schema browsing run on a shared service object;
registration stays a command-line workflow, so the server never writes
to the application database and only appends index repairs to its own
store.  Every error body carries ``code``, ``message`` and ``detail``.
"""

from __future__ import annotations

import html
import os

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import presenter
from .config import Config
from .errors import DbSearchError, InvalidRequestError
from .pipeline import SearchService, dumps

_STATUS_BY_CODE = {
    "unknown_table": 404,
    "unknown_column": 404,
    "invalid_request": 400,
    "query_syntax": 400,
    "unmappable_keyword": 400,
    "no_interpretation": 400,
    "unrelated_relations": 400,
    "intersection_impossible": 400,
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>database search</title>
<style>body {{ font-family: sans-serif; margin: 3em; }} input[name=q] {{ width: 24em; }}</style>
</head><body>
<h1>database search</h1>
<form action="/api/search" method="get">
  <input name="q" placeholder="keywords" autofocus>
  <input type="hidden" name="format" value="html">
  <select name="rank">
    <option value="fk_count">rank by related rows</option>
    <option value="app_sort">application sort order</option>
    <option value="none">unranked</option>
  </select>
  <select name="interp">
    <option value="best">best reading</option>
    <option value="all">all readings</option>
  </select>
  <button>search</button>
</form>
<p><a href="/api/schema">schema</a></p>
{tables}
</body></html>
"""


def _json(payload: dict, status_code: int = 200) -> Response:
    return Response(
        content=dumps(payload), media_type="application/json", status_code=status_code
    )


def _format_of(value: str) -> str:
    if value not in ("json", "html"):
        raise InvalidRequestError(f"format must be json or html; got {value!r}")
    return value


def _key_pairs(request: Request) -> list[tuple[str, str]]:
    return [(k, v) for k, v in request.query_params.multi_items() if k != "format"]


def create_app(service: SearchService, assets_dir: str | None = None) -> FastAPI:
    app = FastAPI(docs_url=None, redoc_url=None, openapi_url=None)
    if assets_dir is None:
        assets_dir = os.environ.get("DBSEARCH_ASSETS")

    @app.exception_handler(DbSearchError)
    async def on_dbsearch_error(_request: Request, exc: DbSearchError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return _json(
            {"code": exc.code, "message": exc.message, "detail": exc.detail}, status
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_request: Request, exc: RequestValidationError):
        errors = [
            {"where": ".".join(str(p) for p in e.get("loc", ())), "problem": e.get("msg", "")}
            for e in exc.errors()
        ]
        return _json(
            {
                "code": "invalid_request",
                "message": "request validation failed",
                "detail": {"errors": errors},
            },
            400,
        )

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(_request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _json(
            {"code": code, "message": str(exc.detail), "detail": {}}, exc.status_code
        )

    @app.get("/api/search")
    def api_search(
        q: str = "",
        rank: str = "fk_count",
        interp: str = "best",
        limit: int | None = None,
        offset: int = 0,
        format: str = "json",
    ):
        fmt = _format_of(format)
        envelope, docs = service.search(q, rank=rank, interp=interp, limit=limit, offset=offset)
        if fmt == "html":
            return HTMLResponse(presenter.render_groups_html(docs, q))
        return _json(envelope)

    @app.get("/api/row/{table}")
    def api_row(table: str, request: Request, format: str = "json"):
        fmt = _format_of(format)
        doc = service.drill_row(table, _key_pairs(request))
        if fmt == "html":
            return HTMLResponse(presenter.render_html(doc))
        return _json(presenter.document_dict(doc))

    @app.get("/api/related/{table}/{fk_no}")
    def api_related(table: str, fk_no: int, request: Request, format: str = "json"):
        fmt = _format_of(format)
        doc = service.drill_related(table, fk_no, _key_pairs(request))
        if fmt == "html":
            return HTMLResponse(presenter.render_html(doc))
        return _json(presenter.document_dict(doc))

    @app.get("/api/schema")
    def api_schema():
        return _json(service.schema_info())

    @app.get("/api/tables/{table}")
    def api_tables(table: str, limit: int = 50, offset: int = 0, format: str = "json"):
        fmt = _format_of(format)
        doc = service.browse(table, limit=limit, offset=offset)
        if fmt == "html":
            return HTMLResponse(presenter.render_html(doc))
        return _json(presenter.document_dict(doc))

    index_file = os.path.join(assets_dir, "index.html") if assets_dir else None

    @app.get("/")
    def root():
        if index_file and os.path.isfile(index_file):
            with open(index_file, "r", encoding="utf-8") as fh:
                return HTMLResponse(fh.read())
        tables = "".join(
            f'<li><a href="/api/tables/{html.escape(t.name, quote=True)}?format=html">'
            f"{html.escape(t.description)}</a></li>"
            for t in service.catalog.tables
        )
        listing = f"<ul>{tables}</ul>" if tables else ""
        return HTMLResponse(_FALLBACK_PAGE.format(tables=listing))

    if assets_dir and os.path.isdir(assets_dir):
        app.mount("/assets", StaticFiles(directory=assets_dir), name="assets")

    return app


def create_app_from_config(config: Config, assets_dir: str | None = None) -> FastAPI:
    return create_app(SearchService.open(config), assets_dir=assets_dir)
