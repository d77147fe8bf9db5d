"""Execution of query plans against the application database.

Result queries run concurrently on independent connections; the
materialized tuple sets come back in plan order regardless of which
statement finished first, so concurrent and sequential execution are
indistinguishable.  Row order inside a set is fixed by the statement's
ordering clause (rank count descending, or primary key ascending when
unranked), never by arrival order.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from .errors import ExecutionError

if TYPE_CHECKING:
    from .planner import GeneratedQuery, QueryPlan
    from .store import SqlGateway

DEFAULT_QUERY_TIMEOUT = 30.0
_MAX_WORKERS = 8


@dataclass(frozen=True)
class SortOrderSpec:
    """Preferred presentation order for one relation, stored as data."""

    table_id: int
    column_id: int
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in ("ascending", "descending"):
            raise ValueError(f"bad sort direction {self.direction!r}")


@dataclass(frozen=True)
class TupleSet:
    """Rows retrieved from one relation.

    ``columns`` holds (table_id, column_id) refs in select-list order.
    ``rank_counts`` aligns with ``rows`` when the plan carried a rank
    column.  ``total`` is the row count before any slicing.  Null cells
    stay None, distinct from empty text.
    """

    relation: int
    columns: tuple[tuple[int, int], ...]
    rows: tuple[tuple, ...]
    rank_counts: tuple[int, ...] | None = None
    total: int = 0


def _materialize(query: GeneratedQuery, raw_rows: list[tuple]) -> TupleSet:
    width = len(query.select_columns)
    rows: list[tuple] = []
    counts: list[int] = []
    for raw in raw_rows:
        expected = width + 1 if query.has_rank else width
        if len(raw) != expected:
            raise ExecutionError(
                f"statement returned {len(raw)} cells where {expected} were expected",
                relation=query.target_name,
            )
        if query.has_rank:
            rows.append(tuple(raw[:-1]))
            counts.append(int(raw[-1]))
        else:
            rows.append(tuple(raw))
    return TupleSet(
        relation=query.target,
        columns=query.select_columns,
        rows=tuple(rows),
        rank_counts=tuple(counts) if query.has_rank else None,
        total=len(rows),
    )


def execute_plan(plan: QueryPlan, gateway: SqlGateway) -> list[TupleSet]:
    """Run every result query of the plan and materialize its rows.

    A failing statement aborts the whole call with an error naming the
    relation whose query failed; tuple sets from statements that did
    finish are discarded.
    """
    queries = [q for q in plan.queries if q.role == "result"]
    if not queries:
        return []
    timeout = getattr(gateway, "query_timeout", None) or DEFAULT_QUERY_TIMEOUT

    def run(query: GeneratedQuery) -> TupleSet:
        try:
            raw = gateway.run_select(query.sql, query.params)
        except ExecutionError as exc:
            raise ExecutionError(exc.message, relation=query.target_name) from exc
        return _materialize(query, raw)

    workers = min(len(queries), _MAX_WORKERS)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, q) for q in queries]
        results: list[TupleSet] = []
        for q, fut in zip(queries, futures):
            try:
                results.append(fut.result(timeout=timeout))
            except concurrent.futures.TimeoutError:
                raise ExecutionError(
                    f"query exceeded {timeout:g}s", relation=q.target_name
                ) from None
        return results


def row_limit_apply(tuple_set: TupleSet, limit: int, offset: int = 0) -> TupleSet:
    """Stable page of an ordered tuple set; ``total`` keeps the
    pre-slice row count."""
    rows = tuple_set.rows[offset : offset + limit]
    counts = tuple_set.rank_counts
    if counts is not None:
        counts = counts[offset : offset + limit]
    return replace(tuple_set, rows=rows, rank_counts=counts)
