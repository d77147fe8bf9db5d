"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP layer
and the CLI can report failures uniformly.
"""

from __future__ import annotations

from typing import Any


class DbSearchError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def __init__(self, message: str, **detail: Any) -> None:
        super().__init__(message)
        self.message = message
        self.detail = dict(detail)


class RegistrationError(DbSearchError):
    """Registering the application database failed."""

    code = "registration_error"


class UnknownTableError(DbSearchError):
    """A table id or name does not exist in the catalog."""

    code = "unknown_table"


class UnknownColumnError(DbSearchError):
    """A column id or name does not exist on the given table."""

    code = "unknown_column"


class QuerySyntaxError(DbSearchError):
    """The keyword query text is malformed (e.g. unbalanced quote)."""

    code = "query_syntax"

    def __init__(self, message: str, position: int) -> None:
        super().__init__(message, position=position)
        self.position = position


class UnmappableKeywordError(DbSearchError):
    """A keyword could not be mapped to any value, table or column."""

    code = "unmappable_keyword"

    def __init__(self, keyword: str, policy: str) -> None:
        super().__init__(
            f"unable to interpret keyword {keyword!r} (unmapped_keyword policy: {policy})",
            keyword=keyword,
            policy=policy,
        )
        self.keyword = keyword
        self.policy = policy


class NoInterpretationError(DbSearchError):
    """No valid interpretation exists for the query."""

    code = "no_interpretation"


class UnrelatedRelationsError(DbSearchError):
    """Two relations in one interpretation have no join path between them."""

    code = "unrelated_relations"

    def __init__(self, name1: str, name2: str) -> None:
        super().__init__(
            f"relations {name1!r} and {name2!r} are not related within the configured hop bound",
            relations=[name1, name2],
        )
        self.relations = (name1, name2)


class IntersectionImpossibleError(DbSearchError):
    """A repeated-attribute query has no relation through which the
    repeated values could intersect."""

    code = "intersection_impossible"


class ExecutionError(DbSearchError):
    """A generated SQL statement failed or timed out at the backend."""

    code = "execution_error"

    def __init__(self, message: str, relation: str) -> None:
        super().__init__(message, relation=relation)
        self.relation = relation


class StoreError(DbSearchError):
    """The SS-DB store is missing, corrupt, or unwritable."""

    code = "store_error"


class ConfigError(DbSearchError):
    """Bad configuration file, flag, or environment override."""

    code = "config_error"


class InvalidRequestError(DbSearchError):
    """A search or drill request failed validation."""

    code = "invalid_request"
