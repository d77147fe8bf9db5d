"""Schema-transparent keyword search for relational databases.

Register a database once (structure introspected, values indexed,
vocabulary and join paths recorded), then ask for rows in plain
keywords: the system maps each keyword onto schema elements or stored
values, compiles relationship-aware SQL, and returns ranked, linked,
browsable results.
"""

from .annotations import AdminAnnotations, load_annotations
from .catalog import (
    ColumnMeta,
    ForeignKeySpec,
    JoinPath,
    KeySpec,
    SchemaCatalog,
    TableMeta,
    compute_paths,
    register_database,
)
from .config import Config, load_config
from .engine import SortOrderSpec, TupleSet, execute_plan, row_limit_apply
from .errors import (
    ConfigError,
    DbSearchError,
    ExecutionError,
    IntersectionImpossibleError,
    InvalidRequestError,
    NoInterpretationError,
    QuerySyntaxError,
    RegistrationError,
    StoreError,
    UnknownColumnError,
    UnknownTableError,
    UnmappableKeywordError,
    UnrelatedRelationsError,
)
from .lexicon import IndexPolicy, Lexicon, VMapEntry, VocEntry
from .parser import Interpretation, PathTerm, QueryTree, interpret, tokenize
from .pipeline import SearchService, register_and_save
from .planner import (
    GeneratedQuery,
    QueryClass,
    QueryPlan,
    attach_ranking,
    classify,
    plan_interpretation,
)
from .presenter import LinkAnnotation, ResultDocument, annotate, render_html, render_json
from .store import SqlGateway, load_ssdb, save_ssdb

__version__ = "1.0.0"

__all__ = [
    "AdminAnnotations",
    "ColumnMeta",
    "Config",
    "ConfigError",
    "DbSearchError",
    "ExecutionError",
    "ForeignKeySpec",
    "GeneratedQuery",
    "IndexPolicy",
    "Interpretation",
    "IntersectionImpossibleError",
    "InvalidRequestError",
    "JoinPath",
    "KeySpec",
    "Lexicon",
    "LinkAnnotation",
    "NoInterpretationError",
    "PathTerm",
    "QueryClass",
    "QueryPlan",
    "QuerySyntaxError",
    "QueryTree",
    "RegistrationError",
    "ResultDocument",
    "SchemaCatalog",
    "SearchService",
    "SortOrderSpec",
    "SqlGateway",
    "StoreError",
    "TableMeta",
    "TupleSet",
    "UnknownColumnError",
    "UnknownTableError",
    "UnmappableKeywordError",
    "UnrelatedRelationsError",
    "VMapEntry",
    "VocEntry",
    "annotate",
    "attach_ranking",
    "classify",
    "compute_paths",
    "execute_plan",
    "interpret",
    "load_annotations",
    "load_config",
    "load_ssdb",
    "plan_interpretation",
    "register_and_save",
    "register_database",
    "render_html",
    "render_json",
    "row_limit_apply",
    "save_ssdb",
    "tokenize",
    "__version__",
]
