"""Runtime configuration: an INI file under a ``[dbsearch]`` section,
each key overridable through a ``DBSEARCH_``-prefixed environment
variable."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, fields

from .engine import DEFAULT_QUERY_TIMEOUT
from .errors import ConfigError

ENV_PREFIX = "DBSEARCH_"
SECTION = "dbsearch"


@dataclass(frozen=True)
class Config:
    uri: str = ""
    ssdb: str = ""
    host: str = "127.0.0.1"
    port: int = 8080
    unmapped_keyword: str = "reject"
    interpretation_cap: int = 8
    max_hops: int = 3
    query_timeout: float = DEFAULT_QUERY_TIMEOUT
    row_limit: int = 200


def _validate(cfg: Config) -> Config:
    if cfg.unmapped_keyword not in ("reject", "scan"):
        raise ConfigError(
            f"unmapped_keyword must be reject or scan; got {cfg.unmapped_keyword!r}"
        )
    if not 1 <= cfg.port <= 65535:
        raise ConfigError(f"port must be in 1..65535; got {cfg.port}")
    if cfg.interpretation_cap < 1:
        raise ConfigError(f"interpretation_cap must be >= 1; got {cfg.interpretation_cap}")
    if cfg.max_hops < 1:
        raise ConfigError(f"max_hops must be >= 1; got {cfg.max_hops}")
    if cfg.query_timeout <= 0:
        raise ConfigError(f"query_timeout must be positive; got {cfg.query_timeout}")
    if cfg.row_limit < 1:
        raise ConfigError(f"row_limit must be >= 1; got {cfg.row_limit}")
    return cfg


def _convert(name: str, kind: type, raw: str, origin: str):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{origin} {name} must be a number; got {raw!r}") from None


def load_config(path: str | None = None, env: dict | None = None) -> Config:
    """Defaults, then the file if given, then environment overrides."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}
    kinds = {f.name: f.type for f in fields(Config)}
    types = {"int": int, "float": float, "str": str}

    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config file {path!r} is malformed: {exc}") from exc
        if not parser.has_section(SECTION):
            raise ConfigError(f"config file {path!r} has no [{SECTION}] section")
        for name, raw in parser.items(SECTION):
            if name not in kinds:
                raise ConfigError(f"config file {path!r} has unknown key {name!r}")
            values[name] = _convert(name, types[kinds[name]], raw, "config key")

    for name in kinds:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _convert(name, types[kinds[name]], raw, "environment variable")

    return _validate(Config(**values))
