"""
Run configuration shared by the command line subcommands.

Values are resolved in the order defaults, TOML file, ``SUPERCURVE_*`` environment
variables and explicit flags; later sources win.
"""

from __future__ import annotations

import os
import tomllib
from dataclasses import dataclass, fields, replace
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from supercurves.exceptions import InvalidInputError

logger = getLogger(__name__)

ENV_PREFIX = "SUPERCURVE_"
TOOL_TABLE = ("tool", "supercurves")


@dataclass(frozen=True)
class RunConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    grid_resolution: int = 256
    eps0: float = 0.4
    nu0: float = 1250.0
    ladder_count: int = 4
    search_tol: float = 1e-4
    seed: int = 42
    threads: int = 1
    output_dir: Optional[Path] = None
    csv_path: Optional[Path] = None

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "search_tol", "eps0", "nu0"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"must be positive, got {getattr(self, name)}", name)
        if self.grid_resolution < 2:
            raise InvalidInputError(
                f"must be at least 2, got {self.grid_resolution}", "grid_resolution"
            )
        if self.ladder_count < 3:
            raise InvalidInputError(
                f"ladders need at least 3 entries, got {self.ladder_count}", "ladder_count"
            )
        if self.threads < 1:
            raise InvalidInputError(f"must be at least 1, got {self.threads}", "threads")

    def updated(self, values: Mapping[str, Any], source: str = "flags") -> RunConfig:
        """A copy with the non-None ``values`` applied, converted to the field types."""
        known = {item.name: item for item in fields(self)}
        changes: Dict[str, Any] = {}
        for name, value in values.items():
            if value is None:
                continue
            if name not in known:
                raise InvalidInputError(f"unknown setting {name!r}", source)
            changes[name] = _convert(name, value, source)
        return replace(self, **changes) if changes else self


_CONVERTERS = {
    "rel_tol": float,
    "abs_tol": float,
    "grid_resolution": int,
    "eps0": float,
    "nu0": float,
    "ladder_count": int,
    "search_tol": float,
    "seed": int,
    "threads": int,
    "output_dir": Path,
    "csv_path": Path,
}


def _convert(name: str, value: Any, source: str) -> Any:
    converter = _CONVERTERS[name]
    if converter is int and isinstance(value, float) and not value.is_integer():
        raise InvalidInputError(f"expected an integer, got {value!r}", f"{source}: {name}")
    try:
        return converter(value)
    except (TypeError, ValueError) as error:
        raise InvalidInputError(
            f"cannot read {value!r} as {converter.__name__}", f"{source}: {name}"
        ) from error


def read_config_file(path: Path) -> Dict[str, Any]:
    """The ``[tool.supercurves]`` table of a TOML file, or its top level."""
    try:
        with open(path, "rb") as file:
            document = tomllib.load(file)
    except tomllib.TOMLDecodeError as error:
        raise InvalidInputError(str(error), str(path)) from error
    table: Any = document
    for key in TOOL_TABLE:
        if not isinstance(table, dict) or key not in table:
            table = None
            break
        table = table[key]
    if table is None:
        table = {key: value for key, value in document.items() if key != "tool"}
    if not isinstance(table, dict):
        raise InvalidInputError("the supercurves table must be a TOML table", str(path))
    return table


def environment_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    environ = os.environ if environ is None else environ
    names = {item.name for item in fields(RunConfig)}
    overrides = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX) :].lower()
            if name in names:
                overrides[name] = value
            else:
                logger.warning(f"ignoring unknown setting {key}")
    return overrides


def load_config(
    path: Optional[Path] = None,
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    config = RunConfig()
    if path is not None:
        config = config.updated(read_config_file(path), str(path))
    config = config.updated(environment_overrides(environ), "environment")
    config = config.updated(flags or {})
    logger.debug(f"run configuration: {config}")
    return config
