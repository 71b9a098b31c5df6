from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from dotenv import dotenv_values
from jsonschema import ValidationError, validate
from pydantic import ValidationError as ModelError

from .schema import PARAMS_MODELS, RUN_CONFIG_JSON_SCHEMA, SUMMARY_JSON_SCHEMA, RunConfig, SummaryRecord

_TOP_LEVEL = frozenset(RunConfig.model_fields) - {"params"}


class ConfigParseError(ValueError):
    """Raised when a config file, flag set or summary record cannot be parsed or validated."""


def to_jsonable(value: Any) -> Any:
    """Plain JSON data from dataclasses, numpy values and non-finite floats (as null)."""

    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return value.as_posix()
    return value


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; blank values and comments are dropped."""

    path = Path(path)
    if not path.is_file():
        raise ConfigParseError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {k: v for k, v in values.items() if v is not None}


def build_run_config(subcommand: str, *layers: Mapping[str, Any]) -> RunConfig:
    """Merge key/value layers (later ones win) into a validated RunConfig.

    Keys naming RunConfig fields go to the top level, every other key is a
    study parameter; unknown parameters are rejected by the study model.
    """

    if subcommand not in PARAMS_MODELS:
        raise ConfigParseError(f"Unknown subcommand: {subcommand}")
    top: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                continue
            if key == "subcommand":
                if value != subcommand:
                    raise ConfigParseError(f"config is for {value!r}, not {subcommand!r}")
                continue
            (top if key in _TOP_LEVEL else params)[key] = value
    data = {"subcommand": subcommand, "params": params, **top}
    try:
        return RunConfig.model_validate(data)
    except ModelError as exc:
        raise ConfigParseError(f"invalid {subcommand} configuration: {exc}") from exc


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "none"
    return str(value)


def dump_config(config: RunConfig, path: str | Path) -> Path:
    """Write the resolved config so that ``--config <path>`` reproduces the run."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = config.model_dump()
    lines = [f"subcommand = {config.subcommand}"]
    for key in sorted(_TOP_LEVEL - {"subcommand"}):
        if data[key] is not None:
            lines.append(f"{key} = {_format_value(data[key])}")
    for key in sorted(data["params"]):
        lines.append(f"{key} = {_format_value(data['params'][key])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_run_config(path: str | Path) -> RunConfig:
    values = read_config_file(path)
    subcommand = values.get("subcommand")
    if not subcommand:
        raise ConfigParseError(f"{path} does not name a subcommand")
    return build_run_config(subcommand, values)


def parse_summary(payload: Any) -> dict[str, Any]:
    """Parse and validate a summary record."""

    if isinstance(payload, SummaryRecord):
        return payload.model_dump()
    if isinstance(payload, Mapping):
        data = dict(payload)
    elif isinstance(payload, (str, bytes)):
        text = payload.decode() if isinstance(payload, bytes) else payload
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError("Invalid JSON object") from exc
    else:
        raise ConfigParseError("Summary must be a mapping or JSON text")

    if not isinstance(data, Mapping):
        raise ConfigParseError("Summary root must be an object")

    try:
        validate(data, SUMMARY_JSON_SCHEMA)
    except ValidationError as exc:
        raise ConfigParseError(f"Summary does not match schema: {exc.message}") from exc

    try:
        validate(data["config"], RUN_CONFIG_JSON_SCHEMA)
        record = SummaryRecord.model_validate(data)
    except (ValidationError, ModelError) as exc:
        raise ConfigParseError("Summary failed validation") from exc

    return record.model_dump()


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_summary(path: str | Path, record: SummaryRecord) -> Path:
    data = to_jsonable(record.model_dump())
    parse_summary(data)
    return write_json(path, data)


__all__ = [
    "ConfigParseError",
    "build_run_config",
    "dump_config",
    "load_run_config",
    "parse_summary",
    "read_config_file",
    "to_jsonable",
    "write_json",
    "write_summary",
]
