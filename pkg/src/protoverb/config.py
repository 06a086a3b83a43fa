#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
protoverb.config
~~~~~~~~~~~~~~~~

config files and the ~/.protoverb/ user directory.

Run configuration is read from ``key = value`` files (or yaml/json),
overridden by ``PROTOVERB_<KEY>`` environment variables and finally by
command-line flags.

:copyright: (c) 2026 protoverb developers
:license: MIT, see LICENSE for more details.
"""

import os
import json
import logging
import dataclasses
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union, get_args, get_origin

import yaml

from . import utils
from .utils import ConfigError

ENV_PREFIX = "PROTOVERB_"

logger = logging.getLogger(__name__)

T = TypeVar("T")


def config_home() -> str:
    """The user configuration directory (``$PROTOVERB_HOME`` or ~/.protoverb)."""

    return os.environ.get(f"{ENV_PREFIX}HOME") or os.path.join(
        os.path.expanduser("~"), ".protoverb"
    )


def load_user_config(config_name: str) -> Dict[str, Any]:
    """Load the user's config file. Can be yaml or json."""

    exts = [".yaml", ".yml", ".json"]

    for ext in exts:
        config_file = os.path.join(config_home(), config_name + ext)
        if os.path.exists(config_file):
            try:
                with open(config_file, "r") as f:
                    if config_file.endswith(".json"):
                        return json.load(f)
                    else:
                        return yaml.safe_load(f) or {}
            except Exception as e:
                logger.warning(f"Could not load config file {config_file}: {e}")

    return {}


def parse_kv_lines(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""

    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip().strip('"')
    return out


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a run config; the format follows the file extension."""

    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")

    ext = os.path.splitext(path)[1].lower()
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()

    if ext in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
    elif ext == ".json":
        data = json.loads(text)
    else:
        data = parse_kv_lines(text, source=path)

    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return data


def env_overrides(cls: Type[Any], environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """Collect ``PROTOVERB_<FIELD>`` variables that name a field of `cls`."""

    environ = os.environ if environ is None else environ
    out = {}
    for f in dataclasses.fields(cls):
        key = f"{ENV_PREFIX}{f.name.upper()}"
        if key in environ:
            out[f.name] = environ[key]
    return out


def coerce(value: Any, typ: Any, key: str) -> Any:
    """Coerce a raw config value into the annotated field type."""

    if isinstance(typ, str):
        typ = {"int": int, "float": float, "bool": bool, "str": str}.get(typ, typ)

    if get_origin(typ) is Union:
        inner = [t for t in get_args(typ) if t is not type(None)]
        if value in ("", "none", "None"):
            return None
        if len(inner) == 1:
            return coerce(value, inner[0], key)

    if typ is bool:
        b = utils.str2bool(value)
        if b is None:
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return b
    if typ is int:
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        v = utils.float_or(value)
        if v is None or v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(v)
    if typ is float:
        v = utils.float_or(value)
        if v is None:
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return v
    if typ is str:
        return utils.str_or(value)
    if value in ("", "none", "None"):
        return None
    return value


def build(cls: Type[T], *layers: Mapping[str, Any]) -> T:
    """Instantiate dataclass `cls` from mappings, later layers winning.

    Unknown keys raise ConfigError; values are coerced to the field types.
    """

    fields = {f.name: f for f in dataclasses.fields(cls)}
    merged: Dict[str, Any] = {}
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is None:
                continue
            if key not in fields:
                raise ConfigError(
                    f"unknown {cls.__name__} key {key!r} "
                    f"(known: {', '.join(sorted(fields))})"
                )
            merged[key] = coerce(value, fields[key].type, key)

    obj = cls(**merged)
    validate = getattr(obj, "validate", None)
    if callable(validate):
        validate()
    return obj


def as_dict(obj: Any) -> Dict[str, Any]:
    return dataclasses.asdict(obj)
