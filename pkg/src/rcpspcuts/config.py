"""Flat ``key = value`` run configuration with environment and command-line overrides.

Precedence (lowest first): built-in defaults, config file, ``RCPSPCUTS_<KEY>``
environment variables, explicit overrides (command-line flags).
"""

from __future__ import annotations

import os
from dataclasses import fields
from pathlib import Path
from typing import Mapping, Optional, Union, get_type_hints

from .engine import ENGINE_FAMILIES, EngineConfig

ENV_PREFIX = "RCPSPCUTS_"
# keys that configure the run but not the engine itself
RUN_KEYS = {"backend": "builtin", "external_solver": "", "out": "", "format": ""}


class ConfigError(ValueError):
    pass


def _engine_types() -> dict[str, str]:
    hints = get_type_hints(EngineConfig)
    return {f.name: str(hints[f.name]) for f in fields(EngineConfig)}


def parse_families(text: str) -> tuple[str, ...]:
    text = text.strip()
    if text.lower() in ("", "none", "slr"):
        return ()
    if text.lower() == "all":
        return ENGINE_FAMILIES
    return tuple(p.strip().upper() for p in text.split(",") if p.strip())


def _convert(key: str, raw, types: dict[str, str]):
    if not isinstance(raw, str):
        return raw
    kind = types.get(key, "str")
    text = raw.strip()
    try:
        if key == "families":
            return parse_families(text)
        if text.lower() in ("none", "") and "Optional" in kind:
            return None
        if "bool" in kind:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if "int" in kind and "float" not in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.lower().replace("-", "_")] = value
    return out


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping] = None,
                environ: Optional[Mapping[str, str]] = None) -> tuple[EngineConfig, dict]:
    """(engine config, run settings) from defaults, file, environment and overrides."""
    types = _engine_types()
    merged: dict = {}
    if path is not None:
        merged.update(parse_config_text(Path(path).read_text(), str(path)))
    env = os.environ if environ is None else environ
    for k, v in env.items():
        if k.startswith(ENV_PREFIX):
            merged[k[len(ENV_PREFIX):].lower()] = v
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    known = set(types) | set(RUN_KEYS)
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    engine = {k: _convert(k, v, types) for k, v in merged.items() if k in types}
    run = {**RUN_KEYS, **{k: v for k, v in merged.items() if k in RUN_KEYS}}
    try:
        return EngineConfig(**engine), run
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(config: EngineConfig, run: Optional[Mapping] = None) -> str:
    lines = []
    for k, v in config.as_dict().items():
        if k == "families":
            v = ",".join(v) if v else "none"
        lines.append(f"{k} = {'none' if v is None else v}")
    for k, v in (run or {}).items():
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
