"""Experiment configuration: canonical TOML in and out.

Configs are nested dicts of scalars, homogeneous lists and sub-tables.
``dumps_config`` emits a canonical form (sorted keys, scalar keys before
sub-tables, shortest round-trip float repr), so serialize -> parse ->
serialize is byte-identical; every run embeds its resolved config and its
sha256 hash in the outputs.
"""

from __future__ import annotations

import hashlib
import math
from typing import Any

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from .geometry import (
    CYLINDER_2D,
    PERIODIC,
    REAL,
    TORUS_2D,
    Box,
    Disk,
    EnsembleSpec,
    GridPartition,
)
from .maps import (
    SkewProduct,
    StandardMapCylinder,
    StandardMapTorus,
    TorusRotation,
)


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _format_scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ConfigError("non-finite float in config")
        return repr(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ConfigError(f"unsupported config value type {type(v).__name__}")


def _format_value(v: Any) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    return _format_scalar(v)


def _emit_table(out: list[str], table: dict, prefix: str) -> None:
    scalars = sorted(k for k, v in table.items() if not isinstance(v, dict))
    subtables = sorted(k for k, v in table.items() if isinstance(v, dict))
    if prefix and (scalars or not subtables):
        out.append(f"[{prefix}]")
    for k in scalars:
        out.append(f"{k} = {_format_value(table[k])}")
    for k in subtables:
        _emit_table(out, table[k], f"{prefix}.{k}" if prefix else k)


def dumps_config(cfg: dict) -> str:
    """Canonical TOML text of a config dict."""
    out: list[str] = []
    _emit_table(out, cfg, "")
    return "\n".join(out) + "\n"


def loads_config(text: str) -> dict:
    try:
        return _toml.loads(text)
    except _toml.TOMLDecodeError as err:
        raise ConfigError(f"invalid TOML: {err}") from None


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return loads_config(text)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(dumps_config(cfg).encode()).hexdigest()


def merge_config(defaults: dict, override: dict) -> dict:
    """Deep merge: override wins, sub-tables merge recursively."""
    out = dict(defaults)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge_config(out[k], v)
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Builders from config tables


def build_map(table: dict):
    try:
        kind = table["kind"]
    except KeyError:
        raise ConfigError("map table needs a 'kind'") from None
    if kind == "torus_rotation":
        return TorusRotation(float(table["alpha"]), float(table["beta"]))
    if kind == "standard_map_torus":
        return StandardMapTorus(float(table["K"]))
    if kind == "standard_map_cylinder":
        return StandardMapCylinder(float(table["K"]))
    if kind == "skew_product":
        base = build_map(dict(table["base"]))
        return SkewProduct(base, tuple(table["frequencies"]),
                           tuple(table.get("amplitudes", ())))
    raise ConfigError(f"unknown map kind {kind!r}")


def _topology(names) -> tuple[str, ...]:
    topo = tuple(names)
    for t in topo:
        if t not in (PERIODIC, REAL):
            raise ConfigError(f"unknown axis topology {t!r}")
    return topo


def build_region(table: dict, topology=TORUS_2D):
    try:
        shape = table["shape"]
    except KeyError:
        raise ConfigError("region table needs a 'shape'") from None
    topo = _topology(table.get("topology", topology))
    if shape == "box":
        intervals = tuple((float(a), float(b)) for a, b in table["intervals"])
        return Box(intervals, topo, label=table.get("label", ""))
    if shape == "disk":
        c = table["center"]
        return Disk((float(c[0]), float(c[1])), float(table["diameter"]),
                    label=table.get("label", ""))
    raise ConfigError(f"unknown region shape {shape!r}")


def build_partition(table: dict, topology=TORUS_2D) -> GridPartition:
    topo = _topology(table.get("topology", topology))
    cells = tuple(int(n) for n in table["cells"])
    windows = table.get("windows")
    if windows is not None:
        windows = tuple(None if w == [] else (float(w[0]), float(w[1])) for w in windows)
        return GridPartition(cells, topo, windows)
    return GridPartition(cells, topo)


def build_ensemble(table: dict, region) -> EnsembleSpec:
    return EnsembleSpec(region, int(table["count"]),
                        table.get("sampler", "uniform"), int(table["seed"]))
