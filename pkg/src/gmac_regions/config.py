"""Run configuration: JSON loading, schema validation and unit handling."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .gaussian import GaussianChannel
from .sweep import SweepSpec

CHANNEL_FIELDS = ("p1", "p2", "n1", "n2", "n3", "q0", "q1", "q2")
REQUIRED_CHANNEL = ("p1", "p2", "n1", "n2", "n3")
DEFAULT_OVERLAYS = {
    "prop1": ("gmac-csit", "mac-csit", "gmac-no-csit", "mac-no-csit"),
    "prop2": ("gdpc", "pure-dpc", "clean-gmac", "clean-mac"),
    "prop3": ("gdpc", "clean-gmac", "clean-mac"),
    "discrete": (),
}
DEFAULT_FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    text = resources.files("gmac_regions").joinpath("config-schema.json").read_text("utf-8")
    return json.loads(text)


def _line_of(text: str, path) -> int:
    """Best-effort line number of a JSON path, found by scanning for its keys in order."""
    pos = 0
    for part in path:
        if isinstance(part, str):
            hit = text.find(json.dumps(part), pos)
            if hit >= 0:
                pos = hit
    return text.count("\n", 0, pos) + 1


def _level(value: Any, units: str, name: str) -> float:
    if isinstance(value, str):
        v = math.inf if value == "inf" else -math.inf
    else:
        v = float(value)
    if units == "dB":
        return 0.0 if v == -math.inf else (math.inf if v == math.inf else 10.0 ** (v / 10.0))
    if v < 0:
        raise ConfigError(f"channel field {name} must be >= 0 in linear units, got {value!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    source: Path | None
    model: str
    units: str
    panels: tuple[tuple[str, GaussianChannel], ...]
    overlays: tuple[str, ...]
    sweep: SweepSpec
    combined_overlay: str | None = None
    outer_bound: Mapping[str, Path] = field(default_factory=dict)
    sir_db: tuple[float, ...] = ()
    pmf: Mapping[str, Any] | None = None
    out_dir: Path | None = None
    formats: tuple[str, ...] = DEFAULT_FORMATS
    verify: Mapping[str, Any] = field(default_factory=dict)
    description: str = ""

    @property
    def channel(self) -> GaussianChannel:
        if not self.panels:
            raise ConfigError(f"{self.source or '<config>'}: no channel given")
        return self.panels[0][1]


def parse_config(data: Mapping[str, Any], source: Path | None = None,
                 text: str | None = None) -> RunConfig:
    validator = jsonschema.Draft7Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(map(str, e.absolute_path)) or "<root>"
            line = f":{_line_of(text, e.absolute_path)}" if text is not None else ""
            msgs.append(f"{source or '<config>'}{line}: {where}: {e.message}")
        raise ConfigError("\n".join(msgs))

    model = data.get("model", "prop1")
    units = data.get("units", "dB")
    base = dict(data.get("channel", {}))
    if "channel" in data or "panels" in data or model == "discrete":
        panels_raw = data.get("panels") or [{"label": "main"}]
    else:
        panels_raw = []     # verify-only configs carry no channel
    panels = []
    for p in panels_raw:
        merged = {**base, **p.get("channel", {})}
        if model != "discrete":
            missing = [f for f in REQUIRED_CHANNEL if f not in merged]
            if missing:
                raise ConfigError(f"{source or '<config>'}: panel {p['label']!r}: "
                                  f"missing channel fields {missing}")
            lin = {k: _level(v, units, k) for k, v in merged.items()}
            # an omitted state is absent (zero variance), whatever the units
            try:
                ch = GaussianChannel(**{k: lin.get(k, 0.0) for k in CHANNEL_FIELDS})
            except ValueError as exc:
                raise ConfigError(f"{source or '<config>'}: panel {p['label']!r}: {exc}") from None
        else:
            ch = None
        panels.append((p["label"], ch))
    labels = [label for label, _ in panels]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{source or '<config>'}: duplicate panel labels {labels}")

    overlays = tuple(data.get("overlays", DEFAULT_OVERLAYS[model]))
    combined = data.get("combined_overlay")
    if combined is not None and combined not in overlays:
        raise ConfigError(f"{source or '<config>'}: combined_overlay {combined!r} "
                          "is not one of the overlays")
    root = source.parent if source is not None else Path(".")
    outer = {k: root / v for k, v in data.get("outer_bound_csv", {}).items()}
    if "outer-bound" in overlays and not outer:
        raise ConfigError(f"{source or '<config>'}: overlay 'outer-bound' needs outer_bound_csv")
    if model == "discrete" and "pmf" not in data:
        raise ConfigError(f"{source or '<config>'}: model 'discrete' needs a 'pmf' object")

    out = data.get("output", {})
    return RunConfig(
        source=source, model=model, units=units, panels=tuple(panels), overlays=overlays,
        sweep=SweepSpec(**data.get("sweep", {})), combined_overlay=combined,
        outer_bound=outer, sir_db=tuple(float(s) for s in data.get("sir_db", ())),
        pmf=data.get("pmf"), out_dir=Path(out["dir"]) if "dir" in out else None,
        formats=tuple(out.get("formats", DEFAULT_FORMATS)), verify=dict(data.get("verify", {})),
        description=data.get("description", ""),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")
    return parse_config(data, path, text)
