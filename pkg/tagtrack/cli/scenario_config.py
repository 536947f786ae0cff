"""Scenario configuration: JSON tree -> nested frozen dataclasses.

Every block is optional and falls back to the mission defaults. Unknown
keys, wrong types and out-of-range values raise ConfigError naming the
dotted key path.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Mapping

from config.settings import (
    TAGTRACK_TIME_CAP_S,
    VALID_ANTENNA_KINDS,
    VALID_METHODS,
    VALID_MOBILITY,
    VALID_REWARD_KINDS,
    VALID_TERRAIN_KINDS,
)
from tagtrack.errors import ConfigError
from tagtrack.terrain.presets import DEFAULT_VEGETATION_DEPTH

Check = Callable[[Any], bool]


def _spec(kind, check: Check | None = None, rule: str = "", optional: bool = False) -> dict:
    return {"kind": kind, "check": check, "rule": rule, "optional": optional}


def _positive(v) -> bool:
    return v > 0


def _non_negative(v) -> bool:
    return v >= 0


def _probability(v) -> bool:
    return 0.0 <= v <= 1.0


# ── Blocks ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TerrainConfig:
    kind: str = field(default="flat", metadata=_spec(str, VALID_TERRAIN_KINDS.__contains__, f"one of {sorted(VALID_TERRAIN_KINDS)}"))
    dem_path: str | None = field(default=None, metadata=_spec(str, optional=True))
    relief: float | None = field(default=None, metadata=_spec(float, _non_negative, ">= 0", optional=True))
    cell_size: float = field(default=10.0, metadata=_spec(float, _positive, "> 0"))
    seed: int = field(default=0, metadata=_spec(int))


@dataclass(frozen=True)
class AreaConfig:
    width: float = field(default=2000.0, metadata=_spec(float, _positive, "> 0"))
    height: float = field(default=2000.0, metadata=_spec(float, _positive, "> 0"))


@dataclass(frozen=True)
class TagsConfig:
    count: int = field(default=20, metadata=_spec(int, _non_negative, ">= 0"))
    mobility: str = field(default="wandering", metadata=_spec(str, VALID_MOBILITY.__contains__, f"one of {sorted(VALID_MOBILITY)}"))
    positions: tuple[tuple[float, float], ...] | None = field(default=None, metadata=_spec("points", optional=True))


@dataclass(frozen=True)
class RadioConfig:
    source_level: float = field(default=40.0, metadata=_spec(float))
    d0: float = field(default=1.0, metadata=_spec(float, _positive, "> 0"))
    path_loss_exponent: float = field(default=4.0, metadata=_spec(float, _positive, "> 0"))
    sigma_r: float = field(default=4.0, metadata=_spec(float, _positive, "> 0"))
    threshold: float = field(default=-120.0, metadata=_spec(float))
    frequency_mhz: float = field(default=150.0, metadata=_spec(float, _positive, "> 0"))


@dataclass(frozen=True)
class VegetationConfig:
    depth: float = field(default=DEFAULT_VEGETATION_DEPTH, metadata=_spec(float, _non_negative, ">= 0"))
    enabled: bool = field(default=True, metadata=_spec(bool))


@dataclass(frozen=True)
class AntennaConfig:
    kind: str = field(default="cardioid", metadata=_spec(str, VALID_ANTENNA_KINDS.__contains__, f"one of {sorted(VALID_ANTENNA_KINDS)}"))
    pattern_path: str | None = field(default=None, metadata=_spec(str, optional=True))
    peak_gain: float = field(default=4.0, metadata=_spec(float))
    front_to_back: float = field(default=10.0, metadata=_spec(float, _non_negative, ">= 0"))


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int = field(default=3000, metadata=_spec(int, lambda v: v >= 10, ">= 10"))
    birth: float = field(default=1e-5, metadata=_spec(float, _probability, "in [0, 1]"))
    survival: float = field(default=0.999, metadata=_spec(float, _probability, "in [0, 1]"))
    initial_r: float = field(default=0.5, metadata=_spec(float, _probability, "in [0, 1]"))
    n_th: float = field(default=2e4, metadata=_spec(float, _positive, "> 0"))
    clutter_rate: float = field(default=0.05, metadata=_spec(float, _non_negative, ">= 0"))
    rssi_clutter_low: float = field(default=-120.0, metadata=_spec(float))
    rssi_clutter_high: float = field(default=0.0, metadata=_spec(float))
    imprecision: tuple[float, float] | None = field(default=(-16.0, 9.0), metadata=_spec("pair", optional=True))
    sigma_a: float = field(default=0.095, metadata=_spec(float, _positive, "> 0"))
    process_variance: tuple[float, float, float] = field(default=(2.5, 2.5, 0.0025), metadata=_spec("triple"))
    forced_pd: float | None = field(default=None, metadata=_spec(float, lambda v: 0 < v <= 1, "in (0, 1]", optional=True))
    k_min: int = field(default=8, metadata=_spec(int, lambda v: v >= 2, ">= 2"))
    aoa_threshold: float = field(default=math.pi / 2, metadata=_spec(float, lambda v: 0 < v <= math.pi, "in (0, pi]"))


@dataclass(frozen=True)
class PlannerBlock:
    n_headings: int = field(default=8, metadata=_spec(int, lambda v: v >= 2, ">= 2"))
    horizon: float = field(default=30.0, metadata=_spec(float, _positive, "> 0"))
    travel_aoa: float = field(default=10.0, metadata=_spec(float, _non_negative, ">= 0"))
    rotation: float = field(default=20.0, metadata=_spec(float, _positive, "> 0"))
    max_rotation_rate: float = field(default=math.pi / 3, metadata=_spec(float, _positive, "> 0"))
    reward: str = field(default="renyi", metadata=_spec(str, VALID_REWARD_KINDS.__contains__, f"one of {sorted(VALID_REWARD_KINDS)}"))
    alpha: float = field(default=0.1, metadata=_spec(float, lambda v: v >= 0 and v != 1, ">= 0 and != 1"))
    rollout_seed: int = field(default=0, metadata=_spec(int))


@dataclass(frozen=True)
class VoidConfig:
    radius: float = field(default=50.0, metadata=_spec(float, _positive, "> 0"))
    threshold: float = field(default=0.95, metadata=_spec(float, _probability, "in [0, 1]"))
    enabled: bool = field(default=True, metadata=_spec(bool))


@dataclass(frozen=True)
class UavConfig:
    start: tuple[float, float] = field(default=(1.0, 1.0), metadata=_spec("pair"))
    altitude: float = field(default=80.0, metadata=_spec(float, _positive, "> 0"))
    heading: float = field(default=math.pi / 4, metadata=_spec(float))
    speed: float = field(default=10.0, metadata=_spec(float, _positive, "> 0"))


@dataclass(frozen=True)
class MissionConfig:
    method: str = field(default="metap", metadata=_spec(str, VALID_METHODS.__contains__, f"one of {sorted(VALID_METHODS)}"))
    time_cap: float = field(default=TAGTRACK_TIME_CAP_S, metadata=_spec(float, _positive, "> 0"))
    terrain_effects: bool = field(default=True, metadata=_spec(bool))
    return_home: bool = field(default=True, metadata=_spec(bool))
    trials: int = field(default=1, metadata=_spec(int, lambda v: v >= 1, ">= 1"))
    base_seed: int = field(default=0, metadata=_spec(int))


@dataclass(frozen=True)
class ScenarioConfig:
    terrain: TerrainConfig = field(default_factory=TerrainConfig)
    area: AreaConfig = field(default_factory=AreaConfig)
    tags: TagsConfig = field(default_factory=TagsConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    vegetation: VegetationConfig = field(default_factory=VegetationConfig)
    antenna: AntennaConfig = field(default_factory=AntennaConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    planner: PlannerBlock = field(default_factory=PlannerBlock)
    void: VoidConfig = field(default_factory=VoidConfig)
    uav: UavConfig = field(default_factory=UavConfig)
    mission: MissionConfig = field(default_factory=MissionConfig)


# ── Parsing ───────────────────────────────────────────────────────────────────


def parse_config(source: str | Path | Mapping[str, Any]) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a JSON file path or a parsed tree."""
    if isinstance(source, Mapping):
        tree = source
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                tree = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON in {source}: {exc}") from exc
    if not isinstance(tree, Mapping):
        raise ConfigError("<root>", "configuration must be a JSON object")

    unknown = sorted(set(tree) - {f.name for f in fields(ScenarioConfig)})
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    parsed = {}
    for f in fields(ScenarioConfig):
        block_cls = type(f.default_factory())
        raw = tree.get(f.name) or {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f.name, "expected an object")
        parsed[f.name] = _parse_block(block_cls, raw, f.name)
    config = ScenarioConfig(**parsed)
    _cross_check(config)
    return config


def _parse_block(block_cls, raw: Mapping[str, Any], prefix: str):
    names = {f.name for f in fields(block_cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"{prefix}.{unknown[0]}", "unknown key")
    values = {}
    for f in fields(block_cls):
        if f.name in raw:
            values[f.name] = _coerce(raw[f.name], f.metadata, f"{prefix}.{f.name}")
    return block_cls(**values)


def _coerce(value: Any, spec: Mapping[str, Any], path: str) -> Any:
    if value is None:
        if spec["optional"]:
            return None
        raise ConfigError(path, "must not be null")

    kind = spec["kind"]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        out = value
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        out = int(value)
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        out = float(value)
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        out = value
    elif kind == "pair":
        out = _numbers(value, 2, path)
    elif kind == "triple":
        out = _numbers(value, 3, path)
    elif kind == "points":
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, "expected a list of [x, y] points")
        out = tuple(_numbers(p, 2, f"{path}[{i}]") for i, p in enumerate(value))
    else:
        raise ConfigError(path, f"unsupported field kind {kind!r}")

    check = spec["check"]
    if check is not None and not check(out):
        raise ConfigError(path, f"must be {spec['rule']}, got {value!r}")
    return out


def _numbers(value: Any, n: int, path: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(path, f"expected a list of {n} numbers, got {value!r}")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(path, f"expected finite numbers, got {value!r}")
        out.append(float(v))
    return tuple(out)


def _cross_check(config: ScenarioConfig) -> None:
    """Constraints spanning several fields or blocks."""
    p = config.planner
    if not math.isclose(p.horizon, p.travel_aoa + p.rotation):
        raise ConfigError("planner.horizon", f"must equal travel_aoa + rotation ({p.travel_aoa} + {p.rotation})")
    if p.reward == "renyi" and p.alpha == 1:
        raise ConfigError("planner.alpha", "Renyi alpha must differ from 1")

    flt = config.filter
    if flt.rssi_clutter_high <= flt.rssi_clutter_low:
        raise ConfigError("filter.rssi_clutter_high", "must exceed filter.rssi_clutter_low")
    if flt.imprecision is not None and flt.imprecision[0] > flt.imprecision[1]:
        raise ConfigError("filter.imprecision", "lower bound exceeds upper bound")
    if any(v < 0 for v in flt.process_variance):
        raise ConfigError("filter.process_variance", "variances must be >= 0")

    area = config.area
    tags = config.tags
    if tags.positions is not None:
        if len(tags.positions) != tags.count:
            raise ConfigError("tags.positions", f"{len(tags.positions)} positions for {tags.count} tags")
        for i, (x, y) in enumerate(tags.positions):
            if not (0 <= x <= area.width and 0 <= y <= area.height):
                raise ConfigError(f"tags.positions[{i}]", f"({x}, {y}) outside the search area")

    sx, sy = config.uav.start
    if not (0 <= sx <= area.width and 0 <= sy <= area.height):
        raise ConfigError("uav.start", f"({sx}, {sy}) outside the search area")

    for path, file in (("terrain.dem_path", config.terrain.dem_path), ("antenna.pattern_path", config.antenna.pattern_path)):
        if file is not None and not Path(file).is_file():
            raise ConfigError(path, f"file not found: {file}")


# ── Serialization / overrides ─────────────────────────────────────────────────


def serialize_config(config: ScenarioConfig) -> dict[str, Any]:
    """JSON-ready tree; parse_config of the result reproduces `config`."""
    return json.loads(json.dumps(asdict(config)))


def apply_overrides(tree: Mapping[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply 'block.key=value' overrides to a copy of a raw config tree.

    Values are decoded as JSON when possible ('3', 'true', '[1, 2]'),
    otherwise kept as plain strings ('shannon').
    """
    out = json.loads(json.dumps(dict(tree)))
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(item, "override must look like block.key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.strip().split(".")
        node = out
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(key, f"{part!r} is not a block")
            node = child
        node[parts[-1]] = value
    return out


def load_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    """Read, override and validate. The file itself is never modified."""
    try:
        with open(path, encoding="utf-8") as fh:
            tree = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(apply_overrides(tree, overrides or []))
