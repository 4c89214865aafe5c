"""JSON run configuration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import expr as ex
from .domain import Measure, measure_from_json
from .errors import ConfigError
from .integrate import DEFAULT_RESOLUTION, DEFAULT_TOL

_KEYS = {"domain", "density", "functions", "tolerance", "resolution", "seed", "unnormalized"}


@dataclass(frozen=True)
class FunctionSpec:
    source: str
    expr: ex.Expr
    continuous: bool = True


@dataclass(frozen=True)
class Config:
    measure: Measure
    functions: tuple[FunctionSpec, ...]
    tolerance: float = DEFAULT_TOL
    resolution: int = DEFAULT_RESOLUTION
    seed: int = 0
    unnormalized: bool = False
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def fns(self) -> list[ex.Expr]:
        return [f.expr for f in self.functions]

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def continuous(self) -> bool:
        return all(f.continuous for f in self.functions)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "domain" not in data:
            raise ConfigError("config needs a 'domain'")
        measure = measure_from_json(data["domain"], data.get("density"))

        items = data.get("functions")
        if not isinstance(items, list) or not items:
            raise ConfigError("'functions' must be a nonempty list")
        fns = []
        for i, item in enumerate(items):
            if isinstance(item, str):
                item = {"expr": item}
            if not isinstance(item, dict) or not isinstance(item.get("expr"), str):
                raise ConfigError(f"function {i + 1} must be a string or an object with 'expr'")
            cont = item.get("continuous", True)
            if not isinstance(cont, bool):
                raise ConfigError(f"function {i + 1}: 'continuous' must be a boolean")
            node = ex.parse(item["expr"])
            if ex.max_var_index(node) > measure.dim:
                raise ConfigError(
                    f"function {i + 1} references a coordinate beyond dimension {measure.dim}")
            fns.append(FunctionSpec(item["expr"], node, cont))

        tol = data.get("tolerance", DEFAULT_TOL)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not (math.isfinite(tol) and tol > 0):
            raise ConfigError(f"tolerance must be a positive number, got {tol!r}")
        res = data.get("resolution", DEFAULT_RESOLUTION)
        if isinstance(res, bool) or not isinstance(res, int) or res < len(fns) + 2:
            raise ConfigError(f"resolution must be an integer >= n+2, got {res!r}")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        unnorm = data.get("unnormalized", False)
        if not isinstance(unnorm, bool):
            raise ConfigError("'unnormalized' must be a boolean")
        return cls(measure, tuple(fns), float(tol), res, seed, unnorm, raw=dict(data))

    def with_unnormalized(self, flag: bool = True) -> "Config":
        raw = dict(self.raw, unnormalized=flag)
        return Config(self.measure, self.functions, self.tolerance, self.resolution,
                      self.seed, flag, raw=raw)


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return Config.from_dict(data)
