"""Evaluation configuration: a metric id, that metric's parameters and an orientation flag."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass
from typing import Any, Dict, Optional

import yaml

from .metrics import METRICS, Metric


class ConfigError(ValueError):
    pass


def _coerce(name: str, value: Any, annotation) -> Any:
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    if origin is typing.Union and type(None) in args:
        if value is None:
            return None
        inner = [a for a in args if a is not type(None)][0]
        return _coerce(name, value, inner)
    if annotation is bool or annotation == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if annotation is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    if origin in (list, typing.List):
        if not isinstance(value, list):
            raise ConfigError(f"{name}: expected a list, got {value!r}")
        return [_coerce(name, v, args[0]) for v in value] if args else list(value)
    return value


@dataclass
class EvalConfig:
    metric: str
    params: Any
    higher_is_better: bool = True

    def to_dict(self) -> Dict[str, Any]:
        d = {"metric": self.metric, "higher_is_better": self.higher_is_better}
        d.update(dataclasses.asdict(self.params))
        return d

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def build(self) -> Metric:
        return METRICS[self.metric](self.params)


def parse_config(metric: Optional[str], data: Optional[Dict[str, Any]] = None) -> EvalConfig:
    """Validate a mapping of parameters for ``metric``; unknown keys are rejected.

    ``data`` may carry its own ``metric`` key, which must agree with the
    argument when both are given.
    """
    data = dict(data or {})
    named = data.pop("metric", None)
    if metric is None:
        metric = named
    elif named is not None and named != metric:
        raise ConfigError(f"config is for metric {named!r} but {metric!r} was requested")
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}; valid ids: {', '.join(METRICS)}")
    cls = METRICS[metric]
    higher = data.pop("higher_is_better", cls.higher_is_better)
    higher = _coerce("higher_is_better", higher, bool)
    hints = typing.get_type_hints(cls.Config)
    fields = {f.name for f in dataclasses.fields(cls.Config)}
    unknown = sorted(set(data) - fields)
    if unknown:
        raise ConfigError(f"unknown keys for metric {metric!r}: {', '.join(unknown)}; allowed: {', '.join(sorted(fields))}")
    kwargs = {k: _coerce(k, v, hints[k]) for k, v in data.items()}
    try:
        params = cls.Config(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return EvalConfig(metric, params, higher)


def load_config(metric: Optional[str], path=None) -> EvalConfig:
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping at the top level")
    return parse_config(metric, data)
