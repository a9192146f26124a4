"""JSON run configuration for the command-line tool.

Example::

    {
      "reference_frequency": 1.0e15,
      "layers": [
        {"thickness": 1.0,
         "eps": {"type": "lorentz", "terms": [{"omega_p": 0.9, "omega_0": 1.0,
                                               "gamma": 0.001, "sign": "gain"}]},
         "mu": {"type": "vacuum"}}
      ],
      "quadrature": {"rel_tol": 1e-8},
      "output": "csv"
    }

``thickness`` is a positive number or the string "inf" (outer layers
only). ``eps`` and ``mu`` default to vacuum. ``mirrors`` defaults to true
when every layer is finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Any

from .errors import CasimirError, ConfigError
from .quad import QuadratureSpec
from .response import VACUUM, ResponseModel
from .stack import Layer, Stack


@dataclass(frozen=True)
class RunConfig:
    layers: tuple[Layer, ...]
    reference_frequency: float | None = None
    quadrature: QuadratureSpec = QuadratureSpec()
    output: str = "csv"
    mirrors: bool = True

    def stack(self) -> Stack:
        return Stack(self.layers, self.mirrors)


def _thickness(value: Any, where: str) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return float("inf")
        raise ConfigError(f"{where}: thickness must be a number or \"inf\"")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: thickness must be a number or \"inf\"")
    return float(value)


def _model(data: Any, where: str) -> ResponseModel:
    if data is None:
        return VACUUM
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: response model must be an object")
    try:
        return ResponseModel.from_dict(data)
    except (KeyError, TypeError, ValueError, CasimirError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _quadrature(data: Any) -> QuadratureSpec:
    if data is None:
        return QuadratureSpec()
    if not isinstance(data, dict):
        raise ConfigError("quadrature must be an object")
    known = {f.name for f in fields(QuadratureSpec)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown quadrature keys: {sorted(unknown)}")
    try:
        return QuadratureSpec(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"quadrature: {exc}") from None


def parse_config(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    raw_layers = data.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ConfigError("layers must be a non-empty list")
    layers = []
    for i, entry in enumerate(raw_layers):
        where = f"layers[{i}]"
        if not isinstance(entry, dict) or "thickness" not in entry:
            raise ConfigError(f"{where}: expected an object with a thickness")
        d = _thickness(entry["thickness"], where)
        try:
            layers.append(Layer(_model(entry.get("eps"), where + ".eps"),
                                _model(entry.get("mu"), where + ".mu"), d))
        except CasimirError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    ref = data.get("reference_frequency")
    if ref is not None:
        if isinstance(ref, bool) or not isinstance(ref, (int, float)) or not ref > 0:
            raise ConfigError("reference_frequency must be a positive number")
        ref = float(ref)
    output = data.get("output", "csv")
    if output not in ("csv", "json"):
        raise ConfigError("output must be \"csv\" or \"json\"")
    all_finite = all(layer.finite for layer in layers)
    mirrors = data.get("mirrors", all_finite)
    if not isinstance(mirrors, bool):
        raise ConfigError("mirrors must be true or false")
    cfg = RunConfig(tuple(layers), ref, _quadrature(data.get("quadrature")), output, mirrors)
    try:
        cfg.stack()
    except CasimirError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return parse_config(data)
