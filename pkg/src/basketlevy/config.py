"""YAML run configuration: schema, validation and construction of engine objects.

Example::

    x_blocks:
      - {family: kobol, nu: 0.6, c_plus: 0.8, c_minus: 1.0, lambda_plus: 6, lambda_minus: -5}
      - {family: gaussian, a: 0.03}
    z_blocks:
      - {family: gaussian, a: 0.02}
      - {family: null}
    matrix: [[1.0, 0.0], [0.5, 0.0]]
    market: {spots: [100, 95], r: 0.05, maturity: 1.0}
    payoff: {weights: [1, -1], strike: 0}
    grid: {points: 512}              # optional; halfwidth, center also accepted
    mc: {paths: 200000, seed: 7}     # optional; antithetic defaults to true
    reference: {kind: margrabe, sigma1: 0.3, sigma2: 0.2, rho: 0.5}   # optional
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from .errors import BasketLevyError, ConfigError
from .levy_core import CharExponent, Gaussian, KoBoL, Null
from .model import BasketModel
from .pricing import FourierGrid, MarketSpec, PayoffSpec

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}

_block = {
    "type": "object",
    "required": ["family"],
    "properties": {"family": {"enum": ["kobol", "gaussian", "null"]}},
    "allOf": [
        {"if": {"properties": {"family": {"const": "kobol"}}},
         "then": {"required": ["nu", "c_plus", "c_minus", "lambda_plus", "lambda_minus"],
                  "properties": {k: _num for k in
                                 ("nu", "c_plus", "c_minus", "lambda_plus", "lambda_minus", "mu")},
                  "additionalProperties": False,
                  "patternProperties": {"^family$": {}}}},
        {"if": {"properties": {"family": {"const": "gaussian"}}},
         "then": {"required": ["a"], "properties": {"a": _num, "gamma": _num},
                  "additionalProperties": False, "patternProperties": {"^family$": {}}}},
        {"if": {"properties": {"family": {"const": "null"}}},
         "then": {"additionalProperties": False, "patternProperties": {"^family$": {}}}},
    ],
}

SCHEMA = {
    "type": "object",
    "required": ["x_blocks", "z_blocks", "matrix", "market"],
    "additionalProperties": False,
    "properties": {
        "x_blocks": {"type": "array", "items": _block, "minItems": 1},
        "z_blocks": {"type": "array", "items": _block, "minItems": 1},
        "matrix": {"type": "array", "items": _vec, "minItems": 1},
        "market": {
            "type": "object",
            "required": ["spots", "r", "maturity"],
            "additionalProperties": False,
            "properties": {"spots": _vec, "r": {"anyOf": [_num, _vec]},
                           "maturity": {"type": "number", "exclusiveMinimum": 0},
                           "discount_rate": _num},
        },
        "payoff": {
            "type": "object",
            "required": ["weights"],
            "additionalProperties": False,
            "properties": {"weights": _vec, "strike": {"type": "number", "minimum": 0}},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"points": {"type": "integer", "minimum": 64},
                           "halfwidth": {"anyOf": [_num, _vec]},
                           "center": _vec},
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"paths": {"type": "integer", "minimum": 1},
                           "seed": {"type": "integer", "minimum": 0},
                           "antithetic": {"type": "boolean"}},
        },
        "reference": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": ["black_scholes", "margrabe"]},
                           "sigma": _num, "sigma1": _num, "sigma2": _num, "rho": _num,
                           "q1": _num, "q2": _num},
            "additionalProperties": False,
        },
    },
}


@dataclass
class ModelConfig:
    model: BasketModel
    market: MarketSpec
    payoff: Optional[PayoffSpec]
    grid_points: Optional[int]
    grid_halfwidth: Optional[object]
    grid_center: Optional[list]
    paths: int
    seed: int
    antithetic: bool
    reference: Optional[dict]
    fingerprint: str
    source: str

    def grid(self, model: BasketModel, default_points: Optional[int] = None) -> Optional[FourierGrid]:
        """Explicit grid from the overrides, or None to let the engine choose."""
        from .pricing import default_grid

        if self.grid_points is None and self.grid_halfwidth is None and self.grid_center is None:
            return None
        base = default_grid(model, self.market.t_maturity, self.grid_points or default_points)
        hw = base.x_halfwidth if self.grid_halfwidth is None else self.grid_halfwidth
        center = base.x_center if self.grid_center is None else self.grid_center
        return FourierGrid(base.points_per_dim, tuple(np.atleast_1d(center)),
                           tuple(np.atleast_1d(hw)))


def _block(spec: dict, where: str) -> CharExponent:
    params = {k: float(v) for k, v in spec.items() if k != "family"}
    try:
        if spec["family"] == "kobol":
            return KoBoL(**params)
        if spec["family"] == "gaussian":
            return Gaussian(**params)
        return Null()
    except BasketLevyError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data, source: str = "<memory>", fingerprint: str = "") -> ModelConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: configuration must be a mapping, got {type(data).__name__}")
    # YAML reads a bare `null` as None
    for key in ("x_blocks", "z_blocks"):
        for b in data.get(key) or []:
            if isinstance(b, dict) and "family" in b and b["family"] is None:
                b["family"] = "null"
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: {path}: {exc.message}") from None

    xs = [_block(b, f"x_blocks[{i}]") for i, b in enumerate(data["x_blocks"])]
    zs = [_block(b, f"z_blocks[{i}]") for i, b in enumerate(data["z_blocks"])]
    try:
        model = BasketModel(xs, zs, data["matrix"])
    except (BasketLevyError, ValueError) as exc:
        raise ConfigError(f"matrix: {exc}") from None

    mk = data["market"]
    try:
        market = MarketSpec(tuple(mk["spots"]), mk["r"], float(mk["maturity"]),
                            mk.get("discount_rate"))
    except BasketLevyError as exc:
        raise ConfigError(f"market: {exc}") from None
    if market.n != model.n:
        raise ConfigError(f"market/spots: {market.n} spots for a model with n={model.n}")

    payoff = None
    if "payoff" in data:
        try:
            payoff = PayoffSpec(tuple(data["payoff"]["weights"]),
                                float(data["payoff"].get("strike", 0.0)))
        except BasketLevyError as exc:
            raise ConfigError(f"payoff: {exc}") from None
        if len(payoff.weights) != model.n:
            raise ConfigError(f"payoff/weights: {len(payoff.weights)} weights for n={model.n}")

    grid = data.get("grid", {})
    mc = data.get("mc", {})
    return ModelConfig(
        model=model, market=market, payoff=payoff,
        grid_points=grid.get("points"), grid_halfwidth=grid.get("halfwidth"),
        grid_center=grid.get("center"),
        paths=int(mc.get("paths", 200_000)), seed=int(mc.get("seed", 0)),
        antithetic=bool(mc.get("antithetic", True)),
        reference=data.get("reference"), fingerprint=fingerprint, source=source,
    )


def load_config(path) -> ModelConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if data is None:
        raise ConfigError(f"{path}: configuration is empty")
    return parse_config(data, str(path), hashlib.sha256(raw).hexdigest())
