"""JSON configuration schema: domains, branches, run parameters.

Complex numbers are [re, im] pairs throughout.  d=1 polynomial coefficient
tables are ascending-degree lists; multivariate ones use
{"terms": [{"k": [k_1..k_d], "c": [re, im]}]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError
from .geometry import ComplexDisk, Domain, EuclideanBall, FiniteUnion, Polydisc
from .systems import (
    Affine1D,
    Composite,
    HoloMap,
    MapWeightSystem,
    Mobius,
    Polynomial,
    ProductMap,
    RationalWeight,
    TruncationTail,
)

DEFAULT_PARAMS = {
    "order": 8,
    "eigs": 3,
    "basis": 30,
    "tilde": None,  # None = automatic midpoint of the feasible range
    "granularity": 1,
    "quadrature": False,
    "budget": 10**6,
}


def _c2j(z: complex):
    return [z.real, z.imag]


def _j2c(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise ConfigurationError(f"expected complex as [re, im], got {v!r}")


def domain_to_json(dom: Domain) -> dict:
    if isinstance(dom, ComplexDisk):
        return {"type": "disk", "center": _c2j(dom.center), "radius": dom.radius}
    if isinstance(dom, Polydisc):
        return {
            "type": "polydisc",
            "centers": [_c2j(c) for c in dom.centers],
            "radii": list(dom.radii),
        }
    if isinstance(dom, EuclideanBall):
        return {
            "type": "ball",
            "center": [_c2j(c) for c in dom.center],
            "radius": dom.radius,
        }
    return {"type": "union", "members": [domain_to_json(m) for m in dom.members]}


def domain_from_json(data: dict) -> Domain:
    try:
        kind = data["type"]
        if kind == "disk":
            return ComplexDisk(_j2c(data["center"]), float(data["radius"]))
        if kind == "polydisc":
            return Polydisc(
                tuple(_j2c(c) for c in data["centers"]),
                tuple(float(r) for r in data["radii"]),
            )
        if kind == "ball":
            return EuclideanBall(
                tuple(_j2c(c) for c in data["center"]), float(data["radius"])
            )
        if kind == "union":
            return FiniteUnion(tuple(domain_from_json(m) for m in data["members"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad domain spec: {exc}") from exc
    raise ConfigurationError(f"unknown domain type {data.get('type')!r}")


def map_to_json(phi: HoloMap) -> dict:
    if isinstance(phi, Affine1D):
        return {"type": "affine", "a": _c2j(phi.a), "b": _c2j(phi.b)}
    if isinstance(phi, Mobius):
        return {
            "type": "mobius",
            "a": _c2j(phi.a),
            "b": _c2j(phi.b),
            "c": _c2j(phi.c),
            "e": _c2j(phi.e),
        }
    if isinstance(phi, ProductMap):
        return {"type": "product", "factors": [map_to_json(f) for f in phi.factors]}
    return {"type": "composite", "factors": [map_to_json(f) for f in phi.factors]}


def map_from_json(data: dict) -> HoloMap:
    try:
        kind = data["type"]
        if kind == "affine":
            return Affine1D(_j2c(data["a"]), _j2c(data["b"]))
        if kind == "mobius":
            return Mobius(
                _j2c(data["a"]), _j2c(data["b"]), _j2c(data["c"]), _j2c(data["e"])
            )
        if kind == "product":
            return ProductMap(tuple(map_from_json(f) for f in data["factors"]))
        if kind == "composite":
            return Composite(tuple(map_from_json(f) for f in data["factors"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad map spec: {exc}") from exc
    raise ConfigurationError(f"unknown map type {data.get('type')!r}")


def poly_to_json(poly: Polynomial):
    if poly.dim == 1:
        deg = max((m[0] for m in poly.coeffs), default=0)
        return [_c2j(poly.coeffs.get((k,), 0j)) for k in range(deg + 1)]
    return {
        "terms": [
            {"k": list(mono), "c": _c2j(c)} for mono, c in sorted(poly.coeffs.items())
        ]
    }


def poly_from_json(data, dim: Optional[int] = None) -> Polynomial:
    if isinstance(data, list):
        return Polynomial([_j2c(c) for c in data])
    if isinstance(data, dict) and "terms" in data:
        table = {tuple(t["k"]): _j2c(t["c"]) for t in data["terms"]}
        return Polynomial(table, dim)
    raise ConfigurationError(f"bad polynomial spec: {data!r}")


def weight_to_json(w: RationalWeight) -> dict:
    return {"num": poly_to_json(w.num), "den": poly_to_json(w.den)}


def weight_from_json(data: dict, dim: int) -> RationalWeight:
    try:
        return RationalWeight(
            poly_from_json(data["num"], dim), poly_from_json(data["den"], dim)
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad weight spec: {exc}") from exc


def system_to_json(system: MapWeightSystem) -> dict:
    out = {
        "domain": domain_to_json(system.domain),
        "branches": [
            {"map": map_to_json(m), "weight": weight_to_json(w)}
            for m, w in system.branches
        ],
    }
    if system.tail is not None:
        out["truncation"] = {
            "index": system.tail.index,
            "tail_l2_bound": system.tail.l2_bound,
        }
    return out


def system_from_json(data: dict) -> MapWeightSystem:
    domain = domain_from_json(data.get("domain") or {})
    branches = data.get("branches")
    if not branches:
        raise ConfigurationError("config needs a non-empty 'branches' list")
    d = domain.dim
    pairs = []
    for entry in branches:
        phi = map_from_json(entry.get("map") or {})
        w = weight_from_json(entry.get("weight") or {}, d)
        pairs.append((phi, w))
    tail = None
    if "truncation" in data:
        t = data["truncation"]
        tail = TruncationTail(int(t["index"]), float(t["tail_l2_bound"]))
    try:
        return MapWeightSystem(domain, tuple(pairs), tail)
    except Exception as exc:
        raise ConfigurationError(str(exc)) from exc


@dataclass
class RunConfig:
    """Parsed configuration: the system plus command parameters."""

    system: MapWeightSystem
    params: dict = field(default_factory=dict)

    def param(self, name: str):
        return self.params.get(name, DEFAULT_PARAMS[name])


def parse_config(data) -> RunConfig:
    """Build a RunConfig from a dict, JSON string, or file path."""
    if isinstance(data, str):
        try:
            with open(data, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    system = system_from_json(data)
    params = {}
    for key in DEFAULT_PARAMS:
        if key in data:
            params[key] = data[key]
    for key in ("order", "eigs", "basis", "granularity", "budget"):
        if key in params:
            value = int(params[key])
            if value < 0 or (value == 0 and key != "eigs"):
                raise ConfigurationError(f"parameter {key} must be positive")
            params[key] = value
    if "tilde" in params and params["tilde"] is not None:
        t = params["tilde"]
        ts = [float(x) for x in (t if isinstance(t, list) else [t])]
        if any(not 0.0 < x < 1.0 for x in ts):
            raise ConfigurationError("tilde parameters must lie in (0, 1)")
        params["tilde"] = ts
    return RunConfig(system=system, params=params)


def config_to_json(config: RunConfig) -> dict:
    out = system_to_json(config.system)
    for key in sorted(config.params):
        out[key] = config.params[key]
    return out


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=True) + "\n"
