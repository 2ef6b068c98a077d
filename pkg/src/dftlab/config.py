"""Run configuration: a single JSON document.

Example::

    {
      "distribution": {"kind": "SymmetricPareto", "alpha": 1.8},
      "p": 1.5, "r": 1.2, "epsilon": 1.0,
      "t_mode": {"mode": "random", "count": 5, "seed": 7},
      "n_grid": {"n0": 4, "gamma": 2, "points": 16},
      "reps": 10000,
      "master_seed": 20240601,
      "suites": ["rates"],
      "output_dir": "out/rates",
      "options": {"dense_head": 64}
    }

``t_mode`` is either ``{"mode": "fixed", "values": [...]}`` or
``{"mode": "random", "count": c, "seed": s}``. ``n_grid`` is either
``{"n0", "gamma", "points"}`` or ``{"values": [...]}``.
"""

from __future__ import annotations

import json
import math
import dataclasses
from dataclasses import dataclass, field
from typing import Any

from .distributions import DistributionSpec, spec_from_dict
from .monte_carlo import geometric_grid
from .rng import MASK64, uniforms

SUITES = ("lln", "rates", "dyadic", "carleson", "maximal", "bounds", "oracle")

DEFAULT_OPTIONS: dict[str, Any] = {
    "dense_head": 64,
    "lln_n_grid": [10, 100, 1000, 10000, 100000],
    "lln_seeds": 200,
    "carleson_seeds": 10,
    "maximal_n": [64, 256, 1024, 4096],
    "maximal_reps": 1000,
    "kolmogorov_K": 10**6,
    "stoica_N": 10**5,
    "truncation_n": 10**5,
    "truncation_seeds": 100,
    "oracle_configs": 20,
    "tol": 0.01,
    "margin": 0.1,
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config error at {field!r}: {message}")
        self.field = field


@dataclass(frozen=True)
class TMode:
    mode: str
    values: tuple[float, ...] = ()
    count: int = 0
    seed: int = 0

    def resolve(self) -> list[float]:
        if self.mode == "fixed":
            return [float(v) for v in self.values]
        u = uniforms(self.seed, self.count)
        # u in (0, 1] -> t in [-pi, pi)
        return [float(-math.pi + 2.0 * math.pi * (1.0 - x)) for x in u]

    def to_dict(self):
        if self.mode == "fixed":
            return {"mode": "fixed", "values": list(self.values)}
        return {"mode": "random", "count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class NGrid:
    n0: int = 0
    gamma: float = 0.0
    points: int = 0
    values: tuple[int, ...] = ()

    def resolve(self) -> list[int]:
        if self.values:
            return list(self.values)
        return geometric_grid(self.n0, self.gamma, self.points)

    def to_dict(self):
        if self.values:
            return {"values": list(self.values)}
        return {"n0": self.n0, "gamma": self.gamma, "points": self.points}


@dataclass(frozen=True)
class RunConfig:
    distribution: DistributionSpec
    p: float
    r: float
    epsilon: float
    t_mode: TMode
    n_grid: NGrid
    reps: int
    master_seed: int
    suites: tuple[str, ...]
    output_dir: str | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def option(self, name: str):
        return self.options.get(name, DEFAULT_OPTIONS[name])

    def to_dict(self) -> dict[str, Any]:
        d = {
            "distribution": self.distribution.to_dict(),
            "p": self.p,
            "r": self.r,
            "epsilon": self.epsilon,
            "t_mode": self.t_mode.to_dict(),
            "n_grid": self.n_grid.to_dict(),
            "reps": self.reps,
            "master_seed": self.master_seed,
            "suites": list(self.suites),
            "options": dict(self.options),
        }
        if self.output_dir is not None:
            d["output_dir"] = self.output_dir
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def replace(self, **kw) -> RunConfig:
        return dataclasses.replace(self, **kw)


def _num(d, key, kind=float, path=None):
    path = path or key
    if key not in d:
        raise ConfigError(path, "missing")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(path, f"expected an integer, got {v!r}")
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return v


def parse_config(d: dict[str, Any]) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a JSON object")
    try:
        dist = spec_from_dict(d.get("distribution") or {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("distribution", str(exc)) from None

    p = _num(d, "p")
    if not 1 < p < 2:
        raise ConfigError("p", f"must satisfy 1 < p < 2, got {p}")
    r = _num(d, "r")
    if not 1 <= r <= p:
        raise ConfigError("r", f"must satisfy 1 <= r <= p, got {r}")
    eps = _num(d, "epsilon")
    if not eps > 0:
        raise ConfigError("epsilon", f"must be > 0, got {eps}")

    tm = d.get("t_mode")
    if not isinstance(tm, dict) or tm.get("mode") not in ("fixed", "random"):
        raise ConfigError("t_mode.mode", "expected 'fixed' or 'random'")
    if tm["mode"] == "fixed":
        vals = tm.get("values")
        if not isinstance(vals, list) or not vals:
            raise ConfigError("t_mode.values", "expected a nonempty list")
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not -math.pi <= v < math.pi:
                raise ConfigError(f"t_mode.values[{i}]", f"must lie in [-pi, pi), got {v!r}")
        t_mode = TMode("fixed", values=tuple(float(v) for v in vals))
    else:
        count = _num(tm, "count", int, "t_mode.count")
        if count < 1:
            raise ConfigError("t_mode.count", "must be >= 1")
        seed = _num(tm, "seed", int, "t_mode.seed")
        if not 0 <= seed <= MASK64:
            raise ConfigError("t_mode.seed", "must be a 64-bit unsigned integer")
        t_mode = TMode("random", count=count, seed=seed)

    ng = d.get("n_grid")
    if not isinstance(ng, dict):
        raise ConfigError("n_grid", "expected an object")
    if "values" in ng:
        vals = ng["values"]
        if not isinstance(vals, list) or not vals or any(
            isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in vals
        ):
            raise ConfigError("n_grid.values", "expected a nonempty list of positive integers")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("n_grid.values", "must be strictly increasing")
        n_grid = NGrid(values=tuple(vals))
    else:
        n_grid = NGrid(
            n0=_num(ng, "n0", int, "n_grid.n0"),
            gamma=_num(ng, "gamma", float, "n_grid.gamma"),
            points=_num(ng, "points", int, "n_grid.points"),
        )
        try:
            n_grid.resolve()
        except ValueError as exc:
            raise ConfigError("n_grid", str(exc)) from None

    reps = _num(d, "reps", int)
    if reps < 100:
        raise ConfigError("reps", f"must be >= 100, got {reps}")
    master = _num(d, "master_seed", int)
    if not 0 <= master <= MASK64:
        raise ConfigError("master_seed", "must be a 64-bit unsigned integer")

    suites = d.get("suites", [])
    if not isinstance(suites, list):
        raise ConfigError("suites", "expected a list")
    for i, s in enumerate(suites):
        if s not in SUITES:
            raise ConfigError(f"suites[{i}]", f"unknown suite {s!r}; expected one of {SUITES}")

    out = d.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output_dir", "expected a string path")

    opts = d.get("options", {})
    if not isinstance(opts, dict):
        raise ConfigError("options", "expected an object")
    for k in opts:
        if k not in DEFAULT_OPTIONS:
            raise ConfigError(f"options.{k}", "unknown option")

    return RunConfig(dist, p, r, eps, t_mode, n_grid, reps, master, tuple(suites), out, dict(opts))


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return parse_config(d)


def dump_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(cfg.to_json() + "\n")


__all__ = ["ConfigError", "NGrid", "RunConfig", "SUITES", "TMode", "load_config", "parse_config", "dump_config"]
