"""Sampleable laws with closed-form tail and moment oracles.

Every law draws from the counter-based streams in :mod:`dftlab.rng`, so a
path is a pure function of ``(spec, seed)`` and entry ``k`` never depends on
how many entries were requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import kernels
from .rng import MASK64

MAX_PAIRWISE_M = 30


class DistributionSpec:
    """Base class for the supported laws. Instances are immutable."""

    label: str

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    @property
    def is_bounded(self) -> bool:
        return True


def _set_label(obj, default):
    if not obj.label:
        object.__setattr__(obj, "label", default)


@dataclass(frozen=True)
class SymmetricPareto(DistributionSpec):
    """Density (alpha/2)|x|^(-alpha-1) on |x| >= 1."""

    alpha: float
    label: str = ""

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha}")
        _set_label(self, f"pareto({self.alpha:g})")

    def to_dict(self):
        return {"kind": "SymmetricPareto", "alpha": self.alpha, "label": self.label}

    @property
    def is_bounded(self):
        return False


@dataclass(frozen=True)
class Rademacher(DistributionSpec):
    label: str = ""

    def __post_init__(self):
        _set_label(self, "rademacher")

    def to_dict(self):
        return {"kind": "Rademacher", "label": self.label}


@dataclass(frozen=True)
class PointMass(DistributionSpec):
    """All mass at ``value``; the degenerate control law."""

    value: float = 0.0
    label: str = ""

    def __post_init__(self):
        _set_label(self, f"point({self.value:g})")

    def to_dict(self):
        return {"kind": "PointMass", "value": self.value, "label": self.label}


@dataclass(frozen=True)
class PairwiseRademacher(DistributionSpec):
    """Subset products X_S = prod_{i in S} B_i over nonempty S of {1..m}.

    Entry k (1-based) is the product over the set bits of k, so the sequence
    has exactly 2**m - 1 entries.
    """

    m: int
    label: str = ""

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and 1 <= self.m <= MAX_PAIRWISE_M):
            raise ValueError(f"m must be an integer in [1, {MAX_PAIRWISE_M}], got {self.m!r}")
        _set_label(self, f"pairwise_rademacher({self.m})")

    @property
    def length(self) -> int:
        return (1 << self.m) - 1

    def to_dict(self):
        return {"kind": "PairwiseRademacher", "m": int(self.m), "label": self.label}


SCALE_RULES = ("inv_log", "power")


@dataclass(frozen=True)
class ScaledFamily(DistributionSpec):
    """X_k = c_k * (base draw k), with c_1 = 1 and c_k in (0, 1].

    ``rule="inv_log"``: c_k = 1 / (1 + ln k).
    ``rule="power"``: c_k = k**(-exponent), exponent >= 0.

    Since c_k <= 1, P(|X_k| >= x) <= P(|X_1| >= x) for every x >= 0.
    """

    base: DistributionSpec
    rule: str = "inv_log"
    exponent: float = 0.0
    label: str = ""

    def __post_init__(self):
        if isinstance(self.base, ScaledFamily):
            raise ValueError("ScaledFamily base must be an unscaled law")
        if self.rule not in SCALE_RULES:
            raise ValueError(f"unknown scale rule {self.rule!r}; expected one of {SCALE_RULES}")
        if self.rule == "power" and not self.exponent >= 0:
            raise ValueError("power-rule exponent must be >= 0")
        suffix = "inv_log" if self.rule == "inv_log" else f"k^-{self.exponent:g}"
        _set_label(self, f"scaled({self.base.label},{suffix})")

    def scale_at(self, k):
        k = np.asarray(k, dtype=np.float64)
        if np.any(k < 1):
            raise ValueError("index k must be >= 1")
        if self.rule == "inv_log":
            return 1.0 / (1.0 + np.log(k))
        return k ** (-self.exponent)

    @property
    def is_bounded(self):
        return self.base.is_bounded

    def to_dict(self):
        d = {"kind": "ScaledFamily", "base": self.base.to_dict(), "rule": self.rule, "label": self.label}
        if self.rule == "power":
            d["exponent"] = self.exponent
        return d


def spec_from_dict(d: dict[str, Any]) -> DistributionSpec:
    kind = d.get("kind")
    label = d.get("label", "")
    if kind == "SymmetricPareto":
        return SymmetricPareto(float(d["alpha"]), label=label)
    if kind == "Rademacher":
        return Rademacher(label=label)
    if kind == "PointMass":
        return PointMass(float(d.get("value", 0.0)), label=label)
    if kind == "PairwiseRademacher":
        return PairwiseRademacher(int(d["m"]), label=label)
    if kind == "ScaledFamily":
        return ScaledFamily(
            spec_from_dict(d["base"]),
            rule=d.get("rule", "inv_log"),
            exponent=float(d.get("exponent", 0.0)),
            label=label,
        )
    raise ValueError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class MomentProfile:
    p: float
    r: float
    abs_moment_p: float
    abs_moment_1: float

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise ValueError(f"p must satisfy 1 < p < 2, got {self.p}")
        if not 1 <= self.r <= self.p:
            raise ValueError(f"r must satisfy 1 <= r <= p, got r={self.r}, p={self.p}")

    @classmethod
    def of(cls, spec: DistributionSpec, p: float, r: float) -> MomentProfile:
        return cls(p, r, moment_abs(spec, p), moment_abs(spec, 1.0))

    @property
    def hypothesis_holds(self) -> bool:
        return math.isfinite(self.abs_moment_p)


# -- sampling ---------------------------------------------------------------


def draw_block(spec: DistributionSpec, seeds, k0: int, count: int) -> np.ndarray:
    """Entries k0 .. k0+count-1 of the paths for each seed, shape (len(seeds), count)."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    if isinstance(spec, ScaledFamily):
        x = draw_block(spec.base, seeds, k0, count)
        return x * spec.scale_at(np.arange(k0, k0 + count))[None, :]
    if isinstance(spec, PairwiseRademacher):
        if k0 + count - 1 > spec.length:
            raise ValueError(f"PairwiseRademacher(m={spec.m}) has only {spec.length} entries")
        return kernels.pairwise_block(seeds, spec.m, k0, count)
    if isinstance(spec, PointMass):
        return np.full((seeds.size, count), float(spec.value))
    u, sg = kernels.uniform_sign_block(seeds, k0, count)
    if isinstance(spec, Rademacher):
        return sg
    if isinstance(spec, SymmetricPareto):
        # inverse CDF of |X|: P(|X| >= x) = x^-alpha
        np.power(u, -1.0 / spec.alpha, out=u)
        u *= sg
        return u
    raise TypeError(f"unsupported spec {spec!r}")


def max_length(spec: DistributionSpec) -> int | None:
    if isinstance(spec, PairwiseRademacher):
        return spec.length
    if isinstance(spec, ScaledFamily):
        return max_length(spec.base)
    return None


def sample(spec: DistributionSpec, seed: int, n: int) -> np.ndarray:
    """Entries 1..n of the path drawn from ``seed``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cap = max_length(spec)
    if cap is not None and n > cap:
        raise ValueError(f"{spec.label} yields only {cap} variables, requested {n}")
    seeds = np.array([seed & MASK64], dtype=np.uint64)
    out = np.empty(n)
    step = 1 << 20
    for k0 in range(1, n + 1, step):
        cnt = min(step, n - k0 + 1)
        out[k0 - 1 : k0 - 1 + cnt] = draw_block(spec, seeds, k0, cnt)[0]
    return out


def pairwise_independent_rademacher(m: int, seed: int) -> np.ndarray:
    spec = PairwiseRademacher(m)
    return sample(spec, seed, spec.length)


# -- closed-form oracles ----------------------------------------------------


def _marginal(spec: DistributionSpec, k: int):
    """(base law, scale c_k) for index k."""
    if k < 1:
        raise ValueError("index k must be >= 1")
    if isinstance(spec, ScaledFamily):
        return spec.base, float(spec.scale_at(k))
    return spec, 1.0


def tail_prob(spec: DistributionSpec, x: float, k: int = 1) -> float:
    """P(|X_k| >= x)."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    base, c = _marginal(spec, k)
    y = x / c
    if isinstance(base, SymmetricPareto):
        return 1.0 if y <= 1.0 else y ** (-base.alpha)
    if isinstance(base, (Rademacher, PairwiseRademacher)):
        return 1.0 if y <= 1.0 else 0.0
    if isinstance(base, PointMass):
        return 1.0 if y <= abs(base.value) else 0.0
    raise TypeError(f"unsupported spec {spec!r}")


def moment_abs(spec: DistributionSpec, q: float, k: int = 1) -> float:
    """E|X_k|^q, possibly +inf."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    if q == 0:
        return 1.0
    base, c = _marginal(spec, k)
    if isinstance(base, SymmetricPareto):
        m = base.alpha / (base.alpha - q) if q < base.alpha else math.inf
    elif isinstance(base, (Rademacher, PairwiseRademacher)):
        m = 1.0
    elif isinstance(base, PointMass):
        m = abs(base.value) ** q
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return c**q * m


def truncated_second_moment(spec: DistributionSpec, c: float, k: int = 1) -> float:
    """E[X_k^2 1{|X_k| <= c}]."""
    if c < 0:
        raise ValueError(f"c must be >= 0, got {c}")
    base, s = _marginal(spec, k)
    y = c / s
    if isinstance(base, SymmetricPareto):
        a = base.alpha
        if y < 1.0:
            return 0.0
        if a == 2.0:
            m = 2.0 * math.log(y)
        else:
            m = a * (y ** (2.0 - a) - 1.0) / (2.0 - a)
    elif isinstance(base, (Rademacher, PairwiseRademacher)):
        m = 1.0 if y >= 1.0 else 0.0
    elif isinstance(base, PointMass):
        m = base.value**2 if abs(base.value) <= y else 0.0
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return s * s * m


def tail_first_moment(spec: DistributionSpec, c: float, k: int = 1) -> float:
    """E[|X_k| 1{|X_k| > c}], +inf when the first moment diverges."""
    if c < 0:
        raise ValueError(f"c must be >= 0, got {c}")
    base, s = _marginal(spec, k)
    y = c / s
    if isinstance(base, SymmetricPareto):
        a = base.alpha
        if a <= 1.0:
            return math.inf
        m = a / (a - 1.0) * max(y, 1.0) ** (1.0 - a)
    elif isinstance(base, (Rademacher, PairwiseRademacher)):
        m = 1.0 if y < 1.0 else 0.0
    elif isinstance(base, PointMass):
        m = abs(base.value) if abs(base.value) > y else 0.0
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return s * m


def truncated_second_moments(spec: DistributionSpec, cs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`truncated_second_moment` at index 1."""
    cs = np.asarray(cs, dtype=np.float64)
    if isinstance(spec, SymmetricPareto):
        a = spec.alpha
        y = np.maximum(cs, 1.0)
        if a == 2.0:
            return 2.0 * np.log(y)
        return a * (y ** (2.0 - a) - 1.0) / (2.0 - a)
    return np.array([truncated_second_moment(spec, float(c)) for c in cs])


def tail_first_moments(spec: DistributionSpec, cs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`tail_first_moment` at index 1."""
    cs = np.asarray(cs, dtype=np.float64)
    if isinstance(spec, SymmetricPareto) and spec.alpha > 1.0:
        a = spec.alpha
        return a / (a - 1.0) * np.maximum(cs, 1.0) ** (1.0 - a)
    return np.array([tail_first_moment(spec, float(c)) for c in cs])


__all__ = [
    "DistributionSpec",
    "MomentProfile",
    "PairwiseRademacher",
    "PointMass",
    "Rademacher",
    "ScaledFamily",
    "SymmetricPareto",
    "draw_block",
    "moment_abs",
    "pairwise_independent_rademacher",
    "sample",
    "spec_from_dict",
    "tail_first_moment",
    "tail_prob",
    "truncated_second_moment",
]
