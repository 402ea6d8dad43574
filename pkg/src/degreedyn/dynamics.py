"""Dynamics families: self term f(x) and pairwise interaction g(x_i, x_j).

    ecological  f = B + x(1 - x/K)(x/C - 1)      g = x_i x_j / (D + E x_i + H x_j)
    regulatory  f = -B x^f_exp                   g = R x_j^h / (x_j^h + 1)
    epidemic    f = -B x                         g = R (1 - x_i) x_j

All evaluators broadcast over numpy arrays.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import ClassVar, Mapping

import numpy as np

from .defaults import DYNAMICS_PARAMS, INITIAL_STATE


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class EcologicalParams:
    B: float = DYNAMICS_PARAMS['ecological']['B']
    K: float = DYNAMICS_PARAMS['ecological']['K']
    C: float = DYNAMICS_PARAMS['ecological']['C']
    D: float = DYNAMICS_PARAMS['ecological']['D']
    E: float = DYNAMICS_PARAMS['ecological']['E']
    H: float = DYNAMICS_PARAMS['ecological']['H']

    def validate(self):
        _finite_positive(self, "B", "K", "C", "D", "E", "H")
        if not self.K > self.C:
            raise ValueError(f"ecological params need K > C (K={self.K}, C={self.C})")


@dataclass(frozen=True)
class RegulatoryParams:
    B: float = DYNAMICS_PARAMS['regulatory']['B']
    f_exp: float = DYNAMICS_PARAMS['regulatory']['f_exp']
    R: float = DYNAMICS_PARAMS['regulatory']['R']
    h: float = DYNAMICS_PARAMS['regulatory']['h']

    def validate(self):
        _finite_positive(self, "B", "f_exp", "R", "h")


@dataclass(frozen=True)
class EpidemicParams:
    B: float = DYNAMICS_PARAMS['epidemic']['B']
    R: float = DYNAMICS_PARAMS['epidemic']['R']

    def validate(self):
        _finite_positive(self, "B", "R")


def _finite_positive(p, *names):
    for name in names:
        val = getattr(p, name)
        if not np.isfinite(val) or val <= 0:
            raise ValueError(f"{type(p).__name__}.{name} must be finite and > 0, got {val}")


PARAM_TYPES = {
    "ecological": EcologicalParams,
    "regulatory": RegulatoryParams,
    "epidemic": EpidemicParams,
}


@dataclass(frozen=True)
class DynamicsModel:
    family: str
    params: EcologicalParams | RegulatoryParams | EpidemicParams

    # count of negative states clamped before fractional powers (process-wide)
    clamp_events: ClassVar[int] = 0

    def __post_init__(self):
        if self.family not in PARAM_TYPES:
            raise ValueError(f"unknown dynamics family {self.family!r}")
        if not isinstance(self.params, PARAM_TYPES[self.family]):
            raise TypeError(f"{self.family} needs {PARAM_TYPES[self.family].__name__}")
        self.params.validate()

    @classmethod
    def default(cls, family: str, **overrides) -> "DynamicsModel":
        return cls(family, PARAM_TYPES[family](**overrides))

    @classmethod
    def from_dict(cls, d: Mapping) -> "DynamicsModel":
        d = dict(d)
        family = d.pop("family")
        params = d.pop("params", {}) or {}
        if d:
            raise ValueError(f"unknown dynamics keys: {sorted(d)}")
        known = {f.name for f in fields(PARAM_TYPES[family])}
        bad = set(params) - known
        if bad:
            raise ValueError(f"unknown {family} parameters: {sorted(bad)}")
        return cls.default(family, **params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": asdict(self.params)}

    # the "dead" fixed point x = 0 exists for these families only
    @property
    def has_absorbing_zero(self) -> bool:
        return self.family in ("regulatory", "epidemic")

    def f(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.family == "ecological":
            return p.B + x * (1.0 - x / p.K) * (x / p.C - 1.0)
        if self.family == "regulatory":
            return -p.B * _power(x, p.f_exp)
        return -p.B * x

    def g(self, xi, xj):
        xi = np.asarray(xi, dtype=float)
        xj = np.asarray(xj, dtype=float)
        p = self.params
        if self.family == "ecological":
            den = p.D + p.E * xi + p.H * xj
            if np.any(den <= 0):
                raise DomainError("ecological interaction denominator <= 0")
            return xi * xj / den
        if self.family == "regulatory":
            xh = _power(xj, p.h)
            return p.R * xh / (xh + 1.0) + 0.0 * xi
        return p.R * (1.0 - xi) * xj

    def rhs_full(self, x, rows, cols):
        """Right-hand side of the coupled system given directed edge arrays."""
        inter = np.bincount(rows, weights=self.g(x[rows], x[cols]), minlength=len(x))
        return self.f(x) + inter


def _power(x, e):
    if float(e).is_integer():
        return np.power(x, e)
    if np.any(x < 0):
        DynamicsModel.clamp_events += int(np.sum(x < 0))
        x = np.maximum(x, 0.0)
    return np.power(x, e)


def f_eval(model: DynamicsModel, x):
    x = np.asarray(x, dtype=float)
    if model.family == "regulatory" and np.any(x < 0) and not float(model.params.f_exp).is_integer():
        raise DomainError("regulatory f with negative state and non-integer exponent")
    return model.f(x)


def g_eval(model: DynamicsModel, xi, xj):
    return model.g(xi, xj)


def perturb_params(model: DynamicsModel, factors: Mapping[str, float],
                   max_abs: float = 0.5) -> DynamicsModel:
    """Scale selected parameters by ``1 + r``; the result must stay valid."""
    updates = {}
    for name, r in factors.items():
        if not hasattr(model.params, name):
            raise ValueError(f"{model.family} has no parameter {name!r}")
        if abs(r) > max_abs:
            raise ValueError(f"|r| = {abs(r)} exceeds {max_abs}")
        updates[name] = getattr(model.params, name) * (1.0 + r)
    new = replace(model.params, **updates)
    new.validate()
    return DynamicsModel(model.family, new)


def initial_state(model: DynamicsModel) -> float:
    """Default homogeneous starting value for ground-truth simulation."""
    if model.family == "ecological":
        return model.params.K + 1.0
    return INITIAL_STATE[model.family]

