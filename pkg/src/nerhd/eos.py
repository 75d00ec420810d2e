"""Fluid equations of state and their admissibility checks.

A model supplies pressure p(rho, theta), specific internal energy
e(rho, theta) and specific entropy s(rho, theta) on the domain
D = {rho > 0, theta > 0}, together with first partial derivatives.
Admissible models satisfy the pointwise inequalities

    p > 0,    p_rho > 0,    p_theta > 0,    e_theta > 0,

and the first-law compatibility identities

    e_rho   = (p - theta * p_theta) / rho**2
    s_rho   = -p_theta / rho**2
    s_theta = e_theta / theta

on which every matrix assembly downstream relies.  Derivatives are supplied
analytically; finite differences exist only as a cross-check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError, HypothesisViolation, NewtonDivergence

__all__ = [
    "ThermoPoint",
    "EosModel",
    "IdealGas",
    "AnalyticEos",
    "eval_eos",
    "identity_residuals",
    "WeylReport",
    "check_weyl_hypotheses",
    "theta_from_energy",
    "eos_to_dict",
    "eos_from_dict",
    "eos_to_json",
    "eos_from_json",
]

#: relative tolerance for the compatibility identities
TOL_ID = 1e-8


@dataclass(frozen=True)
class ThermoPoint:
    """Pressure, energy, entropy and their first derivatives at one state."""

    rho: float
    theta: float
    p: float
    e: float
    s: float
    p_rho: float
    p_theta: float
    e_rho: float
    e_theta: float
    s_rho: float
    s_theta: float


class EosModel:
    """Base interface: numpy-broadcasting callables of (rho, theta)."""

    kind = "abstract"

    def p(self, rho, theta):
        raise NotImplementedError

    def e(self, rho, theta):
        raise NotImplementedError

    def s(self, rho, theta):
        raise NotImplementedError

    def p_rho(self, rho, theta):
        raise NotImplementedError

    def p_theta(self, rho, theta):
        raise NotImplementedError

    def e_rho(self, rho, theta):
        raise NotImplementedError

    def e_theta(self, rho, theta):
        raise NotImplementedError

    def s_rho(self, rho, theta):
        raise NotImplementedError

    def s_theta(self, rho, theta):
        raise NotImplementedError


@dataclass(frozen=True)
class IdealGas(EosModel):
    """p = R rho theta, e = R theta / (gamma - 1).

    The entropy gauge is s(1, 1) = 0; only derivatives of s enter any
    assembled matrix, so the gauge is inert and recorded in reports.
    """

    R: float = 1.0
    gamma: float = 5.0 / 3.0

    kind = "ideal-gas"

    def __post_init__(self):
        if not (self.R > 0.0):
            raise ConfigError(f"gas constant must be positive, got {self.R}")
        if not (self.gamma > 1.0):
            raise ConfigError(f"adiabatic exponent must exceed 1, got {self.gamma}")

    def p(self, rho, theta):
        return self.R * rho * theta

    def e(self, rho, theta):
        return self.R * theta / (self.gamma - 1.0) + 0.0 * rho

    def s(self, rho, theta):
        return self.R * (np.log(theta) / (self.gamma - 1.0) - np.log(rho))

    def p_rho(self, rho, theta):
        return self.R * theta + 0.0 * rho

    def p_theta(self, rho, theta):
        return self.R * rho + 0.0 * theta

    def e_rho(self, rho, theta):
        return 0.0 * rho * theta

    def e_theta(self, rho, theta):
        return self.R / (self.gamma - 1.0) + 0.0 * rho * theta

    def s_rho(self, rho, theta):
        return -self.R / rho + 0.0 * theta

    def s_theta(self, rho, theta):
        return self.R / ((self.gamma - 1.0) * theta) + 0.0 * rho

    def theta_from_e(self, rho, e):
        return (self.gamma - 1.0) * e / self.R + 0.0 * rho


def _fd(fn: Callable, arg: int, rho, theta):
    # central difference in the selected argument, step scaled to the point
    if arg == 0:
        h = 1e-6 * np.maximum(np.abs(rho), 1.0)
        return (fn(rho + h, theta) - fn(rho - h, theta)) / (2.0 * h)
    h = 1e-6 * np.maximum(np.abs(theta), 1.0)
    return (fn(rho, theta + h) - fn(rho, theta - h)) / (2.0 * h)


@dataclass(frozen=True)
class AnalyticEos(EosModel):
    """User-supplied closed forms; derivative callables optional.

    Missing derivatives fall back to central finite differences, which is
    fine for checks but too rough for exact-symmetry assembly; supply them
    when the model feeds linearize.
    """

    p_fn: Callable
    e_fn: Callable
    s_fn: Callable
    p_rho_fn: Callable | None = None
    p_theta_fn: Callable | None = None
    e_rho_fn: Callable | None = None
    e_theta_fn: Callable | None = None
    s_rho_fn: Callable | None = None
    s_theta_fn: Callable | None = None

    kind = "user-tabulated-analytic"

    def p(self, rho, theta):
        return self.p_fn(rho, theta)

    def e(self, rho, theta):
        return self.e_fn(rho, theta)

    def s(self, rho, theta):
        return self.s_fn(rho, theta)

    def p_rho(self, rho, theta):
        if self.p_rho_fn is not None:
            return self.p_rho_fn(rho, theta)
        return _fd(self.p_fn, 0, rho, theta)

    def p_theta(self, rho, theta):
        if self.p_theta_fn is not None:
            return self.p_theta_fn(rho, theta)
        return _fd(self.p_fn, 1, rho, theta)

    def e_rho(self, rho, theta):
        if self.e_rho_fn is not None:
            return self.e_rho_fn(rho, theta)
        return _fd(self.e_fn, 0, rho, theta)

    def e_theta(self, rho, theta):
        if self.e_theta_fn is not None:
            return self.e_theta_fn(rho, theta)
        return _fd(self.e_fn, 1, rho, theta)

    def s_rho(self, rho, theta):
        if self.s_rho_fn is not None:
            return self.s_rho_fn(rho, theta)
        return _fd(self.s_fn, 0, rho, theta)

    def s_theta(self, rho, theta):
        if self.s_theta_fn is not None:
            return self.s_theta_fn(rho, theta)
        return _fd(self.s_fn, 1, rho, theta)


def _raw_point(model: EosModel, rho: float, theta: float) -> ThermoPoint:
    return ThermoPoint(
        rho=float(rho),
        theta=float(theta),
        p=float(model.p(rho, theta)),
        e=float(model.e(rho, theta)),
        s=float(model.s(rho, theta)),
        p_rho=float(model.p_rho(rho, theta)),
        p_theta=float(model.p_theta(rho, theta)),
        e_rho=float(model.e_rho(rho, theta)),
        e_theta=float(model.e_theta(rho, theta)),
        s_rho=float(model.s_rho(rho, theta)),
        s_theta=float(model.s_theta(rho, theta)),
    )


def _h2_margins(tp: ThermoPoint) -> dict:
    return {"p": tp.p, "p_rho": tp.p_rho, "p_theta": tp.p_theta, "e_theta": tp.e_theta}


def identity_residuals(tp: ThermoPoint) -> dict:
    """Relative residuals of the three compatibility identities."""
    rho, theta = tp.rho, tp.theta
    e_rho_ref = (tp.p - theta * tp.p_theta) / rho**2
    s_rho_ref = -tp.p_theta / rho**2
    s_theta_ref = tp.e_theta / theta
    scale_e = abs(tp.e_rho) + (abs(tp.p) + theta * abs(tp.p_theta)) / rho**2 + 1e-300
    scale_sr = abs(tp.s_rho) + abs(tp.p_theta) / rho**2 + 1e-300
    scale_st = abs(tp.s_theta) + abs(tp.e_theta) / theta + 1e-300
    return {
        "e_rho": abs(tp.e_rho - e_rho_ref) / scale_e,
        "s_rho": abs(tp.s_rho - s_rho_ref) / scale_sr,
        "s_theta": abs(tp.s_theta - s_theta_ref) / scale_st,
    }


def eval_eos(model: EosModel, rho: float, theta: float) -> ThermoPoint:
    """Evaluate the model at one state and enforce the admissibility
    inequalities.

    Raises DomainError outside D and HypothesisViolation when any of
    p, p_rho, p_theta, e_theta fails to be positive.  Identity residuals are
    the business of check_weyl_hypotheses, not of single-point evaluation.
    """
    rho = float(rho)
    theta = float(theta)
    if not (np.isfinite(rho) and np.isfinite(theta) and rho > 0.0 and theta > 0.0):
        raise DomainError(f"state (rho={rho}, theta={theta}) outside rho>0, theta>0")
    tp = _raw_point(model, rho, theta)
    for name, value in _h2_margins(tp).items():
        if not (np.isfinite(value) and value > 0.0):
            raise HypothesisViolation(
                f"{name} = {value} is not positive at (rho={rho}, theta={theta})"
            )
    return tp


@dataclass(frozen=True)
class WeylReport:
    passed: bool
    worst_violation: float
    worst_name: str
    n_points: int


def check_weyl_hypotheses(model: EosModel, sample) -> WeylReport:
    """Check the inequalities and identities on an explicit sample.

    `sample` is a sequence of (rho, theta) pairs, all inside D.  Returns a
    report rather than raising on a bad model: injected-defect models are a
    supported input here.  worst_violation is 0 when everything passes,
    otherwise the largest inequality deficit or identity residual, with the
    offending quantity named.
    """
    sample = list(sample)
    if not sample:
        raise ConfigError("empty sample")
    worst = 0.0
    worst_name = ""
    for rho, theta in sample:
        if not (rho > 0.0 and theta > 0.0):
            raise DomainError(f"sample point (rho={rho}, theta={theta}) outside D")
        tp = _raw_point(model, rho, theta)
        for name, value in _h2_margins(tp).items():
            deficit = 0.0 if value > 0.0 else max(-value, np.finfo(float).tiny)
            if not np.isfinite(value):
                deficit = np.inf
            if deficit > worst:
                worst, worst_name = deficit, name
        for name, res in identity_residuals(tp).items():
            if res > TOL_ID and res > worst:
                worst, worst_name = res, f"identity:{name}"
    return WeylReport(
        passed=(worst == 0.0),
        worst_violation=float(worst),
        worst_name=worst_name,
        n_points=len(sample),
    )


def theta_from_energy(model: EosModel, rho, e, theta0=None, tol=1e-13, max_iter=60):
    """Invert e(rho, .) for theta; vectorized.

    Monotone in theta because e_theta > 0 on admissible models, so plain
    Newton with positivity clipping converges from any positive start.
    """
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    if isinstance(model, IdealGas):
        theta = model.theta_from_e(rho, e)
        if np.any(theta <= 0.0) or not np.all(np.isfinite(theta)):
            raise DomainError("internal energy inversion left the domain")
        return theta
    theta = np.full(np.broadcast(rho, e).shape, 1.0) if theta0 is None else np.array(theta0, dtype=float, copy=True)
    target_scale = np.abs(e) + 1e-300
    for _ in range(max_iter):
        resid = model.e(rho, theta) - e
        if np.all(np.abs(resid) <= tol * target_scale):
            if np.any(theta <= 0.0):
                raise DomainError("internal energy inversion left the domain")
            return theta
        step = resid / model.e_theta(rho, theta)
        theta_new = theta - step
        # keep iterates positive; e is monotone so halving toward the old
        # point is safe
        bad = theta_new <= 0.0
        if np.any(bad):
            theta_new = np.where(bad, 0.5 * theta, theta_new)
        theta = theta_new
        if not np.all(np.isfinite(theta)):
            raise NewtonDivergence("non-finite iterate in temperature inversion")
    raise NewtonDivergence(f"temperature inversion did not converge in {max_iter} iterations")


def eos_to_dict(model: EosModel) -> dict:
    if isinstance(model, IdealGas):
        return {"kind": "ideal-gas", "R": model.R, "gamma": model.gamma}
    raise ConfigError(f"model kind {model.kind!r} has no JSON form")


def eos_from_dict(d: dict) -> EosModel:
    try:
        kind = d["kind"]
    except (TypeError, KeyError):
        raise ConfigError("eos object must carry a 'kind' field") from None
    if kind == "ideal-gas":
        try:
            return IdealGas(R=float(d["R"]), gamma=float(d["gamma"]))
        except KeyError as exc:
            raise ConfigError(f"ideal-gas eos missing field {exc}") from None
    raise ConfigError(f"unknown eos kind {kind!r}")


def eos_to_json(model: EosModel) -> str:
    return json.dumps(eos_to_dict(model))


def eos_from_json(text: str) -> EosModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid eos JSON: {exc}") from None
    return eos_from_dict(d)
