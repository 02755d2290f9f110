"""Flux nonlinearity and parameter normalization for the viscous wave system.

The system evolves a pair (tau, u) on a periodic interval:

    tau_t - u_x = -a tau_xxxx
    u_t - sigma(tau)_x = -delta u_xx - eps u_xxxx

Only the derivatives of the flux sigma at the reference state enter the
closed-form reduction, so the flux is carried as the triple
(sigma'(0), sigma''(0), sigma'''(0)) plus an optional remainder that must
vanish to fourth order.  The two-step rescaling of the domain half-length M
and the u-hyperviscosity eps collapses to a single map onto the normalized
problem with M = pi and eps = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "FluxModel",
    "PolynomialTail",
    "PhysicalParameters",
    "NormalizedParameters",
    "normalize_domain",
    "flux_eval",
    "nonlinear_flux",
    "flux_from_dict",
    "flux_to_dict",
]

# sample points used to certify that the tail vanishes to fourth order
_TAIL_COARSE = (1.0, -1.0, 0.5, -0.5)
_TAIL_FINE = (1e-2, -1e-2, 1e-3, -1e-3)


class PolynomialTail:
    """Remainder beyond the cubic Taylor part: sum of c_j * tau**j for j >= 4."""

    def __init__(self, coefficients: Sequence[float]):
        self.coefficients = tuple(float(c) for c in coefficients)
        # np.polyval wants highest degree first; degrees are 4, 5, ...
        self._poly = np.array(self.coefficients[::-1] + (0.0,) * 4, dtype=float)

    def __call__(self, tau):
        return np.polyval(self._poly, tau)

    def __repr__(self):
        return f"PolynomialTail({list(self.coefficients)})"


def _check_tail(tail: Callable[[float], float]) -> None:
    if abs(float(tail(0.0))) != 0.0:
        raise ValueError("tail(0) must be exactly 0")
    coarse = max(abs(float(tail(t))) / t**4 for t in _TAIL_COARSE)
    for t in _TAIL_FINE:
        ratio = abs(float(tail(t))) / t**4
        if not math.isfinite(ratio) or ratio > 1e3 * (1.0 + coarse):
            raise ValueError(
                "tail does not vanish to fourth order: "
                f"|tail({t})|/{t}^4 = {ratio:.3g}"
            )


@dataclass(frozen=True)
class FluxModel:
    """Flux sigma(tau) as derivatives at the reference state plus a remainder.

    sigma1, sigma2, sigma3 are sigma'(0), sigma''(0), sigma'''(0); sigma(0) is
    normalized to 0 (it only enters under d/dx).  The reference uniform state
    is (0, 0); shifting a general state is the caller's job by re-expanding
    sigma.
    """

    sigma1: float = 0.0
    sigma2: float = 0.0
    sigma3: float = 0.0
    tail: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.tail is not None:
            _check_tail(self.tail)


def flux_eval(flux: FluxModel, tau):
    """Evaluate sigma(tau) - sigma(0); accepts scalars or arrays."""
    out = flux.sigma1 * tau + 0.5 * flux.sigma2 * tau**2 + flux.sigma3 * tau**3 / 6.0
    if flux.tail is not None:
        out = out + flux.tail(tau)
    return out


def nonlinear_flux(flux: FluxModel, tau):
    """The part of the flux beyond linear order: flux_eval minus sigma'(0)*tau."""
    out = 0.5 * flux.sigma2 * tau**2 + flux.sigma3 * tau**3 / 6.0
    if flux.tail is not None:
        out = out + flux.tail(tau)
    return out


@dataclass(frozen=True)
class PhysicalParameters:
    """Raw diffusion coefficients before normalization.

    a: tau-hyperviscosity, delta: anti-diffusion on u, epsilon: u-hyperviscosity,
    half_period: half domain length M (domain is [-M, M] periodic).
    """

    a: float
    delta: float
    epsilon: float = 1.0
    half_period: float = math.pi


@dataclass(frozen=True)
class NormalizedParameters:
    """Coefficients after rescaling to M = pi, eps = 1.  Produced by normalize_domain."""

    a: float
    delta: float


def normalize_domain(p: PhysicalParameters) -> NormalizedParameters:
    """Collapse the two domain/viscosity rescalings into one map.

    First the spatial period is rescaled to 2*pi, sending
    (a, delta, eps) -> ((pi/M)^3 a, (pi/M) delta, (pi/M)^3 eps);
    then time is rescaled by the new eps, dividing a and delta by it.
    The composition is (a, delta) -> (a/eps, (M/pi)^2 delta/eps).
    Identity on inputs already at M = pi, eps = 1.
    """
    if p.epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {p.epsilon}")
    if p.half_period <= 0.0:
        raise ValueError(f"half_period must be positive, got {p.half_period}")
    ratio = p.half_period / math.pi
    return NormalizedParameters(
        a=p.a / p.epsilon,
        delta=ratio**2 * p.delta / p.epsilon,
    )


def flux_from_dict(d: dict) -> FluxModel:
    """Build a flux from its configuration form.

    Expected keys: sigma1, sigma2, sigma3 (numbers, default 0) and optionally
    "tail": a list [c4, c5, ...] of polynomial coefficients starting at degree 4.
    """
    tail_spec = d.get("tail")
    tail = PolynomialTail(tail_spec) if tail_spec else None
    return FluxModel(
        sigma1=float(d.get("sigma1", 0.0)),
        sigma2=float(d.get("sigma2", 0.0)),
        sigma3=float(d.get("sigma3", 0.0)),
        tail=tail,
    )


def flux_to_dict(flux: FluxModel) -> dict:
    out = {"sigma1": flux.sigma1, "sigma2": flux.sigma2, "sigma3": flux.sigma3}
    if isinstance(flux.tail, PolynomialTail):
        out["tail"] = list(flux.tail.coefficients)
    elif flux.tail is not None:
        raise ValueError("only polynomial tails are serializable")
    return out
