"""Reduced radial-angular dynamics: closed form, integrator, equilibria.

In polar coordinates A = r e^{i theta} the cubic truncation reads

    dr/dt     = a_mu * r + b * r^3      (a_mu = a_coef * mu)
    dtheta/dt = 0,

the angular equation vanishing identically by the rotation/reflection
symmetry of the reduced law.  The radial equation solves in closed form,

    r^2(t) = a_mu r0^2 / (a_mu e^{-2 a_mu t} + b r0^2 (e^{-2 a_mu t} - 1)),

which doubles as the oracle for the numerical integrator.  Restricted to
r >= 0 the picture is half a pitchfork: one nontrivial branch
r = sqrt(-a_mu/b) on the side where -a_mu/b > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowupError
from .reduction import AmplitudeEquation

__all__ = [
    "AmplitudeState",
    "RadialTrajectory",
    "truncated_solution",
    "blowup_time",
    "integrate_radial",
    "equilibria",
]


@dataclass(frozen=True)
class AmplitudeState:
    """Polar coordinates of the center amplitude: r = |A| >= 0, theta = arg A."""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("r must be nonnegative")


def blowup_time(a_mu: float, b: float, r0: float) -> Optional[float]:
    """Positive finite time at which the closed-form denominator vanishes, if any."""
    if r0 == 0.0 or b == 0.0:
        return None
    if a_mu == 0.0:
        # dr/dt = b r^3  =>  r^2 = r0^2/(1 - 2 b r0^2 t)
        return 1.0 / (2.0 * b * r0 * r0) if b > 0.0 else None
    # denominator (a_mu + b r0^2) E - b r0^2 with E = exp(-2 a_mu t)
    coef = a_mu + b * r0 * r0
    if coef == 0.0:
        return None  # sitting on the nontrivial equilibrium
    e_star = b * r0 * r0 / coef
    if e_star <= 0.0:
        return None
    t_star = -math.log(e_star) / (2.0 * a_mu)
    return t_star if t_star > 0.0 else None


def truncated_solution(a_mu: float, b: float, r0: float, t: float) -> float:
    """Exact solution r(t) of dr/dt = a_mu r + b r^3 with r(0) = r0 >= 0.

    Raises BlowupError with the escape time if the solution ceases to exist
    before t (subcritical escape).
    """
    if r0 < 0.0:
        raise ValueError("r0 must be nonnegative")
    if t == 0.0 or r0 == 0.0:
        return r0
    t_star = blowup_time(a_mu, b, r0)
    if t_star is not None and t_star <= t:
        raise BlowupError(t_star)
    if a_mu == 0.0:
        return r0 / math.sqrt(1.0 - 2.0 * b * r0 * r0 * t)
    e = math.exp(-2.0 * a_mu * t)
    denom = a_mu * e + b * r0 * r0 * (e - 1.0)
    ratio = a_mu / denom if denom != 0.0 else math.inf
    if not math.isfinite(ratio) or ratio <= 0.0:
        raise BlowupError(t)
    return r0 * math.sqrt(ratio)


@dataclass(frozen=True)
class RadialTrajectory:
    t: np.ndarray
    r: np.ndarray
    theta: np.ndarray


def integrate_radial(
    eq: AmplitudeEquation,
    mu: float,
    r0: float,
    t_end: float,
    dt: float,
    theta0: float = 0.0,
    angular_rhs: Optional[Callable[[float], float]] = None,
) -> RadialTrajectory:
    """Classical fourth-order one-step integration of the radial equation.

    angular_rhs(r) is a hook for a nonzero angular law (identically zero at
    cubic truncation); without it theta stays exactly theta0.  Escape beyond
    the representable range raises BlowupError with the step time.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if r0 < 0.0:
        raise ValueError("r0 must be nonnegative")
    a_mu = eq.a_coef * mu
    b = eq.b_coef

    def f(r: float) -> float:
        return a_mu * r + b * r * r * r

    n_steps = max(1, int(round(t_end / dt)))
    h = t_end / n_steps
    ts = [0.0]
    rs = [r0]
    thetas = [theta0]
    r = r0
    theta = theta0
    for i in range(n_steps):
        k1 = f(r)
        k2 = f(r + 0.5 * h * k1)
        k3 = f(r + 0.5 * h * k2)
        k4 = f(r + h * k3)
        r = r + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not math.isfinite(r) or abs(r) > 1e8:
            raise BlowupError((i + 1) * h)
        if angular_rhs is not None:
            g1 = angular_rhs(rs[-1])
            g2 = angular_rhs(0.5 * (rs[-1] + r))
            g4 = angular_rhs(r)
            theta = theta + h * (g1 + 4.0 * g2 + g4) / 6.0
        ts.append((i + 1) * h)
        rs.append(r)
        thetas.append(theta)
    return RadialTrajectory(t=np.array(ts), r=np.array(rs), theta=np.array(thetas))


def equilibria(eq: AmplitudeEquation, mu: float) -> list[tuple[float, str]]:
    """Nonnegative equilibria of the truncated radial law with their stability.

    r = 0 is stable iff a_coef*mu < 0.  When -a_coef*mu/b_coef > 0 the branch
    point r* = sqrt(-a_coef*mu/b_coef) exists with derivative
    a_mu + 3 b r*^2 = -2 a_mu, hence stable iff a_coef*mu > 0.
    """
    if eq.b_coef == 0.0:
        raise ValueError("b_coef must be nonzero")
    a_mu = eq.a_coef * mu
    if a_mu < 0.0:
        trivial = "stable"
    elif a_mu > 0.0:
        trivial = "unstable"
    else:
        trivial = "neutral"
    out = [(0.0, trivial)]
    ratio = -a_mu / eq.b_coef
    if ratio > 0.0:
        out.append((math.sqrt(ratio), "stable" if a_mu > 0.0 else "unstable"))
    return out
