"""Center-space reduction of the critical linearization to a cubic amplitude law.

At an admissible configuration the kernel of the linearization is spanned by

    xi  = e^{i k0 x} (1, -i a_c k0^3)        and its conjugate,

and the kernel of the adjoint by

    eta = kappa e^{i k0 x} (-i k0 (delta_c - k0^2), 1),
    kappa = (2 pi i k0 [(a_c+1) k0^2 - delta_c])^{-1},

normalized so the pairing <eta, xi> = integral(u1 v1* + u2 v2*) equals 1.
The induced projection P = <eta*, .> xi + <eta, .> xi* extracts the complex
center coordinate A.  Eliminating the second-harmonic slave mode gives the
reduced law dA/dt = a_coef * mu * A + b_coef * |A|^2 A with

    a_coef = k0^4 / ((a_c+1) k0^2 - delta_c),
    b_coef = [sigma''(0)^2 / (6 a_c k0^4 (21 k0^2 - 5 delta_c))
              - sigma'''(0)/2] / ((a_c+1) k0^2 - delta_c),
    mu(nu) = (delta_c - k0^2) nu_1 + a_c nu_2,

both coefficients real.  The sign of b_coef decides super- vs subcritical.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dns import FieldState, zero_state
from .errors import DegenerateBifurcationError
from .model import FluxModel
from .spectral import CriticalConfiguration
from .tolerances import DEFAULT

__all__ = [
    "ReductionBasis",
    "SecondOrderCorrection",
    "AmplitudeEquation",
    "BifurcationVerdict",
    "build_basis",
    "pairing",
    "project_center",
    "center_field",
    "second_order_correction",
    "amplitude_equation",
    "classify_bifurcation",
    "predicted_wave",
    "observational_parameters",
]


def pairing(U: np.ndarray, V: np.ndarray) -> complex:
    """Discrete periodic inner product integral(u1 v1* + u2 v2*) dx.

    U, V: arrays of shape (2, N) sampled on the uniform [-pi, pi) grid.
    The trapezoid weights are exact for band-limited integrands when
    N exceeds the bandwidth of U V*.
    """
    n = U.shape[1]
    return complex(2.0 * math.pi / n * np.sum(U * np.conj(V)))


@dataclass(frozen=True)
class ReductionBasis:
    """Kernel vector, dual kernel vector and normalization of the projection."""

    k0: int
    xi_vec: np.ndarray   # (1, -i a_c k0^3)
    eta_vec: np.ndarray  # kappa * (-i k0 (delta_c - k0^2), 1)
    kappa: complex

    def _carrier(self, x: np.ndarray, sign: int = 1) -> np.ndarray:
        return np.exp(1j * sign * self.k0 * x)

    def xi(self, x: np.ndarray) -> np.ndarray:
        """Sample the kernel field on grid points; shape (2, len(x))."""
        return self.xi_vec[:, None] * self._carrier(x)[None, :]

    def eta(self, x: np.ndarray) -> np.ndarray:
        return self.eta_vec[:, None] * self._carrier(x)[None, :]


def build_basis(cfg: CriticalConfiguration) -> ReductionBasis:
    """Kernel/dual-kernel pair satisfying the four duality relations."""
    k0, a_c, delta_c = cfg.k0, cfg.a_c, cfg.delta_c
    denom = (a_c + 1.0) * k0**2 - delta_c
    if denom == 0.0:
        raise ValueError("(a_c+1) k0^2 - delta_c vanishes; kappa is undefined")
    kappa = 1.0 / (2.0j * math.pi * k0 * denom)
    xi_vec = np.array([1.0, -1j * a_c * k0**3], dtype=complex)
    eta_vec = kappa * np.array([-1j * k0 * (delta_c - k0**2), 1.0], dtype=complex)
    return ReductionBasis(k0=k0, xi_vec=xi_vec, eta_vec=eta_vec, kappa=kappa)


def _field_grid(field: FieldState, k0: int) -> np.ndarray:
    if field.n < 4 * k0:
        raise ValueError(f"grid too coarse for exact quadrature: need n >= {4 * k0}")
    return field.grid()


def project_center(field: FieldState, basis: ReductionBasis) -> tuple[complex, complex]:
    """Center coordinate pair (A, A*) of a mean-zero field, A = <eta*, U>."""
    x = _field_grid(field, basis.k0)
    tau, u = field.to_physical()
    U = np.vstack([tau, u]).astype(complex)
    A = pairing(np.conj(basis.eta(x)), U)
    return A, A.conjugate()


def center_field(A: complex, basis: ReductionBasis, n: int, time: float = 0.0) -> FieldState:
    """Reconstruct the center component A xi + A* xi* as a real field."""
    st = zero_state(n, time)
    st.tau_hat[basis.k0] = A * basis.xi_vec[0]
    st.u_hat[basis.k0] = A * basis.xi_vec[1]
    return st


@dataclass(frozen=True)
class SecondOrderCorrection:
    """Second-harmonic slave coefficients of the invariant-manifold expansion.

    The quadratic part of the manifold function is
    Phi(A, A*) = i (e^{2 i k0 x} V - e^{-2 i k0 x} V*) with
    V = (phi1_per_a2, phi2_per_a2) * A^2.
    """

    k0: int
    phi1_per_a2: complex
    phi2_per_a2: complex

    def field(self, A: complex, n: int, time: float = 0.0) -> FieldState:
        """Evaluate Phi(A, A*) as a real field on an n-point grid."""
        st = zero_state(n, time)
        k2 = 2 * self.k0
        st.tau_hat[k2] = 1j * self.phi1_per_a2 * A * A
        st.u_hat[k2] = 1j * self.phi2_per_a2 * A * A
        return st


def second_order_correction(cfg: CriticalConfiguration, flux: FluxModel) -> SecondOrderCorrection:
    """Solve the doubled-mode linear system for the quadratic manifold term.

    The denominator 6 a_c k0^4 (21 k0^2 - 5 delta_c) equals twice the
    doubled-mode dispersion expression and is nonzero at any admissible
    configuration.
    """
    k0, a_c, delta_c = cfg.k0, cfg.a_c, cfg.delta_c
    denom = 6.0 * a_c * k0**4 * (21.0 * k0**2 - 5.0 * delta_c)
    if denom == 0.0:
        raise ValueError("doubled-mode denominator vanishes; configuration not admissible")
    return SecondOrderCorrection(
        k0=k0,
        phi1_per_a2=1j * flux.sigma2 / denom,
        phi2_per_a2=complex(8.0 * a_c * k0**3 * flux.sigma2 / denom),
    )


@dataclass(frozen=True)
class AmplitudeEquation:
    """Reduced cubic law dA/dt = a_coef * mu * A + b_coef * |A|^2 A.

    bracket is sigma''(0)^2/(6 a_c k0^4 (21 k0^2 - 5 delta_c)) - sigma'''(0)/2
    and prefactor is 1/((a_c+1) k0^2 - delta_c); b_coef = prefactor * bracket.
    Both signs are kept separately so edge cases with a negative prefactor
    stay visible.
    """

    k0: int
    a_c: float
    delta_c: float
    a_coef: float
    b_coef: float
    bracket: float
    prefactor: float

    def mu(self, nu1: float, nu2: float) -> float:
        """Bifurcation parameter mu(nu) = (delta_c - k0^2) nu1 + a_c nu2."""
        return (self.delta_c - self.k0**2) * nu1 + self.a_c * nu2

    def rhs(self, A: complex, mu: float) -> complex:
        return self.a_coef * mu * A + self.b_coef * (A * A.conjugate()).real * A


def amplitude_equation(cfg: CriticalConfiguration, flux: FluxModel) -> AmplitudeEquation:
    """Closed-form coefficients of the reduced dynamics at cfg."""
    k0, a_c, delta_c = cfg.k0, cfg.a_c, cfg.delta_c
    prefactor = 1.0 / ((a_c + 1.0) * k0**2 - delta_c)
    a_coef = k0**4 * prefactor
    harmonic_denom = 6.0 * a_c * k0**4 * (21.0 * k0**2 - 5.0 * delta_c)
    bracket = flux.sigma2**2 / harmonic_denom - 0.5 * flux.sigma3
    return AmplitudeEquation(
        k0=k0, a_c=a_c, delta_c=delta_c,
        a_coef=a_coef, b_coef=prefactor * bracket,
        bracket=bracket, prefactor=prefactor,
    )


@dataclass(frozen=True)
class BifurcationVerdict:
    """Branch classification of the cubic law.

    kind: 'supercritical' iff b_coef < 0.  The nontrivial branch lives where
    -a_coef*mu/b_coef > 0 and is stable iff b_coef < 0; the trivial state is
    stable iff a_coef*mu < 0.
    """

    kind: str
    bifurcating_side: str            # 'muPositive' or 'muNegative'
    trivial_stability: dict          # side -> 'stable' / 'unstable'
    branch_stability: str
    a_coef: float
    b_coef: float

    def predicted_amplitude(self, mu: float) -> float:
        """Branch radius sqrt(-a_coef*mu/b_coef); rejects the wrong side of mu=0."""
        val = -self.a_coef * mu / self.b_coef
        if val <= 0.0:
            raise ValueError(f"mu = {mu:.6g} is on the non-bifurcating side")
        return math.sqrt(val)


def classify_bifurcation(
    eq: AmplitudeEquation, tol: float = DEFAULT.nonvanishing
) -> BifurcationVerdict:
    if abs(eq.b_coef) <= tol:
        raise DegenerateBifurcationError(
            "cubic coefficient vanishes within tolerance; classification would "
            "need quintic terms (out of scope)"
        )
    kind = "supercritical" if eq.b_coef < 0.0 else "subcritical"
    side = "muPositive" if eq.a_coef / eq.b_coef < 0.0 else "muNegative"
    trivial = {
        "muNegative": "stable" if eq.a_coef > 0.0 else "unstable",
        "muPositive": "unstable" if eq.a_coef > 0.0 else "stable",
    }
    return BifurcationVerdict(
        kind=kind,
        bifurcating_side=side,
        trivial_stability=trivial,
        branch_stability="stable" if eq.b_coef < 0.0 else "unstable",
        a_coef=eq.a_coef,
        b_coef=eq.b_coef,
    )


def predicted_wave(
    eq: AmplitudeEquation,
    cfg: CriticalConfiguration,
    mu: float,
    theta: float,
    n: int = 64,
    correction: Optional[SecondOrderCorrection] = None,
) -> FieldState:
    """Leading-order bifurcated wave profile at parameter mu and phase theta.

    tau(x) = 2 r cos(k0 x + theta), u(x) = 2 a_c k0^3 r sin(k0 x + theta) with
    r = sqrt(-a_coef*mu/b_coef).  Passing a SecondOrderCorrection opts in to
    the second-harmonic term.
    """
    val = -eq.a_coef * mu / eq.b_coef
    if val <= 0.0:
        raise ValueError(f"mu = {mu:.6g} is on the non-bifurcating side")
    r = math.sqrt(val)
    A = r * cmath.exp(1j * theta)
    st = zero_state(n)
    k0 = cfg.k0
    st.tau_hat[k0] = A
    st.u_hat[k0] = -1j * cfg.a_c * k0**3 * A
    if correction is not None:
        harm = correction.field(A, n)
        st.tau_hat += harm.tau_hat
        st.u_hat += harm.u_hat
    return st


def observational_parameters(cfg: CriticalConfiguration, nu: tuple[float, float]) -> tuple[float, float]:
    """Measurable one-parameter bifurcation offsets (Gamma1, Gamma2).

    Gamma1 = k0^4 (k0^2 - delta_c) nu1 tracks variation of a alone (degenerate
    when delta_c = k0^2); Gamma2 = -a_c k0^4 nu2 tracks variation of delta alone.
    """
    nu1, nu2 = nu
    gamma1 = cfg.k0**4 * (cfg.k0**2 - cfg.delta_c) * nu1
    gamma2 = -cfg.a_c * cfg.k0**4 * nu2
    return gamma1, gamma2
