"""Per-mode eigenvalue analysis of the linearized wave system.

On the mean-zero periodic space the linearization block-diagonalizes over
Fourier modes k != 0 into the 2x2 matrices

    M_k = [[-a k^4,          i k        ],
           [ i sigma'(0) k,  delta k^2 - k^4]]

whose eigenvalues solve lambda^2 + B(k) lambda + C(k) = 0 with
B = (a+1)k^4 - delta k^2 and C = a k^4 (k^4 - delta k^2) + sigma'(0) k^2.
An admissible critical configuration (k0, a_c, delta_c) places a simple zero
eigenvalue at the modes +-k0 and keeps every other mode uniformly off the
imaginary axis; this module certifies that scenario over a finite mode range
and measures the spectral gap and a numerical resolvent bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ResonanceError
from .model import FluxModel
from .tolerances import DEFAULT

__all__ = [
    "ModeMatrix",
    "DispersionRoots",
    "CriticalConfiguration",
    "RejectionReport",
    "ConditionCheck",
    "SpectralSummary",
    "mode_matrix",
    "dispersion_roots",
    "admissibility_conditions",
    "check_admissible",
    "spectral_summary",
    "resolvent_norm",
    "critical_eigenvalue",
]


@dataclass(frozen=True)
class ModeMatrix:
    k: int
    entries: np.ndarray  # 2x2 complex

    @property
    def trace(self) -> complex:
        return self.entries[0, 0] + self.entries[1, 1]


def mode_matrix(k: int, a: float, delta: float, flux: FluxModel) -> ModeMatrix:
    """The 2x2 Fourier symbol of the linearization at wavenumber k != 0."""
    if k == 0:
        raise ValueError("k = 0 is excluded on the mean-zero space")
    k = int(k)
    m = np.array(
        [
            [-a * k**4, 1j * k],
            [1j * flux.sigma1 * k, delta * k**2 - k**4],
        ],
        dtype=complex,
    )
    return ModeMatrix(k=k, entries=m)


def _quadratic_coefficients(k: int, a: float, delta: float, sigma1: float):
    k2 = float(k) ** 2
    k4 = k2 * k2
    b = (a + 1.0) * k4 - delta * k2
    c = a * k4 * (k4 - delta * k2) + sigma1 * k2
    return b, c


def _stable_roots(b: float, c: float) -> tuple[complex, complex]:
    """Roots of x^2 + b x + c (b, c real), cancellation-safe.

    The larger-magnitude root comes from the sign-matched quadratic formula,
    the other from the product c.  Returned ordered by descending real part,
    ties broken by descending imaginary part.
    """
    disc = b * b - 4.0 * c
    if disc >= 0.0:
        s = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(s, b))
        if q != 0.0:
            r1, r2 = complex(q), complex(c / q)
        else:
            r1 = r2 = complex(0.0)
    else:
        re = -0.5 * b
        im = 0.5 * math.sqrt(-disc)
        r1, r2 = complex(re, im), complex(re, -im)
    if (r1.real, r1.imag) < (r2.real, r2.imag):
        r1, r2 = r2, r1
    return r1, r2


@dataclass(frozen=True)
class DispersionRoots:
    k: int
    B: float
    C: float
    lambda_plus: complex
    lambda_minus: complex

    @property
    def roots(self) -> tuple[complex, complex]:
        return (self.lambda_plus, self.lambda_minus)


def dispersion_roots(k: int, a: float, delta: float, flux: FluxModel) -> DispersionRoots:
    """Both growth rates of mode k; k enters only through k^2, so +-k agree exactly."""
    if k == 0:
        raise ValueError("k = 0 is excluded on the mean-zero space")
    b, c = _quadratic_coefficients(int(k), a, delta, flux.sigma1)
    lp, lm = _stable_roots(b, c)
    return DispersionRoots(k=int(k), B=b, C=c, lambda_plus=lp, lambda_minus=lm)


def critical_eigenvalue(k0: int, a: float, delta: float, flux: FluxModel) -> complex:
    """The root of mode k0 continuing the zero eigenvalue (smallest magnitude;
    the hyperbolic partner stays a spectral gap away for small perturbations)."""
    d = dispersion_roots(k0, a, delta, flux)
    return min(d.roots, key=abs)


@dataclass(frozen=True)
class CriticalConfiguration:
    """A validated admissible triple with its cached spectral evidence.

    gap is the smallest |Re lambda| over every non-center eigenvalue scanned,
    including the hyperbolic partner root at k0 itself.
    """

    k0: int
    a_c: float
    delta_c: float
    sigma1: float
    k_max: int
    gap: float


@dataclass(frozen=True)
class ConditionCheck:
    ok: bool
    value: float
    witness_k: int | None = None


@dataclass(frozen=True)
class RejectionReport:
    """Names the first violated admissibility condition and its witness mode."""

    condition: str
    witness_k: int | None
    value: float
    message: str
    conditions: dict

    def __str__(self):
        return self.message


def admissibility_conditions(
    k0: int,
    a_c: float,
    delta_c: float,
    flux: FluxModel,
    k_max: int = 128,
    eq_tol: float = DEFAULT.equality,
    nonzero_tol: float = DEFAULT.nonvanishing,
) -> tuple[dict, float]:
    """Evaluate every admissibility condition; returns (conditions, gap).

    Conditions (keyed 'a', 'b', 'c', 'd', 'tail'):
      a: the dispersion polynomial at (k0, lambda=0) vanishes,
      b: no eigenvalue of any mode k != k0, 1 <= k <= k_max, lies on the
         imaginary axis (checked as |Re lambda| > eq_tol),
      c: (a_c+1) k0^2 - delta_c != 0 (simple zero eigenvalue),
      d: the doubled-mode denominator sigma'(0) + a_c (2k0)^4 ((2k0)^2 - delta_c)
         does not vanish,
      tail: min |Re lambda| per mode is nondecreasing over the last quarter of
         the scanned range, certifying no accumulation toward the axis.

    gap is min |Re lambda| over all non-center eigenvalues scanned (the
    hyperbolic partner at k0 included).
    """
    if k0 <= 0:
        raise ValueError("k0 must be a positive integer")
    if k_max < 2 * k0:
        raise ValueError(f"k_max must be at least 2*k0 = {2 * k0}, got {k_max}")
    sigma1 = flux.sigma1
    conditions: dict[str, ConditionCheck] = {}

    value_a = a_c * k0**4 * (k0**2 - delta_c) + sigma1
    conditions["a"] = ConditionCheck(ok=abs(value_a) <= eq_tol, value=value_a, witness_k=k0)

    # condition (b): scan stays off the imaginary axis for side modes
    ok_b, witness_b, value_b = True, None, math.inf
    gap = math.inf
    min_abs_re = {}
    for k in range(1, k_max + 1):
        roots = dispersion_roots(k, a_c, delta_c, flux).roots
        if k == k0:
            # the partner of the zero root still contributes to the gap
            hyperbolic = [r for r in roots if abs(r.real) > eq_tol]
            for r in hyperbolic:
                gap = min(gap, abs(r.real))
            continue
        mode_min = min(abs(r.real) for r in roots)
        min_abs_re[k] = mode_min
        gap = min(gap, mode_min)
        if mode_min <= eq_tol and ok_b:
            ok_b, witness_b, value_b = False, k, mode_min
    conditions["b"] = ConditionCheck(ok=ok_b, value=value_b if not ok_b else gap, witness_k=witness_b)

    value_c = (a_c + 1.0) * k0**2 - delta_c
    conditions["c"] = ConditionCheck(ok=abs(value_c) > nonzero_tol, value=value_c, witness_k=k0)

    value_d = sigma1 + a_c * (2 * k0) ** 4 * ((2 * k0) ** 2 - delta_c)
    conditions["d"] = ConditionCheck(ok=abs(value_d) > nonzero_tol, value=value_d, witness_k=2 * k0)

    # tail behavior: real parts must not creep back toward the axis at high k
    start = max(k0 + 1, k_max - max(k_max // 4, 2))
    ok_tail, witness_tail = True, None
    prev = None
    for k in range(start, k_max + 1):
        if k not in min_abs_re:
            continue
        if prev is not None and min_abs_re[k] < prev * (1.0 - 1e-12):
            ok_tail, witness_tail = False, k
            break
        prev = min_abs_re[k]
    conditions["tail"] = ConditionCheck(
        ok=ok_tail, value=min_abs_re.get(witness_tail, 0.0) if witness_tail else 0.0,
        witness_k=witness_tail,
    )
    return conditions, gap


def check_admissible(
    k0: int,
    a_c: float,
    delta_c: float,
    flux: FluxModel,
    k_max: int = 128,
    eq_tol: float = DEFAULT.equality,
    nonzero_tol: float = DEFAULT.nonvanishing,
) -> Union[CriticalConfiguration, RejectionReport]:
    """Certify (k0, a_c, delta_c) against all admissibility conditions.

    Returns a CriticalConfiguration on success, otherwise a RejectionReport
    naming the first violated condition (rejection is a verdict, not a fault).
    """
    conditions, gap = admissibility_conditions(
        k0, a_c, delta_c, flux, k_max, eq_tol, nonzero_tol
    )
    for name in ("a", "b", "c", "d", "tail"):
        chk = conditions[name]
        if not chk.ok:
            return RejectionReport(
                condition=name,
                witness_k=chk.witness_k,
                value=chk.value,
                message=(
                    f"condition ({name}) violated at k = {chk.witness_k}: "
                    f"value {chk.value:.6g}"
                ),
                conditions=conditions,
            )
    return CriticalConfiguration(
        k0=int(k0), a_c=float(a_c), delta_c=float(delta_c),
        sigma1=float(flux.sigma1), k_max=int(k_max), gap=float(gap),
    )


@dataclass(frozen=True)
class SpectralSummary:
    center_modes: tuple  # ((k, lambda), ...) with |Re lambda| <= tol, signed k
    stable_count: int
    unstable_count: int
    gap: float


def spectral_summary(
    config,
    flux: FluxModel,
    k_max: int = 128,
    center_tol: float = DEFAULT.equality,
) -> SpectralSummary:
    """Classify all eigenvalues for 0 < |k| <= k_max into center/stable/unstable.

    config may be a CriticalConfiguration or a raw (a, delta) pair.
    """
    if isinstance(config, CriticalConfiguration):
        a, delta = config.a_c, config.delta_c
    else:
        a, delta = config
    center, stable, unstable = [], 0, 0
    gap = math.inf
    for k in range(1, k_max + 1):
        for root in dispersion_roots(k, a, delta, flux).roots:
            for signed_k in (k, -k):
                lam = root if signed_k > 0 else root.conjugate()
                if abs(lam.real) <= center_tol:
                    center.append((signed_k, lam))
                elif lam.real < 0:
                    stable += 1
                    gap = min(gap, -lam.real)
                else:
                    unstable += 1
                    gap = min(gap, lam.real)
    return SpectralSummary(
        center_modes=tuple(center),
        stable_count=stable,
        unstable_count=unstable,
        gap=gap,
    )


def resolvent_norm(
    omega: float,
    a: float,
    delta: float,
    flux: FluxModel,
    k_max: int = 128,
    resonance_tol: float = DEFAULT.resonance,
) -> float:
    """max over 1 <= k <= k_max of the 2-norm of (i omega - M_k)^{-1}.

    Rejects omega = 0 and any omega for which i*omega comes within
    resonance_tol (relative to max(1, |omega|)) of an eigenvalue.
    """
    if omega == 0.0:
        raise ValueError("omega must be nonzero")
    target = 1j * omega
    guard = resonance_tol * max(1.0, abs(omega))
    worst = 0.0
    for k in range(1, k_max + 1):
        roots = dispersion_roots(k, a, delta, flux).roots
        closest = min(abs(target - r) for r in roots)
        if closest <= guard:
            raise ResonanceError(
                f"i*omega within {closest:.3g} of an eigenvalue at mode k = {k}"
            )
        m = mode_matrix(k, a, delta, flux).entries
        shifted = target * np.eye(2) - m
        inv = np.linalg.inv(shifted)
        worst = max(worst, float(np.linalg.svd(inv, compute_uv=False)[0]))
    return worst
