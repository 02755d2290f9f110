"""Single configuration block for every numerical tolerance used by the package.

All defaults are the documented contract; CLI runs may override them from a
JSON file via ``--tol-block``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # admissibility checks
    equality: float = 1e-10        # |expression| <= equality  for conditions that must vanish
    nonvanishing: float = 1e-8     # |expression| >  nonvanishing  for conditions that must not
    # exact-algebra residuals (duality pairings, kernel residuals, correction system)
    algebra: float = 1e-12
    # quadratic-root consistency (Vieta), relative
    vieta_rel: float = 1e-10
    # resolvent resonance guard
    resonance: float = 1e-8
    # matrix-function root-collision switch, relative to eigenvalue magnitude
    root_collision: float = 1e-8
    # DNS contracts
    linear_exact: float = 1e-12    # linear-only stepping vs per-mode exponentials
    symmetry: float = 1e-10        # shift/reflection commutation residuals
    mean_drift: float = 1e-12
    resolution_energy: float = 1e-10  # high-mode energy fraction triggering a warning
    # steady-state machinery
    quasi_steady_rel: float = 1e-8    # relative amplitude change over one detection window
    phase_drift_rad: float = 1e-4     # provisional stationarity budget over phase_window
    phase_window: float = 100.0
    # reduced-dynamics oracles
    ode_agreement: float = 1e-8
    # sweep acceptance bands
    amplitude_rel: float = 0.1
    harmonic_rel: float = 0.1
    exponent_low: float = 0.48
    exponent_high: float = 0.52
    growth_rate_rel: float = 0.05
    # perturbative-regime guard on |mu|
    mu_guard: float = 0.1

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()


def load_tolerances(path: str) -> Tolerances:
    """Read a JSON object of overrides; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f.name for f in dataclasses.fields(Tolerances)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown tolerance keys: {', '.join(unknown)}")
    return Tolerances(**raw)
