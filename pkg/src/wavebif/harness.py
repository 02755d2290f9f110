"""Experiment orchestration: parameter sweeps, symmetry audits, reports.

A sweep drives the direct simulation to a quasi-steady state for each value of
the bifurcation parameter mu (varying delta alone by default, which avoids the
degenerate observational direction when delta_c = k0^2), measures the
saturated mode amplitude, phase drift and second harmonic, and compares them
against the closed-form predictions of the reduced cubic law.  Reports are
written as delimited files plus rendered figures, with full provenance for
byte-reproducible reruns.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dns
from .dns import FieldState, Simulator, StepperConfig, bifurcation_initial_state
from .errors import BlowupError
from .model import FluxModel, flux_to_dict
from .reduction import (
    AmplitudeEquation,
    amplitude_equation,
    classify_bifurcation,
    second_order_correction,
)
from .spectral import CriticalConfiguration
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "Experiment",
    "SweepRow",
    "ComparisonReport",
    "AuditRow",
    "run_bifurcation_sweep",
    "run_symmetry_audit",
    "steady_state_run",
    "probe_transient",
    "emit_diagram",
]


@dataclass(frozen=True)
class Experiment:
    """A sweep specification: configuration, flux, mu values and DNS settings."""

    cfg: CriticalConfiguration
    flux: FluxModel
    mu_list: tuple
    stepper: StepperConfig
    n: int = 64
    rho: float = 1e-3
    theta0: float = 0.0
    noise: float = 0.0
    seed: int = 0
    t_max_factor: float = 60.0   # cap runs at t_max_factor / (a_coef * mu)
    allow_large_mu: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu_list", tuple(float(m) for m in self.mu_list))
        if not self.allow_large_mu:
            for mu in self.mu_list:
                if abs(mu) > DEFAULT.mu_guard:
                    raise ValueError(
                        f"|mu| = {abs(mu)} exceeds the perturbative guard "
                        f"{DEFAULT.mu_guard}; set allow_large_mu to override"
                    )


@dataclass
class SweepRow:
    mu: float
    r_predicted: float
    r_measured: float
    rel_error: float
    phase_drift: float
    second_harmonic_predicted: float
    second_harmonic_measured: float
    converged: bool
    t_final: float
    history: Optional[dict] = field(default=None, repr=False)


@dataclass
class ComparisonReport:
    rows: list
    exponent: float
    equation: AmplitudeEquation
    verdict: object
    provenance: dict


def _delta_for_mu(cfg: CriticalConfiguration, mu: float) -> float:
    # vary delta only: mu = a_c * nu2
    return cfg.delta_c + mu / cfg.a_c


def steady_state_run(
    cfg: CriticalConfiguration,
    flux: FluxModel,
    mu: float,
    stepper: StepperConfig,
    n: int = 64,
    rho: float = 1e-3,
    theta0: float = 0.0,
    noise: float = 0.0,
    seed: Optional[int] = None,
    tol: Tolerances = DEFAULT,
    t_max: Optional[float] = None,
    u_forcing=None,
):
    """Drive the DNS until |tau_hat(k0)| is quasi-steady.

    The detection window is 10/(a_coef*mu), ten linear relaxation times; the
    run converges when the relative amplitude change across one window falls
    below tol.quasi_steady_rel.  Returns (state, history, converged, t_final).
    """
    eq = amplitude_equation(cfg, flux)
    a_mu = eq.a_coef * mu
    if a_mu <= 0.0:
        raise ValueError("steady_state_run needs a_coef*mu > 0 (growing center mode)")
    window = 10.0 / a_mu
    if t_max is None:
        t_max = window * 6.0
    delta = _delta_for_mu(cfg, mu)
    sim = Simulator(n, cfg.a_c, delta, flux, stepper)
    state = bifurcation_initial_state(
        n, cfg.k0, rho=rho, theta=theta0, noise=noise, seed=seed, a_c=cfg.a_c
    )
    stride = max(1, int(round(window / (50.0 * stepper.dt))))
    per_window = max(1, int(round(window / (stride * stepper.dt))))

    history = {k: np.array([]) for k in ("t", "abs_k0", "arg_k0", "abs_2k0", "mean_tau", "mean_u")}
    converged = False
    while state.time < t_max - 1e-9:
        chunk_end = min(state.time + window, t_max)
        state, rec = sim.evolve(state, chunk_end, k0=cfg.k0, stride=stride)
        history = {k: np.concatenate([history[k], rec[k][1:] if history[k].size else rec[k]])
                   for k in history}
        r_now = history["abs_k0"][-1]
        if history["abs_k0"].size > per_window and r_now > 0:
            r_prev = history["abs_k0"][-1 - per_window]
            if abs(r_now - r_prev) < tol.quasi_steady_rel * r_now:
                converged = True
                break
    return state, history, converged, state.time


def measure_phase_drift(
    state: FieldState,
    cfg: CriticalConfiguration,
    flux: FluxModel,
    mu: float,
    stepper: StepperConfig,
    window: Optional[float] = None,
) -> tuple[float, FieldState]:
    """Unwrapped drift of arg tau_hat(k0) over one stationarity window."""
    if window is None:
        window = DEFAULT.phase_window
    delta = _delta_for_mu(cfg, mu)
    sim = Simulator(state.n, cfg.a_c, delta, flux, stepper)
    stride = max(1, int(round(window / (200.0 * stepper.dt))))
    state, rec = sim.evolve(state.copy(), state.time + window, k0=cfg.k0, stride=stride)
    phases = np.unwrap(rec["arg_k0"])
    return float(abs(phases[-1] - phases[0])), state


def run_bifurcation_sweep(exp: Experiment, tol: Tolerances = DEFAULT) -> ComparisonReport:
    """Run the DNS for every mu in the sweep and compare with the reduction.

    Every mu must lie on the bifurcating side of the classified branch.
    Non-converged runs are kept as rows but excluded from the scaling fit.
    """
    if not exp.mu_list:
        raise ValueError("mu_list must be nonempty")
    eq = amplitude_equation(exp.cfg, exp.flux)
    verdict = classify_bifurcation(eq)
    corr = second_order_correction(exp.cfg, exp.flux)
    harmonic_per_r2 = 2.0 * abs(corr.phi1_per_a2)  # cosine amplitude of the 2k0 term

    rows = []
    for i, mu in enumerate(sorted(exp.mu_list)):
        r_pred = verdict.predicted_amplitude(mu)  # raises off-side
        seed = None if exp.noise == 0.0 else exp.seed + i
        state, history, converged, t_final = steady_state_run(
            exp.cfg, exp.flux, mu, exp.stepper, n=exp.n, rho=exp.rho,
            theta0=exp.theta0, noise=exp.noise, seed=seed, tol=tol,
            t_max=exp.t_max_factor / (eq.a_coef * mu),
        )
        r_meas = float(history["abs_k0"][-1])
        harm_meas = 2.0 * float(history["abs_2k0"][-1])
        drift = math.nan
        if converged:
            drift, _ = measure_phase_drift(state, exp.cfg, exp.flux, mu, exp.stepper)
        rows.append(
            SweepRow(
                mu=mu,
                r_predicted=r_pred,
                r_measured=r_meas,
                rel_error=abs(r_meas - r_pred) / r_pred,
                phase_drift=drift,
                second_harmonic_predicted=harmonic_per_r2 * r_pred**2,
                second_harmonic_measured=harm_meas,
                converged=converged,
                t_final=t_final,
                history=history,
            )
        )

    fit_rows = [r for r in rows if r.converged and r.r_measured > 0.0]
    if len(fit_rows) >= 2:
        logs = np.polyfit(
            np.log([abs(r.mu) for r in fit_rows]),
            np.log([r.r_measured for r in fit_rows]),
            1,
        )
        exponent = float(logs[0])
    else:
        exponent = math.nan

    provenance = {
        "seed": exp.seed,
        "n": exp.n,
        "dt": exp.stepper.dt,
        "scheme": exp.stepper.scheme,
        "dealias": exp.stepper.dealias,
        "rho": exp.rho,
        "theta0": exp.theta0,
        "noise": exp.noise,
        "mu_list": list(sorted(exp.mu_list)),
        "config": {
            "k0": exp.cfg.k0, "a_c": exp.cfg.a_c, "delta_c": exp.cfg.delta_c,
            "sigma1": exp.cfg.sigma1, "k_max": exp.cfg.k_max, "gap": exp.cfg.gap,
        },
        "flux": flux_to_dict(exp.flux),
        "tolerances": tol.to_dict(),
        "exponent": exponent,
        "verdict": {
            "kind": verdict.kind,
            "bifurcatingSide": verdict.bifurcating_side,
            "branchStability": verdict.branch_stability,
            # both signs recorded separately: the full cubic coefficient and
            # the bracketed numerator, so a negative prefactor stays visible
            "sign_full_cubic": _sign_str(eq.b_coef),
            "sign_bracket": _sign_str(eq.bracket),
            "sign_prefactor": _sign_str(eq.prefactor),
        },
        "rows": [
            {
                "mu": r.mu,
                "rPredicted": r.r_predicted,
                "rMeasured": r.r_measured,
                "relError": r.rel_error,
                "phaseDrift": r.phase_drift,
                "secondHarmonicPredicted": r.second_harmonic_predicted,
                "secondHarmonicMeasured": r.second_harmonic_measured,
                "converged": r.converged,
                "tFinal": r.t_final,
            }
            for r in rows
        ],
    }
    return ComparisonReport(
        rows=rows, exponent=exponent, equation=eq, verdict=verdict, provenance=provenance
    )


def _sign_str(x: float) -> str:
    return "positive" if x > 0 else ("negative" if x < 0 else "zero")


def probe_transient(
    cfg: CriticalConfiguration,
    flux: FluxModel,
    mu: float,
    r0: float,
    stepper: StepperConfig,
    n: int = 64,
    decay_below: Optional[float] = None,
    escape_above: Optional[float] = None,
    t_max: float = 5000.0,
    theta0: float = 0.0,
) -> tuple[str, float]:
    """Classify a single trajectory as 'decay', 'escape' or 'undecided'.

    Used to bracket the unstable branch in the subcritical regime: initial
    amplitudes below it must decay, above it must escape the neighborhood.
    """
    if decay_below is None:
        decay_below = r0 / 20.0
    if escape_above is None:
        escape_above = 10.0 * r0
    delta = _delta_for_mu(cfg, mu)
    sim = Simulator(n, cfg.a_c, delta, flux, stepper)
    state = bifurcation_initial_state(n, cfg.k0, rho=r0, theta=theta0, a_c=cfg.a_c)
    chunk = max(10.0 * stepper.dt, t_max / 200.0)
    while state.time < t_max:
        try:
            state, rec = sim.evolve(state, min(state.time + chunk, t_max), k0=cfg.k0, stride=1)
        except BlowupError as blow:
            return "escape", blow.time
        below = rec["abs_k0"] < decay_below
        above = rec["abs_k0"] > escape_above
        if below.any() or above.any():
            first_below = rec["t"][below][0] if below.any() else math.inf
            first_above = rec["t"][above][0] if above.any() else math.inf
            if first_below < first_above:
                return "decay", float(first_below)
            return "escape", float(first_above)
    return "undecided", state.time


# ---------------------------------------------------------------------------
# symmetry audit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditRow:
    name: str
    passed: bool
    value: float
    tol: float


def _coeff_distance(a: FieldState, b: FieldState) -> float:
    return float(
        max(np.max(np.abs(a.tau_hat - b.tau_hat)), np.max(np.abs(a.u_hat - b.u_hat)))
    )


def _audit_state(n: int, seed: int = 7) -> FieldState:
    rng = np.random.default_rng(seed)
    st = dns.zero_state(n)
    top = n // 6
    z = rng.standard_normal((2, top)) + 1j * rng.standard_normal((2, top))
    st.tau_hat[1 : top + 1] = 0.01 * z[0]
    st.u_hat[1 : top + 1] = 0.01 * z[1]
    return st


def run_symmetry_audit(exp: Experiment, tol: Tolerances = DEFAULT) -> list[AuditRow]:
    """Execute the shift/reflection commutation checks, the reduced-field
    equivariance identities, the steady phase-offset audit and a negative
    control with a deliberately symmetry-breaking forcing."""
    cfg, flux = exp.cfg, exp.flux
    rows: list[AuditRow] = []
    mu = 0.01 if not exp.mu_list else max(exp.mu_list)
    delta = _delta_for_mu(cfg, mu)
    sim = Simulator(exp.n, cfg.a_c, delta, flux, exp.stepper)
    state = _audit_state(exp.n, seed=exp.seed + 7)
    phi = 2.0 * math.pi / exp.n  # one grid cell

    shifted_then_stepped = sim.step(state.shift(phi))
    stepped_then_shifted = sim.step(state).shift(phi)
    val = _coeff_distance(shifted_then_stepped, stepped_then_shifted)
    rows.append(AuditRow("shift commutes with one step", val <= tol.symmetry, val, tol.symmetry))

    reflected_then_stepped = sim.step(state.reflect())
    stepped_then_reflected = sim.step(state).reflect()
    val = _coeff_distance(reflected_then_stepped, stepped_then_reflected)
    rows.append(AuditRow("reflection commutes with one step", val <= tol.symmetry, val, tol.symmetry))

    # reduced vector field equivariance on sampled amplitudes and angles
    eq = amplitude_equation(cfg, flux)
    worst_rot, worst_conj = 0.0, 0.0
    for amp in (0.03 + 0.02j, -0.07 + 0.01j, 0.1j):
        for phase in (0.3, 1.7, 5.1):
            rot = np.exp(1j * cfg.k0 * phase)
            lhs = eq.rhs(rot * amp, mu)
            rhs = rot * eq.rhs(amp, mu)
            worst_rot = max(worst_rot, abs(lhs - rhs))
        worst_conj = max(worst_conj, abs(eq.rhs(amp.conjugate(), mu) - eq.rhs(amp, mu).conjugate()))
    rows.append(AuditRow("reduced law commutes with phase rotation", worst_rot <= tol.algebra, worst_rot, tol.algebra))
    rows.append(AuditRow("reduced law commutes with conjugation", worst_conj <= tol.algebra, worst_conj, tol.algebra))

    # steady-state phase offset equals k0 * shift
    shift_cells = exp.n // 8
    phi_big = 2.0 * math.pi * shift_cells / exp.n
    base = bifurcation_initial_state(exp.n, cfg.k0, rho=exp.rho, theta=exp.theta0, a_c=cfg.a_c)
    shifted = base.shift(phi_big)
    t_steady = 30.0 / (eq.a_coef * mu)
    final_a, _ = sim.evolve(base, t_steady)
    final_b, _ = sim.evolve(shifted, t_steady)
    phase_a = math.atan2(final_a.tau_hat[cfg.k0].imag, final_a.tau_hat[cfg.k0].real)
    phase_b = math.atan2(final_b.tau_hat[cfg.k0].imag, final_b.tau_hat[cfg.k0].real)
    offset = (phase_b - phase_a - cfg.k0 * phi_big + math.pi) % (2.0 * math.pi) - math.pi
    val = abs(offset)
    rows.append(AuditRow("steady phase offset equals k0*shift", val <= 1e-8, val, 1e-8))

    # negative control: inject (d tau/dx)^2 into the u-slot without the
    # conservative outer derivative; reflection must now fail
    broken = Simulator(
        exp.n, cfg.a_c, delta, flux, exp.stepper,
        u_forcing=lambda tau, dtau: dtau**2,
    )
    reflected_then_stepped = broken.step(state.reflect())
    stepped_then_reflected = broken.step(state).reflect()
    val = _coeff_distance(reflected_then_stepped, stepped_then_reflected)
    rows.append(
        AuditRow("negative control: broken forcing fails reflection", val > 1e3 * tol.symmetry, val, tol.symmetry)
    )
    return rows


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit_diagram(report: ComparisonReport, out_dir: str, figures: bool = True) -> dict:
    """Write branch.csv, comparison.csv and runs.json (plus rendered figures).

    branch.csv tabulates the theory branch on both sides of mu = 0; rerunning
    with identical inputs reproduces every delimited file byte for byte.
    """
    if not report.rows:
        raise ValueError("report is empty; nothing to emit")
    os.makedirs(out_dir, exist_ok=True)
    eq = report.equation
    verdict = report.verdict

    mus = sorted({r.mu for r in report.rows} | {-r.mu for r in report.rows})
    branch_path = os.path.join(out_dir, "branch.csv")
    with open(branch_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mu,rTrivialStability,rBranch,rBranchStability\n")
        for mu in mus:
            a_mu = eq.a_coef * mu
            trivial = "stable" if a_mu < 0 else ("unstable" if a_mu > 0 else "neutral")
            ratio = -a_mu / eq.b_coef
            if ratio > 0.0:
                r_branch = _fmt(math.sqrt(ratio))
                stab = verdict.branch_stability
            else:
                r_branch, stab = "", ""
            fh.write(f"{_fmt(mu)},{trivial},{r_branch},{stab}\n")

    comparison_path = os.path.join(out_dir, "comparison.csv")
    with open(comparison_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "mu,rPredicted,rMeasured,relError,phaseDrift,"
            "secondHarmonicPredicted,secondHarmonicMeasured,converged,tFinal\n"
        )
        for r in report.rows:
            fh.write(
                ",".join(
                    _fmt(v)
                    for v in (
                        r.mu, r.r_predicted, r.r_measured, r.rel_error, r.phase_drift,
                        r.second_harmonic_predicted, r.second_harmonic_measured,
                        r.converged, r.t_final,
                    )
                )
                + "\n"
            )

    runs_path = os.path.join(out_dir, "runs.json")
    with open(runs_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")

    paths = {"branch": branch_path, "comparison": comparison_path, "runs": runs_path}
    if figures:
        from . import figures as fig

        paths["branch_figure"] = fig.render_branch_diagram(
            report, os.path.join(out_dir, "branch.png")
        )
        paths["traces_figure"] = fig.render_traces(
            report, os.path.join(out_dir, "traces.png")
        )
    return paths
