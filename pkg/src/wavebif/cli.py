"""Command-line interface.

Subcommands: spectrum, admissible, reduce, predict, amplitude, simulate,
sweep, audit.  Exit codes: 0 success, 1 usage/configuration error,
2 admissibility rejection, 3 numerical failure (blowup, non-convergence,
resonance, degenerate classification).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import __version__
from .amplitude import integrate_radial
from .dns import (
    Simulator,
    StepperConfig,
    bifurcation_initial_state,
    load_state,
    save_state,
)
from .errors import (
    BlowupError,
    DegenerateBifurcationError,
    NonConvergenceError,
    ResonanceError,
)
from .harness import Experiment, emit_diagram, run_bifurcation_sweep, run_symmetry_audit
from .model import FluxModel, flux_from_dict
from .reduction import (
    AmplitudeEquation,
    amplitude_equation,
    build_basis,
    classify_bifurcation,
    predicted_wave,
    second_order_correction,
)
from .spectral import (
    RejectionReport,
    admissibility_conditions,
    check_admissible,
    dispersion_roots,
)
from .tolerances import DEFAULT, Tolerances, load_tolerances

USAGE_ERROR = 1
REJECTED = 2
NUMERICAL_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _add_globals(p: argparse.ArgumentParser, top: bool):
    default = None if top else argparse.SUPPRESS
    p.add_argument("--config", type=str, default=default, help="path to a JSON configuration")
    p.add_argument("--out", type=str, default=default, help="output directory")
    p.add_argument("--seed", type=int, default=default, help="RNG seed (unsigned 64-bit)")
    p.add_argument("--tol-block", type=str, default=default, help="JSON file of tolerance overrides")


def build_parser() -> _Parser:
    parser = _Parser(prog="wavebif", description=__doc__)
    parser.add_argument("--version", action="version", version=f"wavebif {__version__}")
    _add_globals(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="per-mode growth rates as CSV")
    _add_globals(p, top=False)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sigma1", type=float, default=0.0)
    p.add_argument("--kmax", type=int, default=128)

    p = sub.add_parser("admissible", help="certify a critical configuration (JSON verdict)")
    _add_globals(p, top=False)
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--ac", type=float, required=True)
    p.add_argument("--deltac", type=float, required=True)
    p.add_argument("--sigma1", type=float, default=0.0)
    p.add_argument("--kmax", type=int, default=128)

    p = sub.add_parser("reduce", help="basis, projection constant and reduced coefficients")
    _add_globals(p, top=False)

    p = sub.add_parser("predict", help="sampled bifurcated wave profile as CSV")
    _add_globals(p, top=False)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n", type=int, default=256, help="sample count (power of two >= 16)")
    p.add_argument("--second-harmonic", action="store_true", help="include the quadratic correction")

    p = sub.add_parser("amplitude", help="reduced radial trajectory as CSV")
    _add_globals(p, top=False)
    p.add_argument("--aCoef", dest="a_coef", type=float, required=True)
    p.add_argument("--bCoef", dest="b_coef", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--tend", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-3)

    p = sub.add_parser("simulate", help="direct simulation driven by a run configuration")
    _add_globals(p, top=False)
    p.add_argument("--save-state", type=str, default=None, help="write the final state checkpoint")
    p.add_argument("--load-state", type=str, default=None, help="start from a checkpoint")

    p = sub.add_parser("sweep", help="bifurcation sweep with comparison report and figures")
    _add_globals(p, top=False)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--allow-large-mu", action="store_true")

    p = sub.add_parser("audit", help="symmetry and equivariance audit table")
    _add_globals(p, top=False)

    return parser


def _tolerances(args) -> Tolerances:
    if getattr(args, "tol_block", None):
        return load_tolerances(args.tol_block)
    return DEFAULT


def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        raise UsageError("this subcommand requires --config PATH")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _out_stream(args, name: str):
    out = getattr(args, "out", None)
    if out:
        os.makedirs(out, exist_ok=True)
        return open(os.path.join(out, name), "w", encoding="utf-8", newline="\n")
    return sys.stdout


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _complex_pair(z: complex) -> list:
    return [z.real, z.imag]


def _config_objects(raw: dict, tol: Tolerances):
    flux = flux_from_dict(raw.get("flux", {}))
    result = check_admissible(
        int(raw["k0"]), float(raw["ac"]), float(raw["deltac"]), flux,
        k_max=int(raw.get("kmax", 128)),
        eq_tol=tol.equality, nonzero_tol=tol.nonvanishing,
    )
    return result, flux


def _require_admissible(result, flux):
    if isinstance(result, RejectionReport):
        print(json.dumps({"admissible": False, "rejection": str(result)}, indent=2))
        raise SystemExit(REJECTED)
    return result


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> int:
    flux = FluxModel(sigma1=args.sigma1)
    fh = _out_stream(args, "spectrum.csv")
    try:
        fh.write("k,ReLambdaPlus,ImLambdaPlus,ReLambdaMinus,ImLambdaMinus\n")
        for k in range(1, args.kmax + 1):
            d = dispersion_roots(k, args.a, args.delta, flux)
            fh.write(
                f"{k},{_fmt(d.lambda_plus.real)},{_fmt(d.lambda_plus.imag)},"
                f"{_fmt(d.lambda_minus.real)},{_fmt(d.lambda_minus.imag)}\n"
            )
    finally:
        _close(fh)
    return 0


def _cmd_admissible(args) -> int:
    tol = _tolerances(args)
    flux = FluxModel(sigma1=args.sigma1)
    conditions, gap = admissibility_conditions(
        args.k0, args.ac, args.deltac, flux, k_max=args.kmax,
        eq_tol=tol.equality, nonzero_tol=tol.nonvanishing,
    )
    payload = {
        "admissible": all(chk.ok for chk in conditions.values()),
        "k0": args.k0,
        "aC": args.ac,
        "deltaC": args.deltac,
        "sigma1": args.sigma1,
        "kMax": args.kmax,
        "gap": gap,
        "conditions": {
            name: {"ok": chk.ok, "value": chk.value, "witnessMode": chk.witness_k}
            for name, chk in conditions.items()
        },
        # condition b is checked by its spectral meaning: no side-mode
        # eigenvalue on the imaginary axis
        "conditionBMeaning": "no eigenvalue of any mode k != k0 on the imaginary axis",
    }
    if payload["admissible"]:
        code = 0
    else:
        payload["firstViolated"] = next(
            name for name in ("a", "b", "c", "d", "tail") if not conditions[name].ok
        )
        payload["witnessMode"] = conditions[payload["firstViolated"]].witness_k
        code = REJECTED
    fh = _out_stream(args, "verdict.json")
    try:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    finally:
        _close(fh)
    return code


def _cmd_reduce(args) -> int:
    tol = _tolerances(args)
    result, flux = _config_objects(_load_config(args), tol)
    cfg = _require_admissible(result, flux)
    basis = build_basis(cfg)
    eq = amplitude_equation(cfg, flux)
    verdict = classify_bifurcation(eq, tol=tol.nonvanishing)
    payload = {
        "kappa": _complex_pair(basis.kappa),
        "xi": [_complex_pair(z) for z in basis.xi_vec],
        "eta": [_complex_pair(z) for z in basis.eta_vec],
        "aCoef": eq.a_coef,
        "bCoef": eq.b_coef,
        "verdict": {
            "kind": verdict.kind,
            "bifurcatingSide": verdict.bifurcating_side,
            "branchStability": verdict.branch_stability,
            "trivialStability": verdict.trivial_stability,
        },
    }
    fh = _out_stream(args, "reduce.json")
    try:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    finally:
        _close(fh)
    return 0


def _cmd_predict(args) -> int:
    tol = _tolerances(args)
    result, flux = _config_objects(_load_config(args), tol)
    cfg = _require_admissible(result, flux)
    eq = amplitude_equation(cfg, flux)
    correction = second_order_correction(cfg, flux) if args.second_harmonic else None
    state = predicted_wave(eq, cfg, args.mu, args.theta, n=args.n, correction=correction)
    x = state.grid()
    tau, u = state.to_physical()
    fh = _out_stream(args, "profile.csv")
    try:
        fh.write("x,tau,u\n")
        for xi, ti, ui in zip(x, tau, u):
            fh.write(f"{_fmt(xi)},{_fmt(ti)},{_fmt(ui)}\n")
    finally:
        _close(fh)
    return 0


def _cmd_amplitude(args) -> int:
    eq = AmplitudeEquation(
        k0=1, a_c=1.0, delta_c=1.0,
        a_coef=args.a_coef, b_coef=args.b_coef,
        bracket=args.b_coef, prefactor=1.0,
    )
    traj = integrate_radial(eq, args.mu, args.r0, args.tend, args.dt)
    fh = _out_stream(args, "amplitude.csv")
    try:
        fh.write("t,r,theta\n")
        for t, r, th in zip(traj.t, traj.r, traj.theta):
            fh.write(f"{_fmt(t)},{_fmt(r)},{_fmt(th)}\n")
    finally:
        _close(fh)
    return 0


def _cmd_simulate(args) -> int:
    raw = _load_config(args)
    flux = flux_from_dict(raw.get("flux", {}))
    params = raw["params"]
    grid = raw.get("grid", {})
    n = int(grid.get("n", 64))
    stepper_raw = raw.get("stepper", {})
    cfg = StepperConfig(
        dt=float(stepper_raw["dt"]),
        scheme=stepper_raw.get("scheme", "etdrk4"),
        dealias=stepper_raw.get("dealias", "zeroPadDouble"),
    )
    observers = raw.get("observers", {})
    k0 = int(observers.get("k0", 1))
    stride = int(observers.get("stride", 1))
    if args.load_state:
        state = load_state(args.load_state)
    else:
        init = raw.get("initial", {})
        seed = getattr(args, "seed", None)
        if seed is None:
            seed = init.get("seed")
        state = bifurcation_initial_state(
            n,
            int(init.get("k0", k0)),
            rho=float(init.get("rho", 1e-3)),
            theta=float(init.get("theta", 0.0)),
            noise=float(init.get("noise", 0.0)),
            seed=seed,
        )
    sim = Simulator(state.n, float(params["a"]), float(params["delta"]), flux, cfg)
    state, rec = sim.evolve(state, float(raw["tEnd"]), k0=k0, stride=stride)
    fh = _out_stream(args, "simulate.csv")
    try:
        fh.write("t,absTauK0,argTauK0,absTauK2,meanTau,meanU\n")
        for i in range(len(rec["t"])):
            fh.write(
                ",".join(
                    _fmt(rec[key][i])
                    for key in ("t", "abs_k0", "arg_k0", "abs_2k0", "mean_tau", "mean_u")
                )
                + "\n"
            )
    finally:
        _close(fh)
    if args.save_state:
        save_state(state, args.save_state)
    return 0


def _experiment_from_config(raw: dict, args, tol: Tolerances) -> Experiment:
    result, flux = _config_objects(raw, tol)
    cfg = _require_admissible(result, flux)
    stepper_raw = raw.get("stepper", {})
    stepper = StepperConfig(
        dt=float(stepper_raw["dt"]),
        scheme=stepper_raw.get("scheme", "etdrk4"),
        dealias=stepper_raw.get("dealias", "zeroPadDouble"),
    )
    seed = getattr(args, "seed", None)
    if seed is None:
        seed = int(raw.get("seed", 0))
    return Experiment(
        cfg=cfg,
        flux=flux,
        mu_list=tuple(raw.get("muList", [])),
        stepper=stepper,
        n=int(raw.get("grid", {}).get("n", 64)),
        rho=float(raw.get("rho", 1e-3)),
        theta0=float(raw.get("theta0", 0.0)),
        noise=float(raw.get("noise", 0.0)),
        seed=seed,
        t_max_factor=float(raw.get("tMaxFactor", 60.0)),
        allow_large_mu=bool(raw.get("allowLargeMu", False)) or getattr(args, "allow_large_mu", False),
    )


def _cmd_sweep(args) -> int:
    tol = _tolerances(args)
    exp = _experiment_from_config(_load_config(args), args, tol)
    out = getattr(args, "out", None)
    if not out:
        raise UsageError("sweep requires --out DIR")
    report = run_bifurcation_sweep(exp, tol=tol)
    paths = emit_diagram(report, out, figures=not args.no_figures)
    n_conv = sum(1 for r in report.rows if r.converged)
    print(f"sweep: {n_conv}/{len(report.rows)} runs converged, "
          f"fitted exponent {report.exponent:.4f}")
    for name, path in sorted(paths.items()):
        print(f"  {name}: {path}")
    if n_conv < len(report.rows):
        raise NonConvergenceError(
            max(r.t_final for r in report.rows if not r.converged),
            "one or more sweep runs did not reach a quasi-steady state",
        )
    return 0


def _cmd_audit(args) -> int:
    tol = _tolerances(args)
    exp = _experiment_from_config(_load_config(args), args, tol)
    rows = run_symmetry_audit(exp, tol=tol)
    out = getattr(args, "out", None)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "audit.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("name,passed,value,tol\n")
            for r in rows:
                fh.write(f"{r.name},{r.passed},{_fmt(r.value)},{_fmt(r.tol)}\n")
    width = max(len(r.name) for r in rows)
    for r in rows:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag}  {r.name:<{width}}  value={r.value:.3e}  tol={r.tol:.1e}")
    return 0 if all(r.passed for r in rows) else NUMERICAL_FAILURE


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "admissible": _cmd_admissible,
    "reduce": _cmd_reduce,
    "predict": _cmd_predict,
    "amplitude": _cmd_amplitude,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "audit": _cmd_audit,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (BlowupError, NonConvergenceError, ResonanceError, DegenerateBifurcationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE
    except (FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0


if __name__ == "__main__":
    sys.exit(main())
