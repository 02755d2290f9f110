"""Figure rendering for sweep reports.

Writes static PNGs next to the delimited outputs: the bifurcation diagram
(theory branch with measured points) and the relaxation traces of each run
against the closed-form radial solution.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .amplitude import truncated_solution
from .errors import BlowupError

__all__ = ["render_branch_diagram", "render_traces"]


def render_branch_diagram(report, path: str) -> str:
    """mu-vs-r branch diagram: solid for stable, dashed for unstable."""
    eq = report.equation
    verdict = report.verdict
    mu_max = max(abs(r.mu) for r in report.rows)
    side = 1.0 if verdict.bifurcating_side == "muPositive" else -1.0
    mu_branch = side * np.linspace(0.0, 1.2 * mu_max, 200)
    r_branch = np.sqrt(np.maximum(-eq.a_coef * mu_branch / eq.b_coef, 0.0))

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    branch_style = "-" if verdict.branch_stability == "stable" else "--"
    ax.plot(mu_branch, r_branch, branch_style, color="C0",
            label=f"branch ({verdict.branch_stability})")
    for sign, mu_lim in ((-1.0, -1.2 * mu_max), (1.0, 1.2 * mu_max)):
        stable = eq.a_coef * sign < 0
        ax.plot([0.0, mu_lim], [0.0, 0.0], "-" if stable else "--", color="C7")
    ax.plot(
        [r.mu for r in report.rows],
        [r.r_measured for r in report.rows],
        "o", color="C3", ms=5, label="measured",
    )
    ax.set_xlabel(r"$\mu$")
    ax.set_ylabel(r"$r = |\hat\tau(k_0)|$")
    ax.set_title(f"{verdict.kind} branch, fitted exponent {report.exponent:.3f}")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_traces(report, path: str) -> str:
    """Relaxation of |tau_hat(k0)| per run, with the radial closed form overlaid."""
    eq = report.equation
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for i, row in enumerate(report.rows):
        if row.history is None or not len(row.history["t"]):
            continue
        t = row.history["t"]
        ax.semilogy(t, row.history["abs_k0"], color=f"C{i % 10}",
                    label=rf"$\mu$ = {row.mu:g}")
        a_mu = eq.a_coef * row.mu
        r0 = row.history["abs_k0"][0]
        if r0 > 0:
            ref = []
            for tt in t:
                try:
                    ref.append(truncated_solution(a_mu, eq.b_coef, r0, float(tt)))
                except BlowupError:
                    ref.append(math.nan)
            ax.semilogy(t, ref, ":", color=f"C{i % 10}", alpha=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$|\hat\tau(k_0)|$")
    ax.set_title("relaxation vs closed-form radial law (dotted)")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
