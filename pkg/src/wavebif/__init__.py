"""Bifurcation analysis of a viscous wave system on a periodic domain.

The package covers the full pipeline: admissibility checking of critical
parameter configurations via the per-mode dispersion relation, reduction of
the dynamics near criticality to a cubic amplitude equation with explicit
real coefficients, classification of the resulting equivariant branch, and a
Fourier pseudospectral direct simulator that validates the predictions.
"""

__version__ = "0.1.0"

from .amplitude import (
    AmplitudeState,
    RadialTrajectory,
    equilibria,
    integrate_radial,
    truncated_solution,
)
from .dns import (
    FieldState,
    Simulator,
    StepperConfig,
    bifurcation_initial_state,
    evolve,
    linear_propagator,
    load_state,
    nonlinear_term,
    save_state,
    step,
)
from .errors import (
    BlowupError,
    DegenerateBifurcationError,
    NonConvergenceError,
    ResonanceError,
)
from .harness import (
    ComparisonReport,
    Experiment,
    emit_diagram,
    run_bifurcation_sweep,
    run_symmetry_audit,
)
from .model import (
    FluxModel,
    NormalizedParameters,
    PhysicalParameters,
    PolynomialTail,
    flux_eval,
    normalize_domain,
)
from .reduction import (
    AmplitudeEquation,
    BifurcationVerdict,
    ReductionBasis,
    SecondOrderCorrection,
    amplitude_equation,
    build_basis,
    center_field,
    classify_bifurcation,
    observational_parameters,
    predicted_wave,
    project_center,
    second_order_correction,
)
from .spectral import (
    CriticalConfiguration,
    DispersionRoots,
    ModeMatrix,
    RejectionReport,
    SpectralSummary,
    check_admissible,
    dispersion_roots,
    mode_matrix,
    resolvent_norm,
    spectral_summary,
)
from .tolerances import DEFAULT, Tolerances
