"""Flexural waves in a free-free beam on an elastic-breakable adhesive foundation."""
from .analysis import (
    AdhesionVerdict,
    AffineState,
    Classification,
    LinearizationReport,
    adhesion_check,
    adhesion_threshold,
    kink_probe,
    linearization_experiment,
    long_time_probe,
    regularization_study,
    verify_no_detachment,
)
from .beam_operator import BeamParams, BeamState, Grid, apply_biharmonic, operator_matrix
from .dynamics import (
    EnergyBreakdown,
    NumericalFailure,
    StabilityError,
    Trajectory,
    energy,
    simulate,
    stability_limit,
    step,
)
from .oracles import (
    ClosedFormSolution,
    ExampleId,
    eval_closed_form,
    free_free_frequencies,
    uniform_ode_oracle,
)
from .potential import PotentialSpec, eval_phi, eval_phi_prime, select_h, smoothing_residual

__version__ = "0.1.0"
