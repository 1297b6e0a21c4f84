"""Model-reference adaptive control under state-norm and input-magnitude constraints."""

from .adaptation import AdaptationGains, EstimateState, compute_mu, k1_hat_deriv, k_hat_deriv, l_hat_deriv
from .controller import (
    ControlDecision,
    ControllerVariant,
    assumption_margin,
    baseline_control,
    constrained_control,
    g_sup_bound,
    nominal_control,
    reference_modification,
)
from .dynamics import (
    NonlinearitySpec,
    PlantModel,
    ReferenceSignalSpec,
    SineTerm,
    TargetModel,
    eval_nonlinearity,
    eval_reference,
    plant_deriv,
    target_deriv,
)
from .linalg import LyapunovPair, derive_matching_gains, eig_extrema_sym, is_hurwitz, solve_lyapunov
from .scenario import (
    ConstraintSpec,
    ProjectionBounds,
    ScenarioConfig,
    compute_barrier,
    load_bundled,
    load_scenario,
    validate_scenario,
    verify_offline_stability,
    verify_reference_bound,
)
from .simulator import RunSummary, SimulationTrace, run, step, sweep_Mu, sweep_runs
from .traces import read_trace_csv, write_run
from .figures import export_figures

__version__ = "0.1.0"
