"""Sparse GP regression with worst-case error bounds and entropy-minimising
receding-horizon planning."""

from .gp import (
    Dataset,
    Posterior,
    RkhsFunction,
    batch_regress,
    lambda_factor,
    posterior_entropy,
    power_function,
    sparse_worst_case_bound,
    worst_case_bound,
)
from .kernels import (
    FullyIndependentConditional,
    InducingSet,
    SquaredExponential,
    SubsetOfRegressors,
    cross_vector,
    gram_matrix,
)
from .planner import (
    GpBeliefPropagator,
    MeasurementEntropyCost,
    PlannerSettings,
    PlanningEnv,
    PosteriorEntropyCost,
    PrunerConfig,
    SearchNode,
    SearchTree,
    TrialRecord,
    is_eps_alg_redundant,
    new_tree,
    plan_and_execute,
    rvi_iterate,
)
from .recursive import (
    BeliefState,
    MeasurementPrediction,
    entropy_cost,
    field_covariance,
    init_belief,
    predict,
    predict_field,
    update,
)
from .sim import (
    Box,
    DoubleGyreConfig,
    ErrorGrid,
    GroundTruth,
    VehicleDynamics,
    double_gyre_step,
    evaluate_error_grid,
    make_ground_truth,
    sample_measurement,
)

__version__ = "0.1.0"
