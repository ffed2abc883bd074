"""Budget-aware variable selection via an ensemble of model sequences."""

from .schedule import (
    CostProfile,
    ModelRecord,
    ModelSchedule,
    Source,
    best_under_budget,
    compress,
    dominates,
    merge,
    read_schedule,
    total_cost,
    write_schedule,
)
from .forest import (
    Forest,
    ImportanceProfile,
    accuracy_on,
    fit_forest,
    permutation_importance,
    predict_class,
)
from .lasso import (
    LambdaGrid,
    PathCoefficients,
    active_variables,
    fit_l1_logistic_path,
    make_lambda_grid,
    predict_logistic,
)
from .sequences import (
    EnsembleConfig,
    EnsembleResult,
    ForestParams,
    SequenceRun,
    ensemble_schedule,
    logistic_path_schedule,
    model_seq,
    model_seq_l,
    model_seq_sampled,
    normalized_importance,
    run_ensemble,
)
from .oracle import (
    SolutionSpace,
    coverage_fraction,
    enumerate_subsets,
    exhaustive_schedule,
)
from .synth import (
    MixtureSpec,
    mixture_covariance,
    mixture_means,
    sample_cost_profile,
    sample_mixture,
    toy_cost_profile,
)
from .smoothing import smooth_schedule
from .dataio import load_dataset_csv, split_dataset
from .experiment import ExperimentConfig, emit_outputs, run_experiment

__version__ = "0.1.0"
