"""Distance nearest neighbour classification.

Markov random field models over class labels whose pairwise interaction is a
kernel of inter-point feature distance, with Bayesian inference over the
interaction strength beta and kernel scale sigma, plus a k nearest neighbour
baseline.
"""

from .data import (
    Dataset,
    Split,
    class_proportions,
    load_csv,
    pairwise_distances,
    split_dataset,
    standardize,
    subset,
    validate_split,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    OracleConfig,
    OracleReport,
    load_config_file,
    make_config,
    run_experiment,
    verify_oracle,
)
from .inference import (
    ChainConfig,
    PosteriorTrace,
    Priors,
    ProposalConfig,
    default_proposal,
    exact_beta_grid_posterior,
    exchange_step,
    log_pseudolikelihood,
    median_offdiag_distance,
    run_beta_grid_exchange,
    run_exchange,
    run_pseudo_mh,
)
from .knn import (
    KnnConfig,
    default_k_max,
    knn_classify,
    knn_test_errors,
    loocv_errors,
    loocv_select_k,
)
from .mrf import (
    MrfParams,
    agreement_sum,
    enumerate_log_z,
    enumerate_potentials,
    full_conditional,
    gibbs_sweep,
    log_potential,
    sample_field,
    sample_field_ensemble,
)
from .prediction import (
    PredictiveResult,
    misclassification_rate,
    predict_ergodic,
    predict_point_conditional,
)
from .weights import WeightModel, compute_weights, kernel_value

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ConfigError",
    "Dataset",
    "ExperimentConfig",
    "ExperimentResult",
    "KnnConfig",
    "MrfParams",
    "OracleConfig",
    "OracleReport",
    "PosteriorTrace",
    "PredictiveResult",
    "Priors",
    "ProposalConfig",
    "Split",
    "WeightModel",
    "agreement_sum",
    "class_proportions",
    "compute_weights",
    "default_k_max",
    "default_proposal",
    "enumerate_log_z",
    "enumerate_potentials",
    "exact_beta_grid_posterior",
    "exchange_step",
    "full_conditional",
    "gibbs_sweep",
    "kernel_value",
    "knn_classify",
    "knn_test_errors",
    "load_config_file",
    "load_csv",
    "log_potential",
    "log_pseudolikelihood",
    "loocv_errors",
    "loocv_select_k",
    "make_config",
    "median_offdiag_distance",
    "misclassification_rate",
    "pairwise_distances",
    "predict_ergodic",
    "predict_point_conditional",
    "run_beta_grid_exchange",
    "run_exchange",
    "run_experiment",
    "run_pseudo_mh",
    "sample_field",
    "sample_field_ensemble",
    "split_dataset",
    "standardize",
    "subset",
    "validate_split",
    "verify_oracle",
]
