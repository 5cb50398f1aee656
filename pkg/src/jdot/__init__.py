"""Joint feature/label optimal transport for unsupervised domain adaptation.

Alternates an exact (or entropic) discrete transport solve over a joint
feature/label cost with refitting a kernel hypothesis on the transported
targets or class proportions, for regression and multiclass
classification.
"""

__version__ = "0.1.0"

from .bcd import JdotConfig, JdotTrace, TraceStep, jdot_fit, jdot_objective
from .cost import (
    JointCostConfig,
    assemble_joint_cost,
    feature_distance_matrix,
    heuristic_alpha,
    hinge_label_loss,
    squared_label_loss,
)
from .datasets import (
    LabeledDataset,
    gen_1d_regression_shift,
    gen_rotated_gaussians,
    load_csv,
    save_csv,
    subsample,
)
from .errors import DataError, JdotError, SolverError
from .learners import (
    Predictor,
    TransportedProportions,
    TransportedTargets,
    decision_scores,
    fit_hinge_ova,
    fit_krr_weighted,
    from_json_dict,
    hinge_gradient,
    hinge_objective,
    load_predictor,
    predict,
    rkhs_norm_sq,
    save_predictor,
    to_json_dict,
    transported_proportions,
    transported_targets,
)
from .metrics import accuracy, mse, within_range_accuracy
from .ot import (
    CostMatrix,
    TransportPlan,
    marginal_violation,
    solve_entropic,
    solve_exact,
)
from .rkhs import Kernel, kernel_matrix, median_bandwidth, resolve_kernel

__all__ = [
    "__version__",
    "JdotConfig",
    "JdotTrace",
    "TraceStep",
    "jdot_fit",
    "jdot_objective",
    "JointCostConfig",
    "assemble_joint_cost",
    "feature_distance_matrix",
    "heuristic_alpha",
    "hinge_label_loss",
    "squared_label_loss",
    "LabeledDataset",
    "gen_1d_regression_shift",
    "gen_rotated_gaussians",
    "load_csv",
    "save_csv",
    "subsample",
    "DataError",
    "JdotError",
    "SolverError",
    "Predictor",
    "TransportedProportions",
    "TransportedTargets",
    "decision_scores",
    "fit_hinge_ova",
    "fit_krr_weighted",
    "from_json_dict",
    "hinge_gradient",
    "hinge_objective",
    "load_predictor",
    "predict",
    "rkhs_norm_sq",
    "save_predictor",
    "to_json_dict",
    "transported_proportions",
    "transported_targets",
    "accuracy",
    "mse",
    "within_range_accuracy",
    "CostMatrix",
    "TransportPlan",
    "marginal_violation",
    "solve_entropic",
    "solve_exact",
    "Kernel",
    "kernel_matrix",
    "median_bandwidth",
    "resolve_kernel",
]
