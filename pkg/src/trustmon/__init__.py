"""White-box misclassification detectors for deployed dense classifiers.

Three detectors share one workflow: an offline analyze phase that turns a
pre-trained model plus labeled data into monitoring artifacts, and a
runtime infer phase that emits a correct / incorrect / uncertain verdict
per input. A common harness runs the phases, profiles them, and scores
notifications against ground truth with misclassification as the
positive class.
"""

from .data import Dataset, PrepRecipe, SplitSpec, load_manifest, prepare, split
from .deepinfer import (
    DeepInferArtifacts,
    DeepInferConfig,
    FeaturePrecondition,
    Halfspace,
    derive_feature_preconditions,
    wp_backward,
)
from .kde import DensityModel, estimate_log_density, fit_density
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    build_confusion,
    compute_metrics,
    evaluate_notifications,
)
from .network import (
    ActivationTrace,
    Layer,
    LayerFilter,
    Network,
    forward_trace,
    load_model,
    save_model,
    select_layers,
)
from .notifications import NotificationRecord, Verdict
from .profiler import EfficiencyRecord, profile
from .prophecy import ProphecyArtifacts, ProphecyConfig
from .selfchecker import SelfCheckerArtifacts, SelfCheckerConfig
from .tree import DecisionTree, TreeParams, fit_tree

__version__ = "0.1.0"

__all__ = [
    "ActivationTrace",
    "ConfusionMatrix",
    "Dataset",
    "DecisionTree",
    "DeepInferArtifacts",
    "DeepInferConfig",
    "DensityModel",
    "EfficiencyRecord",
    "FeaturePrecondition",
    "Halfspace",
    "Layer",
    "LayerFilter",
    "MetricsReport",
    "Network",
    "NotificationRecord",
    "PrepRecipe",
    "ProphecyArtifacts",
    "ProphecyConfig",
    "SelfCheckerArtifacts",
    "SelfCheckerConfig",
    "SplitSpec",
    "TreeParams",
    "Verdict",
    "build_confusion",
    "compute_metrics",
    "derive_feature_preconditions",
    "estimate_log_density",
    "evaluate_notifications",
    "fit_density",
    "fit_tree",
    "forward_trace",
    "load_manifest",
    "load_model",
    "prepare",
    "profile",
    "save_model",
    "select_layers",
    "split",
    "wp_backward",
]
