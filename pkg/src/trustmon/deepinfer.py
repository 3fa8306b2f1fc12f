"""Misclassification detection from backward-propagated data preconditions.

A postcondition on the confident output region is pushed backward through
the dense layers (affine maps inverted exactly, hidden nonlinearities
abstracted as identity) down to an anchor layer, decomposed into one
bound per anchor feature by substituting training means for the other
features, and calibrated on validation data: each feature's threshold is
the fraction of validation instances violating its precondition. At
inference time the strong-evidence violation and satisfaction counts are
compared to produce correct / incorrect / uncertain.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import (
    AnchorOutOfRange,
    ConfigError,
    DimensionError,
    UnsupportedActivation,
)
from .network import (
    NONLINEAR_ACTIVATIONS,
    Network,
    forward_trace,
    layer_activations,
    predict_classes,
)
from .notifications import Verdict

_CONFIG_KEYS = {"condition", "prediction_interval", "anchor_layer"}


@dataclass(frozen=True)
class DeepInferConfig:
    condition: str = ">="
    prediction_interval: float = 0.95
    anchor_layer: int = 0  # documented extension: inner-layer anchoring

    def __post_init__(self):
        if self.condition != ">=":
            raise ConfigError(f'condition must be ">=" in v1, got {self.condition!r}')
        if not 0.0 < self.prediction_interval < 1.0:
            raise ConfigError("prediction_interval must lie strictly in (0, 1)")

    @classmethod
    def from_dict(cls, obj: dict) -> "DeepInferConfig":
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"deepinfer config: unknown keys {sorted(unknown)}")
        return cls(**obj)


@dataclass(frozen=True)
class Halfspace:
    """Linear constraint w . x  relation  c with relation in {ge, le}."""

    weights: np.ndarray
    offset: float
    relation: str = "ge"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        self.weights.flags.writeable = False
        if self.relation not in ("ge", "le"):
            raise ValueError(f"relation must be ge or le, got {self.relation!r}")
        if not np.any(w != 0.0):
            raise ValueError("halfspace weights must not be all zero")

    def satisfied(self, x) -> bool:
        value = float(self.weights @ np.asarray(x, dtype=np.float64))
        return value >= self.offset if self.relation == "ge" else value <= self.offset


@dataclass(frozen=True)
class FeaturePrecondition:
    """Single-feature bound derived from a halfspace by mean substitution.

    A bound of -inf (relation ge) or +inf (relation le) marks a vacuous,
    always-satisfied precondition for a feature with zero weight.
    """

    feature_index: int
    bound: float
    relation: str

    def satisfied(self, value: float) -> bool:
        return value >= self.bound if self.relation == "ge" else value <= self.bound

    @property
    def vacuous(self) -> bool:
        return math.isinf(self.bound)


@dataclass
class DeepInferArtifacts:
    preconditions: list[FeaturePrecondition]
    thresholds: np.ndarray  # per-feature mean validation violation rate in [0, 1]
    feature_means: np.ndarray  # training means used in the decomposition
    anchor_layer: int
    approximate: bool  # True when a hidden nonlinearity was crossed
    config: DeepInferConfig


def _anchor_vectors(net: Network, features: np.ndarray, anchor_layer: int) -> np.ndarray:
    """Each instance's vector at the anchor: raw features for anchor 0,
    otherwise the activations feeding the anchor layer."""
    if anchor_layer == 0:
        return features
    acts = layer_activations(net, features)
    return acts[anchor_layer - 1]


def wp_backward(net: Network, post: Halfspace, anchor_layer: int) -> Halfspace:
    """Propagate a halfspace over the final pre-activation back to the anchor.

    Each dense layer z = Wx + b transforms (w, c) into (W^T w, c - w.b);
    hidden activations are abstracted as identity (exact for linear and
    flatten, a declared approximation for relu/sigmoid/softmax). The
    result constrains the anchor layer's input: the network input when
    anchor_layer is 0, otherwise the previous layer's activations.
    """
    n_layers = len(net.layers)
    if not 0 <= anchor_layer <= n_layers - 1:
        raise AnchorOutOfRange(
            f"anchor_layer {anchor_layer} outside [0, {n_layers - 1}]"
        )
    w = np.asarray(post.weights, dtype=np.float64)
    c = float(post.offset)
    for i in range(n_layers - 1, anchor_layer - 1, -1):
        layer = net.layers[i]
        if layer.kind == "dense":
            if w.shape[0] != layer.out_width:
                raise DimensionError(
                    f"halfspace width {w.shape[0]} does not match layer {i} "
                    f"out_width {layer.out_width}"
                )
            c = c - float(w @ layer.bias)
            w = layer.weights.T @ w
        # flatten is the identity; the identity abstraction of hidden
        # activations leaves (w, c) unchanged as well
    return Halfspace(weights=w, offset=c, relation=post.relation)


def crosses_nonlinearity(net: Network, anchor_layer: int) -> bool:
    """True when wp_backward passes through a hidden nonlinear activation."""
    for i in range(anchor_layer, len(net.layers) - 1):
        layer = net.layers[i]
        if layer.kind == "dense" and layer.activation in NONLINEAR_ACTIVATIONS:
            return True
    return False


def derive_feature_preconditions(hs: Halfspace, means) -> list[FeaturePrecondition]:
    """One bound per feature via mean substitution.

    For feature j with weight w_j != 0 the bound is
    (c - sum_{k != j} w_k mu_k) / w_j, flipping the relation when w_j is
    negative; zero-weight features get a vacuous precondition.
    """
    means = np.asarray(means, dtype=np.float64)
    w = hs.weights
    if means.shape != w.shape:
        raise DimensionError(
            f"means shape {means.shape} does not match weights {w.shape}"
        )
    weighted = w * means
    total = float(weighted.sum())
    flip = {"ge": "le", "le": "ge"}
    out = []
    for j in range(w.shape[0]):
        if w[j] == 0.0:
            bound = -math.inf if hs.relation == "ge" else math.inf
            out.append(FeaturePrecondition(j, bound, hs.relation))
            continue
        bound = (hs.offset - (total - float(weighted[j]))) / float(w[j])
        relation = hs.relation if w[j] > 0 else flip[hs.relation]
        out.append(FeaturePrecondition(j, bound, relation))
    return out


def output_postcondition(net: Network, config: DeepInferConfig, val: Dataset) -> Halfspace:
    """Confident-output postcondition over the final pre-activation.

    The head is inverted analytically so the postcondition stays linear:
    a scalar sigmoid p >= interval becomes z >= logit(interval); a
    softmax head uses the logit-margin form z_k - z_r >= logit(interval)
    where k is the most frequent predicted class on validation data and
    r the most frequent runner-up; a scalar linear head is compared to
    the interval directly.
    """
    head = net.layers[-1]
    if head.kind != "dense":
        raise UnsupportedActivation("final layer must be dense")
    p = config.prediction_interval
    logit = math.log(p / (1.0 - p))
    width = head.out_width

    if head.activation == "sigmoid" and width == 1:
        return Halfspace(np.array([1.0]), logit, "ge")
    if head.activation == "linear" and width == 1:
        return Halfspace(np.array([1.0]), p, "ge")
    if head.activation in ("softmax", "sigmoid"):
        preds = predict_classes(net, val.features)
        counts = np.bincount(preds, minlength=width)
        k = int(np.argmax(counts))
        if head.activation == "sigmoid":
            w = np.zeros(width)
            w[k] = 1.0
            return Halfspace(w, logit, "ge")
        # softmax: margin against the most frequent runner-up
        runner_counts = np.zeros(width)
        for row in val.features[preds == k]:
            z = forward_trace(net, row).per_layer[-1]
            order = np.argsort(-z, kind="stable")
            runner_counts[order[1]] += 1
        if runner_counts.sum() == 0:
            runner_counts = counts.astype(np.float64)
            runner_counts[k] = -1.0
        r = int(np.argmax(runner_counts))
        w = np.zeros(width)
        w[k], w[r] = 1.0, -1.0
        return Halfspace(w, logit, "ge")
    raise UnsupportedActivation(
        f"cannot invert output head {head.activation!r} with width {width}"
    )


def analyze(
    net: Network, train: Dataset, val: Dataset, config: DeepInferConfig
) -> DeepInferArtifacts:
    """Derive preconditions and calibrate per-feature violation thresholds."""
    if len(val) == 0:
        raise ValueError("validation set must be nonempty")
    anchor = config.anchor_layer
    post = output_postcondition(net, config, val)
    hs = wp_backward(net, post, anchor)
    means = _anchor_vectors(net, train.features, anchor).mean(axis=0)
    preconditions = derive_feature_preconditions(hs, means)
    val_vectors = _anchor_vectors(net, val.features, anchor)
    violated = np.zeros((len(val), len(preconditions)))
    for i, vec in enumerate(val_vectors):
        for j, pre in enumerate(preconditions):
            violated[i, j] = 0.0 if pre.satisfied(vec[pre.feature_index]) else 1.0
    thresholds = violated.mean(axis=0)
    return DeepInferArtifacts(
        preconditions=preconditions,
        thresholds=thresholds,
        feature_means=np.asarray(means, dtype=np.float64),
        anchor_layer=anchor,
        approximate=crosses_nonlinearity(net, anchor),
        config=config,
    )


def infer(art: DeepInferArtifacts, x) -> tuple[Verdict, int, int]:
    """Verdict plus raw per-instance violation/satisfaction totals.

    Features whose validation threshold is below 0.5 (normally
    satisfied) carry evidence; a strict majority of strong violations
    over strong satisfactions means incorrect, the reverse correct, and
    a tie is uncertain.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != len(art.preconditions):
        raise DimensionError(
            f"expected vector of width {len(art.preconditions)}, got {x.shape}"
        )
    violations = satisfactions = 0
    strong_viol = strong_sat = 0
    for pre, t in zip(art.preconditions, art.thresholds):
        ok = pre.satisfied(x[pre.feature_index])
        if ok:
            satisfactions += 1
        else:
            violations += 1
        if t < 0.5:
            if ok:
                strong_sat += 1
            else:
                strong_viol += 1
    if strong_viol > strong_sat:
        verdict = Verdict.INCORRECT
    elif strong_sat > strong_viol:
        verdict = Verdict.CORRECT
    else:
        verdict = Verdict.UNCERTAIN
    return verdict, violations, satisfactions


def infer_at_input(art: DeepInferArtifacts, net: Network, x) -> tuple[Verdict, int, int]:
    """Like infer, but takes a network input and maps it to the anchor."""
    if art.anchor_layer == 0:
        return infer(art, x)
    vec = forward_trace(net, x).per_layer[art.anchor_layer - 1]
    return infer(art, vec)


# --- serialization ---------------------------------------------------------

ARTIFACTS_VERSION = 1


def save_artifacts(art: DeepInferArtifacts, path: str | Path) -> None:
    obj = {
        "format_version": ARTIFACTS_VERSION,
        "tool": "deepinfer",
        "preconditions": [
            {
                "feature_index": p.feature_index,
                "bound": p.bound,
                "relation": p.relation,
            }
            for p in art.preconditions
        ],
        "thresholds": art.thresholds.tolist(),
        "feature_means": art.feature_means.tolist(),
        "anchor_layer": art.anchor_layer,
        "approximate": art.approximate,
        "config": asdict(art.config),
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True)


def load_artifacts(path: str | Path) -> DeepInferArtifacts:
    with open(path) as fh:
        obj = json.load(fh)
    if obj.get("format_version") != ARTIFACTS_VERSION or obj.get("tool") != "deepinfer":
        raise ConfigError(f"{path}: not a deepinfer artifacts file")
    return DeepInferArtifacts(
        preconditions=[
            FeaturePrecondition(
                int(p["feature_index"]), float(p["bound"]), p["relation"]
            )
            for p in obj["preconditions"]
        ],
        thresholds=np.asarray(obj["thresholds"], dtype=np.float64),
        feature_means=np.asarray(obj["feature_means"], dtype=np.float64),
        anchor_layer=int(obj["anchor_layer"]),
        approximate=bool(obj["approximate"]),
        config=DeepInferConfig.from_dict(obj["config"]),
    )
