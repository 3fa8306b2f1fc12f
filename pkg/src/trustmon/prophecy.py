"""Activation-rule voting detector built on per-layer decision trees.

The analyze phase labels each analysis instance pass or fail by whether
the model's prediction matches its ground-truth label, then fits one
decision tree per selected layer over that layer's post-activation
values. At inference time the trees vote; a strict majority decides and
an exact tie is reported as uncertain. With skip_rules the tree is
invoked directly; otherwise the mined rule set is evaluated, which must
agree with direct invocation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ConfigError, EmptyTrainingSet, NoUsableLayers
from .network import (
    LayerFilter,
    Network,
    forward_trace,
    layer_activations,
    select_layers,
)
from .notifications import Verdict
from .tree import DecisionTree, TreeParams, fit_tree

_CONFIG_KEYS = {
    "only_activation_layers",
    "only_dense_layers",
    "random_state",
    "skip_rules",
    "max_depth",
    "min_samples_leaf",
    "balanced",
}


@dataclass(frozen=True)
class ProphecyConfig:
    only_activation_layers: bool = True
    only_dense_layers: bool = True
    random_state: int = 42
    skip_rules: bool = True
    max_depth: int | None = None
    min_samples_leaf: int = 5
    balanced: bool = False

    @classmethod
    def from_dict(cls, obj: dict) -> "ProphecyConfig":
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"prophecy config: unknown keys {sorted(unknown)}")
        return cls(**obj)

    def tree_params(self) -> TreeParams:
        return TreeParams(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            random_state=self.random_state,
        )


@dataclass
class ProphecyArtifacts:
    trees: dict[int, DecisionTree]  # layer index -> tree over that layer's activations
    selected_layers: list[int]
    skip_rules: bool
    balanced: bool
    config: ProphecyConfig


def balanced_subsample(passed: np.ndarray, random_state: int) -> np.ndarray:
    """Row indices after downsampling the majority flag to the minority count."""
    pass_rows = np.flatnonzero(passed)
    fail_rows = np.flatnonzero(~passed)
    minority = min(pass_rows.size, fail_rows.size)
    if minority == 0:
        raise EmptyTrainingSet("balanced subsample is empty: one flag has no rows")
    rng = np.random.default_rng(random_state)
    keep = np.concatenate(
        [
            rng.choice(fail_rows, size=minority, replace=False),
            rng.choice(pass_rows, size=minority, replace=False),
        ]
    )
    return np.sort(keep)


def analyze(net: Network, analysis: Dataset, config: ProphecyConfig) -> ProphecyArtifacts:
    """Fit one pass/fail tree per selected layer on the analysis set."""
    filt = LayerFilter(config.only_activation_layers, config.only_dense_layers)
    layers = select_layers(net, filt)
    if not layers:
        raise NoUsableLayers("layer filter selected no layers")
    if len(analysis) == 0:
        raise EmptyTrainingSet("analysis set is empty")

    preds = np.array(
        [forward_trace(net, row).predicted_class for row in analysis.features]
    )
    passed = preds == analysis.labels
    rows = np.arange(len(analysis))
    if config.balanced:
        rows = balanced_subsample(passed, config.random_state)

    acts = layer_activations(net, analysis.features)
    params = config.tree_params()
    trees = {
        layer: fit_tree(acts[layer][rows], passed[rows], params) for layer in layers
    }
    return ProphecyArtifacts(
        trees=trees,
        selected_layers=list(layers),
        skip_rules=config.skip_rules,
        balanced=config.balanced,
        config=config,
    )


def infer(art: ProphecyArtifacts, net: Network, x) -> Verdict:
    """Majority vote of the per-layer trees; an exact tie is uncertain."""
    trace = forward_trace(net, x)
    pass_votes = fail_votes = 0
    for layer in art.selected_layers:
        tree = art.trees[layer]
        activation = trace.per_layer[layer]
        if art.skip_rules:
            vote_pass = tree.predict(activation)
        else:
            vote_pass = tree.predict_by_rules(activation)
        if vote_pass:
            pass_votes += 1
        else:
            fail_votes += 1
    if fail_votes > pass_votes:
        return Verdict.INCORRECT
    if pass_votes > fail_votes:
        return Verdict.CORRECT
    return Verdict.UNCERTAIN


# --- serialization ---------------------------------------------------------

ARTIFACTS_VERSION = 1


def save_artifacts(art: ProphecyArtifacts, path: str | Path) -> None:
    obj = {
        "format_version": ARTIFACTS_VERSION,
        "tool": "prophecy",
        "selected_layers": art.selected_layers,
        "skip_rules": art.skip_rules,
        "balanced": art.balanced,
        "config": asdict(art.config),
        "trees": {str(layer): tree.to_dict() for layer, tree in sorted(art.trees.items())},
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True)


def load_artifacts(path: str | Path) -> ProphecyArtifacts:
    with open(path) as fh:
        obj = json.load(fh)
    if obj.get("format_version") != ARTIFACTS_VERSION or obj.get("tool") != "prophecy":
        raise ConfigError(f"{path}: not a prophecy artifacts file")
    return ProphecyArtifacts(
        trees={int(k): DecisionTree.from_dict(v) for k, v in obj["trees"].items()},
        selected_layers=[int(l) for l in obj["selected_layers"]],
        skip_rules=bool(obj["skip_rules"]),
        balanced=bool(obj["balanced"]),
        config=ProphecyConfig.from_dict(obj["config"]),
    )
