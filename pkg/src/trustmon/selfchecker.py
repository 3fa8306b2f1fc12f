"""Layer-agreement misclassification detector backed by per-class KDEs.

The analyze phase fits one Gaussian KDE per (layer, class) pair over the
training activations of instances whose ground-truth label is that
class, then greedily selects the subset of layers whose agreement vote
maximizes alarm F1 on the validation set. At inference time each
selected layer infers the class with the highest estimated density; an
alarm is raised when a strict majority of selected layers disagree with
the model's prediction. This detector never reports uncertain.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ConfigError, DegenerateData, NoUsableLayers
from .kde import DensityModel, estimate_log_density, fit_density
from .network import (
    LayerFilter,
    Network,
    forward_trace,
    layer_activations,
    select_layers,
)
from .notifications import Verdict

_CONFIG_KEYS = {
    "var_threshold",
    "only_activation_layers",
    "only_dense_layers",
    "batch_size",
    "alpha",
}


@dataclass(frozen=True)
class SelfCheckerConfig:
    var_threshold: float = 1e-5
    only_activation_layers: bool = True
    only_dense_layers: bool = False
    batch_size: int = 128
    alpha: float = 0.1

    @classmethod
    def from_dict(cls, obj: dict) -> "SelfCheckerConfig":
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"selfchecker config: unknown keys {sorted(unknown)}")
        return cls(**obj)


@dataclass
class SelfCheckerArtifacts:
    """KDE bank keyed by (layer_index, class) plus the selected layers."""

    kdes: dict[tuple[int, int], DensityModel]
    selected_layers: list[int]
    class_count: int
    config: SelfCheckerConfig


def _layer_inferred_class(
    kdes: dict, layer: int, class_count: int, activation: np.ndarray
) -> int:
    """Class with the maximum estimated density at this layer.

    Missing (layer, class) cells score -inf; exact ties resolve to the
    lowest class index.
    """
    scores = np.full(class_count, -np.inf)
    for c in range(class_count):
        dm = kdes.get((layer, c))
        if dm is not None:
            scores[c] = estimate_log_density(dm, activation)
    return int(np.argmax(scores))


def _alarm_f1(disagrees: np.ndarray, truth_positive: np.ndarray) -> float:
    """Alarm F1 for a (n, k) matrix of per-layer disagreement flags."""
    k = disagrees.shape[1]
    alarms = disagrees.sum(axis=1) * 2 > k  # strict majority
    tp = int(np.sum(alarms & truth_positive))
    fp = int(np.sum(alarms & ~truth_positive))
    fn = int(np.sum(~alarms & truth_positive))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def analyze(
    net: Network, train: Dataset, val: Dataset, config: SelfCheckerConfig
) -> SelfCheckerArtifacts:
    """Fit the KDE bank on training activations and select layers on validation."""
    filt = LayerFilter(config.only_activation_layers, config.only_dense_layers)
    candidates = select_layers(net, filt)
    if not candidates:
        raise NoUsableLayers("layer filter selected no layers")

    train_acts = layer_activations(net, train.features, config.batch_size)
    kdes: dict[tuple[int, int], DensityModel] = {}
    for layer in candidates:
        for c in range(train.class_count):
            rows = train.labels == c
            if rows.sum() < 2:
                continue
            try:
                kdes[(layer, c)] = fit_density(
                    train_acts[layer][rows], config.var_threshold, config.alpha
                )
            except DegenerateData:
                continue  # cell stays absent and is excluded from voting

    usable = [l for l in candidates if any((l, c) in kdes for c in range(train.class_count))]
    if not usable:
        raise NoUsableLayers("no (layer, class) density could be fitted")

    # Per-layer inferred classes on validation, computed once.
    val_acts = layer_activations(net, val.features, config.batch_size)
    n_val = len(val)
    preds = np.empty(n_val, dtype=np.int64)
    inferred = np.empty((n_val, len(usable)), dtype=np.int64)
    for i in range(n_val):
        trace = forward_trace(net, val.features[i])
        preds[i] = trace.predicted_class
    for j, layer in enumerate(usable):
        for i in range(n_val):
            inferred[i, j] = _layer_inferred_class(
                kdes, layer, val.class_count, val_acts[layer][i]
            )

    truth_positive = preds != val.labels
    disagree = inferred != preds[:, None]  # (n_val, len(usable))

    # Greedy forward selection maximizing alarm F1; the first layer is
    # always taken (tie-break lowest index), later layers only on strict
    # improvement.
    selected: list[int] = []
    selected_cols: list[int] = []
    best = -1.0
    while True:
        pick = None
        pick_f1 = best
        for j, layer in enumerate(usable):
            if layer in selected:
                continue
            cols = selected_cols + [j]
            f1 = _alarm_f1(disagree[:, cols], truth_positive)
            if f1 > pick_f1:
                pick, pick_f1 = j, f1
        if pick is None:
            break
        selected.append(usable[pick])
        selected_cols.append(pick)
        best = pick_f1

    selected.sort()
    return SelfCheckerArtifacts(
        kdes=kdes,
        selected_layers=selected,
        class_count=train.class_count,
        config=config,
    )


def infer(art: SelfCheckerArtifacts, net: Network, x) -> Verdict:
    """Alarm iff a strict majority of selected layers infer a class
    different from the model's prediction; exactly half is no alarm."""
    trace = forward_trace(net, x)
    pred = trace.predicted_class
    disagreeing = 0
    for layer in art.selected_layers:
        inferred = _layer_inferred_class(
            art.kdes, layer, art.class_count, trace.per_layer[layer]
        )
        if inferred != pred:
            disagreeing += 1
    if disagreeing * 2 > len(art.selected_layers):
        return Verdict.INCORRECT
    return Verdict.CORRECT


# --- serialization ---------------------------------------------------------

ARTIFACTS_VERSION = 1


def _density_to_dict(dm: DensityModel) -> dict:
    return {
        "samples": dm.samples.tolist(),
        "kept_dims": dm.kept_dims.tolist(),
        "original_dim": dm.original_dim,
        "bandwidth_factor": dm.bandwidth_factor,
        "cholesky": dm.cholesky.tolist(),
        "log_norm_const": dm.log_norm_const,
        "regularized": dm.regularized,
    }


def _density_from_dict(obj: dict) -> DensityModel:
    def frozen(a, dtype):
        out = np.array(a, dtype=dtype)
        out.flags.writeable = False
        return out

    return DensityModel(
        samples=frozen(obj["samples"], np.float64),
        kept_dims=frozen(obj["kept_dims"], np.int64),
        original_dim=int(obj["original_dim"]),
        bandwidth_factor=float(obj["bandwidth_factor"]),
        cholesky=frozen(obj["cholesky"], np.float64),
        log_norm_const=float(obj["log_norm_const"]),
        regularized=bool(obj["regularized"]),
    )


def save_artifacts(art: SelfCheckerArtifacts, path: str | Path) -> None:
    obj = {
        "format_version": ARTIFACTS_VERSION,
        "tool": "selfchecker",
        "selected_layers": art.selected_layers,
        "class_count": art.class_count,
        "config": asdict(art.config),
        "kdes": {
            f"{layer}:{cls}": _density_to_dict(dm)
            for (layer, cls), dm in sorted(art.kdes.items())
        },
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True)


def load_artifacts(path: str | Path) -> SelfCheckerArtifacts:
    with open(path) as fh:
        obj = json.load(fh)
    if obj.get("format_version") != ARTIFACTS_VERSION or obj.get("tool") != "selfchecker":
        raise ConfigError(f"{path}: not a selfchecker artifacts file")
    kdes = {}
    for key, dm_obj in obj["kdes"].items():
        layer, cls = key.split(":")
        kdes[(int(layer), int(cls))] = _density_from_dict(dm_obj)
    return SelfCheckerArtifacts(
        kdes=kdes,
        selected_layers=[int(l) for l in obj["selected_layers"]],
        class_count=int(obj["class_count"]),
        config=SelfCheckerConfig.from_dict(obj["config"]),
    )
