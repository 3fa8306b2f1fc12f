"""Dense feedforward classifier representation and deterministic execution.

Networks are loaded from a versioned JSON file, executed in 64-bit floats,
and expose per-layer post-activation traces plus the layer-selection
predicates the detectors share. Everything here is immutable after
construction, so a single Network can be traced from many threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import (
    DimensionError,
    NonFiniteWeight,
    ParseError,
    ShapeError,
    UnsupportedLayer,
)

DENSE_ACTIVATIONS = ("linear", "relu", "sigmoid", "softmax")
NONLINEAR_ACTIVATIONS = frozenset({"relu", "sigmoid", "softmax"})

FORMAT_VERSION = 1

_MODEL_KEYS = {"format_version", "input_dim", "class_count", "layers"}
_DENSE_KEYS = {"kind", "activation", "weights", "bias"}
_FLATTEN_KEYS = {"kind"}


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Layer:
    """One layer: a dense affine map plus activation, or a pass-through flatten."""

    kind: str  # "dense" | "flatten"
    weights: np.ndarray | None = None  # (out_width, in_width)
    bias: np.ndarray | None = None  # (out_width,)
    activation: str | None = None

    @property
    def in_width(self) -> int | None:
        return None if self.weights is None else self.weights.shape[1]

    @property
    def out_width(self) -> int | None:
        return None if self.weights is None else self.weights.shape[0]

    @property
    def param_count(self) -> int:
        if self.kind != "dense":
            return 0
        return self.weights.size + self.bias.size


@dataclass(frozen=True)
class Network:
    """An ordered stack of layers validated for width consistency."""

    layers: tuple[Layer, ...]
    input_dim: int
    class_count: int

    def __post_init__(self):
        if self.input_dim < 1:
            raise ShapeError("input_dim must be positive")
        if self.class_count < 1:
            raise ShapeError("class_count must be at least 1")
        if not self.layers:
            raise ShapeError("network needs at least one layer")
        width = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.kind == "flatten":
                continue
            if layer.weights.shape[1] != width:
                raise ShapeError(
                    f"layer {i}: expected in_width {width}, got {layer.weights.shape[1]}",
                    layer=i,
                )
            if layer.bias.shape != (layer.weights.shape[0],):
                raise ShapeError(
                    f"layer {i}: bias width {layer.bias.shape[0]} does not match "
                    f"out_width {layer.weights.shape[0]}",
                    layer=i,
                )
            width = layer.weights.shape[0]
        last = self.layers[-1]
        if last.kind == "dense":
            if last.activation not in ("softmax", "sigmoid", "linear"):
                raise ParseError(
                    f"final layer activation must be softmax, sigmoid or linear, "
                    f"got {last.activation!r}"
                )
            if last.activation == "softmax" and last.out_width != self.class_count:
                raise ShapeError(
                    f"softmax output width {last.out_width} != class_count "
                    f"{self.class_count}",
                    layer=len(self.layers) - 1,
                )

    @property
    def output_width(self) -> int:
        width = self.input_dim
        for layer in self.layers:
            if layer.kind == "dense":
                width = layer.out_width
        return width

    def layer_widths(self) -> list[int]:
        """Post-activation width of every layer, in network order."""
        widths = []
        width = self.input_dim
        for layer in self.layers:
            if layer.kind == "dense":
                width = layer.out_width
            widths.append(width)
        return widths

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)


@dataclass(frozen=True)
class ActivationTrace:
    """Post-activation values for every layer, for one input."""

    per_layer: tuple[np.ndarray, ...]
    output: np.ndarray = field(init=False)
    predicted_class: int = field(init=False)

    def __post_init__(self):
        output = self.per_layer[-1]
        object.__setattr__(self, "output", output)
        if output.shape[0] == 1:
            # scalar heads (sigmoid or thresholded regression): class 1 iff >= 0.5
            pred = int(output[0] >= 0.5)
        else:
            pred = int(np.argmax(output))  # ties resolve to the lowest index
        object.__setattr__(self, "predicted_class", pred)


@dataclass(frozen=True)
class LayerFilter:
    """Layer-selection predicate shared by the detector configs.

    With both flags set the selection is the dense layers that carry a
    nonlinear activation (relu/sigmoid/softmax). With both unset, every
    layer is selected.
    """

    only_activation_layers: bool = False
    only_dense_layers: bool = False


def _apply_activation(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return expit(z)
    if kind == "softmax":
        shifted = z - np.max(z)
        e = np.exp(shifted)
        return e / e.sum()
    raise ParseError(f"unknown activation {kind!r}")


def forward_trace(net: Network, x) -> ActivationTrace:
    """Run one input through the network, capturing every layer's output.

    Pure function of (net, x): identical inputs give bit-identical traces.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise DimensionError(
            f"expected input of width {net.input_dim}, got shape {x.shape}"
        )
    per_layer = []
    a = x
    for layer in net.layers:
        if layer.kind == "dense":
            z = layer.weights @ a + layer.bias
            a = _apply_activation(layer.activation, z)
        per_layer.append(_frozen(a))
    return ActivationTrace(per_layer=tuple(per_layer))


def select_layers(net: Network, filt: LayerFilter) -> list[int]:
    """Indices of layers matching the filter, ascending."""
    selected = []
    for i, layer in enumerate(net.layers):
        if filt.only_dense_layers and layer.kind != "dense":
            continue
        if filt.only_activation_layers and layer.activation not in NONLINEAR_ACTIVATIONS:
            continue
        selected.append(i)
    return selected


def _reject_unknown_keys(obj: dict, allowed: set, context: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{context}: unknown keys {sorted(unknown)}")


def _layer_from_dict(obj: dict, index: int) -> Layer:
    kind = obj.get("kind")
    if kind == "dense":
        _reject_unknown_keys(obj, _DENSE_KEYS, f"layer {index}")
        for key in ("activation", "weights", "bias"):
            if key not in obj:
                raise ParseError(f"layer {index}: missing key {key!r}")
        if obj["activation"] not in DENSE_ACTIVATIONS:
            raise ParseError(
                f"layer {index}: unknown activation {obj['activation']!r}"
            )
        try:
            weights = np.array(obj["weights"], dtype=np.float64)
            bias = np.array(obj["bias"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"layer {index}: non-numeric weights or bias") from exc
        if weights.ndim != 2 or bias.ndim != 1:
            raise ShapeError(
                f"layer {index}: weights must be a matrix and bias a vector",
                layer=index,
            )
        if not np.all(np.isfinite(weights)) or not np.all(np.isfinite(bias)):
            raise NonFiniteWeight(f"layer {index}: NaN or Inf in weights/bias")
        return Layer(
            kind="dense",
            weights=_frozen(weights),
            bias=_frozen(bias),
            activation=obj["activation"],
        )
    if kind == "flatten":
        _reject_unknown_keys(obj, _FLATTEN_KEYS, f"layer {index}")
        return Layer(kind="flatten")
    if kind in ("conv", "conv2d", "convolution"):
        raise UnsupportedLayer(
            f"layer {index}: convolution layers are not supported; export the "
            f"dense classification head instead"
        )
    raise ParseError(f"layer {index}: unknown layer kind {kind!r}")


def load_model(path: str | Path) -> Network:
    """Load a network from the versioned JSON model format.

    Loading is bit-deterministic: JSON decimal literals map exactly onto
    64-bit floats, so load -> save -> load round-trips bit-identically.
    """
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: top level must be an object")
    _reject_unknown_keys(obj, _MODEL_KEYS, str(path))
    for key in _MODEL_KEYS:
        if key not in obj:
            raise ParseError(f"{path}: missing key {key!r}")
    if obj["format_version"] != FORMAT_VERSION:
        raise ParseError(
            f"{path}: unsupported format_version {obj['format_version']!r}"
        )
    layers = tuple(
        _layer_from_dict(layer_obj, i) for i, layer_obj in enumerate(obj["layers"])
    )
    return Network(
        layers=layers,
        input_dim=int(obj["input_dim"]),
        class_count=int(obj["class_count"]),
    )


def save_model(net: Network, path: str | Path) -> None:
    """Write a network back to the JSON model format."""
    layers = []
    for layer in net.layers:
        if layer.kind == "dense":
            layers.append(
                {
                    "kind": "dense",
                    "activation": layer.activation,
                    "weights": layer.weights.tolist(),
                    "bias": layer.bias.tolist(),
                }
            )
        else:
            layers.append({"kind": "flatten"})
    obj = {
        "format_version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "class_count": net.class_count,
        "layers": layers,
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True)


def dense(weights, bias, activation: str) -> Layer:
    """Convenience constructor for a dense layer from plain lists or arrays."""
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if not np.all(np.isfinite(weights)) or not np.all(np.isfinite(bias)):
        raise NonFiniteWeight("NaN or Inf in weights/bias")
    if activation not in DENSE_ACTIVATIONS:
        raise ParseError(f"unknown activation {activation!r}")
    return Layer(
        kind="dense", weights=_frozen(weights), bias=_frozen(bias), activation=activation
    )


def layer_activations(net: Network, features: np.ndarray, batch_size: int = 0):
    """Per-layer activation matrices for a batch of inputs.

    Returns a list (one entry per layer) of (n, width) arrays. Rows are
    traced one at a time so results do not depend on batch_size; the
    parameter only bounds how many rows are in flight per chunk.
    """
    n = features.shape[0]
    widths = net.layer_widths()
    outs = [np.empty((n, w), dtype=np.float64) for w in widths]
    step = batch_size if batch_size and batch_size > 0 else n
    for start in range(0, n, max(step, 1)):
        for i in range(start, min(start + step, n)):
            trace = forward_trace(net, features[i])
            for layer_idx, act in enumerate(trace.per_layer):
                outs[layer_idx][i] = act
    return outs


def predict_classes(net: Network, features: np.ndarray) -> np.ndarray:
    """Model predictions for a batch of inputs."""
    return np.array(
        [forward_trace(net, row).predicted_class for row in features], dtype=np.int64
    )
