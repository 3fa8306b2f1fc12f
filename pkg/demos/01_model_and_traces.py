#!/usr/bin/env python3
"""Model files, deterministic execution, and per-layer traces.

Builds a tiny dense classifier, round-trips it through the JSON model
format, and shows the activation trace every detector consumes.
"""

import tempfile
from pathlib import Path

import numpy as np

from trustmon import LayerFilter, Network, forward_trace, load_model, save_model, select_layers
from trustmon.network import dense

net = Network(
    layers=(
        dense([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]], [0.0, 0.0, 0.0], "relu"),
        dense([[-1.0, -1.0, 1.0], [1.0, 1.0, -1.0]], [0.0, 0.0], "softmax"),
    ),
    input_dim=2,
    class_count=2,
)

print("A 2-layer classifier separating the plane by the sign of x + y:")
print(f"  layers: relu(3) -> softmax(2), {net.param_count} parameters")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.json"
    save_model(net, path)
    print(f"\nSaved to the versioned JSON model format ({path.stat().st_size} bytes).")
    reloaded = load_model(path)
    save_model(reloaded, Path(tmp) / "again.json")
    identical = path.read_bytes() == (Path(tmp) / "again.json").read_bytes()
    print(f"load -> save -> load is byte-identical: {identical}")

print("\nTracing a few inputs (every layer's post-activation is captured):")
for x in ([2.0, 1.0], [-1.5, -0.5], [0.2, -0.1]):
    trace = forward_trace(reloaded, x)
    hidden = np.round(trace.per_layer[0], 3)
    output = np.round(trace.output, 3)
    print(f"  x={x!s:14} hidden={hidden!s:22} output={output} -> class {trace.predicted_class}")

print("\nLayer selection predicates the detectors share:")
for flags in (LayerFilter(False, False), LayerFilter(True, False), LayerFilter(True, True)):
    chosen = select_layers(reloaded, flags)
    print(
        f"  only_activation={flags.only_activation_layers!s:5} "
        f"only_dense={flags.only_dense_layers!s:5} -> layers {chosen}"
    )
