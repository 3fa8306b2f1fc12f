#!/usr/bin/env python3
"""The KDE layer-agreement detector, end to end on the blob benchmark.

Fits per-(layer, class) Gaussian KDEs over training activations, selects
layers on validation alarm F1, and alarms when a strict majority of the
selected layers infer a class other than the model's prediction.
"""

from pathlib import Path

import numpy as np

from trustmon import Dataset, SplitSpec, load_model, split
from trustmon.kde import estimate_log_density
from trustmon.metrics import evaluate_notifications
from trustmon.network import forward_trace, predict_classes
from trustmon.selfchecker import SelfCheckerConfig, analyze, infer
from trustmon.synth import make_blobs

ROOT = Path(__file__).resolve().parents[1]

features, labels = make_blobs()
ds = Dataset(features, labels, tuple(f"f{i}" for i in range(4)), 2)
train, val, test = split(ds, SplitSpec(seed=10))
net = load_model(ROOT / "models" / "desk_blobs_mlp.json")

config = SelfCheckerConfig(var_threshold=1e-5, only_activation_layers=True, batch_size=128)
art = analyze(net, train, val, config)

print(f"KDE bank: {len(art.kdes)} (layer, class) cells fitted")
print(f"selected layers (greedy validation F1): {art.selected_layers}")
regularized = sum(dm.regularized for dm in art.kdes.values())
print(f"cells that needed covariance regularization: {regularized}")

x = test.features[0]
trace = forward_trace(net, x)
print(f"\nOne test instance, model predicts class {trace.predicted_class}:")
for layer in art.selected_layers:
    scores = [
        estimate_log_density(art.kdes[(layer, c)], trace.per_layer[layer])
        if (layer, c) in art.kdes
        else float("-inf")
        for c in range(2)
    ]
    print(f"  layer {layer}: log-densities {np.round(scores, 2)} -> infers class {int(np.argmax(scores))}")
print(f"  verdict: {infer(art, net, x).value}")

verdicts = [infer(art, net, row) for row in test.features]
report = evaluate_notifications(verdicts, predict_classes(net, test.features), test.labels)
cm = report.counts
print(f"\ntest set: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}  MCC={report.mcc:+.3f}")
