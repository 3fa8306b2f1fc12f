#!/usr/bin/env python3
"""The data-precondition detector: backward halfspace propagation.

Starts with a confident-output postcondition, pushes it back through the
dense layers to the input, decomposes it into per-feature bounds by mean
substitution, calibrates violation thresholds on validation data, and
classifies test instances from the strong-evidence counts.
"""

from pathlib import Path

import numpy as np

from trustmon import Dataset, SplitSpec, load_model, split
from trustmon.deepinfer import DeepInferConfig, analyze, infer_at_input, output_postcondition, wp_backward
from trustmon.metrics import evaluate_notifications
from trustmon.network import predict_classes
from trustmon.synth import make_blobs

ROOT = Path(__file__).resolve().parents[1]

features, labels = make_blobs()
ds = Dataset(features, labels, tuple(f"f{i}" for i in range(4)), 2)
train, val, test = split(ds, SplitSpec(seed=10))
net = load_model(ROOT / "models" / "desk_blobs_mlp.json")

config = DeepInferConfig(condition=">=", prediction_interval=0.95)
post = output_postcondition(net, config, val)
print(f"postcondition over the final pre-activation: z >= {post.offset:.4f}")
print("  (sigmoid head inverted analytically: p >= 0.95 becomes z >= logit(0.95))")

hs = wp_backward(net, post, anchor_layer=0)
print(f"\nbackward through {len(net.layers)} layers (relu abstracted as identity):")
print(f"  input halfspace weights {np.round(hs.weights, 3)}, offset {hs.offset:.3f}")

art = analyze(net, train, val, config)
print(f"approximate (crossed a hidden nonlinearity): {art.approximate}")
print("\nper-feature preconditions and validation violation thresholds:")
for pre, t in zip(art.preconditions, art.thresholds):
    op = ">=" if pre.relation == "ge" else "<="
    informative = "informative" if t < 0.5 else "uninformative"
    print(f"  x{pre.feature_index} {op} {pre.bound:8.3f}   threshold {t:.3f} ({informative})")

verdict, violations, satisfactions = infer_at_input(art, net, test.features[0])
print(f"\nfirst test instance: {violations} violations, {satisfactions} satisfactions "
      f"-> {verdict.value}")

verdicts = [infer_at_input(art, net, row)[0] for row in test.features]
report = evaluate_notifications(verdicts, predict_classes(net, test.features), test.labels)
cm = report.counts
totals = report.notification_totals
print(f"\ntest set: C/I/U = {totals['correct']}/{totals['incorrect']}/{totals['uncertain']}")
print(f"tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}  MCC={report.mcc:+.3f}")
