#!/usr/bin/env python3
"""The activation-rule voting detector: decision trees per layer.

Labels the analysis set pass/fail by comparing model predictions with
ground truth, fits one deterministic CART per selected layer over that
layer's activations, and lets the trees vote at inference time.
"""

from pathlib import Path

from trustmon import Dataset, SplitSpec, load_model, split
from trustmon.metrics import evaluate_notifications
from trustmon.network import predict_classes
from trustmon.prophecy import ProphecyConfig, analyze, infer
from trustmon.synth import make_blobs

ROOT = Path(__file__).resolve().parents[1]

features, labels = make_blobs()
ds = Dataset(features, labels, tuple(f"f{i}" for i in range(4)), 2)
train, val, test = split(ds, SplitSpec(seed=10))
net = load_model(ROOT / "models" / "desk_blobs_mlp.json")

config = ProphecyConfig(
    only_activation_layers=True, only_dense_layers=True, random_state=42, skip_rules=True
)
art = analyze(net, train, config)

print(f"selected layers: {art.selected_layers}")
for layer, tree in art.trees.items():
    print(f"  layer {layer}: depth {tree.depth}, {tree.leaf_count} leaves")

# every root-to-leaf path is a conjunction of axis-aligned constraints
layer = art.selected_layers[-1]
print(f"\nrules mined at layer {layer} (the sigmoid output):")
for constraints, label in art.trees[layer].decision_paths()[:6]:
    clause = " and ".join(f"a{f} {op} {thr:.3f}" for f, op, thr in constraints) or "true"
    print(f"  {clause}  =>  {label}")

verdicts = [infer(art, net, row) for row in test.features]
report = evaluate_notifications(verdicts, predict_classes(net, test.features), test.labels)
cm = report.counts
totals = report.notification_totals
print(f"\ntest set: C/I/U = {totals['correct']}/{totals['incorrect']}/{totals['uncertain']}")
print(f"tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}  MCC={report.mcc:+.3f}")

# the balanced variant downsamples the majority flag before fitting
balanced = analyze(net, train, ProphecyConfig(balanced=True))
verdicts = [infer(balanced, net, row) for row in test.features]
report = evaluate_notifications(verdicts, predict_classes(net, test.features), test.labels)
print(f"balanced-analysis variant: MCC={report.mcc:+.3f}")
