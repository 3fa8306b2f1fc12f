#!/usr/bin/env python3
"""Train the checked-in desk-benchmark model (models/desk_blobs_mlp.json).

Fits a small relu MLP with scikit-learn on the train split of the
deterministic blob benchmark and exports it to the package's JSON model
format. Run from the repository root:

    python scripts/train_desk_model.py

scikit-learn is a development-time dependency only; the package itself
never trains.
"""

import json
import sys
from pathlib import Path

import numpy as np
from sklearn.neural_network import MLPClassifier

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from trustmon.data import Dataset, SplitSpec, split
from trustmon.network import Network, dense, load_model, predict_classes, save_model
from trustmon.synth import make_blobs

OUT = Path(__file__).resolve().parents[1] / "models" / "desk_blobs_mlp.json"


def main() -> None:
    features, labels = make_blobs(n=2000, noise=0.15, seed=10)
    ds = Dataset(features, labels, tuple(f"f{i}" for i in range(4)), 2)
    train, val, test = split(ds, SplitSpec(seed=10))

    # The fixture model carries a deliberate sampling-bias defect:
    # class-1 rows are tripled during training, shifting the learned
    # boundary into class-0 territory. The resulting error-dense slab is
    # what gives the detectors a systematic failure region to find, on
    # top of the irreducible label noise.
    ones = np.flatnonzero(train.labels == 1)
    rows = np.concatenate([np.arange(len(train)), ones, ones])

    clf = MLPClassifier(
        hidden_layer_sizes=(16, 8),
        activation="relu",
        solver="adam",
        alpha=1e-3,
        max_iter=2000,
        random_state=7,
    )
    clf.fit(train.features[rows], train.labels[rows])

    layers = []
    for i, (W, b) in enumerate(zip(clf.coefs_, clf.intercepts_)):
        last = i == len(clf.coefs_) - 1
        activation = "sigmoid" if last else "relu"
        layers.append(dense(W.T, b, activation))
    net = Network(layers=tuple(layers), input_dim=4, class_count=2)

    OUT.parent.mkdir(parents=True, exist_ok=True)
    save_model(net, OUT)
    reloaded = load_model(OUT)

    for name, part in (("train", train), ("val", val), ("test", test)):
        preds = predict_classes(reloaded, part.features)
        acc = float(np.mean(preds == part.labels))
        print(f"{name} accuracy: {acc:.4f} ({len(part)} rows)")
    print(f"wrote {OUT} ({net.param_count} parameters)")


if __name__ == "__main__":
    main()
