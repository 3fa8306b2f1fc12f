"""Deterministic synthetic tabular benchmark: two Gaussian blobs with
feature-independent label noise.

The blobs overlap slightly, so a near-optimal classifier errs both near
the decision boundary (detectable from activations) and on the noisy
labels (irreducible). A seed pins every draw, making repeated
generations byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

FEATURE_COUNT = 4
BLOB_OFFSET = 1.1  # per-dimension distance of each blob center from the origin
CLASS_ONE_PRIOR = 0.6
LABEL_NOISE = 0.15


def make_blobs(
    n: int = 2000,
    noise: float = LABEL_NOISE,
    seed: int = 10,
    d: int = FEATURE_COUNT,
    offset: float = BLOB_OFFSET,
    class_one_prior: float = CLASS_ONE_PRIOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Features (n, d) and binary labels with a `noise` fraction flipped."""
    rng = np.random.default_rng(seed)
    blob = (rng.random(n) < class_one_prior).astype(np.int64)
    centers = np.where(blob[:, None] == 1, offset, -offset) * np.ones((n, d))
    features = rng.standard_normal((n, d)) + centers
    flips = rng.random(n) < noise
    labels = np.where(flips, 1 - blob, blob)
    return features, labels.astype(np.int64)


def write_benchmark(
    directory: str | Path,
    name: str = "blobs",
    n: int = 2000,
    noise: float = LABEL_NOISE,
    seed: int = 10,
) -> Path:
    """Write the blob CSV plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    features, labels = make_blobs(n=n, noise=noise, seed=seed)
    frame = pd.DataFrame(
        {f"f{i}": features[:, i] for i in range(features.shape[1])}
    )
    frame["label"] = labels
    csv_path = directory / f"{name}.csv"
    frame.to_csv(csv_path, index=False)
    manifest = {
        "name": name,
        "csv": csv_path.name,
        "label_column": "label",
        "recipe": {"scale": "none"},
        "split": {"train": 0.8, "val": 0.1, "test": 0.1, "seed": 10},
    }
    manifest_path = directory / f"{name}.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest_path
