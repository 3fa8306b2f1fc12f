"""Tabular CSV loading, preprocessing recipes, and deterministic splits.

The recipes mirror the usual Kaggle-notebook preparation flow: optional
ordinal / one-hot encoding of categoricals, min-max scaling fit on the
full pre-split data (a known leakage caveat, kept to match the upstream
replication scripts), optional class re-balancing by downsampling, and a
seeded shuffle split.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    EmptyClass,
    ManifestError,
    MissingColumn,
    NonNumericValue,
    TooFewRows,
)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    feature_names: tuple[str, ...]
    class_count: int

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        self.features.flags.writeable = False
        self.labels.flags.writeable = False

    def __len__(self) -> int:
        return self.features.shape[0]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            features=self.features[indices],
            labels=self.labels[indices],
            feature_names=self.feature_names,
            class_count=self.class_count,
        )


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    seed: int = 10

    def __post_init__(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {total}")


@dataclass(frozen=True)
class PrepRecipe:
    scale: str = "none"  # "none" | "minmax"
    one_hot_columns: tuple[str, ...] = ()
    ordinal_columns: tuple[str, ...] = ()
    drop_columns: tuple[str, ...] = ()
    balance_classes: bool = False
    label_threshold: float | None = None
    seed: int = 10

    def __post_init__(self):
        if self.scale not in ("none", "minmax"):
            raise ValueError(f"unknown scale {self.scale!r}")
        object.__setattr__(self, "one_hot_columns", tuple(self.one_hot_columns))
        object.__setattr__(self, "ordinal_columns", tuple(self.ordinal_columns))
        object.__setattr__(self, "drop_columns", tuple(self.drop_columns))


# --- scaling --------------------------------------------------------------

def minmax_fit(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (min, max) over the fitting data."""
    return features.min(axis=0), features.max(axis=0)


def minmax_apply(features: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    out = np.zeros_like(features, dtype=np.float64)
    nonzero = span != 0
    out[:, nonzero] = (features[:, nonzero] - lo[nonzero]) / span[nonzero]
    return out


def minmax_invert(scaled: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    out = np.array(scaled, dtype=np.float64)
    nonzero = span != 0
    out[:, nonzero] = scaled[:, nonzero] * span[nonzero] + lo[nonzero]
    out[:, ~nonzero] = lo[~nonzero]
    return out


# --- encoding -------------------------------------------------------------

def one_hot_encode(frame: pd.DataFrame, column: str) -> pd.DataFrame:
    """Expand `column` into one binary column per distinct non-null value.

    Column names follow the pandas get_dummies convention (col_value);
    rows with a null value get all zeros in the group.
    """
    values = sorted(v for v in frame[column].unique() if not pd.isna(v))
    out = frame.drop(columns=[column])
    for v in values:
        out[f"{column}_{v}"] = (frame[column] == v).astype(np.float64)
    return out


def ordinal_encode(frame: pd.DataFrame, column: str) -> pd.DataFrame:
    """Replace `column` with integer codes assigned by sorted unique value."""
    if frame[column].isna().any():
        raise NonNumericValue(f"column {column!r} has missing values")
    values = sorted(frame[column].unique())
    codes = {v: float(i) for i, v in enumerate(values)}
    out = frame.copy()
    out[column] = frame[column].map(codes).astype(np.float64)
    return out


def _encode_labels(series: pd.Series, threshold: float | None) -> tuple[np.ndarray, int]:
    if threshold is not None:
        if not pd.api.types.is_numeric_dtype(series):
            raise NonNumericValue(
                f"label column {series.name!r} must be numeric to threshold"
            )
        return (series.to_numpy(dtype=np.float64) > threshold).astype(np.int64), 2
    values = sorted(series.dropna().unique())
    if series.isna().any():
        raise NonNumericValue(f"label column {series.name!r} has missing values")
    codes = {v: i for i, v in enumerate(values)}
    labels = series.map(codes).to_numpy(dtype=np.int64)
    return labels, len(values)


def _balance(labels: np.ndarray, class_count: int, seed: int) -> np.ndarray:
    """Indices after downsampling every class to the minority-class count."""
    per_class = [np.flatnonzero(labels == c) for c in range(class_count)]
    for c, idx in enumerate(per_class):
        if idx.size == 0:
            raise EmptyClass(f"cannot balance: class {c} has no rows")
    minority = min(idx.size for idx in per_class)
    rng = np.random.default_rng(seed)
    chosen = [rng.choice(idx, size=minority, replace=False) for idx in per_class]
    return np.sort(np.concatenate(chosen))


def prepare(raw_csv: str | Path, recipe: PrepRecipe, label_column: str) -> Dataset:
    """Load a CSV and apply the full preparation recipe.

    Order of operations: raw drops, ordinal encoding, one-hot encoding,
    encoded drops, label encoding, class balancing, min-max scaling
    (fit on everything that remains, i.e. the full pre-split data).
    """
    frame = pd.read_csv(raw_csv)
    if label_column not in frame.columns:
        raise MissingColumn(f"label column {label_column!r} not in CSV")
    for col in recipe.one_hot_columns + recipe.ordinal_columns:
        if col not in frame.columns:
            raise MissingColumn(f"column {col!r} not in CSV")

    label_series = frame[label_column]
    frame = frame.drop(columns=[label_column])

    matched_drops = set()
    raw_drops = [c for c in recipe.drop_columns if c in frame.columns]
    frame = frame.drop(columns=raw_drops)
    matched_drops.update(raw_drops)

    for col in recipe.ordinal_columns:
        frame = ordinal_encode(frame, col)
    for col in recipe.one_hot_columns:
        frame = one_hot_encode(frame, col)

    encoded_drops = [c for c in recipe.drop_columns if c in frame.columns]
    frame = frame.drop(columns=encoded_drops)
    matched_drops.update(encoded_drops)
    unmatched = [c for c in recipe.drop_columns if c not in matched_drops]
    if unmatched:
        raise MissingColumn(f"drop_columns not found: {unmatched}")

    for col in frame.columns:
        if not pd.api.types.is_numeric_dtype(frame[col]):
            raise NonNumericValue(f"column {col!r} is non-numeric after encoding")
        if frame[col].isna().any():
            raise NonNumericValue(f"column {col!r} has missing values")

    labels, class_count = _encode_labels(label_series, recipe.label_threshold)
    features = frame.to_numpy(dtype=np.float64)

    if recipe.balance_classes:
        keep = _balance(labels, class_count, recipe.seed)
        features = features[keep]
        labels = labels[keep]

    if recipe.scale == "minmax":
        lo, hi = minmax_fit(features)
        features = minmax_apply(features, lo, hi)

    return Dataset(
        features=features,
        labels=labels,
        feature_names=tuple(frame.columns),
        class_count=class_count,
    )


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded shuffle split into (train, val, test).

    Validation and test take ceil(n * frac) rows each, train takes the
    remainder; this reproduces the row counts of the reference benchmark
    preparations (e.g. 768 -> 614/77/77). Same seed, same split.
    """
    n = len(ds)
    if n < 10:
        raise TooFewRows(f"need at least 10 rows to split, got {n}")
    n_val = math.ceil(n * spec.val_frac)
    n_test = math.ceil(n * spec.test_frac)
    n_train = n - n_val - n_test
    if n_train < 1:
        raise TooFewRows("train split would be empty")
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    return (
        ds.subset(perm[:n_train]),
        ds.subset(perm[n_train : n_train + n_val]),
        ds.subset(perm[n_train + n_val :]),
    )


# --- manifests ------------------------------------------------------------

_MANIFEST_KEYS = {"name", "csv", "label_column", "recipe", "split"}
_RECIPE_KEYS = {
    "scale",
    "one_hot_columns",
    "ordinal_columns",
    "drop_columns",
    "balance_classes",
    "label_threshold",
    "seed",
}
_SPLIT_KEYS = {"train", "val", "test", "seed"}


def recipe_from_dict(obj: dict) -> PrepRecipe:
    unknown = set(obj) - _RECIPE_KEYS
    if unknown:
        raise ManifestError(f"recipe: unknown keys {sorted(unknown)}")
    return PrepRecipe(
        scale=obj.get("scale", "none"),
        one_hot_columns=tuple(obj.get("one_hot_columns", ())),
        ordinal_columns=tuple(obj.get("ordinal_columns", ())),
        drop_columns=tuple(obj.get("drop_columns", ())),
        balance_classes=bool(obj.get("balance_classes", False)),
        label_threshold=obj.get("label_threshold"),
        seed=int(obj.get("seed", 10)),
    )


def split_from_dict(obj: dict) -> SplitSpec:
    unknown = set(obj) - _SPLIT_KEYS
    if unknown:
        raise ManifestError(f"split: unknown keys {sorted(unknown)}")
    return SplitSpec(
        train_frac=float(obj.get("train", 0.8)),
        val_frac=float(obj.get("val", 0.1)),
        test_frac=float(obj.get("test", 0.1)),
        seed=int(obj.get("seed", 10)),
    )


def _load_presplit(paths: dict, base: Path, label_column: str):
    unknown = set(paths) - {"train", "val", "test"}
    if unknown or set(paths) != {"train", "val", "test"}:
        raise ManifestError('pre-split "csv" must map exactly train/val/test to files')
    frames = {}
    for part, rel in paths.items():
        frames[part] = pd.read_csv(base / rel)
        if label_column not in frames[part].columns:
            raise MissingColumn(f"label column {label_column!r} not in {rel}")
    all_labels = pd.concat([f[label_column] for f in frames.values()])
    values = sorted(all_labels.dropna().unique())
    codes = {v: i for i, v in enumerate(values)}
    parts = []
    for part in ("train", "val", "test"):
        frame = frames[part]
        labels = frame[label_column].map(codes).to_numpy(dtype=np.int64)
        feats = frame.drop(columns=[label_column])
        for col in feats.columns:
            if not pd.api.types.is_numeric_dtype(feats[col]):
                raise NonNumericValue(f"column {col!r} is non-numeric")
        parts.append(
            Dataset(
                features=feats.to_numpy(dtype=np.float64),
                labels=labels,
                feature_names=tuple(feats.columns),
                class_count=len(values),
            )
        )
    return tuple(parts)


def load_manifest(path: str | Path) -> tuple[Dataset, Dataset, Dataset]:
    """Load a benchmark manifest, returning prepared (train, val, test).

    A manifest either names one CSV (prepared with its recipe, then
    split) or three pre-split CSVs that are loaded verbatim.
    """
    path = Path(path)
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ManifestError(f"{path}: top level must be an object")
    unknown = set(obj) - _MANIFEST_KEYS
    if unknown:
        raise ManifestError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("name", "csv", "label_column"):
        if key not in obj:
            raise ManifestError(f"{path}: missing key {key!r}")

    base = path.parent
    label_column = obj["label_column"]
    if isinstance(obj["csv"], dict):
        if "recipe" in obj or "split" in obj:
            raise ManifestError(
                f"{path}: pre-split manifests load files verbatim and take "
                f"no recipe or split"
            )
        return _load_presplit(obj["csv"], base, label_column)

    recipe = recipe_from_dict(obj.get("recipe", {}))
    spec = split_from_dict(obj.get("split", {}))
    ds = prepare(base / obj["csv"], recipe, label_column)
    return split(ds, spec)


def manifest_name(path: str | Path) -> str:
    with open(path) as fh:
        obj = json.load(fh)
    return obj.get("name", Path(path).stem)
