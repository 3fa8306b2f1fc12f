"""Deterministic CART over binary pass/fail labels.

Gini impurity, exhaustive best-split search with candidate thresholds at
midpoints of consecutive sorted unique feature values, and fully pinned
tie-breaks (lowest feature index, then lowest threshold). Fitting the
same data with the same params yields a bit-identical tree. Splitting
stops at purity, max_depth, or when no candidate leaves both children
with min_samples_leaf samples; a zero-gain split is still taken, which
is what makes XOR-style data separable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTrainingSet

PASS, FAIL = "pass", "fail"


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_leaf: int = 5
    random_state: int = 42  # reserved for samplers feeding the tree; CART itself is exact


@dataclass
class DecisionTree:
    """Flat node-array representation.

    Internal nodes: {"feature": int, "threshold": float, "left": int,
    "right": int}; an input goes left when x[feature] <= threshold.
    Leaves: {"label": "pass" | "fail", "support": [n_fail, n_pass]}.
    """

    nodes: list[dict] = field(default_factory=list)
    params: TreeParams = field(default_factory=TreeParams)

    def predict(self, x) -> bool:
        """True when the leaf reached by x is labeled pass."""
        node = self.nodes[0]
        while "feature" in node:
            if x[node["feature"]] <= node["threshold"]:
                node = self.nodes[node["left"]]
            else:
                node = self.nodes[node["right"]]
        return node["label"] == PASS

    def decision_paths(self) -> list[tuple[list[tuple[int, str, float]], str]]:
        """Every root-to-leaf rule as (constraints, label).

        Constraints are (feature, "<=" | ">", threshold) conjunctions;
        the rules are mutually exclusive and exhaustive by construction.
        """
        paths: list[tuple[list, str]] = []

        def walk(index: int, constraints: list) -> None:
            node = self.nodes[index]
            if "label" in node:
                paths.append((list(constraints), node["label"]))
                return
            feat, thr = node["feature"], node["threshold"]
            walk(node["left"], constraints + [(feat, "<=", thr)])
            walk(node["right"], constraints + [(feat, ">", thr)])

        walk(0, [])
        return paths

    def predict_by_rules(self, x) -> bool:
        """Evaluate via the extracted rule set; must agree with predict."""
        matches = []
        for constraints, label in self.decision_paths():
            ok = all(
                (x[f] <= thr) if op == "<=" else (x[f] > thr)
                for f, op, thr in constraints
            )
            if ok:
                matches.append(label)
        if len(matches) != 1:
            raise AssertionError(
                f"leaf regions must partition the space, matched {len(matches)} rules"
            )
        return matches[0] == PASS

    @property
    def depth(self) -> int:
        def node_depth(index: int) -> int:
            node = self.nodes[index]
            if "label" in node:
                return 0
            return 1 + max(node_depth(node["left"]), node_depth(node["right"]))

        return node_depth(0)

    @property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if "label" in n)

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "params": {
            "max_depth": self.params.max_depth,
            "min_samples_leaf": self.params.min_samples_leaf,
            "random_state": self.params.random_state,
        }}

    @classmethod
    def from_dict(cls, obj: dict) -> "DecisionTree":
        return cls(nodes=obj["nodes"], params=TreeParams(**obj["params"]))


def _gini(n_fail: int, n_pass: int) -> float:
    n = n_fail + n_pass
    if n == 0:
        return 0.0
    p = n_pass / n
    return 2.0 * p * (1.0 - p)


def _best_split(X: np.ndarray, passed: np.ndarray, min_leaf: int):
    """(gain, feature, threshold) of the best admissible split, or None.

    Iterates features ascending and thresholds ascending, keeping only
    strictly better gains, so equal-gain ties resolve to the lowest
    feature index and then the lowest threshold.
    """
    n = X.shape[0]
    parent = _gini(int(n - passed.sum()), int(passed.sum()))
    best = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        values = X[order, feature]
        labels = passed[order]
        cut_positions = np.flatnonzero(values[:-1] != values[1:]) + 1
        if cut_positions.size == 0:
            continue
        pass_prefix = np.cumsum(labels)
        total_pass = int(pass_prefix[-1])
        for pos in cut_positions:
            left_n, right_n = int(pos), n - int(pos)
            if left_n < min_leaf or right_n < min_leaf:
                continue
            left_pass = int(pass_prefix[pos - 1])
            right_pass = total_pass - left_pass
            child = (
                left_n / n * _gini(left_n - left_pass, left_pass)
                + right_n / n * _gini(right_n - right_pass, right_pass)
            )
            gain = parent - child
            if best is None or gain > best[0]:
                threshold = (float(values[pos - 1]) + float(values[pos])) / 2.0
                best = (gain, feature, threshold)
    return best


def fit_tree(X, passed, params: TreeParams = TreeParams()) -> DecisionTree:
    """Grow a CART over rows of X labeled by the boolean `passed` array."""
    X = np.asarray(X, dtype=np.float64)
    passed = np.asarray(passed, dtype=bool)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("need at least one row to fit a tree")
    if passed.shape[0] != X.shape[0]:
        raise EmptyTrainingSet("labels and rows differ in length")

    nodes: list[dict] = []

    def leaf(sub_passed: np.ndarray) -> int:
        n_pass = int(sub_passed.sum())
        n_fail = int(sub_passed.shape[0] - n_pass)
        label = PASS if n_pass >= n_fail else FAIL
        nodes.append({"label": label, "support": [n_fail, n_pass]})
        return len(nodes) - 1

    def build(rows: np.ndarray, depth: int) -> int:
        sub_passed = passed[rows]
        n_pass = int(sub_passed.sum())
        pure = n_pass == 0 or n_pass == rows.shape[0]
        at_depth = params.max_depth is not None and depth >= params.max_depth
        if pure or at_depth:
            return leaf(sub_passed)
        best = _best_split(X[rows], sub_passed, params.min_samples_leaf)
        if best is None:
            return leaf(sub_passed)
        _, feature, threshold = best
        mask = X[rows, feature] <= threshold
        index = len(nodes)
        nodes.append({"feature": feature, "threshold": threshold, "left": -1, "right": -1})
        nodes[index]["left"] = build(rows[mask], depth + 1)
        nodes[index]["right"] = build(rows[~mask], depth + 1)
        return index

    build(np.arange(X.shape[0]), 0)
    return DecisionTree(nodes=nodes, params=params)
