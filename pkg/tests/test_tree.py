import numpy as np
import pytest

from trustmon.errors import EmptyTrainingSet
from trustmon.tree import DecisionTree, TreeParams, fit_tree

P1 = TreeParams(min_samples_leaf=1)


class TestFitTree:
    def test_forced_split_point(self):
        tree = fit_tree(np.array([[0.0], [1.0]]), [True, False], P1)
        root = tree.nodes[0]
        assert root["feature"] == 0
        assert root["threshold"] == pytest.approx(0.5)
        assert tree.leaf_count == 2
        assert tree.predict([0.0]) is True
        assert tree.predict([1.0]) is False

    def test_all_pass_single_leaf(self):
        tree = fit_tree(np.random.default_rng(0).standard_normal((10, 3)), [True] * 10, P1)
        assert tree.leaf_count == 1
        assert tree.depth == 0
        assert tree.predict([0, 0, 0]) is True

    def test_xor_consistency(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = [True, False, False, True]
        tree = fit_tree(X, y, P1)
        assert tree.depth == 2
        assert tree.leaf_count == 4
        # brute force: predictions reproduce the training labels
        for x, label in zip(X, y):
            assert tree.predict(x) is label

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            fit_tree(np.empty((0, 2)), [], P1)

    def test_min_samples_leaf_blocks_split(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = [True, True, False, False]
        tree = fit_tree(X, y, TreeParams(min_samples_leaf=3))
        assert tree.leaf_count == 1  # no admissible split leaves 3 per side

    def test_max_depth(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((100, 4))
        y = X[:, 0] + X[:, 1] > 0
        tree = fit_tree(X, y, TreeParams(max_depth=2, min_samples_leaf=1))
        assert tree.depth <= 2

    def test_training_set_consistency(self):
        # unlimited depth, min leaf 1, consistent labels -> exact fit
        rng = np.random.default_rng(2)
        X = rng.standard_normal((120, 3))
        y = (X[:, 0] * X[:, 1] > 0.1).tolist()
        tree = fit_tree(X, y, P1)
        assert all(tree.predict(x) is label for x, label in zip(X, y))

    def test_determinism_over_repeated_fits(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((200, 5))
        y = (X @ rng.standard_normal(5) > 0.2).tolist()
        baseline = fit_tree(X, y, TreeParams(min_samples_leaf=5, random_state=42))
        for _ in range(20):
            again = fit_tree(X, y, TreeParams(min_samples_leaf=5, random_state=42))
            assert again.nodes == baseline.nodes

    def test_tie_break_lowest_feature(self):
        # duplicated feature columns give identical gains; feature 0 wins
        col = np.array([[0.0], [1.0], [2.0], [3.0]])
        X = np.hstack([col, col])
        y = [True, True, False, False]
        tree = fit_tree(X, y, P1)
        assert tree.nodes[0]["feature"] == 0


@pytest.fixture(scope="module")
def tree():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((300, 4))
    y = ((X[:, 0] > 0) & (X[:, 2] < 0.5)).tolist()
    return fit_tree(X, y, TreeParams(min_samples_leaf=5))


class TestRuleEvaluation:
    def test_leaf_partition(self, tree):
        # exactly one root-to-leaf path is satisfied for any input
        rng = np.random.default_rng(5)
        paths = tree.decision_paths()
        for _ in range(2000):
            x = rng.standard_normal(4) * 3
            matched = 0
            for constraints, _ in paths:
                if all(
                    (x[f] <= t) if op == "<=" else (x[f] > t)
                    for f, op, t in constraints
                ):
                    matched += 1
            assert matched == 1

    def test_rules_agree_with_direct_invocation(self, tree):
        rng = np.random.default_rng(6)
        for _ in range(2000):
            x = rng.standard_normal(4) * 3
            assert tree.predict_by_rules(x) is tree.predict(x)

    def test_round_trip(self, tree):
        clone = DecisionTree.from_dict(tree.to_dict())
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.standard_normal(4)
            assert clone.predict(x) is tree.predict(x)
