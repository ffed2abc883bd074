import numpy as np
import pytest

from costsched.errors import (
    DimensionMismatch,
    EmptyEvaluationSet,
    EngineNeedsTwoVariables,
)
from costsched.forest import (
    DecisionTree,
    Forest,
    accuracy_on,
    fit_forest,
    permutation_importance,
    predict_class,
)


def leaf_tree(label):
    """A single-node tree that always predicts 0-based class `label`."""
    return DecisionTree(
        split_feature=np.array([-1], np.int64),
        split_threshold=np.array([0.0]),
        left=np.array([-1], np.int64),
        right=np.array([-1], np.int64),
        leaf_class=np.array([label], np.int64),
        bootstrap_indices=np.array([0], np.int64),
    )


def forest_of_leaves(labels, n_classes, n_features=2):
    trees = tuple(leaf_tree(lab) for lab in labels)
    return Forest(trees, len(trees), 1, 1, 0, n_classes, n_features)


class TestValidation:
    def test_single_feature_rejected(self):
        X = np.zeros((10, 1))
        y = np.ones(10, int)
        with pytest.raises(EngineNeedsTwoVariables):
            fit_forest(X, y)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fit_forest(np.zeros((10, 2)), np.ones(9, int))

    def test_zero_based_labels_rejected(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        with pytest.raises(ValueError):
            fit_forest(X, np.zeros(10, int))

    def test_bad_mtry(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        y = np.r_[np.ones(5, int), 2 * np.ones(5, int)]
        with pytest.raises(ValueError):
            fit_forest(X, y, mtry=3)

    def test_empty_evaluation(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        y = np.r_[np.ones(5, int), 2 * np.ones(5, int)]
        forest = fit_forest(X, y, n_trees=3)
        with pytest.raises(EmptyEvaluationSet):
            accuracy_on(forest, np.empty((0, 2)), np.empty(0, int))


class TestDeterminism:
    def test_same_seed_same_forest(self, blobs):
        X, y = blobs
        f1 = fit_forest(X, y, n_trees=10, master_seed=7)
        f2 = fit_forest(X, y, n_trees=10, master_seed=7)
        for t1, t2 in zip(f1.trees, f2.trees):
            np.testing.assert_array_equal(t1.split_feature, t2.split_feature)
            np.testing.assert_array_equal(t1.split_threshold, t2.split_threshold)
            np.testing.assert_array_equal(t1.leaf_class, t2.leaf_class)
            np.testing.assert_array_equal(t1.bootstrap_indices,
                                          t2.bootstrap_indices)

    def test_different_seed_different_bootstrap(self, blobs):
        X, y = blobs
        f1 = fit_forest(X, y, n_trees=1, master_seed=7)
        f2 = fit_forest(X, y, n_trees=1, master_seed=8)
        assert not np.array_equal(f1.trees[0].bootstrap_indices,
                                  f2.trees[0].bootstrap_indices)

    def test_trees_within_forest_differ(self, blobs):
        X, y = blobs
        f = fit_forest(X, y, n_trees=2, master_seed=7)
        assert not np.array_equal(f.trees[0].bootstrap_indices,
                                  f.trees[1].bootstrap_indices)


class TestAccuracy:
    def test_beats_nearest_centroid_floor_on_blobs(self, blobs):
        X, y = blobs
        forest = fit_forest(X[:400], y[:400], n_trees=50, master_seed=3)
        acc = accuracy_on(forest, X[400:], y[400:])
        # independent reference: nearest-centroid on the same split
        c1 = X[:400][y[:400] == 1].mean(axis=0)
        c2 = X[:400][y[:400] == 2].mean(axis=0)
        d1 = np.linalg.norm(X[400:] - c1, axis=1)
        d2 = np.linalg.norm(X[400:] - c2, axis=1)
        ref = np.mean(np.where(d1 <= d2, 1, 2) == y[400:])
        assert acc >= 0.95
        assert acc >= ref - 0.05

    def test_pure_training_data_memorized(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 3))
        y = (X[:, 0] > 0).astype(int) + 1
        forest = fit_forest(X, y, n_trees=30, master_seed=5)
        assert accuracy_on(forest, X, y) >= 0.97


class TestVoting:
    def test_majority_vote(self):
        forest = forest_of_leaves([0, 0, 1], n_classes=2)
        assert predict_class(forest, np.zeros(2)) == 1

    def test_tie_breaks_toward_smaller_label(self):
        forest = forest_of_leaves([1, 0, 1, 0], n_classes=2)
        assert predict_class(forest, np.zeros(2)) == 1
        forest = forest_of_leaves([2, 1, 2, 1], n_classes=3)
        assert predict_class(forest, np.zeros(2)) == 2

    def test_batch_prediction_matches_single(self, blobs):
        X, y = blobs
        forest = fit_forest(X, y, n_trees=5, master_seed=0)
        batch = predict_class(forest, X[:20])
        singles = [predict_class(forest, X[i]) for i in range(20)]
        np.testing.assert_array_equal(batch, singles)

    def test_feature_count_checked(self):
        forest = forest_of_leaves([0], n_classes=2, n_features=2)
        with pytest.raises(DimensionMismatch):
            predict_class(forest, np.zeros(3))


def oracle_best_split(X, y, n_classes):
    """Exhaustive scan over all features and midpoints; returns the minimum
    total child Gini-weighted impurity (sum over children of n_k * gini_k)."""
    n = len(y)
    best = np.inf
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        for k in range(n - 1):
            if xs[k + 1] <= xs[k]:
                continue
            left, right = ys[: k + 1], ys[k + 1:]
            imp = 0.0
            for part in (left, right):
                counts = np.bincount(part, minlength=n_classes)
                imp += len(part) * (1 - np.sum((counts / len(part)) ** 2))
            best = min(best, imp)
    return best


class TestSplitQuality:
    def test_root_split_matches_exhaustive_oracle(self):
        """With mtry=p and one tree, the root split must achieve the globally
        minimal Gini impurity over all (feature, threshold) pairs on the
        bootstrap sample."""
        rng = np.random.default_rng(9)
        for trial in range(10):
            X = rng.normal(size=(30, 3))
            y = rng.integers(1, 4, size=30)
            forest = fit_forest(X, y, n_trees=1, mtry=3, master_seed=trial)
            tree = forest.trees[0]
            if tree.leaf_class[0] >= 0:  # pure bootstrap, nothing to check
                continue
            Xb = X[tree.bootstrap_indices]
            yb = y[tree.bootstrap_indices] - 1
            f, t = tree.split_feature[0], tree.split_threshold[0]
            mask = Xb[:, f] <= t
            got = 0.0
            for part in (yb[mask], yb[~mask]):
                counts = np.bincount(part, minlength=3)
                got += len(part) * (1 - np.sum((counts / len(part)) ** 2))
            want = oracle_best_split(Xb, yb, 3)
            assert got == pytest.approx(want, abs=1e-9)

    def test_threshold_is_midpoint_of_adjacent_values(self, blobs):
        X, y = blobs
        forest = fit_forest(X, y, n_trees=1, master_seed=2)
        tree = forest.trees[0]
        root_f = tree.split_feature[0]
        root_t = tree.split_threshold[0]
        vals = np.sort(X[tree.bootstrap_indices, root_f])
        gaps = 0.5 * (vals[:-1] + vals[1:])
        assert np.min(np.abs(gaps - root_t)) < 1e-12


class TestBootstrap:
    def test_sample_size_and_range(self, blobs):
        X, y = blobs
        forest = fit_forest(X, y, n_trees=3, master_seed=0)
        for tree in forest.trees:
            assert tree.bootstrap_indices.shape == (len(y),)
            assert tree.bootstrap_indices.min() >= 0
            assert tree.bootstrap_indices.max() < len(y)

    def test_with_replacement(self, blobs):
        X, y = blobs
        forest = fit_forest(X, y, n_trees=1, master_seed=0)
        # a 500-draw bootstrap without repeats is essentially impossible
        assert len(set(forest.trees[0].bootstrap_indices.tolist())) < len(y)


class TestPermutationImportance:
    def test_constant_column_is_exactly_zero(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 3))
        X[:, 2] = 1.5
        y = (X[:, 0] > 0).astype(int) + 1
        forest = fit_forest(X[:150], y[:150], n_trees=20, master_seed=1)
        imp = permutation_importance(forest, X[150:], y[150:], seed=0)
        assert imp.importances[2] == 0.0

    def test_informative_beats_noise(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(400, 3))
        y = (X[:, 0] > 0).astype(int) + 1
        wins = 0
        for seed in range(10):
            forest = fit_forest(X[:300], y[:300], n_trees=25, master_seed=seed)
            imp = permutation_importance(forest, X[300:], y[300:], seed=seed)
            if imp.importances[0] > max(imp.importances[1], imp.importances[2]):
                wins += 1
        assert wins >= 9

    def test_deterministic(self, blobs):
        X, y = blobs
        forest = fit_forest(X[:400], y[:400], n_trees=10, master_seed=0)
        i1 = permutation_importance(forest, X[400:], y[400:], seed=3)
        i2 = permutation_importance(forest, X[400:], y[400:], seed=3)
        np.testing.assert_array_equal(i1.importances, i2.importances)

    def test_empty_validation_rejected(self, blobs):
        X, y = blobs
        forest = fit_forest(X, y, n_trees=2, master_seed=0)
        with pytest.raises(EmptyEvaluationSet):
            permutation_importance(forest, np.empty((0, 2)), np.empty(0, int))
