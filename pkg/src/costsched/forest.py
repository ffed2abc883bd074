"""Random-forest classifier built from scratch.

Trees are fully grown (default) on bootstrap resamples, splitting on the
best Gini-impurity decrease among a random candidate subset of features at
each node.  All randomness flows from a master seed through a splitmix
stream, so training, prediction, and permutation importance are
bit-reproducible.  Hot loops are numba-compiled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from ._rng import TAG_PERM, TAG_TREE, derive_seed
from .errors import (
    DimensionMismatch,
    EmptyEvaluationSet,
    EngineNeedsTwoVariables,
)

U64 = np.uint64


@njit(cache=True)
def _rng_next(state):
    s = state[0] + U64(0x9E3779B97F4A7C15)
    state[0] = s
    z = s
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def _rng_below(state, n):
    return np.int64(_rng_next(state) % U64(n))


@njit(cache=True)
def _grow_tree(XT, y, n_classes, mtry, min_node_size, seed):
    # XT is (p, n): column-contiguous feature access in the hot loops
    p, n = XT.shape
    state = np.empty(1, np.uint64)
    state[0] = U64(seed)

    boot = np.empty(n, np.int64)
    for i in range(n):
        boot[i] = _rng_below(state, n)
    idx = boot.copy()  # partitioned in place during growth

    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, np.int64)
    thr = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    leaf = np.full(max_nodes, -1, np.int64)

    stack = np.empty((n + 64, 3), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    top = 1
    n_nodes = 1

    counts = np.zeros(n_classes, np.int64)
    lc = np.zeros(n_classes, np.int64)
    cand = np.empty(p, np.int64)
    vals = np.empty(n, np.float64)
    rows = np.empty(n, np.int64)
    tmp_rows = np.empty(n, np.int64)
    ordbuf = np.empty(n, np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        m = end - start

        for c in range(n_classes):
            counts[c] = 0
        for k in range(start, end):
            counts[y[idx[k]]] += 1
        best_c = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best_c]:
                best_c = c
        if counts[best_c] == m or m < 2 or m < min_node_size:
            leaf[node] = best_c
            continue

        # draw mtry distinct candidate features (partial Fisher-Yates)
        for j in range(p):
            cand[j] = j
        k_draw = mtry if mtry < p else p
        best_feat = np.int64(-1)
        best_thr = 0.0
        best_imp = 1e308
        for d in range(k_draw):
            r = d + _rng_below(state, p - d)
            t = cand[d]
            cand[d] = cand[r]
            cand[r] = t
            f = cand[d]
            for k in range(m):
                rows[k] = idx[start + k]
                vals[k] = XT[f, rows[k]]
            order = ordbuf[:m]
            if m <= 48:
                # insertion sort (stable): avoids argsort allocation on the
                # many small nodes of a fully grown tree
                for k in range(m):
                    order[k] = k
                for k in range(1, m):
                    o = order[k]
                    v = vals[o]
                    q = k - 1
                    while q >= 0 and vals[order[q]] > v:
                        order[q + 1] = order[q]
                        q -= 1
                    order[q + 1] = o
            else:
                srt = np.argsort(vals[:m], kind="mergesort")
                for k in range(m):
                    order[k] = srt[k]
            for c in range(n_classes):
                lc[c] = 0
            # running sums of squared class counts, updated incrementally
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                sr += counts[c] * counts[c]
            nl = 0
            for k in range(m - 1):
                c = y[rows[order[k]]]
                sl += 2.0 * lc[c] + 1.0
                sr -= 2.0 * (counts[c] - lc[c]) - 1.0
                lc[c] += 1
                nl += 1
                v1 = vals[order[k]]
                v2 = vals[order[k + 1]]
                if v2 > v1:
                    nr = m - nl
                    impur = (nl - sl / nl) + (nr - sr / nr)
                    if impur < best_imp:
                        best_imp = impur
                        best_feat = f
                        best_thr = 0.5 * (v1 + v2)
        if best_feat < 0:
            leaf[node] = best_c
            continue

        nl = 0
        for k in range(start, end):
            if XT[best_feat, idx[k]] <= best_thr:
                tmp_rows[nl] = idx[k]
                nl += 1
        nr = nl
        for k in range(start, end):
            if XT[best_feat, idx[k]] > best_thr:
                tmp_rows[nr] = idx[k]
                nr += 1
        for k in range(m):
            idx[start + k] = tmp_rows[k]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[node] = best_feat
        thr[node] = best_thr
        left[node] = lid
        right[node] = rid
        # push right first so the left child is processed next (preorder)
        stack[top, 0] = rid
        stack[top, 1] = start + nl
        stack[top, 2] = end
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + nl
        top += 1

    return (feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), leaf[:n_nodes].copy(), boot)


@njit(cache=True)
def _predict_votes(feat, thr, left, right, leaf, offsets, X, n_classes):
    n = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.empty(n, np.int64)
    votes = np.zeros(n_classes, np.int64)
    for i in range(n):
        for c in range(n_classes):
            votes[c] = 0
        for t in range(n_trees):
            base = offsets[t]
            node = base
            while leaf[node] < 0:
                if X[i, feat[node]] <= thr[node]:
                    node = base + left[node]
                else:
                    node = base + right[node]
            votes[leaf[node]] += 1
        best = 0
        for c in range(1, n_classes):
            if votes[c] > votes[best]:
                best = c
        out[i] = best
    return out


@dataclass(frozen=True)
class DecisionTree:
    split_feature: np.ndarray
    split_threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray  # -1 on internal nodes, 0-based class on leaves
    bootstrap_indices: np.ndarray


@dataclass(eq=False)
class Forest:
    trees: tuple[DecisionTree, ...]
    n_trees: int
    mtry: int
    min_node_size: int
    master_seed: int
    n_classes: int
    n_features: int

    @cached_property
    def _packed(self):
        feat = np.concatenate([t.split_feature for t in self.trees])
        thr = np.concatenate([t.split_threshold for t in self.trees])
        left = np.concatenate([t.left for t in self.trees])
        right = np.concatenate([t.right for t in self.trees])
        leaf = np.concatenate([t.leaf_class for t in self.trees])
        sizes = [t.split_feature.shape[0] for t in self.trees]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        return feat, thr, left, right, leaf, offsets


def fit_forest(X, y, n_trees=100, mtry=None, min_node_size=1,
               master_seed=0) -> Forest:
    """Train a forest on labels in 1..J.

    mtry defaults to ceil(sqrt(p)).  Trees are grown until leaves are pure
    (or below min_node_size rows, or no split remains).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-D")
    n, p = X.shape
    if p < 2:
        raise EngineNeedsTwoVariables(
            f"forest engine needs at least two variables, got {p}")
    if n < 2:
        raise DimensionMismatch("need at least two rows")
    y = np.asarray(y)
    y0 = np.ascontiguousarray(y, dtype=np.int64) - 1
    if y0.shape != (n,):
        raise DimensionMismatch("y length must match X rows")
    if y0.min() < 0:
        raise ValueError("labels must be 1-based positive integers")
    n_classes = int(y0.max()) + 1
    if mtry is None:
        mtry = math.ceil(math.sqrt(p))
    if not 1 <= mtry <= p:
        raise ValueError(f"mtry must be in 1..{p}")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")

    XT = np.ascontiguousarray(X.T)
    trees = []
    for t in range(n_trees):
        seed = derive_seed(master_seed, TAG_TREE, t)
        feat, thr, left, right, leaf, boot = _grow_tree(
            XT, y0, n_classes, mtry, min_node_size, np.uint64(seed))
        trees.append(DecisionTree(feat, thr, left, right, leaf, boot))
    return Forest(tuple(trees), n_trees, mtry, min_node_size, master_seed,
                  n_classes, p)


def predict_class(forest: Forest, x) -> int | np.ndarray:
    """Plurality vote over trees; ties break toward the smaller label."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.ascontiguousarray(np.atleast_2d(x))
    if X.shape[1] != forest.n_features:
        raise DimensionMismatch(
            f"expected {forest.n_features} features, got {X.shape[1]}")
    feat, thr, left, right, leaf, offsets = forest._packed
    pred = _predict_votes(feat, thr, left, right, leaf, offsets, X,
                          forest.n_classes) + 1
    return int(pred[0]) if single else pred


def accuracy_on(forest: Forest, X, y) -> float:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise EmptyEvaluationSet("no rows to evaluate")
    return float(np.mean(predict_class(forest, X) == y))


@dataclass(frozen=True)
class ImportanceProfile:
    importances: np.ndarray

    def __post_init__(self):
        imp = np.asarray(self.importances, dtype=float)
        if not np.all(np.isfinite(imp)):
            raise ValueError("importances must be finite")
        object.__setattr__(self, "importances", imp)

    @property
    def p(self) -> int:
        return len(self.importances)


def permutation_importance(forest: Forest, X_val, y_val,
                           seed=0) -> ImportanceProfile:
    """Accuracy drop from a seeded shuffle of each feature column, one
    repetition per feature."""
    X_val = np.ascontiguousarray(X_val, dtype=np.float64)
    y_val = np.asarray(y_val)
    if X_val.shape[0] == 0:
        raise EmptyEvaluationSet("validation set is empty")
    if X_val.shape[1] != forest.n_features:
        raise DimensionMismatch(
            f"expected {forest.n_features} features, got {X_val.shape[1]}")
    base = accuracy_on(forest, X_val, y_val)
    n = X_val.shape[0]
    importances = np.empty(forest.n_features)
    for i in range(forest.n_features):
        rng = np.random.Generator(
            np.random.PCG64(derive_seed(seed, TAG_PERM, i)))
        Xp = X_val.copy()
        Xp[:, i] = Xp[rng.permutation(n), i]
        importances[i] = base - accuracy_on(forest, Xp, y_val)
    return ImportanceProfile(importances)
