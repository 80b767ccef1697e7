"""CART trees with Gini impurity and a bootstrap forest over them."""
from __future__ import annotations

import math

import numpy as np

DEFAULTS = {
    "n_trees": 100,
    "max_features": "sqrt",
    "min_samples_leaf": 1,
    "max_depth": None,
    "bootstrap": True,
}


def check_params(p: dict) -> None:
    if int(p["n_trees"]) < 1:
        raise ValueError("n_trees must be >= 1")
    if int(p["min_samples_leaf"]) < 1:
        raise ValueError("min_samples_leaf must be >= 1")
    if p["max_depth"] is not None and int(p["max_depth"]) < 1:
        raise ValueError("max_depth must be >= 1 or None")
    mf = p["max_features"]
    if not (mf in ("sqrt", "all") or (isinstance(mf, int) and mf >= 1)):
        raise ValueError(f"max_features must be 'sqrt', 'all' or a positive int, got {mf!r}")


def _n_candidates(max_features, d: int) -> int:
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    if max_features == "all":
        return d
    return min(int(max_features), d)


def _best_split(x, y_onehot, min_leaf):
    """Lowest weighted-Gini threshold on one feature, or None if x is constant."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.size
    valid = np.flatnonzero(xs[:-1] < xs[1:])
    if min_leaf > 1:
        left_n = valid + 1
        valid = valid[(left_n >= min_leaf) & (n - left_n >= min_leaf)]
    if valid.size == 0:
        return None
    cum = np.cumsum(y_onehot[order], axis=0)
    left = cum[valid]
    right = cum[-1] - left
    nl = (valid + 1).astype(np.float64)
    nr = n - nl
    # n_l*gini_l + n_r*gini_r with gini = 1 - sum(p^2)
    score = (nl - (left * left).sum(axis=1) / nl) + (nr - (right * right).sum(axis=1) / nr)
    k = int(np.argmin(score))
    i = valid[k]
    thr = 0.5 * (xs[i] + xs[i + 1])
    if thr >= xs[i + 1]:  # adjacent floats: midpoint rounds up
        thr = xs[i]
    return float(score[k]), float(thr)


class DecisionTree:
    def __init__(self, max_features="sqrt", min_samples_leaf=1, max_depth=None):
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth

    def fit(self, X, y, n_classes, rng: np.random.Generator):
        n, d = X.shape
        onehot = np.eye(n_classes)[y]
        k = _n_candidates(self.max_features, d)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(counts):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(counts)
            return len(feature) - 1

        root = new_node(onehot.sum(axis=0))
        stack = [(root, np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = value[node]
            if np.count_nonzero(counts) <= 1 or idx.size < 2 * self.min_samples_leaf:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            best = None
            tried = 0
            # Keep drawing features until k non-constant ones have been scored.
            for f in rng.permutation(d):
                if tried >= k:
                    break
                res = _best_split(X[idx, f], onehot[idx], self.min_samples_leaf)
                if res is None:
                    continue
                tried += 1
                if best is None or res[0] < best[0]:
                    best = (res[0], res[1], f)
            if best is None:
                continue
            _, thr, f = best
            mask = X[idx, f] <= thr
            li, ri = idx[mask], idx[~mask]
            feature[node] = int(f)
            threshold[node] = thr
            lnode = new_node(onehot[li].sum(axis=0))
            rnode = new_node(onehot[ri].sum(axis=0))
            left[node], right[node] = lnode, rnode
            stack.append((rnode, ri, depth + 1))
            stack.append((lnode, li, depth + 1))
        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=np.float64)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.value = np.array(value, dtype=np.float64)
        return self

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def predict(self, X):
        return np.argmax(self.value[self.apply(X)], axis=1)


class RandomForestClassifier:
    family = "random_forest"

    def __init__(self, **params):
        self.params = {**DEFAULTS, **params}
        check_params(self.params)
        self.trees: list[DecisionTree] = []
        self.n_classes = 0

    def fit(self, X, y, n_classes, rng: np.random.Generator):
        p = self.params
        n = X.shape[0]
        self.n_classes = n_classes
        seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(int(p["n_trees"]))
        self.trees = []
        for ss in seeds:
            trng = np.random.default_rng(ss)
            idx = trng.integers(0, n, n) if p["bootstrap"] else np.arange(n)
            tree = DecisionTree(p["max_features"], int(p["min_samples_leaf"]), p["max_depth"])
            self.trees.append(tree.fit(X[idx], y[idx], n_classes, trng))
        return self

    def predict(self, X):
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict(X)] += 1
        return np.argmax(votes, axis=1)

    def get_state(self) -> dict:
        state = {"n_classes": np.array(self.n_classes)}
        for i, t in enumerate(self.trees):
            for attr in ("feature", "threshold", "left", "right", "value"):
                state[f"t{i}_{attr}"] = getattr(t, attr)
        return state

    def set_state(self, state: dict):
        self.n_classes = int(state["n_classes"])
        self.trees = []
        for i in range(int(self.params["n_trees"])):
            t = DecisionTree(self.params["max_features"], self.params["min_samples_leaf"], self.params["max_depth"])
            for attr in ("feature", "threshold", "left", "right", "value"):
                setattr(t, attr, np.asarray(state[f"t{i}_{attr}"]))
            self.trees.append(t)
        return self
