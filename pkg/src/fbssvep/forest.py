"""Random forest over the 45 magnitude-dB features.

Trees grow unlimited-depth on bootstrap resamples; each node searches the
best Gini split among a random feature subset, with candidate thresholds
at midpoints between consecutive distinct sorted values. Leaves keep class
counts; the forest predicts by majority vote with ties going to the lowest
class index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int = 11
    bootstrap: bool = True
    min_samples_split: int = 2
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.max_features:
            raise ValueError("max_features must be >= 1")


def gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int, features: np.ndarray):
    """Return (feature, threshold, gain) of the best Gini split, or None."""
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_gini = gini(parent_counts)
    best = None
    best_gain = _EPS
    onehot = np.eye(n_classes)[y]
    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        left = np.cumsum(onehot[order], axis=0)  # counts after taking i+1 samples left
        distinct = np.nonzero(np.diff(xs) > 0)[0]
        if distinct.size == 0:
            continue
        for i in distinct:
            nl = i + 1
            cl = left[i]
            cr = parent_counts - cl
            weighted = (nl * gini(cl) + (n - nl) * gini(cr)) / n
            gain = parent_gini - weighted
            if gain > best_gain:
                best_gain = gain
                best = (int(f), float(0.5 * (xs[i] + xs[i + 1])), gain)
    return best


def _grow_tree(x: np.ndarray, y: np.ndarray, n_classes: int, cfg: ForestConfig,
               rng: np.random.Generator):
    """Iteratively grown tree as nested lists.

    Leaf: ["leaf", [count per class]]. Internal: ["split", feature,
    threshold, left_subtree, right_subtree].
    """
    mtry = min(cfg.max_features, x.shape[1])
    root: list = [None]
    stack = [(np.arange(len(y)), root, 0)]
    while stack:
        idx, slot, pos = stack.pop()
        counts = np.bincount(y[idx], minlength=n_classes)
        node = None
        if len(idx) >= cfg.min_samples_split and gini(counts.astype(float)) > 0.0:
            features = rng.choice(x.shape[1], size=mtry, replace=False)
            found = _best_split(x[idx], y[idx], n_classes, features)
            if found is not None:
                f, thr, _ = found
                go_left = x[idx, f] <= thr
                node = ["split", f, thr, [None], [None]]
                stack.append((idx[go_left], node[3], 0))
                stack.append((idx[~go_left], node[4], 0))
        if node is None:
            node = ["leaf", counts.tolist()]
        slot[pos] = node
    return root[0]


@dataclass
class Forest:
    trees: list
    n_classes: int
    n_features: int
    config: ForestConfig
    bootstrap_indices: list  # per-tree sample index arrays (for OOB analysis)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return predict_forest(self, x)


def fit_forest(x: np.ndarray, y: np.ndarray, cfg: ForestConfig,
               n_classes: int | None = None) -> Forest:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y) or len(y) < 2:
        raise ValueError("need a 2-D feature matrix with >= 2 labeled rows")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError("labels out of range")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)
    trees, picks = [], []
    for s in seeds:
        rng = np.random.default_rng(s)
        idx = rng.integers(0, len(y), size=len(y)) if cfg.bootstrap else np.arange(len(y))
        trees.append(_grow_tree(x[idx], y[idx], n_classes, cfg, rng))
        picks.append(idx)
    return Forest(trees, n_classes, x.shape[1], cfg, picks)


def _tree_counts(tree, row: np.ndarray) -> np.ndarray:
    node = tree
    while node[0] == "split":
        node = node[3] if row[node[1]] <= node[2] else node[4]
    return np.asarray(node[1])


def predict_tree(tree, x: np.ndarray) -> np.ndarray:
    return np.array([int(np.argmax(_tree_counts(tree, row))) for row in np.atleast_2d(x)])


def predict_forest(forest: Forest, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != forest.n_features:
        raise ValueError(
            f"feature length {x.shape[1]} does not match the fitted {forest.n_features}")
    votes = np.zeros((len(x), forest.n_classes), dtype=np.int64)
    for tree in forest.trees:
        pred = predict_tree(tree, x)
        votes[np.arange(len(x)), pred] += 1
    return votes.argmax(axis=1)


def forest_to_dict(forest: Forest) -> dict:
    return dict(
        n_classes=forest.n_classes,
        n_features=forest.n_features,
        config=dict(n_trees=forest.config.n_trees, max_features=forest.config.max_features,
                    bootstrap=forest.config.bootstrap,
                    min_samples_split=forest.config.min_samples_split, seed=forest.config.seed),
        trees=forest.trees,
    )


def forest_from_dict(d: dict) -> Forest:
    return Forest(d["trees"], d["n_classes"], d["n_features"], ForestConfig(**d["config"]), [])
