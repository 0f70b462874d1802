"""Decision tree, random forest and discrete AdaBoost over weighted-Gini CART."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .tree import Tree, _split_from_order, grow_gini_tree, presort

# Weighted error below this counts as a perfect stump; alpha is capped there.
ADA_MIN_ERROR = 1e-10


@dataclass(frozen=True)
class DecisionTree:
    tree: Tree

    threshold = 0.5

    @classmethod
    def fit(cls, config, X, y):
        return cls(grow_gini_tree(X, y, max_depth=config.max_depth, min_leaf=config.min_leaf))

    def scores(self, X):
        return self.tree.predict(X)

    def trees(self):
        return [self.tree]

    def to_dict(self):
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_dict(cls, doc):
        return cls(Tree.from_dict(doc["tree"]))


def _forest_member(X, y, config, seed_seq, order):
    rng = np.random.default_rng(seed_seq)
    n = y.shape[0]
    if config.bootstrap:
        weights = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
    else:
        weights = None
    return grow_gini_tree(
        X,
        y,
        weights,
        max_depth=config.max_depth,
        min_leaf=config.min_leaf,
        n_candidates=config.n_candidates(X.shape[1]),
        rng=rng,
        order=order,
    )


@dataclass(frozen=True)
class RandomForest:
    """Bagged Gini trees with per-node feature sampling; score = mean leaf probability."""

    members: tuple[Tree, ...]

    threshold = 0.5

    @classmethod
    def fit(cls, config, X, y, threads: int = 1):
        # per-tree streams derive from the root seed, so thread count cannot change results
        seeds = np.random.SeedSequence(config.seed).spawn(config.n_trees)
        order = presort(X)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                members = list(pool.map(lambda s: _forest_member(X, y, config, s, order), seeds))
        else:
            members = [_forest_member(X, y, config, s, order) for s in seeds]
        return cls(tuple(members))

    def scores(self, X):
        total = np.zeros(np.asarray(X).shape[0])
        for t in self.members:
            total += t.predict(X)
        return total / len(self.members)

    def trees(self):
        return list(self.members)

    def to_dict(self):
        return {"trees": [t.to_dict() for t in self.members]}

    @classmethod
    def from_dict(cls, doc):
        return cls(tuple(Tree.from_dict(t) for t in doc["trees"]))


@dataclass(frozen=True)
class Stump:
    """Depth-1 tree voting -1/+1; ``feature == -1`` means a constant vote ``left``."""

    feature: int
    threshold: float
    left: int
    right: int

    def vote(self, X):
        if self.feature < 0:
            return np.full(X.shape[0], float(self.left))
        return np.where(X[:, self.feature] <= self.threshold, float(self.left), float(self.right))


def _majority(y_signed, w):
    return 1 if w[y_signed > 0].sum() > w[y_signed < 0].sum() else -1


def fit_stump(X, y_signed, w, order=None):
    if order is None:
        order = presort(X)
    split = _split_from_order(X, y_signed > 0, w, order, list(range(X.shape[1])), 1)
    if split is None:
        return Stump(-1, 0.0, _majority(y_signed, w), 0)
    go_left = X[:, split.feature_index] <= split.threshold
    return Stump(
        split.feature_index,
        split.threshold,
        _majority(y_signed[go_left], w[go_left]),
        _majority(y_signed[~go_left], w[~go_left]),
    )


@dataclass(frozen=True)
class AdaBoost:
    """Discrete AdaBoost with Gini stumps; score = sum of alpha-weighted votes."""

    stumps: tuple[Stump, ...]
    alphas: tuple[float, ...]
    errors: tuple[float, ...]

    threshold = 0.0

    @classmethod
    def fit(cls, config, X, y):
        ys = 2.0 * y - 1.0
        w = np.full(y.shape[0], 1.0 / y.shape[0])
        stumps, alphas, errors = [], [], []
        order = presort(X)
        for _ in range(config.rounds):
            stump = fit_stump(X, ys, w, order)
            h = stump.vote(X)
            eps = float(w[h != ys].sum())
            if eps >= 0.5:
                break
            perfect = eps < ADA_MIN_ERROR
            eps_used = max(eps, ADA_MIN_ERROR)
            alpha = 0.5 * math.log((1.0 - eps_used) / eps_used)
            stumps.append(stump)
            alphas.append(alpha)
            errors.append(eps)
            if perfect:
                break
            w = w * np.exp(-alpha * ys * h)
            w /= w.sum()
        return cls(tuple(stumps), tuple(alphas), tuple(errors))

    def scores(self, X):
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            total += alpha * stump.vote(X)
        return total

    def to_dict(self):
        return {
            "stumps": [
                {"feature": s.feature, "threshold": s.threshold, "left": s.left, "right": s.right}
                for s in self.stumps
            ],
            "alphas": list(self.alphas),
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, doc):
        stumps = tuple(
            Stump(int(s["feature"]), float(s["threshold"]), int(s["left"]), int(s["right"]))
            for s in doc["stumps"]
        )
        return cls(stumps, tuple(map(float, doc["alphas"])), tuple(map(float, doc["errors"])))
