"""Weighted-Gini CART: split search, tree growth and array-backed trees.

The same node-array container also holds the Newton-step regression trees
grown by the gradient booster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Decreases at or below this are rounding noise, not a real split.
MIN_DECREASE = 1e-12

LEAF = -1


@dataclass(frozen=True)
class SplitDecision:
    feature_index: int
    threshold: float
    impurity_decrease: float


def _midpoint(a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    # adjacent floats: the midpoint can round onto b, which would send b left
    return a if mid >= b else mid


def gini(labels: np.ndarray, weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        return 0.0
    p = float(weights[labels == 1].sum() / total)
    return 2.0 * p * (1.0 - p)


def _sorted_views(X, order, feats):
    """Gather per-feature sorted values: row r of the result is X[order[r], feats[r]]."""
    return X[order, np.asarray(feats)[:, None]]


def _pick(gain):
    """Best (row, position) in a gains matrix: lowest row, then lowest position, among maxima."""
    per_row = np.argmax(gain, axis=1)
    best = gain[np.arange(gain.shape[0]), per_row]
    r = int(np.argmax(best))
    return r, int(per_row[r]), float(best[r])


def _valid_positions(xs, min_leaf):
    n = xs.shape[1]
    left_n = np.arange(1, n)
    return (xs[:, :-1] < xs[:, 1:]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)


def _gini_scan(xs, ws, wys, min_leaf):
    """Scan presorted rows; returns (row, position, decrease) or None."""
    total = ws[0].sum()
    pos = wys[0].sum()
    if total <= 0:
        return None
    parent = 2.0 * (pos / total) * (1.0 - pos / total)
    if parent <= 0.0:
        return None
    cw = np.cumsum(ws, axis=1)[:, :-1]
    cp = np.cumsum(wys, axis=1)[:, :-1]
    rw = total - cw
    rp = pos - cp
    valid = _valid_positions(xs, min_leaf) & (cw > 0) & (rw > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        child = 2.0 * cp * (cw - cp) / cw + 2.0 * rp * (rw - rp) / rw
    gain = np.where(valid, parent - child / total, -np.inf)
    r, i, g = _pick(gain)
    if not g > MIN_DECREASE:
        return None
    return r, i, g


def find_best_split(features, labels, weights, candidate_features, min_leaf: int = 1):
    """Best weighted-Gini split over ``candidate_features`` or ``None``.

    Thresholds are midpoints between adjacent distinct sorted values; rows go
    left when ``x <= threshold``. Ties prefer the lowest feature index, then
    the lowest threshold. ``impurity_decrease`` is relative to the node:
    parent Gini minus the weight-averaged child Gini.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    w = np.asarray(weights, dtype=np.float64)
    feats = sorted(int(c) for c in candidate_features)
    if y.shape[0] < 2 or not feats:
        return None
    order = np.argsort(X[:, feats], axis=0, kind="stable").T
    return _split_from_order(X, y == 1, w, order, feats, min_leaf)


def _split_from_order(X, is_attack, w, order, feats, min_leaf):
    xs = _sorted_views(X, order, feats)
    ws = w[order]
    wys = np.where(is_attack[order], ws, 0.0)
    found = _gini_scan(xs, ws, wys, min_leaf)
    if found is None:
        return None
    r, i, gain = found
    return SplitDecision(feats[r], _midpoint(float(xs[r, i]), float(xs[r, i + 1])), gain)


@dataclass(frozen=True)
class Tree:
    """Binary tree as parallel node arrays; ``feature == -1`` marks a leaf.

    ``importance`` holds each internal node's contribution to impurity-based
    feature importance (weighted Gini decrease or Newton gain); 0 at leaves.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importance: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def feature_importance(self, n_features: int) -> np.ndarray:
        out = np.zeros(n_features, dtype=np.float64)
        internal = self.feature != LEAF
        np.add.at(out, self.feature[internal], self.importance[internal])
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "importance": self.importance.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Tree:
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int64),
            threshold=np.asarray(doc["threshold"], dtype=np.float64),
            left=np.asarray(doc["left"], dtype=np.int64),
            right=np.asarray(doc["right"], dtype=np.int64),
            value=np.asarray(doc["value"], dtype=np.float64),
            importance=np.asarray(doc["importance"], dtype=np.float64),
        )

    def check(self) -> None:
        """Raise if the node arrays are not a well-formed binary tree."""
        n = self.n_nodes
        seen = np.zeros(n, dtype=np.int64)
        seen[0] = 1
        for i in range(n):
            if self.feature[i] == LEAF:
                if self.left[i] != LEAF or self.right[i] != LEAF:
                    raise ValueError(f"leaf {i} has children")
                if not np.isfinite(self.value[i]):
                    raise ValueError(f"leaf {i} has no value")
                continue
            for child in (self.left[i], self.right[i]):
                if not 0 < child < n:
                    raise ValueError(f"node {i} has invalid child {child}")
                seen[child] += 1
        if (seen != 1).any():
            raise ValueError("node arrays do not form a tree")


class _NodeBuffer:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right = [], [], [], []
        self.value, self.importance = [], []

    def add(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0.0)
        self.importance.append(0.0)
        return len(self.feature) - 1

    def freeze(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
            importance=np.asarray(self.importance, dtype=np.float64),
        )


def presort(X) -> np.ndarray:
    """Row order sorting each feature, shape (n_features, n_rows)."""
    return np.argsort(X, axis=0, kind="stable").T.copy()


def _partition(order, go_left_full):
    """Split every feature's sorted row list by a per-row mask, keeping sort order."""
    mask = go_left_full[order]
    n_left = int(mask[0].sum())
    left = order[mask].reshape(order.shape[0], n_left)
    right = order[~mask].reshape(order.shape[0], order.shape[1] - n_left)
    return left, right


def grow_gini_tree(X, y, weights=None, max_depth=16, min_leaf=2, n_candidates=None, rng=None, order=None) -> Tree:
    """Grow a classification tree; leaves hold the weighted attack fraction.

    Rows with zero weight (out-of-bag under bootstrap) are ignored. When
    ``n_candidates`` is below the feature count, each node draws that many
    candidate features from ``rng`` without replacement. ``order`` may carry
    a precomputed :func:`presort` of ``X`` shared between trees.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, n_features = X.shape
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if n_candidates is None or n_candidates >= n_features:
        n_candidates = n_features
    all_features = list(range(n_features))
    is_attack = y == 1
    if order is None:
        order = presort(X)
    in_bag = w > 0
    if not in_bag.all():
        order = order[in_bag[order]].reshape(n_features, int(in_bag.sum()))
    root_weight = w[in_bag].sum()
    go_left_full = np.zeros(n, dtype=bool)

    buf = _NodeBuffer()
    stack = [(buf.add(), order, 0)]
    while stack:
        node, node_order, depth = stack.pop()
        rows = node_order[0]
        wn = w[rows]
        total = wn.sum()
        buf.value[node] = float(wn[is_attack[rows]].sum() / total)
        if depth >= max_depth or rows.size < 2 * min_leaf:
            continue
        if n_candidates < n_features:
            feats = sorted(rng.choice(n_features, size=n_candidates, replace=False).tolist())
        else:
            feats = all_features
        split = _split_from_order(X, is_attack, w, node_order[feats], feats, min_leaf)
        if split is None:
            continue
        go_left_full[rows] = X[rows, split.feature_index] <= split.threshold
        left_order, right_order = _partition(node_order, go_left_full)
        left, right = buf.add(), buf.add()
        buf.feature[node] = split.feature_index
        buf.threshold[node] = split.threshold
        buf.left[node], buf.right[node] = left, right
        buf.importance[node] = split.impurity_decrease * total / root_weight
        # right pushed first so the left subtree is numbered first (preorder)
        stack.append((right, right_order, depth + 1))
        stack.append((left, left_order, depth + 1))
    return buf.freeze()


def _newton_scan(X, g, h, node_order, reg_lambda, min_leaf):
    feats = list(range(X.shape[1]))
    xs = _sorted_views(X, node_order, feats)
    gs = g[node_order]
    hs = h[node_order]
    G, H = gs[0].sum(), hs[0].sum()
    parent = G * G / (H + reg_lambda)
    gl = np.cumsum(gs, axis=1)[:, :-1]
    hl = np.cumsum(hs, axis=1)[:, :-1]
    valid = _valid_positions(xs, min_leaf)
    if not valid.any():
        return None
    gr, hr = G - gl, H - hl
    gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent)
    gain = np.where(valid, gain, -np.inf)
    r, i, best = _pick(gain)
    if not best > MIN_DECREASE:
        return None
    return r, _midpoint(float(xs[r, i]), float(xs[r, i + 1])), best


def grow_newton_tree(X, g, h, max_depth=3, reg_lambda=1.0, min_leaf=1, order=None) -> Tree:
    """Regression tree on gradient/hessian pairs; leaf value = -G / (H + lambda)."""
    X = np.asarray(X, dtype=np.float64)
    if order is None:
        order = presort(X)
    go_left_full = np.zeros(X.shape[0], dtype=bool)
    buf = _NodeBuffer()
    stack = [(buf.add(), order, 0)]
    while stack:
        node, node_order, depth = stack.pop()
        rows = node_order[0]
        buf.value[node] = float(-g[rows].sum() / (h[rows].sum() + reg_lambda))
        if depth >= max_depth or rows.size < 2 * min_leaf:
            continue
        split = _newton_scan(X, g, h, node_order, reg_lambda, min_leaf)
        if split is None:
            continue
        f, thr, gain = split
        go_left_full[rows] = X[rows, f] <= thr
        left_order, right_order = _partition(node_order, go_left_full)
        left, right = buf.add(), buf.add()
        buf.feature[node] = f
        buf.threshold[node] = thr
        buf.left[node], buf.right[node] = left, right
        buf.importance[node] = gain
        stack.append((right, right_order, depth + 1))
        stack.append((left, left_order, depth + 1))
    return buf.freeze()
