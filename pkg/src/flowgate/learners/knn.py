"""Brute-force k-nearest-neighbours with exact Euclidean tie handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUERY_BLOCK = 256


def neighbours(train: np.ndarray, queries: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest training rows per query, shape (n_queries, k).

    Ordering is by exact squared distance, ties broken by training-row index.
    Candidates are preselected with the fast expanded-norm formula and then
    re-ranked with direct differences, so the result matches a plain
    full-scan sort.
    """
    train = np.asarray(train, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    n = train.shape[0]
    sq_train = np.einsum("ij,ij->i", train, train)
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    for start in range(0, queries.shape[0], QUERY_BLOCK):
        q = queries[start:start + QUERY_BLOCK]
        sq_q = np.einsum("ij,ij->i", q, q)
        approx = sq_q[:, None] + sq_train[None, :] - 2.0 * (q @ train.T)
        # slack bounds the cancellation error of the expanded formula
        slack = 1e-9 * (sq_q[:, None] + sq_train.max()) + 1e-12
        if k < n:
            kth = np.partition(approx, k - 1, axis=1)[:, k - 1:k]
        else:
            kth = approx.max(axis=1, keepdims=True)
        for r in range(q.shape[0]):
            cand = np.flatnonzero(approx[r] <= kth[r, 0] + slack[r, 0])
            diff = train[cand] - q[r]
            d2 = np.einsum("ij,ij->i", diff, diff)
            order = np.lexsort((cand, d2))[:k]
            out[start + r] = cand[order]
    return out


@dataclass(frozen=True)
class KNN:
    """Keeps the training set; the score is the attack fraction among k neighbours."""

    k: int
    train_X: np.ndarray
    train_y: np.ndarray

    threshold = 0.5

    @classmethod
    def fit(cls, config, X, y):
        if config.k > X.shape[0]:
            raise ValueError(f"k={config.k} exceeds the {X.shape[0]} training rows")
        return cls(config.k, np.array(X, dtype=np.float64), np.array(y, dtype=np.int64))

    def scores(self, X):
        idx = neighbours(self.train_X, X, self.k)
        return self.train_y[idx].mean(axis=1)

    def to_dict(self):
        return {"k": self.k, "train_X": self.train_X.tolist(), "train_y": self.train_y.tolist()}

    @classmethod
    def from_dict(cls, doc):
        X = np.asarray(doc["train_X"], dtype=np.float64).reshape(len(doc["train_y"]), -1)
        return cls(int(doc["k"]), X, np.asarray(doc["train_y"], dtype=np.int64))
