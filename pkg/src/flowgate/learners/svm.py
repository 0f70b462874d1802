"""Linear SVM trained by Pegasos-style stochastic subgradient descent on the hinge loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def pegasos(X, y_signed, reg_lambda, epochs, seed):
    """Return (weights, bias). The bias is learned as the weight of a constant-1 feature.

    The iterate is stored as ``scale * v`` so the per-step shrinkage
    ``w <- (1 - 1/t) w`` costs O(1).
    """
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    rng = np.random.default_rng(seed)
    v = np.zeros(d + 1)
    scale = 1.0
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            xi = Xa[i]
            yi = y_signed[i]
            margin = yi * scale * float(v @ xi)
            if t == 1:
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= 1.0 - 1.0 / t
            if margin < 1.0:
                v += (yi / (reg_lambda * t * scale)) * xi
        if scale < 1e-150:
            v *= scale
            scale = 1.0
    w = scale * v
    return w[:-1].copy(), float(w[-1])


@dataclass(frozen=True)
class LinearSVM:
    weights: np.ndarray
    bias: float

    threshold = 0.0

    @classmethod
    def fit(cls, config, X, y):
        w, b = pegasos(X, 2.0 * y - 1.0, config.reg_lambda, config.epochs, config.seed)
        return cls(w, b)

    def scores(self, X):
        return X @ self.weights + self.bias

    def to_dict(self):
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, doc):
        return cls(np.asarray(doc["weights"], dtype=np.float64), float(doc["bias"]))
