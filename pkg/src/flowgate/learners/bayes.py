"""Gaussian naive Bayes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianNB:
    """Per-class, per-feature Gaussians under the feature-independence assumption.

    The score is the log-posterior difference log P(attack|x) - log P(benign|x).
    """

    means: np.ndarray  # (2, n_features)
    variances: np.ndarray  # (2, n_features)
    priors: np.ndarray  # (2,)

    threshold = 0.0

    @classmethod
    def fit(cls, config, X, y):
        means = np.empty((2, X.shape[1]))
        variances = np.empty((2, X.shape[1]))
        priors = np.empty(2)
        for c in (0, 1):
            Xc = X[y == c]
            means[c] = Xc.mean(axis=0)
            variances[c] = np.maximum(Xc.var(axis=0), config.var_floor)
            priors[c] = Xc.shape[0] / X.shape[0]
        return cls(means, variances, priors)

    def _log_joint(self, X, c):
        diff = X - self.means[c]
        ll = -0.5 * (LOG_2PI + np.log(self.variances[c]) + diff * diff / self.variances[c])
        return np.log(self.priors[c]) + ll.sum(axis=1)

    def scores(self, X):
        return self._log_joint(X, 1) - self._log_joint(X, 0)

    def to_dict(self):
        return {
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "priors": self.priors.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(np.asarray(doc["means"]), np.asarray(doc["variances"]), np.asarray(doc["priors"]))
