"""Second-order gradient boosting of regression trees on the logistic loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import Tree, grow_newton_tree, presort


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def log_loss(y, logits) -> float:
    """Mean logistic loss for 0/1 labels given raw logits (numerically stable)."""
    z = np.asarray(logits, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


@dataclass(frozen=True)
class GradientBoost:
    """Additive logit model: ``base_logit + learning_rate * sum(tree(x))``.

    Each tree is fit to the gradient and hessian of the logistic loss with
    leaf weights ``-G / (H + reg_lambda)`` and split gain
    ``(G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)) / 2``.
    """

    base_logit: float
    learning_rate: float
    members: tuple[Tree, ...]
    train_loss: tuple[float, ...]

    threshold = 0.5

    @classmethod
    def fit(cls, config, X, y):
        y = y.astype(np.float64)
        p0 = y.mean()
        base = math.log(p0 / (1.0 - p0))
        logits = np.full(y.shape[0], base)
        members = []
        losses = [log_loss(y, logits)]
        order = presort(X)
        for _ in range(config.rounds):
            p = sigmoid(logits)
            g = p - y
            h = p * (1.0 - p)
            tree = grow_newton_tree(X, g, h, config.max_depth, config.reg_lambda, config.min_leaf, order)
            members.append(tree)
            logits = logits + config.learning_rate * tree.predict(X)
            losses.append(log_loss(y, logits))
        return cls(base, config.learning_rate, tuple(members), tuple(losses))

    def logits(self, X, rounds=None):
        X = np.asarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.base_logit)
        for tree in self.members[:rounds]:
            out += self.learning_rate * tree.predict(X)
        return out

    def scores(self, X):
        return sigmoid(self.logits(X))

    def trees(self):
        return list(self.members)

    def to_dict(self):
        return {
            "base_logit": self.base_logit,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.members],
            "train_loss": list(self.train_loss),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            float(doc["base_logit"]),
            float(doc["learning_rate"]),
            tuple(Tree.from_dict(t) for t in doc["trees"]),
            tuple(map(float, doc["train_loss"])),
        )
