"""From-scratch binary classifiers behind one train / predict / score contract.

Attack (label 1) is the positive class. Every family exposes a real-valued
score whose comparison with a fixed per-family threshold gives the label.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataio import LabeledDataset
from .bayes import GaussianNB
from .boosting import GradientBoost
from .config import (
    ALGORITHMS,
    CONFIG_TYPES,
    DISPLAY_NAMES,
    AdaBoostConfig,
    ClassifierConfig,
    ConfigError,
    DecisionTreeConfig,
    GaussianNBConfig,
    GradientBoostConfig,
    KNNConfig,
    LinearSVMConfig,
    RandomForestConfig,
    config_from_dict,
    config_to_dict,
    default_config,
)
from .ensemble import AdaBoost, DecisionTree, RandomForest
from .knn import KNN
from .svm import LinearSVM
from .tree import SplitDecision, Tree, find_best_split

MODEL_VERSION = 1

FAMILIES = {
    "nb": GaussianNB,
    "knn": KNN,
    "svm": LinearSVM,
    "tree": DecisionTree,
    "forest": RandomForest,
    "ada": AdaBoost,
    "gbt": GradientBoost,
}

TREE_FAMILIES = ("tree", "forest", "gbt")

SCORE_DEFINITIONS = {
    "nb": "log-posterior difference log P(attack|x) - log P(benign|x); attack if > 0",
    "knn": "fraction of attack labels among the k nearest training rows; attack if > 0.5",
    "svm": "signed margin w.x + b; attack if > 0",
    "tree": "weighted attack fraction at the reached leaf; attack if > 0.5",
    "forest": "mean leaf attack fraction over all trees; attack if > 0.5",
    "ada": "alpha-weighted sum of +/-1 stump votes; attack if > 0",
    "gbt": "sigmoid of the boosted logit; attack if > 0.5",
}


class ModelError(ValueError):
    pass


def default_threads() -> int:
    value = os.environ.get("FLOWGATE_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ModelError(f"FLOWGATE_THREADS must be an integer, got {value!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TrainedModel:
    config: ClassifierConfig
    params: object
    train_seconds: float
    feature_names: tuple[str, ...]

    @property
    def family(self) -> str:
        return self.config.family

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def threshold(self) -> float:
        return self.params.threshold

    def to_dict(self) -> dict:
        return {
            "model_version": MODEL_VERSION,
            "family": self.family,
            "config": config_to_dict(self.config),
            "feature_names": list(self.feature_names),
            "train_seconds": self.train_seconds,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> TrainedModel:
        if doc.get("model_version") != MODEL_VERSION:
            raise ModelError(f"unsupported model_version {doc.get('model_version')!r}")
        config = config_from_dict(doc["config"])
        if config.family != doc["family"]:
            raise ModelError("family tag does not match config")
        params = FAMILIES[config.family].from_dict(doc["params"])
        return cls(config, params, float(doc["train_seconds"]), tuple(doc["feature_names"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> TrainedModel:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train(config: ClassifierConfig, data: LabeledDataset, threads: int | None = None) -> TrainedModel:
    """Fit ``config``'s family on ``data``; ``train_seconds`` covers the fit only."""
    family = config.family
    X, y = data.features, data.labels
    if len(data) == 0:
        raise ModelError("cannot train on an empty dataset")
    if family != "knn":
        n_benign, n_attack = data.class_counts()
        if n_benign == 0 or n_attack == 0:
            missing = "benign" if n_benign == 0 else "attack"
            raise ModelError(f"{DISPLAY_NAMES[family]} needs both classes; training data has no {missing} rows")
    cls = FAMILIES[family]
    start = time.perf_counter()
    if family == "forest":
        params = cls.fit(config, X, y, threads=threads or default_threads())
    else:
        params = cls.fit(config, X, y)
    elapsed = time.perf_counter() - start
    return TrainedModel(config, params, elapsed, data.feature_names)


def _as_matrix(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ModelError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return X


def predict_scores(model: TrainedModel, X) -> np.ndarray:
    return model.params.scores(_as_matrix(model, X))


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    return (predict_scores(model, X) > model.threshold).astype(np.int64)


def predict_score(model: TrainedModel, row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ModelError("predict_score takes a single row")
    return float(predict_scores(model, row)[0])


def predict_label(model: TrainedModel, row) -> int:
    return int(predict_score(model, row) > model.threshold)


def tree_list(model: TrainedModel) -> list[Tree]:
    if model.family not in TREE_FAMILIES:
        raise ModelError(f"{DISPLAY_NAMES[model.family]} is not a tree model")
    return model.params.trees()


__all__ = [
    "ALGORITHMS",
    "CONFIG_TYPES",
    "DISPLAY_NAMES",
    "SCORE_DEFINITIONS",
    "TREE_FAMILIES",
    "AdaBoostConfig",
    "ConfigError",
    "DecisionTreeConfig",
    "GaussianNBConfig",
    "GradientBoostConfig",
    "KNNConfig",
    "LinearSVMConfig",
    "ModelError",
    "RandomForestConfig",
    "SplitDecision",
    "TrainedModel",
    "Tree",
    "config_from_dict",
    "config_to_dict",
    "default_config",
    "find_best_split",
    "predict_label",
    "predict_labels",
    "predict_score",
    "predict_scores",
    "train",
    "tree_list",
]
