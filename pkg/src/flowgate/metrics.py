"""Confusion matrix, accuracy / precision / recall / F1, ROC with AUC, and fit timing.

Attack (label 1) is the positive class throughout.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise MetricError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true).astype(np.int64)
    p = np.asarray(y_pred).astype(np.int64)
    if t.shape != p.shape:
        raise MetricError(f"length mismatch: {t.shape[0]} true vs {p.shape[0]} predicted labels")
    if t.size == 0:
        raise MetricError("cannot tally an empty prediction vector")
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
    )


def classification_scores(cm: ConfusionMatrix) -> dict:
    """Accuracy, precision, recall and F1; undefined ratios are reported as 0."""
    if cm.total == 0:
        raise MetricError("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fpr", "tpr"])
            for f, t in zip(self.fpr.tolist(), self.tpr.tolist()):
                w.writerow([repr(f), repr(t)])


def trapezoid_area(fpr, tpr) -> float:
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def roc_curve(y_true, scores) -> RocCurve:
    """Sweep thresholds over distinct scores, highest first; tied scores form one step.

    The AUC is accumulated in integer counts and divided once, so it is
    exact up to a single rounding.
    """
    y = np.asarray(y_true).astype(np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise MetricError("labels and scores differ in length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC needs both classes in y_true")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp = np.r_[0, np.cumsum(y_sorted)[ends]]
    fp = np.r_[0, np.cumsum(1 - y_sorted)[ends]]
    twice_area = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * n_pos * n_neg)
    return RocCurve(fpr=fp / n_neg, tpr=tp / n_pos, auc=auc)


def time_fit(thunk):
    """Run ``thunk`` and return ``(result, wall_seconds)`` from a monotonic clock."""
    start = time.perf_counter()
    result = thunk()
    return result, time.perf_counter() - start


@dataclass
class EvalReport:
    algorithm: str
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc: RocCurve
    train_seconds: float
    predict_seconds: float
    config: dict = field(default_factory=dict)
    split: dict = field(default_factory=dict)
    plan: dict = field(default_factory=dict)
    score_definition: str = ""

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "config": self.config,
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.roc.auc,
            "roc_points": len(self.roc.fpr),
            "score_definition": self.score_definition,
            "train_seconds": self.train_seconds,
            "predict_seconds": self.predict_seconds,
            "split": self.split,
            "plan": self.plan,
        }


def evaluate(model, data, *, split=None, plan=None) -> EvalReport:
    """Score ``model`` on ``data`` and assemble the full report."""
    from .learners import SCORE_DEFINITIONS, config_to_dict, predict_scores

    scores, predict_seconds = time_fit(lambda: predict_scores(model, data.features))
    labels = (scores > model.threshold).astype(np.int64)
    cm = confusion(data.labels, labels)
    return EvalReport(
        algorithm=model.family,
        confusion=cm,
        **classification_scores(cm),
        roc=roc_curve(data.labels, scores),
        train_seconds=model.train_seconds,
        predict_seconds=predict_seconds,
        config=config_to_dict(model.config),
        split=split or {},
        plan=plan or {},
        score_definition=SCORE_DEFINITIONS[model.family],
    )
