"""Feature rankings: Pearson correlation with the label, and tree impurity contribution."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import DataError, LabeledDataset
from .learners import tree_list
from .preprocess import pearson

DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class FeatureRanking:
    method: str  # "pearson-label" or "impurity"
    entries: tuple[tuple[str, float], ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "source": self.source,
            "entries": [{"rank": i + 1, "feature": n, "score": s} for i, (n, s) in enumerate(self.entries)],
        }


def label_correlations(ds: LabeledDataset) -> FeatureRanking:
    n_benign, n_attack = ds.class_counts()
    if n_benign == 0 or n_attack == 0:
        raise DataError("label correlation needs both classes present")
    scored = [(name, pearson(ds.features[:, j], ds.labels)) for j, name in enumerate(ds.feature_names)]
    scored.sort(key=lambda e: (-abs(e[1]), e[0]))
    return FeatureRanking("pearson-label", tuple(scored), source="label")


def impurity_importance(model) -> FeatureRanking:
    """Sum of node impurity decreases per feature over every tree, normalised to 1."""
    trees = tree_list(model)
    totals = np.zeros(model.n_features)
    for t in trees:
        totals += t.feature_importance(model.n_features)
    s = totals.sum()
    if s > 0:
        totals = totals / s
    scored = sorted(zip(model.feature_names, totals.tolist()), key=lambda e: (-e[1], e[0]))
    return FeatureRanking("impurity", tuple(scored), source=model.family)


def top_k(ranking: FeatureRanking, k: int = DEFAULT_TOP_K) -> FeatureRanking:
    if k < 1:
        raise ValueError("k must be >= 1")
    return FeatureRanking(ranking.method, ranking.entries[:k], ranking.source)


def write_rankings_csv(rankings, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "score", "method"])
        for ranking in rankings:
            method = ranking.method if ranking.method != "impurity" else f"impurity:{ranking.source}"
            for i, (name, score) in enumerate(ranking.entries):
                w.writerow([i + 1, name, repr(float(score)), method])
