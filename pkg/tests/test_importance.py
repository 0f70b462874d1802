import csv

import numpy as np
import pytest

from flowgate.dataio import DataError, LabeledDataset
from flowgate.importance import (
    FeatureRanking,
    impurity_importance,
    label_correlations,
    top_k,
    write_rankings_csv,
)
from flowgate.learners import DecisionTreeConfig, GradientBoostConfig, RandomForestConfig, TrainedModel, train
from flowgate.learners.ensemble import DecisionTree
from flowgate.learners.tree import Tree


def test_label_copy_first_constant_last():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, size=200)
    X = np.c_[rng.normal(size=200), np.full(200, 3.0), y, rng.normal(size=200) + 0.5 * y]
    ranking = label_correlations(LabeledDataset(X, y, ("noise", "const", "copy", "weak")))
    assert ranking.entries[0] == ("copy", 1.0)
    assert ranking.entries[-1] == ("const", 0.0)
    assert all(abs(s) <= 1.0 for _, s in ranking.entries)


def test_mirror_features_ordered_by_name():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, size=100)
    x = rng.normal(size=100) + y
    ranking = label_correlations(LabeledDataset(np.c_[x, -x], y, ("zeta", "alpha")))
    assert ranking.names() == ["alpha", "zeta"]
    assert abs(ranking.entries[0][1]) == pytest.approx(abs(ranking.entries[1][1]), abs=1e-15)


def test_label_correlations_need_two_classes():
    with pytest.raises(DataError):
        label_correlations(LabeledDataset(np.zeros((3, 1)), np.zeros(3, np.int64), ("a",)))


def tree_model(tree, names):
    return TrainedModel(DecisionTreeConfig(), DecisionTree(tree), 0.0, tuple(names))


def test_single_split_tree():
    X = np.array([[0.0, 5.0], [1.0, 3.0], [2.0, 9.0], [3.0, 1.0]])
    model = train(DecisionTreeConfig(min_leaf=1), LabeledDataset(X, np.array([0, 0, 1, 1]), ("j", "k")))
    ranking = impurity_importance(model)
    assert ranking.entries == (("j", 1.0), ("k", 0.0))
    assert ranking.source == "tree"


def test_leaf_only_model_scores_zero():
    leaf = Tree.from_dict({"feature": [-1], "threshold": [0.0], "left": [-1], "right": [-1],
                           "value": [0.5], "importance": [0.0]})
    ranking = impurity_importance(tree_model(leaf, ["a", "b"]))
    assert [s for _, s in ranking.entries] == [0.0, 0.0]


def test_forest_finds_the_deciding_feature():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(5000, 2))
    y = (X[:, 0] > 0.3).astype(np.int64)
    model = train(RandomForestConfig(n_trees=20, max_features="all", seed=1), LabeledDataset(X, y, ("f0", "f1")))
    scores = dict(impurity_importance(model).entries)
    assert scores["f0"] > scores["f1"]
    assert sum(scores.values()) == pytest.approx(1.0)


@pytest.mark.parametrize("config", [RandomForestConfig(n_trees=8, seed=5), GradientBoostConfig(rounds=15)])
def test_impurity_scale_invariant(config):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(400, 4))
    y = (X[:, 0] + X[:, 1] ** 2 + 0.3 * rng.normal(size=400) > 1).astype(np.int64)
    names = ("a", "b", "c", "d")
    base = impurity_importance(train(config, LabeledDataset(X, y, names)))
    scaled = impurity_importance(train(config, LabeledDataset(X * [5.0, 0.2, 1e3, 3.0], y, names)))
    assert base.names() == scaled.names()
    np.testing.assert_allclose([s for _, s in base.entries], [s for _, s in scaled.entries], rtol=0, atol=1e-9)


def ranking_of(n):
    return FeatureRanking("pearson-label", tuple((f"f{i:02d}", 1.0 - i / n) for i in range(n)))


def test_top_k():
    full = ranking_of(40)
    assert len(top_k(full, 10)) == 10
    assert top_k(full, 100) == full
    assert top_k(full, len(full)) == full
    assert top_k(full, 1).entries == (("f00", 1.0),)
    with pytest.raises(ValueError):
        top_k(full, 0)


def test_rankings_csv(tmp_path):
    path = tmp_path / "importance.csv"
    impurity = FeatureRanking("impurity", (("a", 0.7), ("b", 0.3)), source="forest")
    write_rankings_csv([ranking_of(3), impurity], path)
    rows = list(csv.DictReader(path.open()))
    assert [r["method"] for r in rows] == ["pearson-label"] * 3 + ["impurity:forest"] * 2
    assert rows[3] == {"rank": "1", "feature": "a", "score": "0.7", "method": "impurity:forest"}
