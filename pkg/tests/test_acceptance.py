"""End-to-end acceptance checks, one test per criterion.

A per-criterion PASS/FAIL/SKIP line is printed in the terminal summary.
"""

import math
import os
import re
import time

import numpy as np
import pytest

from flowgate import synth
from flowgate.dataio import LabeledDataset, binarize_labels, split_table, write_flow_csv
from flowgate.learners import AdaBoostConfig, GradientBoostConfig, KNNConfig, predict_labels, train
from flowgate.learners.knn import neighbours
from flowgate.metrics import ConfusionMatrix, classification_scores, roc_curve
from flowgate.pipeline import prepare
from flowgate.preprocess import apply_plan, fit_plan

from .conftest import run_compare_cli

DATASET_ENV = "FLOWGATE_CICDDOS_CSV"


def numeric_dataset(spec):
    """Clean synthetic table straight to a matrix, bypassing preprocessing."""
    table, labels, _ = synth.generate(spec)
    y, rest, _ = binarize_labels(table)
    X = np.array([[float(c) for c in row] for row in rest.rows])
    return LabeledDataset(X, y, rest.headers)


def by_algorithm(report):
    return {r["algorithm"]: r for r in report["results"]}


@pytest.mark.criterion(1, "metric identities on 1000 random confusion matrices")
def test_metric_identities():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    counts = rng.integers(0, 6, size=(1000, 4)) * rng.integers(0, 2, size=(1000, 4)) * rng.integers(1, 50, size=(1000, 1))
    counts[counts.sum(axis=1) == 0, 1] = 1
    zero_denominators = 0
    for tp, tn, fp, fn in counts.tolist():
        got = classification_scores(ConfusionMatrix(tp, tn, fp, fn))
        accuracy = (tp + tn) / (tp + tn + fp + fn)
        precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
        recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) > 0 else 0.0
        assert got == {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}
        zero_denominators += (tp + fp == 0) or (tp + fn == 0)
    assert zero_denominators > 50
    empty_positive = classification_scores(ConfusionMatrix(tp=0, tn=95, fp=0, fn=5))
    assert empty_positive == {"accuracy": 0.95, "precision": 0.0, "recall": 0.0, "f1": 0.0}
    assert time.perf_counter() - start < 1.0


def pair_count_auc(y, s):
    pos, neg = s[y == 1], s[y == 0]
    diff = pos[:, None] - neg[None, :]
    return float(((diff > 0).sum() + 0.5 * (diff == 0).sum()) / (pos.size * neg.size))


@pytest.mark.criterion(2, "ROC trapezoid AUC equals pair-counting AUC; rank invariance")
def test_roc_oracle():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(2, 201))
        y = rng.integers(0, 2, size=n)
        y[rng.choice(n, 2, replace=False)] = [0, 1]
        s = np.round(rng.normal(size=n) + 0.7 * y, int(rng.integers(0, 3)))
        roc = roc_curve(y, s)
        assert abs(roc.auc - pair_count_auc(y, s)) <= 1e-12
        for transform in (lambda v: 2 * v + 1, lambda v: v ** 3):
            moved = roc_curve(y, transform(s))
            assert moved.auc == roc.auc
            assert moved.points == roc.points
    assert time.perf_counter() - start < 5.0


def brute_force_labels(X, y, Q, k):
    out = np.empty(Q.shape[0], dtype=np.int64)
    for i, q in enumerate(Q):
        d = np.array([sum((a - b) ** 2 for a, b in zip(row, q)) for row in X.tolist()])
        nearest = np.argsort(d, kind="stable")[:k]
        out[i] = int(y[nearest].sum() / k > 0.5)
    return out


@pytest.mark.criterion(3, "KNN equals brute-force scan for k in 1, 3, 5")
def test_knn_oracle():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    X = rng.normal(size=(500, 10))
    y = (X[:, 0] + 0.5 * rng.normal(size=500) > 0).astype(np.int64)
    Q = rng.normal(size=(200, 10))
    data = LabeledDataset(X, y, [f"f{j}" for j in range(10)])
    for k in (1, 3, 5):
        model = train(KNNConfig(k=k), data)
        assert np.array_equal(predict_labels(model, Q), brute_force_labels(X, y, Q, k))
    # integer grid: many exact distance ties, broken by training-row index
    Xi = rng.integers(0, 3, size=(500, 10)).astype(float)
    Qi = rng.integers(0, 3, size=(200, 10)).astype(float)
    for k in (1, 3, 5):
        expected = np.array([np.argsort(((Xi - q) ** 2).sum(axis=1), kind="stable")[:k] for q in Qi])
        assert np.array_equal(neighbours(Xi, Qi, k), expected)
    assert time.perf_counter() - start < 5.0


@pytest.mark.criterion(4, "AdaBoost re-weighted error of each accepted stump is 0.5")
def test_adaboost_identity():
    spec = synth.SynthSpec(n_benign=600, n_attack=1400, n_numeric_features=8, class_separation=2.0, seed=4)
    data = numeric_dataset(spec)
    start = time.perf_counter()
    model = train(AdaBoostConfig(rounds=50), data)
    params = model.params
    assert len(params.stumps) == 50
    ys = 2.0 * data.labels - 1.0
    w = np.full(len(data), 1.0 / len(data))
    for stump, alpha, stored in zip(params.stumps, params.alphas, params.errors):
        h = stump.vote(data.features)
        wrong = h != ys
        eps = w[wrong].sum()
        assert abs(eps - stored) <= 1e-12
        assert abs(alpha - 0.5 * math.log((1 - eps) / eps)) <= 1e-9
        w = w * np.exp(-alpha * ys * h)
        w = w / w.sum()
        assert abs(w[wrong].sum() - 0.5) <= 1e-9
    assert time.perf_counter() - start < 10.0


@pytest.mark.criterion(5, "GradientBoost training log-loss never increases over 100 rounds")
def test_boosting_loss_monotone():
    spec = synth.SynthSpec(n_benign=1000, n_attack=9000, n_numeric_features=20, class_separation=3.0, seed=5)
    data = numeric_dataset(spec)
    start = time.perf_counter()
    model = train(GradientBoostConfig(rounds=100, learning_rate=0.1), data)
    y = data.labels.astype(float)
    losses = []
    for rounds in range(101):
        z = model.params.logits(data.features, rounds)
        # log(1 + e^z) - y z written without logaddexp
        losses.append(float(np.mean(np.maximum(z, 0) + np.log1p(np.exp(-np.abs(z))) - y * z)))
    steps = np.diff(losses)
    assert steps.max() <= 1e-9
    assert np.allclose(losses, model.params.train_loss, rtol=0, atol=1e-12)
    assert losses[-1] < losses[0]
    assert time.perf_counter() - start < 60.0


def train_mean(cells):
    values = []
    for c in cells:
        c = c.strip()
        if c == "" or c.lower() == "nan":
            continue
        v = float(c)
        if math.isfinite(v):
            values.append(v)
    return sum(values) / len(values)


@pytest.mark.criterion(6, "preprocessing contract on a dirty synthetic table")
def test_preprocessing_contract():
    spec = synth.SynthSpec(
        n_benign=1000, n_attack=9000, null_rate=0.02, inf_rate=0.01,
        n_constant_columns=3, n_noise_columns=5, n_categorical_columns=2, seed=6,
    )
    start = time.perf_counter()
    table, _, _ = synth.generate(spec)
    labels, rest, _ = binarize_labels(table)
    tr, ytr, te, yte, _ = split_table(rest, labels, 0.8, seed=6)
    plan = fit_plan(tr, ytr, 0.01)
    train_ds = apply_plan(plan, tr, ytr)
    test_ds = apply_plan(plan, te, yte)

    assert np.isfinite(train_ds.features).all() and np.isfinite(test_ds.features).all()
    constants = {f"Constant {j}" for j in range(3)}
    assert constants <= plan.dropped_zero_variance
    noise = {f"Noise {j}" for j in range(5)}
    assert len(noise & plan.dropped_low_correlation) >= 4

    # held-out nulls must be filled with the training-partition mean
    kept = set(test_ds.feature_names)
    category_cols = [te.index(c) for c in plan.categorical_columns]
    kept_rows = [i for i, row in enumerate(te.rows) if all(row[j].strip() != "" for j in category_cols)]
    position = {raw: out for out, raw in enumerate(kept_rows)}
    spots = []
    for name in test_ds.feature_names:
        if name in plan.encodings:
            continue
        col = te.index(name)
        for i in kept_rows:
            if te.rows[i][col].strip() in ("", "NaN"):
                spots.append((name, i))
                break
        if len(spots) == 10:
            break
    assert len(spots) == 10
    for name, i in spots:
        expected = train_mean(tr.column(name))
        held_out = train_mean(te.column(name))
        got = test_ds.features[position[i], test_ds.feature_names.index(name)]
        assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert abs(expected - held_out) > 1e-9
        assert name in kept
    assert time.perf_counter() - start < 30.0


@pytest.mark.criterion(7, "benchmark ranking: boosters >= forest >= KNN at separation 6, 90/10")
def test_table_one_analogue(benchmark_run):
    _, report, elapsed = benchmark_run
    rows = by_algorithm(report)
    f1 = {a: r["f1"] for a, r in rows.items()}
    assert set(rows) == {"nb", "knn", "svm", "tree", "forest", "ada", "gbt"}
    assert f1["ada"] >= 0.999 and f1["gbt"] >= 0.999
    assert f1["forest"] >= 0.99 and f1["knn"] >= 0.99
    for algo, r in rows.items():
        if algo != "nb":
            assert r["accuracy"] >= 0.99, algo
    assert min(f1["gbt"], f1["ada"]) >= f1["forest"] >= f1["knn"]
    assert elapsed < 180.0


@pytest.mark.criterion(8, "Naive Bayes accuracy-F1 gap under 95/5 imbalance with correlated features")
def test_naive_bayes_imbalance(tmp_path):
    spec = synth.IMBALANCE
    assert spec.n_benign / spec.n_rows == 0.95 and spec.feature_correlation >= 0.8
    start = time.perf_counter()
    data = tmp_path / "imbalance.csv"
    table, labels, _ = synth.generate(spec)
    write_flow_csv(table, data)
    prep = prepare(data, seed=spec.seed)
    X, y = prep.train.features, prep.train.labels
    within = np.corrcoef(X[y == 0], rowvar=False)
    assert within[~np.eye(within.shape[0], dtype=bool)].min() >= 0.8
    report, _ = run_compare_cli(data, tmp_path / "out", "--algos", "nb,gbt")
    rows = by_algorithm(report)
    assert rows["nb"]["accuracy"] - rows["nb"]["f1"] >= 0.10
    assert rows["gbt"]["accuracy"] - rows["gbt"]["f1"] <= 0.02
    assert time.perf_counter() - start < 60.0


VOLATILE = re.compile(r'("timestamp": )"[^"]*"|("\w+_seconds": )[-0-9.eE+]+')


def masked(path):
    return VOLATILE.sub(lambda m: (m.group(1) or m.group(2)) + "null", path.read_text(encoding="utf-8")).encode()


@pytest.mark.criterion(9, "two identical compare runs give byte-identical reports")
def test_determinism(benchmark_csv, benchmark_run, tmp_path):
    first_dir, _, first_elapsed = benchmark_run
    _, second_elapsed = run_compare_cli(benchmark_csv, tmp_path)
    assert masked(first_dir / "report.json") == masked(tmp_path / "report.json")
    assert second_elapsed < 2 * first_elapsed


@pytest.mark.criterion(10, "CICDDoS2019 shard ranking (needs FLOWGATE_CICDDOS_CSV)")
def test_real_dataset_ranking(tmp_path):
    path = os.environ.get(DATASET_ENV)
    if not path:
        pytest.skip(f"{DATASET_ENV} is not set")
    from flowgate.dataio import load_flow_csv

    table = load_flow_csv(path)
    labels, _, _ = binarize_labels(table)
    if table.row_count > 100_000:
        sample, _, _, _, _ = split_table(table, labels, 100_000 / table.row_count, seed=0)
        table = sample
    shard = tmp_path / "shard.csv"
    write_flow_csv(table, shard)
    report, _ = run_compare_cli(shard, tmp_path / "out")
    rows = by_algorithm(report)
    f1 = {a: r["f1"] for a, r in rows.items()}
    gap = {a: r["accuracy"] - r["f1"] for a, r in rows.items()}
    assert min(f1["ada"], f1["gbt"]) >= f1["forest"] >= f1["nb"]
    assert max(gap, key=gap.get) == "nb"
