import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowgate import synth
from flowgate.dataio import DataError, RawTable, binarize_labels
from flowgate.pipeline import load_schema
from flowgate.preprocess import (
    UNSEEN_CATEGORY,
    PreprocessPlan,
    apply_plan,
    apply_plan_with_mask,
    fit_plan,
    parse_cell,
    pearson,
)


def table(**columns):
    names = list(columns)
    rows = list(zip(*(columns[n] for n in names)))
    return RawTable(tuple(names), rows)


# "signal" tracks the label so the plan keeps at least one column
LABELS = np.array([0, 0, 1])


def test_null_filled_with_mean():
    t = table(a=["1", "3", ""], signal=["0", "0", "1"])
    plan = fit_plan(t, LABELS, threshold=0.0)
    assert plan.column_means["a"] == 2.0
    ds = apply_plan(plan, t, LABELS)
    assert ds.features[2, ds.feature_names.index("a")] == 2.0


def test_infinity_replaced_by_finite_extremes():
    t = table(a=["1", "2", "inf"], b=["4", "-Infinity", "6"], signal=["0", "0", "1"])
    plan = fit_plan(t, LABELS, threshold=0.0)
    assert plan.column_finite_max["a"] == 2.0
    ds = apply_plan(plan, t, LABELS)
    assert ds.features[2, ds.feature_names.index("a")] == 2.0
    assert ds.features[1, ds.feature_names.index("b")] == 4.0


def test_constant_column_dropped():
    t = table(a=["5", "5", "5"], signal=["0", "0", "1"])
    plan = fit_plan(t, LABELS)
    assert plan.dropped_zero_variance == {"a"}
    assert plan.fitted_feature_order == ("signal",)


def test_label_copy_kept_noise_dropped():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, size=10000)
    t = table(copy=[str(v) for v in y], noise=[repr(v) for v in rng.normal(size=10000)])
    plan = fit_plan(t, y, threshold=0.1)
    assert "copy" in plan.fitted_feature_order
    assert plan.column_correlations["copy"] == 1.0
    assert plan.dropped_low_correlation == {"noise"}


def test_replay_is_deterministic():
    t = table(a=["1", "", "7", "2"], c=["x", "y", "x", "z"], signal=["0", "1", "1", "0"])
    y = np.array([0, 1, 1, 0])
    plan = fit_plan(t, y, threshold=0.0)
    first, second = apply_plan(plan, t, y), apply_plan(plan, t, y)
    assert np.array_equal(first.features, second.features)


def test_held_out_null_uses_training_mean():
    train = table(a=["1", "3", "2"], signal=["0", "0", "1"])
    plan = fit_plan(train, LABELS, threshold=0.0)
    test = table(a=["100", "", "300"], signal=["0", "1", "1"])
    ds = apply_plan(plan, test, np.array([0, 1, 1]))
    assert ds.features[1, ds.feature_names.index("a")] == 2.0


def test_unseen_category_gets_reserved_code():
    train = table(proto=["TCP", "UDP", "UDP", "TCP"], signal=["0", "1", "1", "0"])
    y = np.array([0, 1, 1, 0])
    plan = fit_plan(train, y, threshold=0.0)
    assert plan.encodings["proto"] == {"TCP": 0, "UDP": 1}
    test = table(proto=["WXYZ", "UDP"], signal=["1", "0"])
    ds = apply_plan(plan, test, np.array([1, 0]))
    assert ds.features[:, ds.feature_names.index("proto")].tolist() == [UNSEEN_CATEGORY, 1]


def test_rows_with_null_category_removed():
    t = table(proto=["TCP", "", "UDP", "nan", "TCP"], signal=["0", "1", "1", "0", "1"])
    y = np.array([0, 1, 1, 0, 1])
    plan = fit_plan(t, y, threshold=0.0)
    ds, keep = apply_plan_with_mask(plan, t, y)
    assert keep.tolist() == [True, False, True, False, True]
    assert plan.fit_rows_removed == 2 and len(ds) == plan.fit_rows - plan.fit_rows_removed
    assert ds.labels.tolist() == [0, 1, 1]


def test_missing_column_rejected():
    plan = fit_plan(table(a=["1", "2", "3"], signal=["0", "0", "1"]), LABELS, threshold=0.0)
    with pytest.raises(DataError, match="missing columns"):
        apply_plan(plan, table(a=["1"]), np.array([0]))


def test_everything_dropped_is_an_error():
    with pytest.raises(DataError, match="every column"):
        fit_plan(table(a=["1", "1", "1"]), LABELS)


def test_parse_cell_tokens():
    assert np.isnan(parse_cell(" NaN "))
    assert np.isnan(parse_cell(""))
    assert np.isnan(parse_cell("abc"))
    assert parse_cell("Infinity") == np.inf
    assert parse_cell("-inf") == -np.inf


@pytest.mark.parametrize(
    "x, y, r",
    [([1, 2, 3], [1, 2, 3], 1.0), ([1, 2, 3], [3, 2, 1], -1.0), ([1, 2, 3, 4], [1, 3, 2, 4], 0.8)],
)
def test_pearson_hand_values(x, y, r):
    assert pearson(x, y) == pytest.approx(r, abs=1e-15)


def test_pearson_constant_is_zero():
    assert pearson([2, 2, 2], [0, 1, 0]) == 0.0


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=40), st.floats(0.01, 100), st.floats(-50, 50))
def test_pearson_symmetric_and_affine_invariant(pairs, a, b):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-12)
    assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-9)


@pytest.fixture(scope="module")
def dirty():
    spec = synth.SynthSpec(
        n_benign=300, n_attack=1700, null_rate=0.03, inf_rate=0.02,
        n_constant_columns=2, n_noise_columns=3, n_categorical_columns=2, seed=11,
    )
    t, _, _ = synth.generate(spec)
    y, rest, _ = binarize_labels(t)
    return rest, y


def test_dirty_table_invariants(dirty):
    t, y = dirty
    plan = fit_plan(t, y)
    ds, keep = apply_plan_with_mask(plan, t, y)
    assert np.isfinite(ds.features).all()
    assert int((~keep).sum()) == plan.fit_rows_removed
    for name in plan.dropped_zero_variance:
        col = [parse_cell(c) for c, k in zip(t.column(name), keep) if k]
        repaired = np.nan_to_num(np.array(col), nan=plan.column_means[name],
                                 posinf=plan.column_finite_max[name], neginf=plan.column_finite_min[name])
        assert np.ptp(repaired) == 0


def test_plan_round_trip_and_schema(dirty, tmp_path):
    t, y = dirty
    plan = fit_plan(t, y)
    path = tmp_path / "plan.json"
    plan.save(path)
    jsonschema.validate(json.loads(path.read_text()), load_schema("plan"))
    again = PreprocessPlan.load(path)
    assert again == plan
    assert np.array_equal(apply_plan(again, t, y).features, apply_plan(plan, t, y).features)


def test_plan_version_checked(dirty):
    t, y = dirty
    doc = fit_plan(t, y).to_dict()
    doc["plan_version"] = 99
    with pytest.raises(DataError, match="plan_version"):
        PreprocessPlan.from_dict(doc)
