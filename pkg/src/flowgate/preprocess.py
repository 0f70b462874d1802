"""Five-step cleaning and reduction of flow tables as a fitted, replayable transform.

Fit order: numeric repair statistics, null-categorical row removal, ordinal
encoding, zero-variance drop, low label-correlation drop. Statistics are
frozen at fit time and replayed by :func:`apply_plan`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataio import DataError, LabeledDataset, RawTable

PLAN_VERSION = 1
DEFAULT_CORR_THRESHOLD = 0.01
UNSEEN_CATEGORY = -1

NULL_TOKENS = frozenset({"", "nan"})


def is_null(cell: str) -> bool:
    return cell.strip().lower() in NULL_TOKENS


def parse_cell(cell: str) -> float:
    """Parse one cell; null markers and unparsable text become NaN."""
    s = cell.strip()
    if s.lower() in NULL_TOKENS:
        return math.nan
    try:
        return float(s)
    except ValueError:
        return math.nan


def _try_numeric(cells: list[str]) -> np.ndarray | None:
    """Parse a column as floats, or return None if any non-null cell is not a number."""
    out = np.empty(len(cells), dtype=np.float64)
    for i, c in enumerate(cells):
        s = c.strip()
        if s.lower() in NULL_TOKENS:
            out[i] = math.nan
            continue
        try:
            out[i] = float(s)
        except ValueError:
            return None
    return out


def pearson(x, y) -> float:
    """Sample Pearson correlation; 0.0 when either vector is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs two 1-D vectors of equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        return 0.0
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


@dataclass(frozen=True)
class PreprocessPlan:
    input_columns: tuple[str, ...]
    numeric_columns: tuple[str, ...]
    column_means: dict[str, float]
    column_finite_max: dict[str, float]
    column_finite_min: dict[str, float]
    encodings: dict[str, dict[str, int]]
    dropped_zero_variance: frozenset[str]
    dropped_low_correlation: frozenset[str]
    correlation_threshold: float
    fitted_feature_order: tuple[str, ...]
    fit_rows: int = 0
    fit_rows_removed: int = 0
    column_correlations: dict[str, float] = field(default_factory=dict)

    @property
    def categorical_columns(self) -> tuple[str, ...]:
        return tuple(c for c in self.input_columns if c in self.encodings)

    def descriptor(self) -> dict:
        return {
            "correlation_threshold": self.correlation_threshold,
            "n_input_columns": len(self.input_columns),
            "n_features": len(self.fitted_feature_order),
            "n_dropped_zero_variance": len(self.dropped_zero_variance),
            "n_dropped_low_correlation": len(self.dropped_low_correlation),
            "fit_rows": self.fit_rows,
            "fit_rows_removed": self.fit_rows_removed,
            "fit_on": "train",
        }

    def to_dict(self) -> dict:
        return {
            "plan_version": PLAN_VERSION,
            "input_columns": list(self.input_columns),
            "numeric_columns": list(self.numeric_columns),
            "column_means": self.column_means,
            "column_finite_max": self.column_finite_max,
            "column_finite_min": self.column_finite_min,
            "encodings": self.encodings,
            "dropped_zero_variance": sorted(self.dropped_zero_variance),
            "dropped_low_correlation": sorted(self.dropped_low_correlation),
            "correlation_threshold": self.correlation_threshold,
            "fitted_feature_order": list(self.fitted_feature_order),
            "fit_rows": self.fit_rows,
            "fit_rows_removed": self.fit_rows_removed,
            "column_correlations": self.column_correlations,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> PreprocessPlan:
        version = doc.get("plan_version")
        if version != PLAN_VERSION:
            raise DataError(f"unsupported plan_version {version!r} (expected {PLAN_VERSION})")
        return cls(
            input_columns=tuple(doc["input_columns"]),
            numeric_columns=tuple(doc["numeric_columns"]),
            column_means={k: float(v) for k, v in doc["column_means"].items()},
            column_finite_max={k: float(v) for k, v in doc["column_finite_max"].items()},
            column_finite_min={k: float(v) for k, v in doc["column_finite_min"].items()},
            encodings={c: {k: int(v) for k, v in m.items()} for c, m in doc["encodings"].items()},
            dropped_zero_variance=frozenset(doc["dropped_zero_variance"]),
            dropped_low_correlation=frozenset(doc["dropped_low_correlation"]),
            correlation_threshold=float(doc["correlation_threshold"]),
            fitted_feature_order=tuple(doc["fitted_feature_order"]),
            fit_rows=int(doc.get("fit_rows", 0)),
            fit_rows_removed=int(doc.get("fit_rows_removed", 0)),
            column_correlations={k: float(v) for k, v in doc.get("column_correlations", {}).items()},
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> PreprocessPlan:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _repair(values: np.ndarray, mean: float, fmax: float, fmin: float) -> np.ndarray:
    out = values.copy()
    out[np.isnan(out)] = mean
    out[out == np.inf] = fmax
    out[out == -np.inf] = fmin
    return out


def _null_category_mask(table: RawTable, categorical: list[str]) -> np.ndarray:
    """True for rows that hold a null in any categorical column."""
    mask = np.zeros(table.row_count, dtype=bool)
    for name in categorical:
        j = table.index(name)
        mask |= np.fromiter((is_null(r[j]) for r in table.rows), dtype=bool, count=table.row_count)
    return mask


def fit_plan(train: RawTable, labels, threshold: float = DEFAULT_CORR_THRESHOLD) -> PreprocessPlan:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != train.row_count:
        raise DataError(f"{labels.shape[0]} labels for {train.row_count} rows")
    if threshold < 0:
        raise ValueError("correlation threshold must be >= 0")

    # step 1: per-column repair statistics over finite, non-null cells
    numeric: dict[str, np.ndarray] = {}
    raw_categorical: dict[str, list[str]] = {}
    means, fmax, fmin = {}, {}, {}
    for name in train.headers:
        cells = train.column(name)
        values = _try_numeric(cells)
        if values is None:
            raw_categorical[name] = cells
            continue
        numeric[name] = values
        finite = values[np.isfinite(values)]
        if finite.size:
            means[name] = float(finite.mean())
            fmax[name] = float(finite.max())
            fmin[name] = float(finite.min())
        else:
            # all null/inf: repaired column is constant and step 4 drops it
            means[name] = fmax[name] = fmin[name] = 0.0

    # step 2: rows with null categorical cells cannot be repaired
    removed = _null_category_mask(train, list(raw_categorical))
    keep = ~removed
    kept_labels = labels[keep]

    # step 3: ordinal codes in first-appearance order
    encodings: dict[str, dict[str, int]] = {}
    for name, cells in raw_categorical.items():
        codes: dict[str, int] = {}
        for c, k in zip(cells, keep):
            if k:
                codes.setdefault(c.strip(), len(codes))
        encodings[name] = codes

    repaired: dict[str, np.ndarray] = {}
    for name in train.headers:
        if name in numeric:
            repaired[name] = _repair(numeric[name][keep], means[name], fmax[name], fmin[name])
        else:
            codes = encodings[name]
            cells = raw_categorical[name]
            repaired[name] = np.array(
                [codes[c.strip()] for c, k in zip(cells, keep) if k], dtype=np.float64
            )

    # step 4: zero variance
    zero_var = {n for n, v in repaired.items() if v.size == 0 or np.ptp(v) == 0}

    # step 5: low |r| against the class label
    correlations: dict[str, float] = {}
    low_corr = set()
    for name in train.headers:
        if name in zero_var:
            continue
        r = pearson(repaired[name], kept_labels) if kept_labels.size >= 2 else 0.0
        correlations[name] = r
        if abs(r) < threshold:
            low_corr.add(name)

    order = tuple(n for n in train.headers if n not in zero_var and n not in low_corr)
    if not order:
        raise DataError("preprocessing removed every column; lower the correlation threshold")

    return PreprocessPlan(
        input_columns=tuple(train.headers),
        numeric_columns=tuple(numeric),
        column_means=means,
        column_finite_max=fmax,
        column_finite_min=fmin,
        encodings=encodings,
        dropped_zero_variance=frozenset(zero_var),
        dropped_low_correlation=frozenset(low_corr),
        correlation_threshold=float(threshold),
        fitted_feature_order=order,
        fit_rows=train.row_count,
        fit_rows_removed=int(removed.sum()),
        column_correlations=correlations,
    )


def apply_plan_with_mask(plan: PreprocessPlan, table: RawTable, labels):
    """Like :func:`apply_plan` but also returns the boolean mask of kept input rows."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != table.row_count:
        raise DataError(f"{labels.shape[0]} labels for {table.row_count} rows")
    missing = [c for c in plan.input_columns if c not in table.headers]
    if missing:
        raise DataError(f"table is missing columns expected by the plan: {missing}")

    keep = ~_null_category_mask(table, list(plan.categorical_columns))
    n_keep = int(keep.sum())
    X = np.empty((n_keep, len(plan.fitted_feature_order)), dtype=np.float64)
    for k, name in enumerate(plan.fitted_feature_order):
        j = table.index(name)
        if name in plan.encodings:
            codes = plan.encodings[name]
            X[:, k] = [codes.get(r[j].strip(), UNSEEN_CATEGORY) for r, ok in zip(table.rows, keep) if ok]
        else:
            values = np.array([parse_cell(r[j]) for r, ok in zip(table.rows, keep) if ok], dtype=np.float64)
            X[:, k] = _repair(
                values,
                plan.column_means[name],
                plan.column_finite_max[name],
                plan.column_finite_min[name],
            )
    return LabeledDataset(X, labels[keep], plan.fitted_feature_order), keep


def apply_plan(plan: PreprocessPlan, table: RawTable, labels) -> LabeledDataset:
    return apply_plan_with_mask(plan, table, labels)[0]
