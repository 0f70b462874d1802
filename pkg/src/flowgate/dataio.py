"""Flow-record CSV ingestion, label binarization and stratified splitting."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_LABEL_COLUMN = "Label"
BENIGN_LABEL = "BENIGN"


class DataError(ValueError):
    """Malformed input data (ragged rows, bad headers, missing labels)."""


@dataclass(frozen=True)
class RawTable:
    """Parsed CSV with string cells, before any typing."""

    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "headers", tuple(self.headers))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if len(set(self.headers)) != len(self.headers):
            dupes = sorted(h for h, c in Counter(self.headers).items() if c > 1)
            raise DataError(f"duplicate column names: {dupes}")
        width = len(self.headers)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise DataError(f"row {i} has {len(row)} cells, expected {width}")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def index(self, name: str) -> int:
        try:
            return self.headers.index(name)
        except ValueError:
            raise DataError(f"column {name!r} not found") from None

    def column(self, name: str) -> list[str]:
        j = self.index(name)
        return [row[j] for row in self.rows]

    def select_rows(self, indices) -> RawTable:
        return RawTable(self.headers, [self.rows[i] for i in indices])

    def drop_column(self, name: str) -> RawTable:
        j = self.index(name)
        headers = self.headers[:j] + self.headers[j + 1:]
        return RawTable(headers, [r[:j] + r[j + 1:] for r in self.rows])


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True)
        if X.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if X.shape[1] != len(self.feature_names):
            raise DataError("feature_names length does not match column count")
        if not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 (benign) or 1 (attack)")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n_attack = int(self.labels.sum())
        return len(self) - n_attack, n_attack

    def subset(self, indices) -> LabeledDataset:
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.feature_names)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.features).all())


@dataclass(frozen=True)
class SplitPair:
    train: LabeledDataset
    test: LabeledDataset
    seed: int
    train_fraction: float
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)

    def descriptor(self) -> dict:
        return {
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "stratified": True,
            "n_train": len(self.train),
            "n_test": len(self.test),
            "train_class_counts": dict(zip(("benign", "attack"), self.train.class_counts())),
            "test_class_counts": dict(zip(("benign", "attack"), self.test.class_counts())),
        }


def load_flow_csv(path) -> RawTable:
    """Read a flow CSV; headers are whitespace-trimmed, cells kept as raw strings."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header line") from None
        headers = [h.strip() for h in header]
        if len(set(headers)) != len(headers):
            dupes = sorted(h for h, c in Counter(headers).items() if c > 1)
            raise DataError(f"{path}: duplicate column names after trimming: {dupes}")
        width = len(headers)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != width:
                raise DataError(
                    f"{path}: line {reader.line_num} has {len(row)} cells, expected {width}"
                )
            rows.append(tuple(row))
    return RawTable(tuple(headers), tuple(rows))


def write_flow_csv(table: RawTable, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.headers)
        writer.writerows(table.rows)


def is_benign(value: str) -> bool:
    return value.strip().upper() == BENIGN_LABEL


def binarize_labels(table: RawTable, label_column: str = DEFAULT_LABEL_COLUMN):
    """Map the label column to 0 (BENIGN) / 1 (anything else).

    Returns ``(labels, remaining_table, tally)`` where ``tally`` counts the
    original label strings (trimmed) for auditing.
    """
    j = table.index(label_column)
    labels = np.empty(table.row_count, dtype=np.int64)
    tally: Counter[str] = Counter()
    for i, row in enumerate(table.rows):
        value = row[j].strip()
        if not value:
            raise DataError(f"row {i}: empty label in column {label_column!r}")
        tally[value] += 1
        labels[i] = 0 if is_benign(value) else 1
    return labels, table.drop_column(label_column), dict(sorted(tally.items()))


def stratified_split(ds: LabeledDataset, train_fraction: float = 0.8, seed: int = 0) -> SplitPair:
    """Per-class shuffled split; each class contributes round(fraction * n_c) training rows."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls in (0, 1):
        members = np.flatnonzero(ds.labels == cls)
        if members.size < 2:
            name = "benign" if cls == 0 else "attack"
            raise DataError(f"{name} class has {members.size} member(s); need at least 2 to stratify")
        n_train = int(round(train_fraction * members.size))
        n_train = min(max(n_train, 1), members.size - 1)
        shuffled = rng.permutation(members)
        train_parts.append(shuffled[:n_train])
        test_parts.append(shuffled[n_train:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return SplitPair(
        train=ds.subset(train_idx),
        test=ds.subset(test_idx),
        seed=seed,
        train_fraction=train_fraction,
        train_index=train_idx,
        test_index=test_idx,
    )


def split_table(table: RawTable, labels: np.ndarray, train_fraction: float = 0.8, seed: int = 0):
    """Stratified split of a raw table (before preprocessing).

    Same index selection as :func:`stratified_split`; returns
    ``(train_table, train_labels, test_table, test_labels, split_index)``.
    """
    proxy = LabeledDataset(np.zeros((len(labels), 0)), labels, ())
    pair = stratified_split(proxy, train_fraction, seed)
    return (
        table.select_rows(pair.train_index),
        labels[pair.train_index],
        table.select_rows(pair.test_index),
        labels[pair.test_index],
        pair,
    )
