"""End-to-end orchestration: ingest, split, preprocess, train, evaluate, report."""

from __future__ import annotations

import datetime as _dt
import json
import logging
import platform
import socket
from importlib import resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import DEFAULT_LABEL_COLUMN, LabeledDataset, binarize_labels, load_flow_csv, split_table
from .importance import DEFAULT_TOP_K, impurity_importance, label_correlations, top_k, write_rankings_csv
from .learners import (
    ALGORITHMS,
    DISPLAY_NAMES,
    ConfigError,
    default_config,
    default_threads,
    train,
)
from .metrics import EvalReport, evaluate
from .preprocess import DEFAULT_CORR_THRESHOLD, PreprocessPlan, apply_plan, fit_plan

log = logging.getLogger(__name__)

REPORT_VERSION = 1
DEFAULT_TRAIN_FRACTION = 0.8

# Preferred model for the impurity ranking in a compare run.
IMPURITY_SOURCES = ("forest", "gbt", "tree")


@dataclass
class Prepared:
    train: LabeledDataset
    test: LabeledDataset
    plan: PreprocessPlan
    split: dict
    label_tally: dict


def prepare(
    data_path,
    *,
    label_column: str = DEFAULT_LABEL_COLUMN,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int = 0,
    threshold: float = DEFAULT_CORR_THRESHOLD,
    plan: PreprocessPlan | None = None,
) -> Prepared:
    """Load, binarize, split and (fit then) apply the preprocessing plan.

    The plan is fit on the training partition only unless one is supplied.
    """
    table = load_flow_csv(data_path)
    labels, features, tally = binarize_labels(table, label_column)
    tr_table, tr_labels, te_table, te_labels, pair = split_table(features, labels, train_fraction, seed)
    if plan is None:
        plan = fit_plan(tr_table, tr_labels, threshold)
    train_ds = apply_plan(plan, tr_table, tr_labels)
    test_ds = apply_plan(plan, te_table, te_labels)
    split = {
        "train_fraction": train_fraction,
        "seed": seed,
        "stratified": True,
        "n_train_raw": int(pair.train_index.size),
        "n_test_raw": int(pair.test_index.size),
        "n_train": len(train_ds),
        "n_test": len(test_ds),
        "train_class_counts": dict(zip(("benign", "attack"), train_ds.class_counts())),
        "test_class_counts": dict(zip(("benign", "attack"), test_ds.class_counts())),
    }
    return Prepared(train_ds, test_ds, plan, split, tally)


def build_config(family: str, seed: int, hyper: dict | None = None):
    """Default config for ``family`` with the global seed and any overrides applied."""
    overrides = dict((hyper or {}).get(family, {}))
    try:
        return default_config(family, seed=seed, **overrides)
    except TypeError as exc:
        raise ConfigError(f"bad hyperparameters for {family}: {exc}") from None


def parse_algorithms(spec: str) -> list[str]:
    names = [a.strip() for a in spec.split(",") if a.strip()]
    if not names:
        raise ConfigError("no algorithms named")
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown:
        raise ConfigError(f"unknown algorithm(s) {unknown}; valid names: {', '.join(ALGORITHMS)}")
    if len(set(names)) != len(names):
        raise ConfigError("algorithm names must not repeat")
    return names


def environment() -> dict:
    return {
        "host": socket.gethostname(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": default_threads(),
    }


@dataclass
class CompareReport:
    results: list[EvalReport]
    environment: dict
    split: dict
    plan: dict
    label_tally: dict
    rankings: list = field(default_factory=list)
    rocs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "environment": self.environment,
            "split": self.split,
            "plan": self.plan,
            "label_tally": self.label_tally,
            "results": [r.to_dict() for r in self.results],
            "importance": [r.to_dict() for r in self.rankings],
        }

    def table_markdown(self) -> str:
        lines = [
            "| Algorithm | Accuracy | F1-Score | Training Time |",
            "|---|---|---|---|",
        ]
        for r in self.results:
            lines.append(
                f"| {DISPLAY_NAMES[r.algorithm]} | {100 * r.accuracy:.2f}% | {r.f1:.4f} | {format_seconds(r.train_seconds)} |"
            )
        return "\n".join(lines) + "\n"


def format_seconds(seconds: float) -> str:
    if seconds < 1:
        return f"{seconds:.3f}s"
    return f"{seconds:.1f}s"


def run_compare(
    data_path,
    algorithms,
    *,
    label_column: str = DEFAULT_LABEL_COLUMN,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int = 0,
    threshold: float = DEFAULT_CORR_THRESHOLD,
    hyper: dict | None = None,
    k: int = DEFAULT_TOP_K,
) -> CompareReport:
    """Train and evaluate each algorithm on one shared split and plan."""
    prep = prepare(
        data_path,
        label_column=label_column,
        train_fraction=train_fraction,
        seed=seed,
        threshold=threshold,
    )
    plan_desc = prep.plan.descriptor()
    results, models = [], {}
    for family in algorithms:
        config = build_config(family, seed, hyper)
        log.info("training %s", family)
        model = train(config, prep.train)
        models[family] = model
        results.append(evaluate(model, prep.test, split=prep.split, plan=plan_desc))

    rankings = [top_k(label_correlations(prep.train), k)]
    for family in IMPURITY_SOURCES:
        if family in models:
            rankings.append(top_k(impurity_importance(models[family]), k))
            break

    return CompareReport(
        results=results,
        environment=environment(),
        split=prep.split,
        plan=plan_desc,
        label_tally=prep.label_tally,
        rankings=rankings,
        rocs={r.algorithm: r.roc for r in results},
    )


def dump_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_compare(report: CompareReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json", out / "table.md", out / "importance.csv"]
    dump_json(report.to_dict(), written[0])
    written[1].write_text(report.table_markdown(), encoding="utf-8")
    write_rankings_csv(report.rankings, written[2])
    for name, roc in report.rocs.items():
        path = out / f"roc_{name}.csv"
        roc.write_csv(path)
        written.append(path)
    return written


SCHEMA_NAMES = ("plan", "model", "eval", "report", "importance")


def load_schema(name: str) -> dict:
    """JSON Schema shipped for one of the artifact kinds in ``SCHEMA_NAMES``."""
    if name not in SCHEMA_NAMES:
        raise ValueError(f"no schema named {name!r}; known: {', '.join(SCHEMA_NAMES)}")
    text = resources.files("flowgate").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
