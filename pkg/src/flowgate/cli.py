"""Command-line entry point: ``flowgate <subcommand> [flags]``.

Every output is a file; stdout carries a short human-readable summary.
Exit status is 0 on success, 1 on a pipeline error and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__, synth
from .dataio import DEFAULT_LABEL_COLUMN, DataError, write_flow_csv
from .importance import DEFAULT_TOP_K, impurity_importance, label_correlations, top_k, write_rankings_csv
from .learners import (
    ALGORITHMS,
    DISPLAY_NAMES,
    TREE_FAMILIES,
    ConfigError,
    ModelError,
    TrainedModel,
    train,
)
from .metrics import MetricError, evaluate
from .pipeline import (
    DEFAULT_TRAIN_FRACTION,
    build_config,
    dump_json,
    format_seconds,
    parse_algorithms,
    prepare,
    run_compare,
    write_compare,
)
from .preprocess import DEFAULT_CORR_THRESHOLD, PreprocessPlan

log = logging.getLogger("flowgate")

# (flag, family, config field, type)
HYPER_FLAGS = (
    ("--nb-var-floor", "nb", "var_floor", float),
    ("--knn-k", "knn", "k", int),
    ("--svm-lambda", "svm", "reg_lambda", float),
    ("--svm-epochs", "svm", "epochs", int),
    ("--tree-max-depth", "tree", "max_depth", int),
    ("--tree-min-leaf", "tree", "min_leaf", int),
    ("--forest-trees", "forest", "n_trees", int),
    ("--forest-max-features", "forest", "max_features", str),
    ("--forest-max-depth", "forest", "max_depth", int),
    ("--forest-min-leaf", "forest", "min_leaf", int),
    ("--ada-rounds", "ada", "rounds", int),
    ("--gbt-rounds", "gbt", "rounds", int),
    ("--gbt-learning-rate", "gbt", "learning_rate", float),
    ("--gbt-max-depth", "gbt", "max_depth", int),
    ("--gbt-lambda", "gbt", "reg_lambda", float),
)

SYNTH_FLAGS = (
    ("--benign", "n_benign", int),
    ("--attack", "n_attack", int),
    ("--features", "n_numeric_features", int),
    ("--sep", "class_separation", float),
    ("--informative", "n_informative", int),
    ("--correlation", "feature_correlation", float),
    ("--scale-decades", "scale_decades", float),
    ("--null-rate", "null_rate", float),
    ("--inf-rate", "inf_rate", float),
    ("--constant", "n_constant_columns", int),
    ("--noise", "n_noise_columns", int),
    ("--categorical", "n_categorical_columns", int),
)

PRESETS = {"default": synth.SynthSpec(), "benchmark": synth.BENCHMARK, "imbalance": synth.IMBALANCE}


def _dest(flag: str) -> str:
    return flag.lstrip("-").replace("-", "_")


def _non_negative(kind):
    def parse(text):
        value = kind(text)
        if value < 0:
            raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
        return value

    parse.__name__ = kind.__name__
    return parse


def _fraction(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return value


def _max_features(text):
    return int(text) if text.isdigit() else text


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("shared options")
    g.add_argument("--seed", type=int, default=0, help="seed for the split and seeded learners (default 0)")
    g.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN, help="label column name (default %(default)s)")
    g.add_argument("--train-fraction", type=_fraction, default=DEFAULT_TRAIN_FRACTION,
                   help="stratified train share (default %(default)s)")
    g.add_argument("--corr-threshold", type=_non_negative(float), default=DEFAULT_CORR_THRESHOLD,
                   help="drop features with |r| to the label below this (default %(default)s)")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def _add_hyper(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("hyperparameters (override --config)")
    g.add_argument("--config", type=Path, help='JSON file of per-family blocks, e.g. {"knn": {"k": 7}}')
    for flag, family, name, kind in HYPER_FLAGS:
        kind = _max_features if name == "max_features" else kind
        g.add_argument(flag, dest=_dest(flag), type=kind, help=f"{DISPLAY_NAMES[family]} {name}")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="flowgate", description="Flow-record DDoS detection benchmark.")
    parser.add_argument("--version", action="version", version=f"flowgate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic labeled flow CSV")
    p.add_argument("--out", type=Path, required=True, help="CSV file to write")
    p.add_argument("--preset", choices=sorted(PRESETS), default="default",
                   help="starting point; explicit flags override its fields")
    for flag, _, kind in SYNTH_FLAGS:
        p.add_argument(flag, dest=_dest(flag), type=_non_negative(kind))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", parents=[common], help="fit the preprocessing plan on the train split")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", parents=[common], help="train one classifier")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--plan", type=Path, help="existing plan.json; fitted on the train split if omitted")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_hyper(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a trained model on the test split")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--plan", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="train and evaluate several classifiers on one split")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--algos", default=",".join(ALGORITHMS), help="comma-separated (default: all)")
    p.add_argument("--k", type=int, default=DEFAULT_TOP_K, help="features kept per ranking")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_hyper(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("importance", parents=[common], help="rank features")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--plan", type=Path, help="existing plan.json; fitted on the train split if omitted")
    p.add_argument("--model", type=Path, help="tree-based model, needed for impurity ranking")
    p.add_argument("--method", choices=("pearson", "impurity", "both"), default="pearson")
    p.add_argument("--k", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_importance)
    return parser


def hyper_overrides(args) -> dict:
    """Per-family overrides from --config, then flags on top."""
    blocks = {}
    if getattr(args, "config", None):
        doc = json.loads(args.config.read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ConfigError("--config must hold a JSON object keyed by algorithm")
        for family, block in doc.items():
            if family not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {family!r} in --config; valid: {', '.join(ALGORITHMS)}")
            blocks[family] = dict(block)
    for flag, family, name, _ in HYPER_FLAGS:
        value = getattr(args, _dest(flag), None)
        if value is not None:
            blocks.setdefault(family, {})[name] = value
    return blocks


def _prepare(args, plan=None):
    return prepare(
        args.data,
        label_column=args.label_column,
        train_fraction=args.train_fraction,
        seed=args.seed,
        threshold=args.corr_threshold,
        plan=plan,
    )


def _summary_line(report) -> str:
    return (f"{DISPLAY_NAMES[report.algorithm]:<18} accuracy {report.accuracy:.4f}  f1 {report.f1:.4f}  "
            f"auc {report.roc.auc:.4f}  train {format_seconds(report.train_seconds)}")


def cmd_synth(args) -> None:
    base = PRESETS[args.preset]
    changes = {field: getattr(args, _dest(flag)) for flag, field, _ in SYNTH_FLAGS
               if getattr(args, _dest(flag)) is not None}
    spec = dataclasses.replace(base, seed=args.seed, **changes)
    table, labels, _ = synth.generate(spec, label_column=args.label_column)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_flow_csv(table, args.out)
    print(f"wrote {table.row_count} rows ({spec.n_benign} benign, {spec.n_attack} attack) to {args.out}")
    print(f"bayes error of the clean generative model: {synth.bayes_error(spec):.6f}")


def cmd_preprocess(args) -> None:
    prep = _prepare(args)
    args.out.mkdir(parents=True, exist_ok=True)
    prep.plan.save(args.out / "plan.json")
    dump_json({"split": prep.split, "label_tally": prep.label_tally}, args.out / "split.json")
    plan = prep.plan
    print(f"plan: {len(plan.fitted_feature_order)} features kept of {len(plan.input_columns)}; "
          f"{len(plan.dropped_zero_variance)} zero-variance and {len(plan.dropped_low_correlation)} "
          f"low-correlation columns dropped; {plan.fit_rows_removed} train rows removed")
    print(f"wrote {args.out / 'plan.json'}")


def cmd_train(args) -> None:
    plan = PreprocessPlan.load(args.plan) if args.plan else None
    prep = _prepare(args, plan)
    config = build_config(args.algo, args.seed, hyper_overrides(args))
    model = train(config, prep.train)
    args.out.mkdir(parents=True, exist_ok=True)
    model_path = args.out / f"model_{args.algo}.json"
    model.save(model_path)
    if plan is None:
        prep.plan.save(args.out / "plan.json")
    print(f"trained {DISPLAY_NAMES[args.algo]} on {len(prep.train)} rows in {format_seconds(model.train_seconds)}")
    print(f"wrote {model_path}")


def cmd_evaluate(args) -> None:
    model = TrainedModel.load(args.model)
    plan = PreprocessPlan.load(args.plan)
    if tuple(model.feature_names) != tuple(plan.fitted_feature_order):
        missing = sorted(set(plan.fitted_feature_order) - set(model.feature_names))
        extra = sorted(set(model.feature_names) - set(plan.fitted_feature_order))
        raise ModelError(
            "model features do not match the plan's fitted feature order"
            f" (missing from model: {missing[:5]}, unknown to plan: {extra[:5]})"
        )
    prep = _prepare(args, plan)
    report = evaluate(model, prep.test, split=prep.split, plan=plan.descriptor())
    args.out.mkdir(parents=True, exist_ok=True)
    dump_json(report.to_dict(), args.out / f"eval_{model.family}.json")
    report.roc.write_csv(args.out / f"roc_{model.family}.csv")
    print(_summary_line(report))


def cmd_compare(args) -> None:
    algorithms = parse_algorithms(args.algos)
    if args.k < 1:
        raise ConfigError("--k must be >= 1")
    report = run_compare(
        args.data,
        algorithms,
        label_column=args.label_column,
        train_fraction=args.train_fraction,
        seed=args.seed,
        threshold=args.corr_threshold,
        hyper=hyper_overrides(args),
        k=args.k,
    )
    write_compare(report, args.out)
    print(report.table_markdown(), end="")
    print(f"wrote report.json, table.md, importance.csv and {len(algorithms)} ROC files to {args.out}")


def cmd_importance(args) -> None:
    if args.k < 1:
        raise ConfigError("--k must be >= 1")
    rankings = []
    plan = PreprocessPlan.load(args.plan) if args.plan else None
    prep = _prepare(args, plan)
    if args.method in ("pearson", "both"):
        rankings.append(top_k(label_correlations(prep.train), args.k))
    if args.method in ("impurity", "both"):
        if args.model is None:
            raise ConfigError("impurity ranking needs --model with a tree-based model")
        model = TrainedModel.load(args.model)
        if model.family not in TREE_FAMILIES:
            raise ConfigError(f"impurity ranking needs one of {', '.join(TREE_FAMILIES)}, got {model.family}")
        rankings.append(top_k(impurity_importance(model), args.k))
    args.out.mkdir(parents=True, exist_ok=True)
    write_rankings_csv(rankings, args.out / "importance.csv")
    dump_json({"rankings": [r.to_dict() for r in rankings]}, args.out / "importance.json")
    for r in rankings:
        label = r.method if r.method != "impurity" else f"impurity ({r.source})"
        print(f"{label}: " + ", ".join(r.names()))


ERRORS = (DataError, ConfigError, ModelError, MetricError, ValueError, OSError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ERRORS as exc:
        print(f"flowgate: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
