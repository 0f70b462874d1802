"""Hyperparameter configurations, one frozen dataclass per classifier family."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import ClassVar, Union


class ConfigError(ValueError):
    pass


def _positive_int(name, value):
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class GaussianNBConfig:
    family: ClassVar[str] = "nb"
    var_floor: float = 1e-9

    def __post_init__(self):
        if not self.var_floor > 0:
            raise ConfigError("var_floor must be > 0")


@dataclass(frozen=True)
class KNNConfig:
    family: ClassVar[str] = "knn"
    k: int = 5

    def __post_init__(self):
        _positive_int("k", self.k)
        if self.k % 2 == 0:
            raise ConfigError(f"k must be odd to avoid binary vote ties, got {self.k}")


@dataclass(frozen=True)
class LinearSVMConfig:
    family: ClassVar[str] = "svm"
    reg_lambda: float = 1e-4
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if not self.reg_lambda > 0:
            raise ConfigError("reg_lambda must be > 0")
        _positive_int("epochs", self.epochs)


@dataclass(frozen=True)
class DecisionTreeConfig:
    family: ClassVar[str] = "tree"
    max_depth: int = 16
    min_leaf: int = 2

    def __post_init__(self):
        _positive_int("max_depth", self.max_depth)
        _positive_int("min_leaf", self.min_leaf)


@dataclass(frozen=True)
class RandomForestConfig:
    family: ClassVar[str] = "forest"
    n_trees: int = 100
    max_features: Union[str, int] = "sqrt"
    max_depth: int = 16
    min_leaf: int = 2
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        _positive_int("n_trees", self.n_trees)
        _positive_int("max_depth", self.max_depth)
        _positive_int("min_leaf", self.min_leaf)
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "all"):
                raise ConfigError("max_features must be 'sqrt', 'all' or a positive integer")
        else:
            _positive_int("max_features", self.max_features)

    def n_candidates(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(round(n_features ** 0.5)))
        if self.max_features == "all":
            return n_features
        return min(self.max_features, n_features)


@dataclass(frozen=True)
class AdaBoostConfig:
    family: ClassVar[str] = "ada"
    rounds: int = 50

    def __post_init__(self):
        _positive_int("rounds", self.rounds)


@dataclass(frozen=True)
class GradientBoostConfig:
    family: ClassVar[str] = "gbt"
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    reg_lambda: float = 1.0
    min_leaf: int = 1

    def __post_init__(self):
        _positive_int("rounds", self.rounds)
        _positive_int("max_depth", self.max_depth)
        _positive_int("min_leaf", self.min_leaf)
        if not 0 < self.learning_rate <= 1:
            raise ConfigError("learning_rate must lie in (0, 1]")
        if self.reg_lambda < 0:
            raise ConfigError("reg_lambda must be >= 0")


ClassifierConfig = Union[
    GaussianNBConfig,
    KNNConfig,
    LinearSVMConfig,
    DecisionTreeConfig,
    RandomForestConfig,
    AdaBoostConfig,
    GradientBoostConfig,
]

CONFIG_TYPES: dict[str, type] = {
    c.family: c
    for c in (
        GaussianNBConfig,
        KNNConfig,
        LinearSVMConfig,
        DecisionTreeConfig,
        RandomForestConfig,
        AdaBoostConfig,
        GradientBoostConfig,
    )
}

ALGORITHMS = tuple(CONFIG_TYPES)

DISPLAY_NAMES = {
    "nb": "Naive Bayes",
    "knn": "KNN",
    "svm": "SVM",
    "tree": "Decision Tree",
    "forest": "Random Forest",
    "ada": "AdaBoost",
    "gbt": "Gradient Boosting",
}


def config_to_dict(config) -> dict:
    return {"family": config.family, **asdict(config)}


def config_from_dict(doc: dict):
    doc = dict(doc)
    family = doc.pop("family", None)
    if family not in CONFIG_TYPES:
        raise ConfigError(f"unknown algorithm {family!r}; valid: {', '.join(ALGORITHMS)}")
    cls = CONFIG_TYPES[family]
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown {family} hyperparameters: {sorted(unknown)}")
    return cls(**doc)


def default_config(family: str, seed: int | None = None, **overrides):
    """Default config for ``family``; ``seed`` applies only to seeded families."""
    if family not in CONFIG_TYPES:
        raise ConfigError(f"unknown algorithm {family!r}; valid: {', '.join(ALGORITHMS)}")
    cls = CONFIG_TYPES[family]
    known = {f.name for f in fields(cls)}
    kwargs = {k: v for k, v in overrides.items() if k in known}
    if seed is not None and "seed" in known:
        kwargs.setdefault("seed", seed)
    return cls(**kwargs)
