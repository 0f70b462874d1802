"""Labeled synthetic flow tables with controllable separability and injected dirt.

Informative features are class-conditional Gaussians with unit within-class
standard deviation. The attack mean sits ``class_separation`` units
(Euclidean) from the benign mean, spread over the informative features with
weights proportional to 1, 1/2, 1/3, ... . Within each class all numeric
features share one latent factor, giving pairwise correlation
``feature_correlation``. Each numeric feature is finally multiplied by a
scale drawn log-uniformly from ``[1, 10**scale_decades]``, mimicking flow
counters that span orders of magnitude; separation is measured before
scaling, so it stays in units of each feature's own standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataio import BENIGN_LABEL, DEFAULT_LABEL_COLUMN, RawTable

ATTACK_LABEL = "Attack"

# CICFlowMeter column names used to label synthetic numeric features.
FLOW_FEATURE_NAMES = (
    "Flow Duration", "Total Fwd Packets", "Total Backward Packets",
    "Total Length of Fwd Packets", "Total Length of Bwd Packets",
    "Fwd Packet Length Max", "Fwd Packet Length Min", "Fwd Packet Length Mean",
    "Fwd Packet Length Std", "Bwd Packet Length Max", "Bwd Packet Length Min",
    "Bwd Packet Length Mean", "Bwd Packet Length Std", "Flow Bytes/s",
    "Flow Packets/s", "Flow IAT Mean", "Flow IAT Std", "Flow IAT Max",
    "Flow IAT Min", "Fwd IAT Total", "Fwd IAT Mean", "Fwd IAT Std",
    "Fwd IAT Max", "Fwd IAT Min", "Bwd IAT Total", "Bwd IAT Mean",
    "Bwd IAT Std", "Bwd IAT Max", "Bwd IAT Min", "Fwd Header Length",
    "Bwd Header Length", "Fwd Packets/s", "Bwd Packets/s", "Min Packet Length",
    "Max Packet Length", "Packet Length Mean", "Packet Length Std",
    "Packet Length Variance", "Average Packet Size", "Avg Fwd Segment Size",
    "Avg Bwd Segment Size", "Init_Win_bytes_forward", "Init_Win_bytes_backward",
    "act_data_pkt_fwd", "min_seg_size_forward", "Active Mean", "Active Std",
    "Active Max", "Active Min", "Idle Mean", "Idle Std", "Idle Max", "Idle Min",
)

CATEGORY_ALPHABETS = (
    ("TCP", "UDP", "ICMP"),
    ("ACK", "SYN", "FIN", "RST", "PSH"),
    ("lan", "wan", "dmz", "iot"),
)

NULL_TOKENS = ("", "NaN")
INF_TOKENS = ("inf", "Infinity")


@dataclass(frozen=True)
class SynthSpec:
    n_benign: int = 1000
    n_attack: int = 9000
    n_numeric_features: int = 20
    class_separation: float = 3.0
    null_rate: float = 0.0
    inf_rate: float = 0.0
    n_constant_columns: int = 0
    n_noise_columns: int = 0
    n_categorical_columns: int = 0
    seed: int = 0
    n_informative: int | None = None  # None: every numeric feature
    feature_correlation: float = 0.0
    scale_decades: float = 0.0

    def __post_init__(self):
        for name in ("n_benign", "n_attack", "n_constant_columns", "n_noise_columns", "n_categorical_columns"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_numeric_features < 1:
            raise ValueError("n_numeric_features must be >= 1")
        if not self.class_separation >= 0:
            raise ValueError("class_separation must be >= 0")
        for name in ("null_rate", "inf_rate"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.n_informative is not None and not 1 <= self.n_informative <= self.n_numeric_features:
            raise ValueError("n_informative must lie in [1, n_numeric_features]")
        if not 0.0 <= self.feature_correlation < 1.0:
            raise ValueError("feature_correlation must lie in [0, 1)")
        if not self.scale_decades >= 0:
            raise ValueError("scale_decades must be >= 0")

    @property
    def informative_count(self) -> int:
        return self.n_numeric_features if self.n_informative is None else self.n_informative

    @property
    def n_rows(self) -> int:
        return self.n_benign + self.n_attack

    def mean_shift(self) -> np.ndarray:
        """Attack-minus-benign mean vector over the numeric features."""
        k = self.informative_count
        w = np.zeros(self.n_numeric_features)
        w[:k] = 1.0 / np.arange(1, k + 1)
        return self.class_separation * w / np.linalg.norm(w)

    def within_class_cov(self) -> np.ndarray:
        d, rho = self.n_numeric_features, self.feature_correlation
        return (1.0 - rho) * np.eye(d) + rho * np.ones((d, d))


def feature_names(spec: SynthSpec) -> list[str]:
    names = []
    for j in range(spec.n_numeric_features):
        base = FLOW_FEATURE_NAMES[j % len(FLOW_FEATURE_NAMES)]
        names.append(base if j < len(FLOW_FEATURE_NAMES) else f"{base} {j // len(FLOW_FEATURE_NAMES)}")
    names += [f"Noise {j}" for j in range(spec.n_noise_columns)]
    names += [f"Constant {j}" for j in range(spec.n_constant_columns)]
    names += [f"Category {j}" for j in range(spec.n_categorical_columns)]
    return names


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def bayes_error(spec: SynthSpec) -> float:
    """Error rate of the optimal classifier for the clean generative model (no dirt)."""
    n = spec.n_rows
    p1 = spec.n_attack / n
    p0 = 1.0 - p1
    if p0 == 0 or p1 == 0:
        return 0.0
    delta = spec.mean_shift()
    maha = math.sqrt(float(delta @ np.linalg.solve(spec.within_class_cov(), delta)))
    if maha == 0:
        return min(p0, p1)
    c = math.log(p0 / p1)
    return p0 * _phi(-maha / 2 - c / maha) + p1 * _phi(c / maha - maha / 2)


def generate(spec: SynthSpec, label_column: str = DEFAULT_LABEL_COLUMN):
    """Return ``(table, labels, informative_column_indices)``.

    Noise columns are centred within each class, so their sample correlation
    with the label is zero by construction. Null and infinity markers are
    injected into every numeric column (features, noise and constants); nulls
    also hit categorical columns at ``null_rate``.
    """
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n_rows, spec.n_numeric_features
    labels = rng.permutation(np.r_[np.zeros(spec.n_benign, np.int64), np.ones(spec.n_attack, np.int64)])

    offsets = rng.uniform(0.0, 5.0, size=d)
    rho = spec.feature_correlation
    latent = rng.standard_normal(n)
    own = rng.standard_normal((n, d))
    scales = 10.0 ** rng.uniform(0.0, spec.scale_decades, size=d)
    features = scales * (
        offsets
        + labels[:, None] * spec.mean_shift()
        + math.sqrt(rho) * latent[:, None]
        + math.sqrt(1.0 - rho) * own
    )

    noise = rng.standard_normal((n, spec.n_noise_columns))
    for c in (0, 1):
        members = labels == c
        if members.any():
            noise[members] -= noise[members].mean(axis=0)
    noise += rng.uniform(0.0, 5.0, size=spec.n_noise_columns)

    constants = np.broadcast_to(
        rng.integers(0, 100, size=spec.n_constant_columns).astype(np.float64),
        (n, spec.n_constant_columns),
    )
    numeric = np.hstack([features, noise, constants])
    cells = np.array([[repr(float(v)) for v in row] for row in numeric.tolist()], dtype=object).reshape(n, -1)

    if spec.null_rate > 0:
        null_mask = rng.random(numeric.shape) < spec.null_rate
        tokens = rng.integers(0, len(NULL_TOKENS), size=numeric.shape)
        for i, j in zip(*np.nonzero(null_mask)):
            cells[i, j] = NULL_TOKENS[tokens[i, j]]
    else:
        null_mask = np.zeros(numeric.shape, dtype=bool)
    if spec.inf_rate > 0:
        inf_mask = (rng.random(numeric.shape) < spec.inf_rate) & ~null_mask
        negative = rng.random(numeric.shape) < 0.5
        tokens = rng.integers(0, len(INF_TOKENS), size=numeric.shape)
        for i, j in zip(*np.nonzero(inf_mask)):
            cells[i, j] = ("-" if negative[i, j] else "") + INF_TOKENS[tokens[i, j]]

    categorical = np.empty((n, spec.n_categorical_columns), dtype=object)
    for j in range(spec.n_categorical_columns):
        alphabet = CATEGORY_ALPHABETS[j % len(CATEGORY_ALPHABETS)]
        categorical[:, j] = np.asarray(alphabet, dtype=object)[rng.integers(0, len(alphabet), size=n)]
        if spec.null_rate > 0:
            categorical[rng.random(n) < spec.null_rate, j] = ""

    label_cells = np.where(labels == 1, ATTACK_LABEL, BENIGN_LABEL).astype(object)
    grid = np.hstack([cells, categorical, label_cells[:, None]])
    headers = feature_names(spec) + [label_column]
    table = RawTable(tuple(headers), tuple(map(tuple, grid.tolist())))
    informative = frozenset(range(spec.informative_count)) if spec.class_separation > 0 else frozenset()
    return table, labels, informative


# Attack-heavy 90/10 mix at separation 6 with per-column scales spread over
# 0.75 decades. Numeric cells are clean; constant, noise and categorical
# columns still exercise the column-dropping and encoding steps.
BENCHMARK = SynthSpec(
    n_benign=5000,
    n_attack=45000,
    n_numeric_features=20,
    class_separation=6.0,
    n_constant_columns=3,
    n_noise_columns=5,
    n_categorical_columns=2,
    seed=1,
    scale_decades=0.75,
)

# Rare attacks over strongly correlated features: independence-assuming
# models overcount the shared evidence and flag many benign flows.
IMBALANCE = SynthSpec(
    n_benign=19000,
    n_attack=1000,
    n_numeric_features=4,
    class_separation=4.0,
    feature_correlation=0.9,
    seed=1,
)
