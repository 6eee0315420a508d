"""Dataset-backed contextual bandits.

Classification datasets pay 1 for naming the row's class and 0 otherwise.
Mushroom has two actions (0 = eat, 1 = pass): eating an edible mushroom pays
+5, eating a poisonous one pays +5 or -35 with equal odds, passing pays 0.
Multi-output datasets (jester, financial) pay the chosen output column.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from saubandit.envs.base import Environment, EnvironmentExhausted
from saubandit.rng import BatchRng

DATASETS = ("mushroom", "statlog", "covertype", "financial", "jester", "adult", "census")

MUSHROOM_EAT_EDIBLE = 5.0
MUSHROOM_EAT_POISON_GOOD = 5.0
MUSHROOM_EAT_POISON_BAD = -35.0


class IngestionError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Schema:
    name: str
    scheme: str  # classification | mushroom | multi_output
    numeric: tuple[str, ...] = ()
    # (column, levels); levels=None infers the sorted set of observed values
    categorical: tuple[tuple[str, tuple[str, ...] | None], ...] = ()
    label: str | None = None
    label_levels: tuple[str, ...] | None = None
    outputs: tuple[str, ...] = ()
    # treat every column not named elsewhere as an inferred categorical
    rest_categorical: bool = False
    ignore: tuple[str, ...] = ()
    na_values: tuple[str, ...] = ("", "?", "NA")


@dataclass
class IngestResult:
    features: np.ndarray
    feature_names: list[str]
    labels: np.ndarray | None = None
    outputs: np.ndarray | None = None
    label_levels: tuple[str, ...] = ()
    dropped: int = 0


def _levels(s: str) -> tuple[str, ...]:
    return tuple(s.split(","))


_MUSHROOM_ATTRS = (
    ("cap-shape", "b,c,x,f,k,s"),
    ("cap-surface", "f,g,y,s"),
    ("cap-color", "n,b,c,g,r,p,u,e,w,y"),
    ("bruises", "t,f"),
    ("odor", "a,l,c,y,f,m,n,p,s"),
    ("gill-attachment", "a,f"),
    ("gill-spacing", "c,w"),
    ("gill-size", "b,n"),
    ("gill-color", "k,n,b,h,g,r,o,p,u,e,w,y"),
    ("stalk-shape", "e,t"),
    ("stalk-root", "b,c,e,r,?"),
    ("stalk-surface-above-ring", "f,y,k,s"),
    ("stalk-surface-below-ring", "f,y,k,s"),
    ("stalk-color-above-ring", "n,b,c,g,o,p,e,w,y"),
    ("stalk-color-below-ring", "n,b,c,g,o,p,e,w,y"),
    ("veil-type", "p"),
    ("veil-color", "n,o,w,y"),
    ("ring-number", "n,o,t"),
    ("ring-type", "e,f,l,n,p"),
    ("spore-print-color", "k,n,b,h,r,o,u,w,y"),
    ("population", "a,c,n,s,v,y"),
    ("habitat", "g,l,m,p,u,w,d"),
)

_ADULT_CATEGORICAL = (
    ("workclass", "Private,Self-emp-not-inc,Self-emp-inc,Federal-gov,Local-gov,State-gov,Without-pay"),
    (
        "education",
        "Bachelors,Some-college,11th,HS-grad,Prof-school,Assoc-acdm,Assoc-voc,9th,7th-8th,12th,"
        "Masters,1st-4th,10th,Doctorate,5th-6th,Preschool",
    ),
    (
        "marital-status",
        "Married-civ-spouse,Divorced,Never-married,Separated,Widowed,Married-spouse-absent,Married-AF-spouse",
    ),
    ("relationship", "Wife,Own-child,Husband,Not-in-family,Other-relative,Unmarried"),
    ("race", "White,Asian-Pac-Islander,Amer-Indian-Eskimo,Other,Black"),
    ("sex", "Female,Male"),
    (
        "native-country",
        "United-States,Cambodia,England,Puerto-Rico,Canada,Germany,Outlying-US(Guam-USVI-etc),India,"
        "Japan,Greece,South,China,Cuba,Iran,Honduras,Philippines,Italy,Poland,Jamaica,Vietnam,Mexico,"
        "Portugal,Ireland,France,Dominican-Republic,Laos,Ecuador,Taiwan,Haiti,Columbia,Hungary,"
        "Guatemala,Nicaragua,Scotland,Thailand,Yugoslavia,El-Salvador,Trinadad&Tobago,Peru,Hong,"
        "Holand-Netherlands",
    ),
    ("income", ">50K,<=50K"),
)

ADULT_OCCUPATIONS = _levels(
    "Tech-support,Craft-repair,Other-service,Sales,Exec-managerial,Prof-specialty,Handlers-cleaners,"
    "Machine-op-inspct,Adm-clerical,Farming-fishing,Transport-moving,Priv-house-serv,Protective-serv,"
    "Armed-Forces"
)

COVERTYPE_NUMERIC = (
    "Elevation",
    "Aspect",
    "Slope",
    "Horizontal_Distance_To_Hydrology",
    "Vertical_Distance_To_Hydrology",
    "Horizontal_Distance_To_Roadways",
    "Hillshade_9am",
    "Hillshade_Noon",
    "Hillshade_3pm",
    "Horizontal_Distance_To_Fire_Points",
    *(f"Wilderness_Area{i}" for i in range(1, 5)),
    *(f"Soil_Type{i}" for i in range(1, 41)),
)

CLASS_LEVELS_7 = tuple(str(i) for i in range(1, 8))

SCHEMAS: dict[str, Schema] = {
    "mushroom": Schema(
        "mushroom",
        "mushroom",
        categorical=tuple((name, _levels(levels)) for name, levels in _MUSHROOM_ATTRS),
        label="class",
        label_levels=("e", "p"),
        na_values=(),
    ),
    "statlog": Schema(
        "statlog",
        "classification",
        numeric=tuple(f"a{i}" for i in range(1, 10)),
        label="class",
        label_levels=CLASS_LEVELS_7,
    ),
    "covertype": Schema(
        "covertype",
        "classification",
        numeric=COVERTYPE_NUMERIC,
        label="Cover_Type",
        label_levels=CLASS_LEVELS_7,
    ),
    "financial": Schema(
        "financial",
        "multi_output",
        numeric=tuple(f"f{i}" for i in range(1, 22)),
        outputs=tuple(f"p{i}" for i in range(1, 9)),
    ),
    "jester": Schema(
        "jester",
        "multi_output",
        numeric=tuple(f"f{i}" for i in range(1, 33)),
        outputs=tuple(f"j{i}" for i in range(1, 9)),
    ),
    "adult": Schema(
        "adult",
        "classification",
        numeric=("age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"),
        categorical=tuple((name, _levels(levels)) for name, levels in _ADULT_CATEGORICAL),
        label="occupation",
        label_levels=ADULT_OCCUPATIONS,
    ),
    "census": Schema(
        "census",
        "classification",
        label="dOccup",
        rest_categorical=True,
        ignore=("caseid",),
    ),
}


def ingest_csv(source: str | os.PathLike | IO[str], schema: Schema) -> IngestResult:
    """Read a header-first, comma-separated UTF-8 file into a dense feature matrix.

    Columns come out as declared numerics, then one-hot blocks in declared
    level order.  Rows with a missing value in any used column are dropped
    and counted; malformed values raise :class:`IngestionError`.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _ingest(fh, schema)
    return _ingest(source, schema)


def _ingest(fh: IO[str], schema: Schema) -> IngestResult:
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestionError("file is empty", 1) from None
    index = {name: i for i, name in enumerate(header)}

    categorical = list(schema.categorical)
    named = set(schema.numeric) | {c for c, _ in categorical} | set(schema.outputs) | set(schema.ignore)
    if schema.label:
        named.add(schema.label)
    if schema.rest_categorical:
        categorical += [(h, None) for h in header if h not in named]
    required = [*schema.numeric, *(c for c, _ in categorical), *schema.outputs]
    if schema.label:
        required.append(schema.label)
    missing = [c for c in required if c not in index]
    if missing:
        raise IngestionError(f"missing columns {missing}", 1)

    na = set(schema.na_values)
    rows: list[tuple[int, list[str]]] = []
    dropped = 0
    for line, raw in enumerate(reader, start=2):
        if not raw or all(not v.strip() for v in raw):
            continue
        if len(raw) != len(header):
            raise IngestionError(f"expected {len(header)} fields, found {len(raw)}", line)
        values = [v.strip() for v in raw]
        if any(values[index[c]] in na for c in required):
            dropped += 1
            continue
        rows.append((line, values))
    if not rows:
        raise IngestionError("no usable rows")

    cat_levels = []
    for col, levels in categorical:
        if levels is None:
            levels = tuple(sorted({v[index[col]] for _, v in rows}, key=_natural_key))
        cat_levels.append((col, levels))

    n = len(rows)
    n_features = len(schema.numeric) + sum(len(lv) for _, lv in cat_levels)
    features = np.zeros((n, n_features))
    names = list(schema.numeric) + [f"{c}={lv}" for c, levels in cat_levels for lv in levels]
    outputs = np.zeros((n, len(schema.outputs))) if schema.outputs else None
    labels = np.zeros(n, dtype=np.intp) if schema.label else None
    label_levels = schema.label_levels
    if schema.label and label_levels is None:
        label_levels = tuple(sorted({v[index[schema.label]] for _, v in rows}, key=_natural_key))
    label_pos = {lv: i for i, lv in enumerate(label_levels or ())}
    level_pos = [(index[c], {lv: i for i, lv in enumerate(levels)}) for c, levels in cat_levels]

    for r, (line, values) in enumerate(rows):
        col = 0
        for name in schema.numeric:
            features[r, col] = _number(values[index[name]], name, line)
            col += 1
        for (ci, pos), (cname, levels) in zip(level_pos, cat_levels):
            value = values[ci]
            if value not in pos:
                raise IngestionError(f"unknown level {value!r} for column {cname!r}", line)
            features[r, col + pos[value]] = 1.0
            col += len(levels)
        for j, name in enumerate(schema.outputs):
            outputs[r, j] = _number(values[index[name]], name, line)
        if schema.label:
            value = values[index[schema.label]]
            if value not in label_pos:
                raise IngestionError(f"unknown label {value!r}", line)
            labels[r] = label_pos[value]

    return IngestResult(features, names, labels, outputs, tuple(label_levels or ()), dropped)


def _number(text: str, column: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise IngestionError(f"non-numeric value {text!r} in column {column!r}", line) from None


def _natural_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


@dataclass
class RewardTable:
    """Expected reward per (row, arm); ``poison`` marks mushroom rows with a stochastic ``eat``."""

    expected: np.ndarray
    poison: np.ndarray | None = None


def reward_table(data: IngestResult, schema: Schema) -> RewardTable:
    if schema.scheme == "classification":
        k = len(data.label_levels)
        return RewardTable(np.eye(k)[data.labels])
    if schema.scheme == "mushroom":
        poison = data.labels == data.label_levels.index("p")
        eat = np.where(poison, 0.5 * (MUSHROOM_EAT_POISON_GOOD + MUSHROOM_EAT_POISON_BAD), MUSHROOM_EAT_EDIBLE)
        return RewardTable(np.column_stack([eat, np.zeros_like(eat)]), poison)
    if schema.scheme == "multi_output":
        return RewardTable(data.outputs.copy())
    raise ValueError(f"unknown reward scheme {schema.scheme!r}")


@dataclass
class DatasetBandit(Environment):
    """Streams rows in a per-trial shuffled order; one row per step."""

    features: np.ndarray
    table: RewardTable
    name: str = "dataset"
    standardize: bool = True
    warmup: int = 1000
    n_arms: int = field(init=False)
    dim: int = field(init=False)
    max_steps: int = field(init=False)

    def __post_init__(self):
        self.n_arms = self.table.expected.shape[1]
        self.dim = self.features.shape[1]
        self.max_steps = self.features.shape[0]

    def reset(self, rng: BatchRng) -> None:
        super().reset(rng)
        n = self.max_steps
        self.order = np.stack([g.permutation(n) for g in rng.generators("order")])
        self.cursor = 0
        self._rows = None
        self._u = rng.tape("reward", "uniform")
        if self.standardize:
            w = min(self.warmup, n)
            window = self.features[self.order[:, :w]]
            self._mu = window.mean(axis=1)
            sd = window.std(axis=1)
            # constant columns in the window pass through centred
            self._sd = np.where(sd > 0, sd, 1.0)

    def next_context(self) -> np.ndarray:
        if self.cursor >= self.max_steps:
            raise EnvironmentExhausted(f"{self.name}: all {self.max_steps} rows consumed")
        self._rows = self.order[:, self.cursor]
        self.cursor += 1
        x = self.features[self._rows]
        if self.standardize:
            x = (x - self._mu) / self._sd
        return x

    def mean_rewards(self, x):
        return self.table.expected[self._rows]

    def reward(self, x, arms):
        r = self.table.expected[self._rows, arms]
        u = self._u.next()
        if self.table.poison is not None:
            risky = self.table.poison[self._rows] & (arms == 0)
            draw = np.where(u < 0.5, MUSHROOM_EAT_POISON_GOOD, MUSHROOM_EAT_POISON_BAD)
            r = np.where(risky, draw, r)
        return r


def dataset_env(
    name: str,
    source: str = "synthetic",
    *,
    rows: int = 2000,
    fixture_seed: int = 0,
    standardize: bool = True,
) -> DatasetBandit:
    """Build a dataset bandit from a CSV path, or from a generated fixture when ``source="synthetic"``."""
    if name not in SCHEMAS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {DATASETS}")
    schema = SCHEMAS[name]
    if source == "synthetic":
        from saubandit.envs.fixtures import fixture_csv

        data = ingest_csv(io.StringIO(fixture_csv(name, rows, fixture_seed)), schema)
    else:
        data = ingest_csv(source, schema)
    return DatasetBandit(data.features, reward_table(data, schema), name=name, standardize=standardize)
