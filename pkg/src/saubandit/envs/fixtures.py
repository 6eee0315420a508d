"""Synthetic stand-ins shaped like each benchmark dataset.

They share column names, level sets and reward structure with the real
files so the ingestion path is identical, but the feature/label relation is
generated.  ``financial`` always comes from here: its source prices are not
redistributable.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from saubandit.envs.datasets import (
    ADULT_OCCUPATIONS,
    COVERTYPE_NUMERIC,
    SCHEMAS,
    _ADULT_CATEGORICAL,
    _MUSHROOM_ATTRS,
)

# shuttle-like class shares: class 1 dominates
STATLOG_CLASS_P = np.array([0.784, 0.002, 0.003, 0.155, 0.053, 0.001, 0.002])


def _write(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def _mushroom(n, rng):
    header = ["class", *(name for name, _ in _MUSHROOM_ATTRS)]
    edible_odor = ["a", "l", "n"]
    poison_odor = ["c", "y", "f", "m", "p", "s"]
    rows = []
    for _ in range(n):
        poison = rng.random() < 0.48
        row = ["p" if poison else "e"]
        for name, levels in _MUSHROOM_ATTRS:
            levels = levels.split(",")
            if name == "odor":
                pool = poison_odor if poison else edible_odor
                row.append(pool[rng.integers(len(pool))])
            else:
                row.append(levels[rng.integers(len(levels))])
        rows.append(row)
    return _write(header, rows)


def _statlog(n, rng):
    centres = np.random.default_rng(1234).normal(0.0, 3.0, (7, 9))
    labels = rng.choice(7, size=n, p=STATLOG_CLASS_P / STATLOG_CLASS_P.sum())
    x = centres[labels] + rng.standard_normal((n, 9))
    header = [*SCHEMAS["statlog"].numeric, "class"]
    rows = [[*map(_fmt, x[i]), str(labels[i] + 1)] for i in range(n)]
    return _write(header, rows)


def _covertype(n, rng):
    labels = rng.integers(0, 7, n)
    quant = np.random.default_rng(99).normal(0, 1, (7, 10))[labels] + rng.standard_normal((n, 10))
    wild = np.eye(4)[rng.integers(0, 4, n)]
    soil = np.eye(40)[(labels * 5 + rng.integers(0, 6, n)) % 40]
    x = np.column_stack([quant, wild, soil])
    header = [*COVERTYPE_NUMERIC, "Cover_Type"]
    rows = [[*(_fmt(v) for v in x[i, :10]), *(str(int(v)) for v in x[i, 10:]), str(labels[i] + 1)] for i in range(n)]
    return _write(header, rows)


def _multi_output(n, rng, d, k, prefix, noise):
    weights = np.random.default_rng(7 + d).normal(0, 1.0 / np.sqrt(d), (d, k))
    x = rng.standard_normal((n, d))
    y = x @ weights + noise * rng.standard_normal((n, k))
    schema = SCHEMAS[prefix]
    header = [*schema.numeric, *schema.outputs]
    rows = [[*map(_fmt, x[i]), *map(_fmt, y[i])] for i in range(n)]
    return _write(header, rows)


def _adult(n, rng):
    header = [
        "age",
        "workclass",
        "fnlwgt",
        "education",
        "education-num",
        "marital-status",
        "occupation",
        "relationship",
        "race",
        "sex",
        "capital-gain",
        "capital-loss",
        "hours-per-week",
        "native-country",
        "income",
    ]
    cats = {name: levels.split(",") for name, levels in _ADULT_CATEGORICAL}
    rows = []
    for _ in range(n):
        edu = int(rng.integers(len(cats["education"])))
        occ = (edu + int(rng.integers(0, 3))) % len(ADULT_OCCUPATIONS)
        row = {
            "age": str(int(rng.integers(17, 90))),
            "fnlwgt": str(int(rng.integers(10000, 1000000))),
            "education-num": str(edu + 1),
            "capital-gain": str(int(rng.integers(0, 3)) * 1000),
            "capital-loss": "0",
            "hours-per-week": str(int(rng.integers(10, 80))),
            "occupation": ADULT_OCCUPATIONS[occ],
        }
        for name, levels in cats.items():
            row[name] = levels[edu] if name == "education" else levels[rng.integers(len(levels))]
        if rng.random() < 0.05:
            row["occupation"] = "?"
        rows.append([row[h] for h in header])
    return _write(header, rows)


def _census(n, rng):
    n_attrs = 12
    header = ["caseid", *(f"attr{i}" for i in range(n_attrs)), "dOccup"]
    labels = rng.integers(0, 9, n)
    rows = []
    for i in range(n):
        attrs = [(labels[i] + int(rng.integers(0, 3))) % (4 + j % 5) for j in range(n_attrs)]
        rows.append([str(10000 + i), *map(str, attrs), str(labels[i])])
    return _write(header, rows)


def fixture_csv(name: str, rows: int, seed: int = 0) -> str:
    """CSV text of a ``rows``-row synthetic dataset shaped like ``name``."""
    rng = np.random.default_rng(seed)
    if name == "mushroom":
        return _mushroom(rows, rng)
    if name == "statlog":
        return _statlog(rows, rng)
    if name == "covertype":
        return _covertype(rows, rng)
    if name == "financial":
        return _multi_output(rows, rng, 21, 8, "financial", 0.0)
    if name == "jester":
        return _multi_output(rows, rng, 32, 8, "jester", 0.5)
    if name == "adult":
        return _adult(rows, rng)
    if name == "census":
        return _census(rows, rng)
    raise ValueError(f"no fixture for dataset {name!r}")
