"""CSV ingestion, cost-profile files, and the 60/20/20 split."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DatasetTooSmall,
    EmptyDataset,
    ParseError,
    UnknownLabelColumn,
)
from .schedule import CostProfile


def load_dataset_csv(path, label_column: str = "label", sidecar=None):
    """Load a comma-delimited dataset with a header row.

    Labels are coded 1..J in first-appearance order; the mapping is written
    to a sidecar file (default "<path>.classes.csv", pass sidecar=False to
    skip).  Feature cells must be numeric; blanks and junk raise ParseError
    with the 1-based data row and file column.

    Returns (X, y, feature_names, classes).
    """
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    rows = [r for r in rows if r]  # drop fully blank lines
    if not rows or len(rows) < 2:
        raise EmptyDataset(f"{path}: no data rows")
    header = rows[0]
    if label_column not in header:
        raise UnknownLabelColumn(
            f"{path}: no column named {label_column!r} in header")
    label_idx = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_idx]

    codes: dict[str, int] = {}
    X_rows = []
    y = []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(r, len(row) + 1,
                             f"expected {len(header)} fields, got {len(row)}")
        feats = []
        for c, cell in enumerate(row, start=1):
            if c - 1 == label_idx:
                label = cell.strip()
                if label == "":
                    raise ParseError(r, c, "blank label")
                if label not in codes:
                    codes[label] = len(codes) + 1
                y.append(codes[label])
            else:
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise ParseError(r, c, f"non-numeric cell {cell!r}")
        X_rows.append(feats)
    X = np.asarray(X_rows, dtype=float)
    y = np.asarray(y, dtype=int)
    classes = list(codes)

    if sidecar is not False:
        sidecar_path = sidecar if sidecar else f"{path}.classes.csv"
        with open(sidecar_path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["label", "code"])
            for label, code in codes.items():
                w.writerow([label, code])
    return X, y, feature_names, classes


def write_dataset_csv(path, X, y, label_column: str = "label") -> None:
    X = np.asarray(X)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(X.shape[1])] + [label_column])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def read_cost_profile(path):
    """Two-column file: feature name or 1-based index, cost.

    Returns (names, CostProfile).  When the first column is all integer
    indices the costs are reordered by index."""
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    if not rows:
        raise EmptyDataset(f"{path}: empty cost profile file")
    if rows[0] and rows[0][0].strip().lower() in ("feature", "name", "index",
                                                  "variable"):
        rows = rows[1:]
    names = []
    costs = []
    for r, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise ParseError(r, len(row) + 1, "expected two fields")
        names.append(row[0].strip())
        try:
            costs.append(float(row[1]))
        except ValueError:
            raise ParseError(r, 2, f"non-numeric cost {row[1]!r}")
    try:
        idx = [int(n) for n in names]
    except ValueError:
        idx = None
    if idx is not None:
        if sorted(idx) != list(range(1, len(idx) + 1)):
            raise ParseError(1, 1, "index column must cover 1..p exactly")
        ordered = [0.0] * len(idx)
        for i, c in zip(idx, costs):
            ordered[i - 1] = c
        costs = ordered
        names = [str(i) for i in range(1, len(idx) + 1)]
    return names, CostProfile.from_costs(costs)


def write_cost_profile(path, profile: CostProfile, names=None) -> None:
    names = names or [str(i) for i in range(1, profile.p + 1)]
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["feature", "cost"])
        for name, cost in zip(names, profile.costs):
            w.writerow([name, repr(float(cost))])


@dataclass(frozen=True)
class DatasetSplit:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int


def split_dataset(n: int, seed: int = 0) -> DatasetSplit:
    """Seeded shuffle then contiguous 60/20/20 cut; remainder rows go to
    the training partition."""
    if n < 5:
        raise DatasetTooSmall(f"need at least 5 rows, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(n)
    n_val = n // 5
    n_test = n // 5
    n_train = n - n_val - n_test
    return DatasetSplit(
        train=order[:n_train],
        validation=order[n_train:n_train + n_val],
        test=order[n_train + n_val:],
        seed=seed,
    )
