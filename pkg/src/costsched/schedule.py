"""Model records, schedules, and the merge/compress/lookup algebra.

A schedule is the Pareto frontier of (minimize cost, maximize validation
accuracy): sorted by cost, strictly increasing in both cost and accuracy.
Dominance and compression always use validation accuracy; test accuracy is
carried along for reporting only.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from enum import Enum
from math import isfinite
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InconsistentProfile,
    InvalidCost,
    InvalidVariableIndex,
    NoFeasibleModel,
)


class Source(str, Enum):
    BY_COST = "cost"
    BY_IMPORTANCE = "importance"
    BY_SAMPLING = "sampling"
    BY_L1_PATH = "l1path"
    ORACLE = "oracle"


@dataclass(frozen=True)
class CostProfile:
    """Per-variable acquisition costs, held as exact integer cents so that
    cost sums compare and sort exactly."""

    cents: tuple[int, ...]

    def __post_init__(self):
        if len(self.cents) == 0:
            raise InvalidCost("empty cost profile")
        for c in self.cents:
            if not isinstance(c, int) or c <= 0:
                raise InvalidCost(f"costs must be positive, got {c / 100}")

    @classmethod
    def from_costs(cls, values: Iterable[float]) -> "CostProfile":
        cents = []
        for v in values:
            v = float(v)
            if not isfinite(v) or v <= 0:
                raise InvalidCost(f"costs must be positive and finite, got {v}")
            cents.append(round(v * 100))
        return cls(tuple(cents))

    @property
    def p(self) -> int:
        return len(self.cents)

    @property
    def costs(self) -> np.ndarray:
        return np.asarray(self.cents, dtype=float) / 100.0

    def total_cost(self, variables: Iterable[int]) -> float:
        total = 0
        for i in set(variables):
            if not 1 <= i <= self.p:
                raise InvalidVariableIndex(
                    f"variable {i} outside 1..{self.p}")
            total += self.cents[i - 1]
        return total / 100.0


def total_cost(variables: Iterable[int], profile: CostProfile) -> float:
    """Sum of per-variable costs over the (1-based) index set."""
    return profile.total_cost(variables)


@dataclass(frozen=True)
class ModelRecord:
    variables: frozenset[int]
    cost: float
    val_accuracy: float
    test_accuracy: float | None = None
    source: Source = Source.ORACLE

    def __post_init__(self):
        object.__setattr__(self, "variables", frozenset(self.variables))
        for i in self.variables:
            if not isinstance(i, (int, np.integer)) or i < 1:
                raise InvalidVariableIndex(f"bad variable index {i}")
        if not 0.0 <= self.val_accuracy <= 1.0:
            raise ValueError(f"val_accuracy out of [0,1]: {self.val_accuracy}")
        if self.test_accuracy is not None and not 0.0 <= self.test_accuracy <= 1.0:
            raise ValueError(f"test_accuracy out of [0,1]: {self.test_accuracy}")

    def with_test_accuracy(self, acc: float) -> "ModelRecord":
        return replace(self, test_accuracy=acc)

    def with_source(self, source: Source) -> "ModelRecord":
        return replace(self, source=source)


def dominates(a: ModelRecord, b: ModelRecord) -> bool:
    """True iff `a` is at least as cheap and as accurate as `b`, with a
    strict advantage on at least one side."""
    return (a.cost <= b.cost and a.val_accuracy >= b.val_accuracy
            and (a.cost < b.cost or a.val_accuracy > b.val_accuracy))


@dataclass(frozen=True)
class ModelSchedule:
    records: tuple[ModelRecord, ...] = ()
    profile: CostProfile | None = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        prev = None
        for r in self.records:
            if r.variables in seen:
                raise ValueError("duplicate variable set in schedule")
            seen.add(r.variables)
            if prev is not None:
                if not (r.cost > prev.cost and r.val_accuracy > prev.val_accuracy):
                    raise ValueError(
                        "schedule must be strictly increasing in cost and "
                        "validation accuracy")
            prev = r
        if self.profile is not None:
            for r in self.records:
                if r.cost != self.profile.total_cost(r.variables):
                    raise InconsistentProfile(
                        f"record cost {r.cost} does not match profile")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> ModelRecord:
        return self.records[i]

    @property
    def costs(self) -> list[float]:
        return [r.cost for r in self.records]


def compress(records: Iterable[ModelRecord],
             profile: CostProfile | None = None) -> ModelSchedule:
    """Pareto frontier of the records.

    Duplicate variable sets keep the max validation accuracy.  Equal
    (cost, accuracy) ties keep the record encountered first in the input
    ordering, so generation order fixes the outcome deterministically.
    """
    # dedupe by variable set, keeping max val_accuracy (first on ties)
    by_vars: dict[frozenset, tuple[int, ModelRecord]] = {}
    for pos, r in enumerate(records):
        kept = by_vars.get(r.variables)
        if kept is None or r.val_accuracy > kept[1].val_accuracy:
            by_vars[r.variables] = (pos if kept is None else kept[0], r)
    pool = sorted(by_vars.values(), key=lambda t: (t[1].cost, -t[1].val_accuracy, t[0]))
    out = []
    best_acc = -1.0
    for _, r in pool:
        if r.val_accuracy > best_acc:
            out.append(r)
            best_acc = r.val_accuracy
    return ModelSchedule(tuple(out), profile)


def merge(schedules: Sequence[ModelSchedule | Iterable[ModelRecord]],
          profile: CostProfile | None = None) -> ModelSchedule:
    """Set-union of the inputs' records followed by compression.

    All inputs must have been built under the same cost profile; schedules
    carrying distinct profiles are rejected.
    """
    records: list[ModelRecord] = []
    for s in schedules:
        if isinstance(s, ModelSchedule):
            if s.profile is not None:
                if profile is None:
                    profile = s.profile
                elif profile != s.profile:
                    raise InconsistentProfile(
                        "schedules built under different cost profiles")
            records.extend(s.records)
        else:
            records.extend(s)
    if profile is not None:
        for r in records:
            if r.cost != profile.total_cost(r.variables):
                raise InconsistentProfile(
                    f"record cost {r.cost} does not match profile")
    return compress(records, profile)


def best_under_budget(schedule: ModelSchedule, budget: float) -> ModelRecord:
    """Most expensive record with cost <= budget (conservative step lookup)."""
    if len(schedule) == 0:
        raise NoFeasibleModel("empty schedule")
    i = bisect_right(schedule.costs, budget)
    if i == 0:
        raise NoFeasibleModel(
            f"cheapest model costs {schedule.records[0].cost}, budget {budget}")
    return schedule.records[i - 1]


SCHEDULE_HEADER = ["cost", "val_accuracy", "test_accuracy", "variables", "source"]


def _format_variables(variables: frozenset[int]) -> str:
    return ";".join(str(i) for i in sorted(variables))


def write_schedule(schedule: ModelSchedule, path_or_file) -> None:
    """Write the delimited schedule table (header + one record per line)."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        for r in schedule:
            w.writerow([
                repr(r.cost),
                repr(r.val_accuracy),
                "" if r.test_accuracy is None else repr(r.test_accuracy),
                _format_variables(r.variables),
                r.source.value,
            ])
    finally:
        if own:
            f.close()


def read_schedule(path_or_file,
                  profile: CostProfile | None = None) -> ModelSchedule:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, newline="") if own else path_or_file
    try:
        rows = list(csv.reader(f))
    finally:
        if own:
            f.close()
    if not rows or rows[0] != SCHEDULE_HEADER:
        raise ValueError("missing or malformed schedule header")
    records = []
    for row in rows[1:]:
        cost, val, test, variables, source = row
        records.append(ModelRecord(
            variables=frozenset(int(i) for i in variables.split(";") if i),
            cost=float(cost),
            val_accuracy=float(val),
            test_accuracy=None if test == "" else float(test),
            source=Source(source),
        ))
    return ModelSchedule(tuple(records), profile)


def schedule_to_text(schedule: ModelSchedule) -> str:
    buf = io.StringIO()
    write_schedule(schedule, buf)
    return buf.getvalue()
