"""Exhaustive subset search: ground-truth schedule and coverage bookkeeping.

Every variable subset (size >= 2 under the forest engine) is trained and
scored with the same subset-derived seed the sequence generators use, so
frontier comparisons are not confounded by forest randomness.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ProblemTooLarge
from .schedule import CostProfile, ModelSchedule, Source, compress
from .sequences import ForestParams, _SubsetEvaluator

MAX_EXHAUSTIVE_P = 20


@dataclass(frozen=True)
class SolutionPoint:
    subset: frozenset[int]
    cost: float
    val_accuracy: float


@dataclass(frozen=True)
class SolutionSpace:
    points: tuple[SolutionPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def subsets(self) -> frozenset[frozenset[int]]:
        return frozenset(p.subset for p in self.points)


def enumerate_subsets(p: int, min_size: int = 1) -> list[frozenset[int]]:
    """All subsets of {1..p} with at least min_size members, ordered by
    size then lexicographically."""
    if p > MAX_EXHAUSTIVE_P:
        raise ProblemTooLarge(
            f"exhaustive enumeration capped at p={MAX_EXHAUSTIVE_P}, got {p}")
    out = []
    for size in range(max(min_size, 1), p + 1):
        for combo in combinations(range(1, p + 1), size):
            out.append(frozenset(combo))
    return out


def exhaustive_schedule(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                        params: ForestParams | None = None,
                        master_seed: int = 0,
                        min_size: int = 2) -> tuple[ModelSchedule, SolutionSpace]:
    """Train on every subset and compress the resulting points into the
    empirically optimal schedule."""
    params = params or ForestParams()
    evaluator = _SubsetEvaluator(X_tr, y_tr, X_val, y_val, profile, params,
                                 master_seed)
    p = evaluator.X_tr.shape[1]
    records = []
    points = []
    for subset in enumerate_subsets(p, min_size=min_size):
        rec = evaluator.record(subset, Source.ORACLE)
        records.append(rec)
        points.append(SolutionPoint(subset, rec.cost, rec.val_accuracy))
        # drop the cached forest: 2^p subsets would otherwise pin them all
        evaluator._cache.clear()
    return compress(records, profile), SolutionSpace(tuple(points))


def coverage_fraction(space: SolutionSpace,
                      visited: Iterable[Sequence[int] | frozenset[int]]) -> float:
    """Fraction of the solution space hit by the distinct visited subsets."""
    if len(space) == 0:
        return 0.0
    universe = space.subsets
    distinct = {frozenset(v) for v in visited} & universe
    return len(distinct) / len(space)


def write_solution_space(space: SolutionSpace, path_or_file) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["subset", "cost", "val_accuracy"])
        for pt in space.points:
            w.writerow([";".join(str(i) for i in sorted(pt.subset)),
                        repr(pt.cost), repr(pt.val_accuracy)])
    finally:
        if own:
            f.close()
