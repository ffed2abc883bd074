"""Model-sequence generators and the ensemble schedule driver.

Four generators feed the ensemble: greedy removal by variable cost, greedy
removal by permutation importance, randomized removal sampled by normalized
importance, and the L1 logistic regularization path re-fit with the forest
engine.  Their records are merged, compressed into a schedule, and the
survivors are re-evaluated on the test split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import TAG_MEMBER, derive_seed, subset_seed
from .errors import EngineNeedsTwoVariables, InvalidCost
from .forest import (
    Forest,
    accuracy_on,
    fit_forest,
    permutation_importance,
    ImportanceProfile,
)
from .lasso import (
    LambdaGrid,
    PathCoefficients,
    active_variables,
    fit_l1_logistic_path,
    make_lambda_grid,
    predict_logistic,
)
from .schedule import (
    CostProfile,
    ModelRecord,
    ModelSchedule,
    Source,
    compress,
    merge,
)

IMPORTANCE_FLOOR = 1e-6
DEFAULT_GAMMA = 0.1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry: int | None = None
    min_node_size: int = 1


@dataclass(frozen=True)
class SequenceRun:
    """Output of one generator: kept records in generation order, plus every
    evaluated model (pre budget-discard) and the visited subsets."""

    records: tuple[ModelRecord, ...]
    evaluations: tuple[ModelRecord, ...]
    seed: int

    @property
    def visited_subsets(self) -> tuple[frozenset[int], ...]:
        return tuple(r.variables for r in self.evaluations)

    def schedule(self, profile: CostProfile | None = None) -> ModelSchedule:
        return compress(self.records, profile)


def normalized_importance(cost: float, importance: float,
                          gamma: float = DEFAULT_GAMMA,
                          floor: float = IMPORTANCE_FLOOR) -> float:
    """(importance / cost) ** gamma, with the importance clamped below so
    negative permutation importances stay usable."""
    if cost <= 0:
        raise InvalidCost(f"variable cost must be positive, got {cost}")
    return (max(importance, floor) / cost) ** gamma


class _SubsetEvaluator:
    """Trains and scores forests per variable subset, caching by subset.

    The forest seed depends only on (master_seed, subset), so every
    generator, the ensemble driver, and the exhaustive oracle score a given
    subset with the identical forest.
    """

    def __init__(self, X_tr, y_tr, X_val, y_val, profile, params, master_seed):
        self.X_tr = np.ascontiguousarray(X_tr, dtype=np.float64)
        self.y_tr = np.asarray(y_tr)
        self.X_val = np.ascontiguousarray(X_val, dtype=np.float64)
        self.y_val = np.asarray(y_val)
        self.profile = profile
        self.params = params
        self.master_seed = master_seed
        self._cache: dict[frozenset, tuple[Forest, float]] = {}

    def forest_and_accuracy(self, variables: frozenset[int]):
        variables = frozenset(variables)
        hit = self._cache.get(variables)
        if hit is not None:
            return hit
        cols = [i - 1 for i in sorted(variables)]
        forest = fit_forest(
            self.X_tr[:, cols], self.y_tr,
            n_trees=self.params.n_trees, mtry=self.params.mtry,
            min_node_size=self.params.min_node_size,
            master_seed=subset_seed(self.master_seed, variables))
        acc = accuracy_on(forest, self.X_val[:, cols], self.y_val)
        self._cache[variables] = (forest, acc)
        return forest, acc

    def record(self, variables, source: Source) -> ModelRecord:
        variables = frozenset(variables)
        _, acc = self.forest_and_accuracy(variables)
        return ModelRecord(variables, self.profile.total_cost(variables),
                           acc, source=source)

    def test_accuracy(self, variables: frozenset[int], X_te, y_te) -> float:
        forest, _ = self.forest_and_accuracy(variables)
        cols = [i - 1 for i in sorted(variables)]
        return accuracy_on(forest, np.ascontiguousarray(
            np.asarray(X_te, dtype=np.float64)[:, cols]), y_te)


def _full_importances(evaluator: _SubsetEvaluator, seed: int) -> ImportanceProfile:
    p = evaluator.X_tr.shape[1]
    full = frozenset(range(1, p + 1))
    forest, _ = evaluator.forest_and_accuracy(full)
    return permutation_importance(forest, evaluator.X_val, evaluator.y_val,
                                  seed=seed)


def model_seq(X_tr, y_tr, X_val, y_val, profile: CostProfile,
              kind: Source, params: ForestParams | None = None,
              master_seed: int = 0, importances: ImportanceProfile | None = None,
              gamma: float = DEFAULT_GAMMA,
              evaluator: _SubsetEvaluator | None = None) -> SequenceRun:
    """Deterministic greedy removal sequence.

    Starts from the full model and removes argmin of the weight vector
    (importance for BY_IMPORTANCE, 1/cost for BY_COST, normalized
    importance for BY_SAMPLING behind this deterministic variant) until two
    variables remain.  Weight ties are broken by one-step lookahead: each
    tied candidate's removal is scored on the validation split and the
    removal that keeps accuracy highest wins (remaining ties go to the
    smallest index).  The weight vector is computed once up front and never
    refreshed.
    """
    params = params or ForestParams()
    if evaluator is None:
        evaluator = _SubsetEvaluator(X_tr, y_tr, X_val, y_val, profile,
                                     params, master_seed)
    p = evaluator.X_tr.shape[1]
    if p < 2:
        raise EngineNeedsTwoVariables(f"need at least two variables, got {p}")
    if profile.p != p:
        raise InvalidCost(
            f"cost profile length {profile.p} does not match p={p}")

    if kind == Source.BY_COST:
        w = 1.0 / profile.costs
    elif kind in (Source.BY_IMPORTANCE, Source.BY_SAMPLING):
        if importances is None:
            importances = _full_importances(
                evaluator, derive_seed(master_seed, TAG_MEMBER, 1))
        imp = importances.importances
        if kind == Source.BY_IMPORTANCE:
            w = imp
        else:
            w = np.array([normalized_importance(profile.costs[i], imp[i], gamma)
                          for i in range(p)])
    else:
        raise ValueError(f"unsupported sequence kind {kind}")

    remaining = set(range(1, p + 1))
    records = [evaluator.record(remaining, kind)]
    lookahead: list[ModelRecord] = []
    for _ in range(p - 2):
        lo = min(w[i - 1] for i in remaining)
        tied = sorted(i for i in remaining if w[i - 1] == lo)
        if len(tied) == 1:
            v = tied[0]
        else:
            # tied weights: score each candidate removal and keep the one
            # that leaves validation accuracy highest
            scored = [evaluator.record(remaining - {i}, kind) for i in tied]
            lookahead.extend(scored)
            v = max(zip(scored, tied),
                    key=lambda t: (t[0].val_accuracy, -t[1]))[1]
        remaining.remove(v)
        records.append(evaluator.record(remaining, kind))
    records = tuple(records)
    return SequenceRun(records, records + tuple(
        r for r in lookahead if r not in records), master_seed)


def sampled_removal_order(f_weights, seed: int) -> list[int]:
    """Removal order (1-based) drawn without replacement with probability
    proportional to 1/f, stopping when two variables remain.  Falls back to
    uniform draws if every 1/f weight degenerates."""
    f = np.asarray(f_weights, dtype=float)
    with np.errstate(divide="ignore"):
        inv = np.where(np.isfinite(1.0 / f) & (f > 0), 1.0 / f, 0.0)
    if not np.any(inv > 0):
        inv = np.ones_like(f)
    rng = np.random.Generator(np.random.PCG64(seed))
    remaining = list(range(1, len(f) + 1))
    order = []
    while len(remaining) > 2:
        wts = np.array([inv[i - 1] for i in remaining])
        if wts.sum() <= 0:
            wts = np.ones(len(remaining))
        probs = np.cumsum(wts / wts.sum())
        u = rng.random()
        pick = int(np.searchsorted(probs, u, side="right"))
        pick = min(pick, len(remaining) - 1)
        order.append(remaining.pop(pick))
    return order


def model_seq_sampled(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                      gamma: float = DEFAULT_GAMMA, budget: float | None = None,
                      seed: int = 0, params: ForestParams | None = None,
                      importances: ImportanceProfile | None = None,
                      evaluator: _SubsetEvaluator | None = None) -> SequenceRun:
    """Randomized removal sequence: variables leave with probability
    proportional to the inverse of their normalized importance.  Models
    whose cost exceeds `budget` are evaluated but dropped from the output.
    """
    params = params or ForestParams()
    if evaluator is None:
        evaluator = _SubsetEvaluator(X_tr, y_tr, X_val, y_val, profile,
                                     params, seed)
    p = evaluator.X_tr.shape[1]
    if p < 2:
        raise EngineNeedsTwoVariables(f"need at least two variables, got {p}")
    if importances is None:
        importances = _full_importances(
            evaluator, derive_seed(seed, TAG_MEMBER, 1))
    imp = importances.importances
    f = np.array([normalized_importance(profile.costs[i], imp[i], gamma)
                  for i in range(p)])
    order = sampled_removal_order(f, derive_seed(seed, TAG_MEMBER, 3))

    remaining = set(range(1, p + 1))
    evaluations = [evaluator.record(remaining, Source.BY_SAMPLING)]
    for v in order:
        remaining.remove(v)
        evaluations.append(evaluator.record(remaining, Source.BY_SAMPLING))
    evaluations = tuple(evaluations)
    if budget is None:
        records = evaluations
    else:
        records = tuple(r for r in evaluations if r.cost <= budget)
    return SequenceRun(records, evaluations, seed)


def model_seq_l(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                engine: str = "forest", params: ForestParams | None = None,
                master_seed: int = 0, n_lambda: int = 100,
                eps_ratio: float = 1e-3, X_te=None, y_te=None,
                path: PathCoefficients | None = None,
                evaluator: _SubsetEvaluator | None = None) -> SequenceRun:
    """Sequence along the L1 logistic regularization path.

    engine="forest": re-train the forest on each distinct active-variable
    union (skipping steps with fewer than two variables).
    engine="logit": score the path model itself at every step; this is the
    L1-logistic baseline schedule, and intercept-only steps are kept with
    an empty variable set and zero cost.
    """
    params = params or ForestParams()
    X_tr = np.asarray(X_tr, dtype=np.float64)
    if path is None:
        grid = make_lambda_grid(X_tr, y_tr, n_lambda=n_lambda,
                                eps_ratio=eps_ratio)
        path = fit_l1_logistic_path(X_tr, y_tr, grid)
    if engine == "forest" and evaluator is None:
        evaluator = _SubsetEvaluator(X_tr, y_tr, X_val, y_val, profile,
                                     params, master_seed)

    records: list[ModelRecord] = []
    if engine == "forest":
        seen: set[frozenset] = set()
        for step in range(1, path.n_lambda + 1):
            used = active_variables(path, step)
            if len(used) < 2 or used in seen:
                continue
            seen.add(used)
            records.append(evaluator.record(used, Source.BY_L1_PATH))
    elif engine == "logit":
        X_val = np.asarray(X_val, dtype=float)
        y_val = np.asarray(y_val)
        for step in range(1, path.n_lambda + 1):
            used = active_variables(path, step)
            acc = float(np.mean(predict_logistic(path, step, X_val) == y_val))
            test_acc = None
            if X_te is not None:
                test_acc = float(np.mean(
                    predict_logistic(path, step, np.asarray(X_te, dtype=float))
                    == np.asarray(y_te)))
            records.append(ModelRecord(used, profile.total_cost(used), acc,
                                       test_accuracy=test_acc,
                                       source=Source.BY_L1_PATH))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    records = tuple(records)
    return SequenceRun(records, records, master_seed)


@dataclass(frozen=True)
class EnsembleConfig:
    n_trees: int = 100
    mtry: int | None = None
    min_node_size: int = 1
    gamma: float = DEFAULT_GAMMA
    n_lambda: int = 100
    eps_ratio: float = 1e-3
    sampled_budget: float | None = None
    master_seed: int = 0

    @property
    def forest_params(self) -> ForestParams:
        return ForestParams(self.n_trees, self.mtry, self.min_node_size)


@dataclass(frozen=True)
class EnsembleResult:
    schedule: ModelSchedule
    members: dict[Source, SequenceRun] = field(default_factory=dict)

    @property
    def visited_subsets(self) -> tuple[frozenset[int], ...]:
        seen: list[frozenset] = []
        for run in self.members.values():
            for s in run.visited_subsets:
                if s not in seen:
                    seen.append(s)
        return tuple(seen)


MEMBER_ORDER = (Source.BY_COST, Source.BY_IMPORTANCE, Source.BY_SAMPLING,
                Source.BY_L1_PATH)


def run_ensemble(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                 config: EnsembleConfig | None = None,
                 X_te=None, y_te=None) -> EnsembleResult:
    """Run all four generators, merge and compress their records, and fill
    test accuracy for the surviving models."""
    config = config or EnsembleConfig()
    params = config.forest_params
    evaluator = _SubsetEvaluator(X_tr, y_tr, X_val, y_val, profile, params,
                                 config.master_seed)
    p = evaluator.X_tr.shape[1]
    if p < 2:
        raise EngineNeedsTwoVariables(f"need at least two variables, got {p}")

    importances = _full_importances(
        evaluator, derive_seed(config.master_seed, TAG_MEMBER, 1))

    members = {
        Source.BY_COST: model_seq(
            X_tr, y_tr, X_val, y_val, profile, Source.BY_COST, params,
            config.master_seed, importances=importances, evaluator=evaluator),
        Source.BY_IMPORTANCE: model_seq(
            X_tr, y_tr, X_val, y_val, profile, Source.BY_IMPORTANCE, params,
            config.master_seed, importances=importances, evaluator=evaluator),
        Source.BY_SAMPLING: model_seq_sampled(
            X_tr, y_tr, X_val, y_val, profile, gamma=config.gamma,
            budget=config.sampled_budget, seed=config.master_seed,
            params=params, importances=importances, evaluator=evaluator),
        Source.BY_L1_PATH: model_seq_l(
            X_tr, y_tr, X_val, y_val, profile, engine="forest", params=params,
            master_seed=config.master_seed, n_lambda=config.n_lambda,
            eps_ratio=config.eps_ratio, evaluator=evaluator),
    }
    schedule = merge([members[k].records for k in MEMBER_ORDER],
                     profile=profile)
    if X_te is not None:
        filled = tuple(
            r.with_test_accuracy(evaluator.test_accuracy(r.variables, X_te, y_te))
            for r in schedule)
        schedule = ModelSchedule(filled, profile)
    return EnsembleResult(schedule, members)


def ensemble_schedule(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                      config: EnsembleConfig | None = None,
                      X_te=None, y_te=None) -> ModelSchedule:
    return run_ensemble(X_tr, y_tr, X_val, y_val, profile, config,
                        X_te, y_te).schedule


def logistic_path_schedule(X_tr, y_tr, X_val, y_val, profile: CostProfile,
                           n_lambda: int = 100, eps_ratio: float = 1e-3,
                           X_te=None, y_te=None) -> ModelSchedule:
    """Baseline schedule: the L1 logistic path scored by its own models."""
    run = model_seq_l(X_tr, y_tr, X_val, y_val, profile, engine="logit",
                      n_lambda=n_lambda, eps_ratio=eps_ratio,
                      X_te=X_te, y_te=y_te)
    return run.schedule(profile)
