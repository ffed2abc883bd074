"""Experiment orchestration: repeated runs with fresh cost profiles and
splits, pooled scatter points, smoothed average schedules, and file
emission (tables, traces, curves, and staircase SVGs)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ._rng import TAG_RUN, derive_seed
from .dataio import split_dataset
from .errors import TooFewPoints
from .schedule import ModelSchedule, Source, write_schedule
from .sequences import (
    EnsembleConfig,
    EnsembleResult,
    SequenceRun,
    logistic_path_schedule,
    run_ensemble,
)
from .smoothing import DEFAULT_SPAN, smooth_schedule
from .synth import sample_cost_profile

METHOD_ENSEMBLE = "ensemble"
METHOD_L1_BASELINE = "l1logit"


@dataclass(frozen=True)
class ExperimentConfig:
    runs: int = 100
    cost_lo: float = 1.0
    cost_hi: float = 100.0
    seed: int = 0
    n_trees: int = 100
    mtry: int | None = None
    min_node_size: int = 1
    gamma: float = 0.1
    n_lambda: int = 100
    eps_ratio: float = 1e-3
    span: float = DEFAULT_SPAN

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass
class ExperimentResult:
    # pooled (normalized_cost, test_accuracy, method, run) points
    points: list[tuple[float, float, str, int]] = field(default_factory=list)
    ensemble_results: dict[int, EnsembleResult] = field(default_factory=dict)
    baseline_schedules: dict[int, ModelSchedule] = field(default_factory=dict)
    errors: list[tuple[int, str]] = field(default_factory=list)

    def method_points(self, method: str) -> np.ndarray:
        pts = [(c, a) for c, a, m, _ in self.points if m == method]
        return np.asarray(pts, dtype=float)


def run_experiment(X, y, config: ExperimentConfig) -> ExperimentResult:
    """The repeated-run protocol: per run draw a fresh cost profile and a
    fresh 60/20/20 split, build the ensemble and baseline schedules, and
    pool every schedule point at its cost normalized by the full-model
    cost.  Per-run failures are recorded and remaining runs continue."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n, p = X.shape
    result = ExperimentResult()
    for run in range(1, config.runs + 1):
        run_seed = derive_seed(config.seed, TAG_RUN, run)
        try:
            profile = sample_cost_profile(
                p, config.cost_lo, config.cost_hi, derive_seed(run_seed, 1))
            split = split_dataset(n, derive_seed(run_seed, 2))
            parts = dict(
                X_tr=X[split.train], y_tr=y[split.train],
                X_val=X[split.validation], y_val=y[split.validation],
                X_te=X[split.test], y_te=y[split.test],
            )
            ens_config = EnsembleConfig(
                n_trees=config.n_trees, mtry=config.mtry,
                min_node_size=config.min_node_size, gamma=config.gamma,
                n_lambda=config.n_lambda, eps_ratio=config.eps_ratio,
                master_seed=derive_seed(run_seed, 3))
            ens = run_ensemble(parts["X_tr"], parts["y_tr"], parts["X_val"],
                               parts["y_val"], profile, ens_config,
                               X_te=parts["X_te"], y_te=parts["y_te"])
            base = logistic_path_schedule(
                parts["X_tr"], parts["y_tr"], parts["X_val"], parts["y_val"],
                profile, n_lambda=config.n_lambda, eps_ratio=config.eps_ratio,
                X_te=parts["X_te"], y_te=parts["y_te"])
        except Exception as e:  # noqa: BLE001 - surfaced per run
            result.errors.append((run, f"{type(e).__name__}: {e}"))
            continue
        full_cost = profile.total_cost(range(1, p + 1))
        for rec in ens.schedule:
            acc = rec.test_accuracy if rec.test_accuracy is not None else rec.val_accuracy
            result.points.append((rec.cost / full_cost, acc,
                                  METHOD_ENSEMBLE, run))
        for rec in base:
            acc = rec.test_accuracy if rec.test_accuracy is not None else rec.val_accuracy
            result.points.append((rec.cost / full_cost, acc,
                                  METHOD_L1_BASELINE, run))
        result.ensemble_results[run] = ens
        result.baseline_schedules[run] = base
    return result


def staircase_svg(schedule: ModelSchedule, width=640, height=480) -> str:
    """Minimal staircase plot of accuracy versus budget, one step element
    per schedule record."""
    ml, mr, mt, mb = 50, 20, 20, 40
    iw, ih = width - ml - mr, height - mt - mb
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ih}" x2="{ml + iw}" y2="{mt + ih}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ih}" stroke="black"/>',
    ]
    records = list(schedule)
    if records:
        max_cost = records[-1].cost * 1.05

        def sx(c):
            return ml + iw * c / max_cost

        def sy(a):
            return mt + ih * (1.0 - a)

        for i, rec in enumerate(records):
            x1 = sx(rec.cost)
            x2 = sx(records[i + 1].cost) if i + 1 < len(records) else ml + iw
            ycoord = sy(rec.val_accuracy)
            parts.append(
                f'<path class="step" d="M {x1:.2f} {ycoord:.2f} '
                f'L {x2:.2f} {ycoord:.2f}" stroke="steelblue" '
                'stroke-width="2" fill="none"/>')
            parts.append(
                f'<circle cx="{x1:.2f}" cy="{ycoord:.2f}" r="3" '
                'fill="steelblue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_trace(run: SequenceRun, path) -> None:
    """One line per evaluated subset: size, cost, validation accuracy."""
    with open(path, "w", newline="") as f:
        f.write("size,cost,val_accuracy\n")
        for rec in run.evaluations:
            f.write(f"{len(rec.variables)},{rec.cost!r},"
                    f"{rec.val_accuracy!r}\n")


_MEMBER_FILE_TAGS = {
    Source.BY_COST: "cost",
    Source.BY_IMPORTANCE: "importance",
    Source.BY_SAMPLING: "sampling",
    Source.BY_L1_PATH: "l1path",
}


def emit_outputs(result: ExperimentResult, out_dir,
                 span: float = DEFAULT_SPAN) -> list[str]:
    """Write scatter, smoothed curves, per-run schedules (table + SVG), and
    per-sequence traces.  Returns the written file paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def path_of(name):
        p = os.path.join(out_dir, name)
        written.append(p)
        return p

    with open(path_of("scatter.csv"), "w", newline="") as f:
        f.write("normalized_cost,accuracy,method,run\n")
        for c, a, m, r in result.points:
            f.write(f"{c!r},{a!r},{m},{r}\n")

    with open(path_of("curves.csv"), "w", newline="") as f:
        f.write("normalized_cost,smoothed_accuracy,method\n")
        for method in (METHOD_ENSEMBLE, METHOD_L1_BASELINE):
            pts = result.method_points(method)
            if len(pts) == 0:
                continue
            try:
                xs, ys = smooth_schedule(pts, span=span)
            except TooFewPoints:
                continue
            for xv, yv in zip(xs, ys):
                f.write(f"{float(xv)!r},{float(yv)!r},{method}\n")

    for run_id in sorted(result.ensemble_results):
        ens = result.ensemble_results[run_id]
        write_schedule(ens.schedule,
                       path_of(f"schedule_{METHOD_ENSEMBLE}_run{run_id:03d}.csv"))
        with open(path_of(f"schedule_{METHOD_ENSEMBLE}_run{run_id:03d}.svg"),
                  "w") as f:
            f.write(staircase_svg(ens.schedule))
        for source, seq in ens.members.items():
            tag = _MEMBER_FILE_TAGS[source]
            write_trace(seq, path_of(f"trace_{tag}_run{run_id:03d}.csv"))
    for run_id in sorted(result.baseline_schedules):
        sched = result.baseline_schedules[run_id]
        write_schedule(sched,
                       path_of(f"schedule_{METHOD_L1_BASELINE}_run{run_id:03d}.csv"))
        with open(path_of(f"schedule_{METHOD_L1_BASELINE}_run{run_id:03d}.svg"),
                  "w") as f:
            f.write(staircase_svg(sched))
    return written
