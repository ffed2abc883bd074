import os

import numpy as np
import pytest

from costsched.cli import main
from costsched.dataio import write_dataset_csv
from costsched.experiment import (
    METHOD_ENSEMBLE,
    METHOD_L1_BASELINE,
    ExperimentConfig,
    ExperimentResult,
    emit_outputs,
    run_experiment,
    staircase_svg,
    write_trace,
)
from costsched.schedule import ModelRecord, ModelSchedule, Source
from costsched.sequences import SequenceRun
from costsched.synth import MixtureSpec, sample_mixture

FAST = dict(n_trees=8, n_lambda=12)


@pytest.fixture(scope="module")
def mixture_200():
    return sample_mixture(MixtureSpec(n=200, rho=0.3, seed=3))


@pytest.fixture(scope="module")
def small_result(mixture_200):
    X, y = mixture_200
    config = ExperimentConfig(runs=2, seed=1, **FAST)
    return run_experiment(X, y, config)


class TestRunExperiment:
    def test_both_methods_present(self, small_result):
        methods = {m for _, _, m, _ in small_result.points}
        assert methods == {METHOD_ENSEMBLE, METHOD_L1_BASELINE}
        assert small_result.errors == []

    def test_full_model_normalizes_to_one(self, small_result):
        ens_pts = small_result.method_points(METHOD_ENSEMBLE)
        assert ens_pts[:, 0].max() <= 1.0 + 1e-12
        # the baseline's intercept-only record pools at normalized cost 0
        base_pts = small_result.method_points(METHOD_L1_BASELINE)
        assert base_pts[:, 0].min() == 0.0

    def test_runs_tracked_by_id(self, small_result):
        assert sorted(small_result.ensemble_results) == [1, 2]
        assert sorted(small_result.baseline_schedules) == [1, 2]

    def test_fresh_profiles_per_run(self, small_result):
        s1 = small_result.ensemble_results[1].schedule
        s2 = small_result.ensemble_results[2].schedule
        assert [r.cost for r in s1] != [r.cost for r in s2]

    def test_deterministic(self, mixture_200, small_result):
        X, y = mixture_200
        again = run_experiment(X, y, ExperimentConfig(runs=2, seed=1, **FAST))
        assert again.points == small_result.points

    def test_failed_runs_recorded_not_raised(self):
        # constant labels make every run fail inside the lasso grid
        X = np.random.default_rng(0).normal(size=(50, 3))
        y = np.ones(50, int)
        result = run_experiment(X, y, ExperimentConfig(runs=2, seed=0, **FAST))
        assert len(result.errors) == 2
        assert result.points == []

    def test_bad_config(self):
        with pytest.raises(ValueError):
            ExperimentConfig(runs=0)


def npp_like_schedule():
    rows = [(119.0, 0.8504399, {1, 2}), (171.0, 0.9400922, {1, 2, 3}),
            (248.0, 0.9706745, {1, 2, 3, 4}), (340.0, 0.9773775, {1, 2, 3, 5}),
            (385.0, 0.9874319, {1, 2, 3, 6}), (417.0, 0.9907834, {1, 2, 3, 7})]
    return ModelSchedule(tuple(
        ModelRecord(frozenset(v), c, a, source=Source.ORACLE)
        for c, a, v in rows))


class TestSvgAndTrace:
    def test_one_step_element_per_record(self):
        svg = staircase_svg(npp_like_schedule())
        assert svg.count('class="step"') == 6
        assert svg.count("<circle") == 6
        assert svg.startswith("<svg")

    def test_empty_schedule_still_renders(self):
        svg = staircase_svg(ModelSchedule(()))
        assert svg.count('class="step"') == 0
        assert "</svg>" in svg

    def test_trace_format(self, tmp_path):
        rec = ModelRecord(frozenset({1, 2}), 3.0, 0.5, source=Source.BY_COST)
        run = SequenceRun((rec,), (rec,), seed=0)
        p = tmp_path / "trace.csv"
        write_trace(run, p)
        assert p.read_text() == "size,cost,val_accuracy\n2,3.0,0.5\n"


class TestEmitOutputs:
    def test_files_written_and_consistent(self, small_result, tmp_path):
        out = tmp_path / "exp"
        written = emit_outputs(small_result, out)
        names = {os.path.basename(p) for p in written}
        assert "scatter.csv" in names
        assert "curves.csv" in names
        assert f"schedule_{METHOD_ENSEMBLE}_run001.csv" in names
        assert f"schedule_{METHOD_ENSEMBLE}_run001.svg" in names
        assert f"schedule_{METHOD_L1_BASELINE}_run002.csv" in names
        assert "trace_cost_run001.csv" in names
        assert "trace_l1path_run002.csv" in names
        for p in written:
            assert os.path.exists(p)
        scatter = (out / "scatter.csv").read_text().splitlines()
        assert scatter[0] == "normalized_cost,accuracy,method,run"
        assert len(scatter) == 1 + len(small_result.points)

    def test_empty_result_emits_headers_only(self, tmp_path):
        out = tmp_path / "empty"
        emit_outputs(ExperimentResult(), out)
        assert (out / "scatter.csv").read_text() == \
            "normalized_cost,accuracy,method,run\n"
        assert (out / "curves.csv").read_text() == \
            "normalized_cost,smoothed_accuracy,method\n"


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory, mixture_200):
    X, y = mixture_200
    path = tmp_path_factory.mktemp("data") / "mix.csv"
    write_dataset_csv(path, X, y)
    return str(path)


class TestCli:
    def test_usage_error_is_exit_1(self, capsys):
        assert main(["lookup", "--budget", "5"]) == 1
        assert main(["no-such-command"]) == 1

    def test_missing_file_is_exit_2(self, capsys, tmp_path):
        code = main(["schedule", "--data", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_one_feature_dataset_is_exit_2(self, capsys, tmp_path):
        # one-feature dataset: the forest engine refuses the data itself
        p = tmp_path / "one.csv"
        p.write_text("x1,label\n" +
                     "".join(f"{i}.0,{1 + i % 2}\n" for i in range(20)))
        code = main(["schedule", "--data", str(p),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_synth_then_schedule_then_lookup(self, capsys, tmp_path,
                                             dataset_file):
        out = tmp_path / "sched"
        code = main(["schedule", "--data", dataset_file, "--seed", "2",
                     "--trees", "8", "--n-lambda", "12",
                     "--out", str(out)])
        assert code == 0
        assert (out / "schedule.csv").exists()
        assert (out / "schedule.svg").exists()
        capsys.readouterr()
        code = main(["lookup", "--schedule", str(out / "schedule.csv"),
                     "--budget", "1000000"])
        assert code == 0
        assert "val_accuracy=" in capsys.readouterr().out

    def test_lookup_below_cheapest_is_exit_3(self, capsys, tmp_path,
                                             dataset_file):
        out = tmp_path / "sched"
        main(["schedule", "--data", dataset_file, "--seed", "2",
              "--trees", "8", "--n-lambda", "12", "--out", str(out)])
        code = main(["lookup", "--schedule", str(out / "schedule.csv"),
                     "--budget", "0"])
        assert code == 3

    def test_costs_literal_values(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["costs", "--values", "1,2.5,3", "--out", str(out)]) == 0
        assert out.read_text() == "feature,cost\n1,1.0\n2,2.5\n3,3.0\n"

    def test_sequence_subcommand(self, capsys, tmp_path, dataset_file):
        out = tmp_path / "seq"
        code = main(["sequence", "--data", dataset_file, "--type", "cost",
                     "--trees", "8", "--out", str(out)])
        assert code == 0
        assert (out / "trace_cost.csv").exists()
        assert (out / "schedule_cost.csv").exists()

    def test_experiment_byte_identical_reruns(self, capsys, tmp_path,
                                              dataset_file):
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            code = main(["experiment", "--data", dataset_file, "--runs", "2",
                         "--seed", "5", "--trees", "8", "--n-lambda", "12",
                         "--out", str(out)])
            assert code == 0
            outs.append(out)
        files_a = sorted(os.listdir(outs[0]))
        assert files_a == sorted(os.listdir(outs[1]))
        for name in files_a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
