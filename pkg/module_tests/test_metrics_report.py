import os

import numpy as np
import pytest

from src.dnn import Prediction
from src.helpers.enums import Fold
from src.helpers.errors import DimensionError, MetricsError, ReportError
from src.metrics_report import build_report, emit_report, mae, r_squared, timing_rows

TARGETS = [0.1, 0.2, 0.3, 0.4]
PREDICTED = [0.1, 0.25, 0.25, 0.5]


def sample_predictions():
    return [
        Prediction("q3", Fold.test, 0.3, 0.25),
        Prediction("q1", Fold.test, 0.1, 0.1),
        Prediction("q9", Fold.train, 0.6, 0.55),
        Prediction("q2", Fold.test, 0.2, 0.25),
        Prediction("q4", Fold.test, 0.4, 0.5),
    ]


def read(path):
    with open(path) as f:
        return f.read()


def test_worked_example():
    assert abs(mae(TARGETS, PREDICTED) - 0.05) < 1e-12
    assert abs(r_squared(TARGETS, PREDICTED) - 0.7) < 1e-12


def test_more_worked_examples():
    assert abs(mae([0.2, 0.4, 0.9], [0.1, 0.5, 0.8]) - 0.1) < 1e-12
    assert abs(r_squared([0.0, 1.0, 2.0], [0.0, 1.0, 1.0]) - 0.5) < 1e-12


def test_perfect_and_mean_predictors():
    assert r_squared(TARGETS, TARGETS) == 1.0
    assert mae(TARGETS, TARGETS) == 0.0
    assert abs(r_squared(TARGETS, [0.25] * 4)) < 1e-12


def test_r_squared_can_be_negative():
    assert r_squared([0.0, 1.0], [1.0, 0.0]) == -3.0


def test_metrics_ignore_row_order():
    rng = np.random.default_rng(0)
    targets = rng.uniform(size=50)
    preds = rng.uniform(size=50)
    for _ in range(20):
        order = rng.permutation(50)
        assert abs(mae(targets[order], preds[order]) - mae(targets, preds)) < 1e-12
        assert abs(r_squared(targets[order], preds[order]) - r_squared(targets, preds)) < 1e-12


def test_metric_errors():
    with pytest.raises(MetricsError):
        mae([], [])
    with pytest.raises(DimensionError):
        mae([0.1, 0.2], [0.1])
    with pytest.raises(MetricsError):
        r_squared([0.5], [0.5])
    with pytest.raises(MetricsError):
        r_squared([0.5, 0.5, 0.5], [0.1, 0.2, 0.3])


def test_report_uses_the_chosen_fold():
    report = build_report(sample_predictions(), Fold.test)
    assert [row.name for row in report.fold_rows()] == ["q1", "q2", "q3", "q4"]
    assert abs(report.mae - 0.05) < 1e-12
    assert abs(report.r2 - 0.7) < 1e-12
    train_report = build_report(sample_predictions(), Fold.train)
    assert train_report.r2 is None
    assert abs(train_report.mae - 0.05) < 1e-12


def test_report_on_an_empty_fold_fails():
    with pytest.raises(MetricsError):
        build_report([Prediction("q1", Fold.train, 0.1, 0.2)], Fold.test)


def test_timing_rows_compare_campaign_with_prediction():
    rows = timing_rows({"campaign": 2.0, "embed": 0.25, "train": 0.5, "predict": 0.25})
    assert rows[:4] == [["campaign", "2.0"], ["embed", "0.25"], ["train", "0.5"], ["predict", "0.25"]]
    assert rows[4:] == [["fault_injection_campaign", "2.0"], ["embed_train_predict", "1.0"], ["speedup", "2.0"]]
    assert timing_rows({"predict": 0.1}) == [["predict", "0.1"]]


def test_emitted_files(out_dir):
    report = build_report(sample_predictions(), Fold.test)
    paths = emit_report(report, out_dir)
    assert [os.path.basename(path) for path in paths] == ["predictions.csv", "plot_data.csv", "metrics.csv"]
    assert read(paths[0]).splitlines() == [
        "ff_name,fold,target_ffr,predicted_ffr",
        "q1,test,0.1,0.1",
        "q2,test,0.2,0.25",
        "q3,test,0.3,0.25",
        "q4,test,0.4,0.5",
        "q9,train,0.6,0.55",
    ]
    plot = read(paths[1]).splitlines()
    assert plot[0] == "index,ff_name,target_ffr,predicted_ffr"
    assert [line.split(",")[:2] for line in plot[1:]] == [["0", "q1"], ["1", "q2"], ["2", "q3"], ["3", "q4"]]
    header, row = read(paths[2]).splitlines()
    assert header == "fold,rows,mae,r2"
    assert row.startswith("test,4,")


def test_blank_r2_when_undefined(out_dir):
    report = build_report(sample_predictions(), Fold.train)
    emit_report(report, out_dir)
    assert read(os.path.join(out_dir, "metrics.csv")).splitlines()[1].endswith(",")


def test_emitted_files_are_byte_stable(tmp_path):
    first = emit_report(build_report(sample_predictions()), str(tmp_path / "first"))
    again = emit_report(build_report(sample_predictions()), str(tmp_path / "again"))
    for left, right in zip(first, again):
        assert read(left) == read(right)


def test_timing_file_is_written_with_wallclock(out_dir):
    report = build_report(sample_predictions(), wallclock={"campaign": 3.0, "predict": 0.5})
    paths = emit_report(report, out_dir)
    assert os.path.basename(paths[-1]) == "timing.csv"
    assert read(paths[-1]).splitlines()[-1] == "speedup,6.0"


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ReportError):
        emit_report(build_report(sample_predictions()), str(blocker))
