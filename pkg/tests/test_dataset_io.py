import json

import numpy as np
import pytest

from kqe_bench.errors import DatasetError
from kqe_bench.models import ExperimentReport, ReportFormat, SweepPoint
from kqe_bench.services.dataset_io import (
    load_csv,
    read_reports,
    timing_path,
    write_csv,
    write_report,
    write_timing,
)


def make_report(rate=1 / 3, method="ekqd"):
    return ExperimentReport(
        experiment="power-decay",
        method=method,
        param_name="d",
        points=[SweepPoint(param_value=32, rejection_rate=rate, trials=3)],
        trials=3,
        seed=7,
        config={"command": "benchmark", "seed": 7},
    )


def test_load_simple_table(csv_file):
    dataset = load_csv(csv_file("1,2\n3,4\n"))
    np.testing.assert_array_equal(dataset.points, [[1.0, 2.0], [3.0, 4.0]])
    assert (dataset.n, dataset.d) == (2, 2)
    assert dataset.name == "data"


def test_load_scientific_notation_and_header(csv_file):
    np.testing.assert_array_equal(load_csv(csv_file("1e3,-0.5\n")).points, [[1000.0, -0.5]])
    dataset = load_csv(csv_file("a,b\n1.5, 2\n", name="h.csv"), has_header=True)
    np.testing.assert_array_equal(dataset.points, [[1.5, 2.0]])


def test_load_errors_name_position(csv_file):
    with pytest.raises(DatasetError, match="row 2"):
        load_csv(csv_file("1,2\n3\n"))
    with pytest.raises(DatasetError, match="row 1, column 2"):
        load_csv(csv_file("1,x\n"))
    with pytest.raises(DatasetError, match="non-finite"):
        load_csv(csv_file("1,nan\n"))
    with pytest.raises(DatasetError, match="non-finite"):
        load_csv(csv_file("inf,1\n"))
    with pytest.raises(DatasetError):
        load_csv(csv_file(""))
    with pytest.raises(FileNotFoundError):
        load_csv("/nonexistent/x.csv")


def test_written_tables_load_bit_exact(tmp_path, rng):
    points = rng.standard_normal((30, 4)) * 10.0 ** rng.integers(-8, 8, size=(30, 4))
    path = write_csv(points, tmp_path / "t.csv")
    assert np.array_equal(load_csv(path).points, points)


def test_csv_report(tmp_path):
    path = write_report(make_report(), ReportFormat.CSV, tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "method,param_name,param_value,rejection_rate,trials,seed"
    assert lines[1] == "ekqd,d,32,0.3333333333333333,3,7"
    assert len(lines) == 2

    both = write_report([make_report(), make_report(0.5, "mmd-u")], ReportFormat.CSV, tmp_path / "two.csv")
    reports = read_reports(both, ReportFormat.CSV)
    assert [r.method for r in reports] == ["ekqd", "mmd-u"]
    assert reports[0].points[0].rejection_rate == 1 / 3


def test_json_report_round_trip(tmp_path):
    report = make_report()
    path = write_report(report, ReportFormat.JSON, tmp_path / "r.json")
    assert json.loads(path.read_text())["method"] == "ekqd"
    assert read_reports(path, ReportFormat.JSON) == [report]


def test_failed_cells_are_nan(tmp_path):
    failed = ExperimentReport(
        experiment="custom-csv", method="mmd-u", param_name="n",
        points=[SweepPoint(param_value=10, rejection_rate=None, trials=2, error="trial 0 failed")],
        trials=2, seed=0,
    )
    path = write_report(failed, ReportFormat.CSV, tmp_path / "f.csv")
    assert path.read_text().splitlines()[1] == "mmd-u,n,10,nan,2,0"
    assert read_reports(path, ReportFormat.CSV)[0].points[0].rejection_rate is None


def test_timing_sidecar(tmp_path):
    out = tmp_path / "bench.csv"
    assert timing_path(out) == tmp_path / "bench.timing.csv"
    path = write_timing([{"method": "ekqd", "param_name": "n", "param_value": 100.0,
                          "wall_time_median": 0.0123456789, "repeats": 3}], timing_path(out))
    assert path.read_text().splitlines() == [
        "method,param_name,param_value,wall_time_median,repeats",
        "ekqd,n,100,0.0123457,3",
    ]
