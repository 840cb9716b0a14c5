"""CSV datasets and CSV/JSON experiment reports."""
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..config import logger
from ..errors import DatasetError
from ..models import ExperimentReport, ReportFormat, SweepPoint
from ..utils import as_table

REPORT_COLUMNS = ["method", "param_name", "param_value", "rejection_rate", "trials", "seed"]
TIMING_COLUMNS = ["method", "param_name", "param_value", "wall_time_median", "repeats"]


@dataclass(frozen=True)
class Dataset:
    """A rectangular, finite n x d table loaded from (or written to) CSV."""
    name: str
    points: np.ndarray
    source: str

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def load_csv(path: Union[str, Path], has_header: bool = False) -> Dataset:
    """
    Parse a numeric CSV file into a Dataset.

    Rows and columns in error messages are 1-based file positions. Blank lines are skipped.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")

    rows: List[List[float]] = []
    width = None
    with open(path, "r", newline="") as f:
        for row_no, cells in enumerate(csv.reader(f), start=1):
            if has_header and row_no == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DatasetError(f"{path.name}: row {row_no} has {len(cells)} fields, expected {width}")
            values = []
            for col_no, cell in enumerate(cells, start=1):
                try:
                    value = float(cell.strip())
                except ValueError:
                    raise DatasetError(f"{path.name}: non-numeric value {cell!r} at row {row_no}, column {col_no}")
                if not math.isfinite(value):
                    raise DatasetError(f"{path.name}: non-finite value {cell!r} at row {row_no}, column {col_no}")
                values.append(value)
            rows.append(values)

    if not rows:
        raise DatasetError(f"{path.name}: no data rows")
    logger.debug(f"Loaded {len(rows)} x {width} table from {path}")
    return Dataset(name=path.stem, points=np.array(rows, dtype=float), source=str(path))


def write_csv(points, path: Union[str, Path]) -> Path:
    """Write a table with 17 significant digits so that load_csv reads back the same floats."""
    points = as_table(points, "points")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for row in points:
            f.write(",".join(format(v, ".17g") for v in row) + "\n")
    return path


def _number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _rate(value) -> str:
    return "nan" if value is None else repr(float(value))


def write_report(
    report: Union[ExperimentReport, Sequence[ExperimentReport]],
    fmt: ReportFormat,
    path: Union[str, Path],
) -> Path:
    """
    Write one report (or several, e.g. one per method) as CSV rows or JSON.

    CSV: one row per sweep point with columns method,param_name,param_value,rejection_rate,trials,seed.
    JSON: the report object, or a list of them.
    """
    reports = [report] if isinstance(report, ExperimentReport) else list(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if fmt == ReportFormat.JSON:
        payload = [r.model_dump(mode="json") for r in reports]
        with open(path, "w") as f:
            json.dump(payload[0] if isinstance(report, ExperimentReport) else payload, f, indent=2)
            f.write("\n")
    else:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for r in reports:
                for point in r.points:
                    writer.writerow([
                        r.method,
                        r.param_name,
                        _number(point.param_value),
                        _rate(point.rejection_rate),
                        point.trials,
                        r.seed,
                    ])
    logger.info(f"Wrote {fmt.value} report to {path}")
    return path


def read_reports(path: Union[str, Path], fmt: ReportFormat) -> List[ExperimentReport]:
    """Read reports written by write_report. CSV files carry no experiment name or config."""
    path = Path(path)
    if fmt == ReportFormat.JSON:
        with open(path, "r") as f:
            payload = json.load(f)
        items = payload if isinstance(payload, list) else [payload]
        return [ExperimentReport.model_validate(item) for item in items]

    grouped: Dict[str, Dict] = {}
    with open(path, "r", newline="") as f:
        for row in csv.DictReader(f):
            entry = grouped.setdefault(row["method"], {
                "experiment": path.stem,
                "method": row["method"],
                "param_name": row["param_name"],
                "points": [],
                "trials": int(row["trials"]),
                "seed": int(row["seed"]),
            })
            rate = float(row["rejection_rate"])
            entry["points"].append(SweepPoint(
                param_value=float(row["param_value"]),
                rejection_rate=None if math.isnan(rate) else rate,
                trials=int(row["trials"]),
            ))
    return [ExperimentReport(**entry) for entry in grouped.values()]


def timing_path(out: Union[str, Path]) -> Path:
    """Sidecar path <out-stem>.timing.csv next to the report."""
    out = Path(out)
    return out.with_name(f"{out.stem}.timing.csv")


def write_timing(rows: Sequence[Dict], path: Union[str, Path]) -> Path:
    """Median wall times per (method, sweep point); rows carry the TIMING_COLUMNS keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TIMING_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "param_value": _number(row["param_value"]),
                             "wall_time_median": f"{row['wall_time_median']:.6g}"})
    logger.info(f"Wrote timing sidecar to {path}")
    return path
