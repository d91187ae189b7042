"""CSV and JSON writers for run records and summaries."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .aggregate import Summary
from .runner import RunRecord

CSV_COLUMNS = (
    "iteration", "cumulative_evals", "energy_mean", "energy_median",
    "q25", "q75", "fidelity_mean", "alpha_mean", "beta_mean",
)


def csv_columns(summary: Summary) -> tuple[str, ...]:
    if summary.fidelity_mean is None:
        return tuple(c for c in CSV_COLUMNS if c != "fidelity_mean")
    return CSV_COLUMNS


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def summary_rows(summary: Summary) -> list[dict]:
    cols = csv_columns(summary)
    return [
        {c: getattr(summary, c)[k] for c in cols}
        for k in range(len(summary))
    ]


def write_summary_csv(summary: Summary, path) -> Path:
    path = Path(path)
    cols = csv_columns(summary)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in summary_rows(summary):
            w.writerow([_cell(row[c]) for c in cols])
    return path


def read_summary_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            {k: (float(v) if v != "" else float("nan")) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def records_to_json(records: list[RunRecord], timing: bool = False) -> str:
    """Serialize records; ``timing=False`` drops wall_time so exact-mode
    exports are byte-reproducible."""
    payload = [r.to_dict(timing=timing) for r in records]
    return json.dumps(payload, indent=1, sort_keys=True, default=_json_default) + "\n"


def write_records_json(records: list[RunRecord], path, timing: bool = False) -> Path:
    path = Path(path)
    path.write_text(records_to_json(records, timing), encoding="utf-8")
    return path


def read_records_json(path) -> list[RunRecord]:
    return [RunRecord.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]


def export(obj, fmt: str, path, timing: bool = False) -> Path:
    """Write ``obj`` (a Summary or a list of RunRecord) as ``csv`` or ``json``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    path = Path(path)
    if not path.parent.exists():
        raise OSError(f"cannot write {str(path)!r}: directory does not exist")
    if fmt == "csv":
        if not isinstance(obj, Summary):
            raise TypeError("CSV export takes a Summary")
        return write_summary_csv(obj, path)
    if isinstance(obj, Summary):
        data = {c: getattr(obj, c) for c in csv_columns(obj)}
        data["label"] = obj.label
        data["n_records"] = obj.n_records
        path.write_text(json.dumps(data, indent=1, default=_json_default) + "\n", encoding="utf-8")
        return path
    return write_records_json(list(obj), path, timing)
