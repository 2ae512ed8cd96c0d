"""CSV ingestion and report serialization."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .evaluation import PredictionSet
from .synth import ABALONE_COLUMNS, Dataset, generate_abalone_like

__all__ = [
    "DataError",
    "CsvDatasetSpec",
    "load_csv_dataset",
    "dataset_from_rows",
    "abalone_like_dataset",
    "load_predictions",
    "report_meta",
    "dumps_report",
    "write_report",
]

NA_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "none", "?"})
MIN_ROWS = 10


class DataError(ValueError):
    """Input data cannot be used; the message names the offending row."""


@dataclass(frozen=True)
class CsvDatasetSpec:
    path: Union[str, Path]
    target_column: Union[str, int]
    feature_columns: Optional[Sequence[str]] = None
    categorical_columns: Sequence[str] = ()
    has_header: bool = True
    column_names: Optional[Sequence[str]] = None
    na_policy: str = "drop-row"


def _is_na(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float):
        return math.isnan(value)
    return isinstance(value, str) and value.strip().lower() in NA_TOKENS


def _to_float(value, column: str, row_no: int) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise DataError(f"row {row_no}: column {column!r} is not numeric: {value!r}") from None
    if not math.isfinite(out):
        raise DataError(f"row {row_no}: column {column!r} is not finite: {value!r}")
    return out


def _resolve_target(names: Sequence[str], target: Union[str, int]) -> str:
    if isinstance(target, int) or (isinstance(target, str) and target.lstrip("-").isdigit() and target not in names):
        idx = int(target)
        try:
            return names[idx]
        except IndexError:
            raise DataError(f"target column index {idx} out of range for {len(names)} columns") from None
    if target not in names:
        raise DataError(f"target column {target!r} not found; columns are {list(names)}")
    return target


def dataset_from_rows(
    rows: Iterable[dict],
    names: Sequence[str],
    target_column: Union[str, int],
    feature_columns: Optional[Sequence[str]] = None,
    categorical_columns: Sequence[str] = (),
    first_row_no: int = 1,
    row_numbers: Optional[Sequence[int]] = None,
) -> Dataset:
    """Build a :class:`Dataset` from dict rows.

    Rows with a missing value in any used column are dropped.  Categorical
    columns are one-hot encoded with one indicator per observed level, in
    sorted order.  Diagnostics cite ``row_numbers`` when given, otherwise
    rows are numbered from ``first_row_no``.
    """
    target = _resolve_target(names, target_column)
    features = list(feature_columns) if feature_columns else [c for c in names if c != target]
    for c in list(features) + list(categorical_columns):
        if c not in names:
            raise DataError(f"column {c!r} not found; columns are {list(names)}")
    categorical = [c for c in features if c in set(categorical_columns)]
    used = [target, *features]
    kept: list[tuple[int, dict]] = []
    for offset, row in enumerate(rows):
        row_no = row_numbers[offset] if row_numbers is not None else first_row_no + offset
        if any(_is_na(row.get(c)) for c in used):
            continue
        kept.append((row_no, row))
    if len(kept) < MIN_ROWS:
        raise DataError(f"only {len(kept)} usable rows after dropping missing values; need {MIN_ROWS}")
    levels = {c: sorted({str(r[c]).strip() for _, r in kept}) for c in categorical}
    out_names: list[str] = []
    for c in features:
        if c in levels:
            out_names.extend(f"{c}={lv}" for lv in levels[c])
        else:
            out_names.append(c)
    X = np.empty((len(kept), len(out_names)))
    y = np.empty(len(kept))
    for i, (row_no, row) in enumerate(kept):
        y[i] = _to_float(row[target], target, row_no)
        j = 0
        for c in features:
            if c in levels:
                v = str(row[c]).strip()
                for lv in levels[c]:
                    X[i, j] = 1.0 if v == lv else 0.0
                    j += 1
            else:
                X[i, j] = _to_float(row[c], c, row_no)
                j += 1
    return Dataset(X, y, None, tuple(out_names))


def load_csv_dataset(spec: CsvDatasetSpec) -> Dataset:
    path = Path(spec.path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    if spec.na_policy != "drop-row":
        raise DataError(f"unsupported na_policy {spec.na_policy!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        records = [r for r in reader]
    if not records:
        raise DataError(f"{path} is empty")
    if spec.column_names:
        names = list(spec.column_names)
    elif spec.has_header:
        names = [c.strip() for c in records[0]]
    else:
        names = [f"c{i}" for i in range(len(records[0]))]
    body = records[1:] if spec.has_header else records
    first = 2 if spec.has_header else 1
    rows, numbers = [], []
    for offset, rec in enumerate(body):
        if not rec:
            continue
        if len(rec) != len(names):
            raise DataError(
                f"row {first + offset}: expected {len(names)} fields, found {len(rec)}"
            )
        rows.append(dict(zip(names, rec)))
        numbers.append(first + offset)
    return dataset_from_rows(
        rows, names, spec.target_column, spec.feature_columns, spec.categorical_columns, first, numbers
    )


def abalone_like_dataset(seed: int = 0, n: int = 4177) -> Dataset:
    """Synthetic stand-in for the UCI abalone table, encoded like the CSV path
    (``sex`` one-hot, ``rings`` as target)."""
    rows = generate_abalone_like(n, seed)
    return dataset_from_rows(rows, ABALONE_COLUMNS, "rings", None, ("sex",))


def load_predictions(path) -> PredictionSet:
    """Read a CSV with ``y_true`` and ``y_pred`` columns."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"predictions file not found: {path}")
    yt, yp = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"y_true", "y_pred"} <= set(reader.fieldnames):
            raise DataError(f"{path} needs columns y_true and y_pred")
        for offset, row in enumerate(reader):
            row_no = offset + 2
            yt.append(_to_float(row["y_true"], "y_true", row_no))
            yp.append(_to_float(row["y_pred"], "y_pred", row_no))
    if not yt:
        raise DataError(f"{path} has no prediction rows")
    return PredictionSet(np.array(yt), np.array(yp))


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def report_meta(seed: int, config: dict) -> dict:
    digest = hashlib.sha256(_canonical(config).encode("utf-8")).hexdigest()
    return {"tool": "regimbalance", "version": __version__, "seed": seed, "config_hash": digest, "config": config}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(meta: dict, body: dict) -> str:
    # floats use repr(), the shortest string that round-trips exactly
    return json.dumps({"meta": _plain(meta), **_plain(body)}, indent=2, allow_nan=False) + "\n"


def write_report(path, meta: dict, body: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(meta, body), encoding="utf-8")
    return path
