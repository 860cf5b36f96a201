"""Dataset and prediction CSVs plus JSON model documents."""
import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .models import MODEL_CLASSES, check_method
from .risk import JointRisk

__all__ = [
    "DataTable",
    "align_covariates",
    "SchemaError",
    "read_dataset_csv",
    "write_dataset_csv",
    "read_predictions_csv",
    "write_predictions_csv",
    "save_model",
    "load_model",
    "model_document",
    "MODEL_FORMAT",
    "MODEL_VERSION",
]

MODEL_FORMAT = "jointrisk-model"
MODEL_VERSION = 1
TRUTH_COLUMNS = ("true_p11", "true_p10", "true_p01", "true_p00")
PREDICTION_COLUMNS = ("p11", "p10", "p01", "p00", "py1", "py2")


class SchemaError(ValueError):
    """A CSV or model file does not have the expected columns or values."""


@dataclass
class DataTable:
    X: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    covariates: list
    truth: JointRisk = None

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx):
        return DataTable(
            self.X[idx],
            None if self.y1 is None else self.y1[idx],
            None if self.y2 is None else self.y2[idx],
            list(self.covariates),
            None if self.truth is None else self.truth[idx],
        )


def _read_columns(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        rows = [r for r in reader if r]
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(r)} fields, header has {len(header)}")
    cols = {}
    for j, name in enumerate(header):
        values = np.empty(len(rows))
        for i, r in enumerate(rows):
            cell = r[j].strip()
            if cell == "" or cell.upper() in ("NA", "NAN"):
                raise SchemaError(f"{path}: missing value in column {name!r} (row {i + 2}); impute before fitting")
            try:
                values[i] = float(cell)
            except ValueError:
                raise SchemaError(f"{path}: non-numeric value {cell!r} in column {name!r} (row {i + 2})") from None
        cols[name] = values
    return header, cols


def _binary_column(cols, name, path):
    if name not in cols:
        raise SchemaError(f"{path}: required column {name!r} is missing")
    v = cols[name]
    if not np.all((v == 0) | (v == 1)):
        raise SchemaError(f"{path}: column {name!r} must contain only 0/1")
    return v.astype(np.int8)


def read_dataset_csv(path, require_truth=False, require_outcomes=True):
    """Columns ``x1..xP, y1, y2`` plus optional ``true_p11..true_p00``.

    With ``require_outcomes=False`` a file without ``y1``/``y2`` is accepted
    (as for prediction) and both outcome arrays are ``None``.
    """
    header, cols = _read_columns(path)
    if require_outcomes or "y1" in cols or "y2" in cols:
        y1 = _binary_column(cols, "y1", path)
        y2 = _binary_column(cols, "y2", path)
    else:
        y1 = y2 = None
    covariates = [h for h in header if h not in ("y1", "y2") and h not in TRUTH_COLUMNS]
    if not covariates:
        raise SchemaError(f"{path}: no covariate columns found")
    X = np.column_stack([cols[c] for c in covariates])
    present = [c for c in TRUTH_COLUMNS if c in cols]
    truth = None
    if present:
        if len(present) != 4:
            missing = sorted(set(TRUTH_COLUMNS) - set(present))
            raise SchemaError(f"{path}: incomplete truth columns, missing {missing}")
        truth = JointRisk(*(cols[c] for c in TRUTH_COLUMNS))
    elif require_truth:
        raise SchemaError(f"{path}: truth columns {list(TRUTH_COLUMNS)} are required")
    return DataTable(X, y1, y2, covariates, truth)


def write_dataset_csv(path, X, Y, truth=None, covariates=None):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y).astype(int)
    names = covariates or [f"x{j + 1}" for j in range(X.shape[1])]
    header = list(names) + ["y1", "y2"]
    extra = []
    if truth is not None:
        header += list(TRUTH_COLUMNS)
        extra = [truth.p11, truth.p10, truth.p01, truth.p00]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(X.shape[0]):
            row = [repr(float(v)) for v in X[i]] + [int(Y[i, 0]), int(Y[i, 1])]
            row += [repr(float(c[i])) for c in extra]
            w.writerow(row)


def align_covariates(table, covariates, path="data"):
    """Covariate matrix of ``table`` in the column order a model was fitted with."""
    missing = [c for c in covariates if c not in table.covariates]
    if missing:
        raise SchemaError(f"{path}: covariate column {missing[0]!r} used by the model is missing")
    extra = [c for c in table.covariates if c not in covariates]
    if extra:
        raise SchemaError(f"{path}: column {extra[0]!r} is not a covariate of the model")
    order = [table.covariates.index(c) for c in covariates]
    return table.X[:, order]


def write_predictions_csv(path, joint):
    arr = joint.as_array().reshape(-1, 4)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PREDICTION_COLUMNS)
        for p11, p10, p01, p00 in arr:
            w.writerow([repr(float(v)) for v in (p11, p10, p01, p00, p11 + p10, p11 + p01)])


def read_predictions_csv(path):
    _, cols = _read_columns(path)
    missing = [c for c in PREDICTION_COLUMNS[:4] if c not in cols]
    if missing:
        raise SchemaError(f"{path}: prediction columns missing: {missing}")
    return JointRisk(*(cols[c] for c in PREDICTION_COLUMNS[:4]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def model_document(model, covariates):
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "method": model.method,
        "covariates": list(covariates),
        "params": _jsonable(model.to_dict()),
        "diagnostics": _jsonable(getattr(model, "diagnostics", {}) or {}),
    }


def save_model(path, model, covariates):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_document(model, covariates), fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Returns ``(model, covariate_names)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise SchemaError(f"{path}: not a {MODEL_FORMAT} document")
    if doc.get("version") != MODEL_VERSION:
        raise SchemaError(f"{path}: unsupported model file version {doc.get('version')!r}")
    method = check_method(doc["method"])
    model = MODEL_CLASSES[method].from_dict(doc["params"])
    return model, list(doc["covariates"])
