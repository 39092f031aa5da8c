"""JSON and CSV serialization of datasets, models, histories and Fisher reports.

Complex matrices are stored row-major as nested lists of ``[re, im]`` pairs.
Floats are written with ``repr`` precision so files round-trip exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .datagen import LabeledState, TrainingSet
from .metrology import REPORT_COLUMNS, FisherReport
from .observable import ObservableSpec
from .regression import CostWeights, TrainedModel

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A file does not follow the expected layout or version."""


def encode_complex_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def decode_complex_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise SchemaError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _check_version(data: dict) -> None:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")


def write_json(path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path}: invalid JSON ({err})") from err


# --- datasets -----------------------------------------------------------------------

def dataset_to_dict(training: TrainingSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "family": training.family,
        "n_qubits": training.n_qubits,
        "copies_c": training.copies,
        "label_range": list(training.label_range),
        "seed": training.seed,
        "metadata": training.metadata,
        "entries": [{"label": e.label, "state": encode_complex_matrix(e.state)} for e in training.entries],
    }


def dataset_from_dict(data: dict) -> TrainingSet:
    _check_version(data)
    try:
        entries = [LabeledState(decode_complex_matrix(e["state"]), float(e["label"]), data["family"])
                   for e in data["entries"]]
        training = TrainingSet(entries, int(data["copies_c"]), tuple(data["label_range"]),
                               data.get("seed"), data["family"], dict(data.get("metadata", {})))
    except KeyError as err:
        raise SchemaError(f"dataset is missing field {err}") from err
    if training.n_qubits != int(data["n_qubits"]):
        raise SchemaError("n_qubits does not match the stored states")
    return training


def save_dataset(training: TrainingSet, path) -> None:
    write_json(path, dataset_to_dict(training))


def load_dataset(path) -> TrainingSet:
    return dataset_from_dict(read_json(path))


# --- models -------------------------------------------------------------------------

def model_to_dict(model: TrainedModel) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "spec": model.spec.to_dict(),
        "x_star": [float(v) for v in model.x_star],
        "theta_star": [float(v) for v in model.theta_star],
        "weights": {"w_ls": model.weights.w_ls, "w_var": model.weights.w_var},
        "copies_c": model.copies,
        "history_summary": {
            "iterations": max(len(model.history_cost) - 1, 0),
            "evaluations": int(model.history_evals[-1]) if model.history_evals else 0,
            "final_cost": model.final_cost,
            "converged": model.converged,
            "message": model.message,
        },
    }
    if model.bias_poly is not None:
        out["bias_poly"] = [float(v) for v in model.bias_poly]
    return out


def model_from_dict(data: dict) -> TrainedModel:
    _check_version(data)
    try:
        summary = data.get("history_summary", {})
        bias = data.get("bias_poly")
        return TrainedModel(
            spec=ObservableSpec.from_dict(data["spec"]),
            x_star=np.array(data["x_star"], dtype=float),
            theta_star=np.array(data["theta_star"], dtype=float),
            weights=CostWeights(**data["weights"]),
            bias_poly=None if bias is None else np.array(bias, dtype=float),
            copies=int(data.get("copies_c", 1)),
            final_cost=float(summary.get("final_cost", float("nan"))),
            converged=bool(summary.get("converged", False)),
            message=str(summary.get("message", "")),
        )
    except KeyError as err:
        raise SchemaError(f"model is missing field {err}") from err


def save_model(model: TrainedModel, path) -> None:
    write_json(path, model_to_dict(model))


def load_model(path) -> TrainedModel:
    return model_from_dict(read_json(path))


# --- CSV ----------------------------------------------------------------------------

def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_history_csv(model: TrainedModel, path) -> None:
    rows = [(i, c, e) for i, (c, e) in enumerate(zip(model.history_cost, model.history_evals))]
    write_csv(path, ("iteration", "cost", "evaluations"), rows)


def write_report_csv(rows: list[FisherReport], path) -> None:
    write_csv(path, REPORT_COLUMNS, (r.row() for r in rows))


def read_csv(path) -> tuple[list, list]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]

