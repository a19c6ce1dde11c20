"""Classification metrics, multi-run aggregates, and CSV report emission.

Per-class "accuracy" in breakdown tables is per-class recall (the diagonal
convention); overall accuracy is trace/total.  Quartiles use linear
interpolation.  All reports are deterministic: fixed headers, fixed row
ordering, floats printed with 6 significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MetricsError(ValueError):
    """Invalid labels or malformed metric inputs."""


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float  # per-class recall, diagonal convention
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class RunAggregate:
    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


def confusion(true_labels, predicted, class_count: int) -> np.ndarray:
    """Tally matrix with rows = true class, columns = predicted class."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.shape != p.shape:
        raise MetricsError(f"length mismatch: {t.shape} vs {p.shape}")
    if t.size and (t.min() < 0 or t.max() >= class_count or p.min() < 0 or p.max() >= class_count):
        raise MetricsError(f"labels outside [0, {class_count})")
    cm = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> tuple[list[ClassMetrics], float]:
    """Per-class precision/recall/F1 plus overall accuracy.

    Zero-support or never-predicted classes get 0.0 for the undefined
    ratios rather than NaN.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise MetricsError(f"confusion matrix must be square, got {cm.shape}")
    diag = np.diag(cm).astype(np.float64)
    row_sums = cm.sum(axis=1).astype(np.float64)
    col_sums = cm.sum(axis=0).astype(np.float64)
    total = float(cm.sum())

    per_class = []
    for k in range(cm.shape[0]):
        precision = diag[k] / col_sums[k] if col_sums[k] > 0 else 0.0
        recall = diag[k] / row_sums[k] if row_sums[k] > 0 else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(
            ClassMetrics(accuracy=recall, precision=precision, recall=recall, f1=f1)
        )
    overall = float(diag.sum() / total) if total > 0 else 0.0
    return per_class, overall


def accuracy(true_labels, predicted) -> float:
    t = np.asarray(true_labels)
    p = np.asarray(predicted)
    if t.shape != p.shape:
        raise MetricsError(f"length mismatch: {t.shape} vs {p.shape}")
    return float((t == p).mean()) if t.size else 0.0


def aggregate_runs(values) -> RunAggregate:
    """Order statistics of per-run scalars (quartiles linearly interpolated)."""
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        raise MetricsError("need at least one run value")
    q1, median, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    return RunAggregate(
        mean=float(v.mean()),
        std=float(v.std(ddof=0)),
        min=float(v.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(v.max()),
    )


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def emit_sweep_curve(rows: list[tuple[float, float]], path) -> None:
    """CSV ``sweep,accuracy`` sorted by the sweep parameter ascending."""
    lines = ["sweep,accuracy"]
    for x, acc in sorted(rows, key=lambda r: r[0]):
        lines.append(f"{_fmt(x)},{_fmt(acc)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_breakdown(
    class_names: list[str], cm: np.ndarray, path
) -> tuple[list[ClassMetrics], float]:
    """CSV ``class_index,name,support,accuracy,precision,recall,f1``.

    Rows are ordered by class index; a final ``overall`` row carries the
    total accuracy.
    """
    per_class, overall = metrics_from_confusion(cm)
    support = cm.sum(axis=1)
    lines = ["class_index,name,support,accuracy,precision,recall,f1"]
    for k, (name, m) in enumerate(zip(class_names, per_class)):
        lines.append(
            f"{k},{name},{support[k]},{_fmt(m.accuracy)},{_fmt(m.precision)},"
            f"{_fmt(m.recall)},{_fmt(m.f1)}"
        )
    lines.append(f"overall,,{int(cm.sum())},{_fmt(overall)},,,")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return per_class, overall


def emit_boxplot(groups: list[tuple[str, RunAggregate]], path) -> None:
    """CSV ``label,mean,std,min,q1,median,q3,max``, one row per group."""
    lines = ["label,mean,std,min,q1,median,q3,max"]
    for label, agg in groups:
        lines.append(
            f"{label},{_fmt(agg.mean)},{_fmt(agg.std)},{_fmt(agg.min)},"
            f"{_fmt(agg.q1)},{_fmt(agg.median)},{_fmt(agg.q3)},{_fmt(agg.max)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
