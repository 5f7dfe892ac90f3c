"""Confusion matrix and the derived metric suite.

Orientation is fixed: rows are actual classes, columns are predicted.
Per-class metrics come from a one-vs-rest reduction of the matrix. The
F-measure uses the standard harmonic mean 2*p*r/(p+r); some write-ups
print the formula without the factor 2, but the conventional reported
values only come out with it, so the factor stays and the generated
report says so in its header.

A metric whose denominator is zero is returned as None and rendered as
absent. Folding such cases to 0 would silently drag macro averages down.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "ConfusionMatrix",
    "BinaryCounts",
    "ClassMetrics",
    "MetricReport",
    "confusion",
    "one_vs_rest",
    "sensitivity",
    "specificity",
    "precision",
    "f1",
    "accuracy",
    "error_rate",
    "full_report",
]

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple
    counts: tuple  # rows = actual, columns = predicted

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.labels)))

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


@dataclass(frozen=True)
class BinaryCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true: Sequence, y_pred: Sequence, labels: Sequence) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise InputError(
            f"got {len(y_true)} actual labels and {len(y_pred)} predictions"
        )
    labels = tuple(labels)
    index = {c: i for i, c in enumerate(labels)}
    grid = [[0] * len(labels) for _ in labels]
    for truth, pred in zip(y_true, y_pred):
        if truth not in index:
            raise InputError(f"actual label {truth!r} not in label set {labels}")
        if pred not in index:
            raise InputError(f"predicted label {pred!r} not in label set {labels}")
        grid[index[truth]][index[pred]] += 1
    return ConfusionMatrix(labels=labels, counts=tuple(tuple(r) for r in grid))


def one_vs_rest(cm: ConfusionMatrix, positive) -> BinaryCounts:
    if positive not in cm.labels:
        raise InputError(f"label {positive!r} not in label set {cm.labels}")
    p = cm.labels.index(positive)
    arr = cm.as_array()
    tp = int(arr[p, p])
    fn = int(arr[p].sum() - arr[p, p])
    fp = int(arr[:, p].sum() - arr[p, p])
    tn = int(arr.sum() - tp - fn - fp)
    return BinaryCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, denom: int) -> Optional[float]:
    return num / denom if denom > 0 else None


def sensitivity(b: BinaryCounts) -> Optional[float]:
    return _ratio(b.tp, b.tp + b.fn)


def specificity(b: BinaryCounts) -> Optional[float]:
    return _ratio(b.tn, b.fp + b.tn)


def precision(b: BinaryCounts) -> Optional[float]:
    return _ratio(b.tp, b.tp + b.fp)


def f1(b: BinaryCounts) -> Optional[float]:
    p, r = precision(b), sensitivity(b)
    if p is None or r is None or p + r == 0:
        return None
    return 2.0 * p * r / (p + r)


def accuracy(b: BinaryCounts) -> Optional[float]:
    return _ratio(b.tp + b.tn, b.total)


def error_rate(b: BinaryCounts) -> Optional[float]:
    return _ratio(b.fp + b.fn, b.total)


@dataclass(frozen=True)
class ClassMetrics:
    label: object
    counts: BinaryCounts
    sensitivity: Optional[float]
    specificity: Optional[float]
    precision: Optional[float]
    recall: Optional[float]  # identical to sensitivity, reported under both names
    f1: Optional[float]
    accuracy: Optional[float]
    error_rate: Optional[float]


@dataclass(frozen=True)
class MetricReport:
    matrix: ConfusionMatrix
    per_class: tuple
    macro: dict
    multiclass_accuracy: float
    multiclass_error: float

    def to_json_dict(self) -> dict:
        # Undefined metrics are omitted outright: a consumer testing
        # `"f1" in row` gets the honest answer, and nothing downstream
        # can mistake a missing value for a zero.
        def defined(pairs):
            return {k: v for k, v in pairs.items() if v is not None}

        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "labels": list(self.matrix.labels),
            "confusion_rows_actual_cols_predicted": [
                list(r) for r in self.matrix.counts
            ],
            "per_class": {
                str(m.label): {
                    "tp": m.counts.tp, "fp": m.counts.fp,
                    "tn": m.counts.tn, "fn": m.counts.fn,
                    **defined({
                        "sensitivity": m.sensitivity,
                        "specificity": m.specificity,
                        "precision": m.precision,
                        "recall": m.recall,
                        "f1": m.f1,
                        "accuracy": m.accuracy,
                        "error_rate": m.error_rate,
                    }),
                }
                for m in self.per_class
            },
            "macro": defined(self.macro),
            "multiclass_accuracy": self.multiclass_accuracy,
            "multiclass_error": self.multiclass_error,
        }


def full_report(cm: ConfusionMatrix) -> MetricReport:
    if cm.total == 0:
        raise InputError("cannot build a metric report from an empty matrix")
    per_class = []
    for label in cm.labels:
        b = one_vs_rest(cm, label)
        s = sensitivity(b)
        per_class.append(
            ClassMetrics(
                label=label,
                counts=b,
                sensitivity=s,
                specificity=specificity(b),
                precision=precision(b),
                recall=s,
                f1=f1(b),
                accuracy=accuracy(b),
                error_rate=error_rate(b),
            )
        )
    macro = {}
    for name in ("sensitivity", "specificity", "precision", "recall", "f1",
                 "accuracy", "error_rate"):
        defined = [getattr(m, name) for m in per_class
                   if getattr(m, name) is not None]
        macro[name] = float(np.mean(defined)) if defined else None
    return MetricReport(
        matrix=cm,
        per_class=tuple(per_class),
        macro=macro,
        multiclass_accuracy=cm.trace / cm.total,
        multiclass_error=(cm.total - cm.trace) / cm.total,
    )


def _fmt(x: Optional[float]) -> str:
    return "   --" if x is None else f"{x:.4f}"


def render_text(report: MetricReport) -> str:
    """Human-readable report. The header pins down the two conventions a
    reader needs to interpret the numbers."""
    cm = report.matrix
    width = max(12, max(len(str(c)) for c in cm.labels) + 2)
    lines = [
        "Classification report",
        "  convention: confusion rows = actual class, columns = predicted class",
        "  convention: F1 = 2*precision*recall/(precision+recall); the factor 2",
        "  is part of the harmonic mean even where the formula is printed without it",
        "",
        "Confusion matrix:",
        " " * width + "".join(f"{str(c):>{width}}" for c in cm.labels),
    ]
    for label, row in zip(cm.labels, cm.counts):
        lines.append(
            f"{str(label):>{width}}" + "".join(f"{v:>{width}}" for v in row)
        )
    lines += [
        "",
        "Per-class (one-vs-rest):",
        f"{'class':>{width}} {'sens':>7} {'spec':>7} {'prec':>7} "
        f"{'recall':>7} {'f1':>7} {'acc':>7} {'err':>7}",
    ]
    for m in report.per_class:
        lines.append(
            f"{str(m.label):>{width}} {_fmt(m.sensitivity):>7} "
            f"{_fmt(m.specificity):>7} {_fmt(m.precision):>7} "
            f"{_fmt(m.recall):>7} {_fmt(m.f1):>7} {_fmt(m.accuracy):>7} "
            f"{_fmt(m.error_rate):>7}"
        )
    lines += [
        f"{'macro':>{width}} " + " ".join(
            f"{_fmt(report.macro[n]):>7}"
            for n in ("sensitivity", "specificity", "precision", "recall",
                      "f1", "accuracy", "error_rate")
        ),
        "",
        f"Multi-class accuracy (trace/total): {report.multiclass_accuracy:.4f}",
        f"Multi-class error rate:             {report.multiclass_error:.4f}",
        "(per-class 'acc' above is the one-vs-rest binary accuracy, a",
        " different quantity from the multi-class trace accuracy)",
    ]
    return "\n".join(lines) + "\n"
