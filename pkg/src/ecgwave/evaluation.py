"""Confusion matrices, per-class / macro metrics and report writers.

Undefined ratios (``0 / 0``) are reported as 0 throughout.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_labels
from .data import CLASS_NAMES
from .exceptions import ValidationError

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes, both in ``classes`` order."""

    counts: np.ndarray
    classes: tuple

    @property
    def total(self):
        return int(self.counts.sum())


def confusion(y_true, y_pred, classes=None):
    y_true = check_labels(y_true, name="y_true")
    y_pred = check_labels(y_pred, name="y_pred")
    if y_true.shape != y_pred.shape:
        raise ValidationError(
            f"y_true and y_pred lengths differ ({y_true.shape[0]} vs {y_pred.shape[0]})"
        )
    if y_true.size == 0:
        raise ValidationError("cannot build a confusion matrix from empty label vectors")
    if classes is None:
        classes = np.union1d(y_true, y_pred)
    classes = np.asarray(classes, dtype=np.int64)
    pos = {int(c): i for i, c in enumerate(classes)}
    try:
        ti = np.array([pos[int(v)] for v in y_true])
        pi = np.array([pos[int(v)] for v in y_pred])
    except KeyError as exc:
        raise ValidationError(f"label {exc.args[0]} is not among classes {classes.tolist()}") from None
    counts = np.zeros((classes.size, classes.size), dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)
    return ConfusionMatrix(counts, tuple(int(c) for c in classes))


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den != 0)


@dataclass(eq=False)
class MetricsReport:
    classes: list
    accuracy: float
    precision: list
    recall: list
    f1: list
    support: list
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: list
    name: str = ""
    training_accuracy: float = None
    spec: dict = None
    timing: dict = field(default_factory=dict)
    error: str = None
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def __eq__(self, other):
        if not isinstance(other, MetricsReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def metrics(cm, name="", training_accuracy=None, spec=None, timing=None):
    """Accuracy plus per-class and macro-averaged precision, recall and F1."""
    counts = cm.counts
    tp = np.diag(counts).astype(np.float64)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    precision = _ratio(tp, predicted)
    recall = _ratio(tp, actual)
    f1 = _ratio(2 * precision * recall, precision + recall)
    total = counts.sum()
    return MetricsReport(
        classes=list(cm.classes),
        accuracy=float(tp.sum() / total) if total else 0.0,
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=actual.astype(int).tolist(),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        confusion=counts.astype(int).tolist(),
        name=name,
        training_accuracy=None if training_accuracy is None else float(training_accuracy),
        spec=spec,
        timing=dict(timing or {}),
    )


def evaluate(y_true, y_pred, classes=None, **kwargs):
    """``metrics(confusion(y_true, y_pred, classes))``; ``kwargs`` go to :func:`metrics`."""
    return metrics(confusion(y_true, y_pred, classes), **kwargs)


def failed_report(name, error, spec=None):
    """Placeholder report for a classifier whose training or evaluation raised."""
    return MetricsReport(
        classes=[], accuracy=0.0, precision=[], recall=[], f1=[], support=[],
        macro_precision=0.0, macro_recall=0.0, macro_f1=0.0, confusion=[],
        name=name, spec=spec, error=str(error),
    )


def _class_label(c):
    return CLASS_NAMES[c] if 0 <= c < len(CLASS_NAMES) else str(c)


def report_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "name", "precision", "recall", "f1", "support"])
    for i, c in enumerate(report.classes):
        writer.writerow(
            [c, _class_label(c), repr(report.precision[i]), repr(report.recall[i]),
             repr(report.f1[i]), report.support[i]]
        )
    writer.writerow(
        ["macro", "", repr(report.macro_precision), repr(report.macro_recall),
         repr(report.macro_f1), sum(report.support)]
    )
    return buf.getvalue()


def comparison_table(reports):
    """Fixed-width table of classifiers sorted by testing accuracy, best first.

    Failed runs are listed last with their error message.
    """
    ok = sorted((r for r in reports if r.error is None), key=lambda r: -r.accuracy)
    failed = [r for r in reports if r.error is not None]
    width = max([len("classifier")] + [len(r.name) for r in reports])
    header = (
        f"{'classifier':<{width}}  {'train_acc':>9}  {'test_acc':>8}  "
        f"{'macro_p':>7}  {'macro_r':>7}  {'macro_f1':>8}"
    )
    lines = [header, "-" * len(header)]
    for r in ok:
        train = "" if r.training_accuracy is None else f"{r.training_accuracy:.4f}"
        lines.append(
            f"{r.name:<{width}}  {train:>9}  {r.accuracy:>8.4f}  "
            f"{r.macro_precision:>7.4f}  {r.macro_recall:>7.4f}  {r.macro_f1:>8.4f}"
        )
    for r in failed:
        lines.append(f"{r.name:<{width}}  FAILED: {r.error}")
    return "\n".join(lines) + "\n"


def report_emit(report, fmt, path):
    """Write ``report`` as ``json``, ``csv`` or ``text-table``.

    ``text-table`` also accepts a sequence of reports and renders them as
    one comparison table.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    elif fmt == "csv":
        text = report_csv(report)
    elif fmt == "text-table":
        reports = [report] if isinstance(report, MetricsReport) else list(report)
        text = comparison_table(reports)
    else:
        raise ValidationError(f"unknown report format {fmt!r}; use json, csv or text-table")
    path.write_text(text, encoding="utf-8")
    return path


def load_report(path):
    return MetricsReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
