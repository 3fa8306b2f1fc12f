"""Confusion-matrix metrics with misclassification as the positive class.

The positive class is a model misclassification, and an uncertain
notification counts as an alarm by default (an abstain policy that drops
such instances from the counts is available behind a flag). MCC, TPR,
FPR, precision and F1 follow the standard formulas with an explicit
zero convention: MCC is 0 whenever any factor of its denominator is 0,
and the rates are 0 on 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .errors import EmptyMatrix, LengthMismatch
from .notifications import Verdict, count_verdicts


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionMatrix":
        """The matrix with the class convention inverted."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MetricsReport:
    mcc: float
    tpr: float
    fpr: float
    precision: float
    f1: float
    counts: ConfusionMatrix
    notification_totals: dict = field(default_factory=dict)


def build_confusion(
    notifications: Sequence[Verdict],
    model_preds: Sequence[int],
    actual_labels: Sequence[int],
    uncertain_as_alarm: bool = True,
) -> ConfusionMatrix:
    """Count TP/FP/TN/FN with positive = model misclassification.

    An instance is ground-truth positive when the model prediction
    differs from the actual label; the detector is positive when it says
    incorrect (or uncertain, under the default policy). With
    uncertain_as_alarm=False, uncertain instances are excluded entirely.
    """
    if not (len(notifications) == len(model_preds) == len(actual_labels)):
        raise LengthMismatch(
            f"got {len(notifications)} notifications, {len(model_preds)} predictions, "
            f"{len(actual_labels)} labels"
        )
    tp = fp = tn = fn = 0
    for verdict, pred, actual in zip(notifications, model_preds, actual_labels):
        if verdict is Verdict.UNCERTAIN and not uncertain_as_alarm:
            continue
        truth_positive = pred != actual
        alarmed = verdict in (Verdict.INCORRECT, Verdict.UNCERTAIN)
        if alarmed and truth_positive:
            tp += 1
        elif alarmed and not truth_positive:
            fp += 1
        elif not alarmed and truth_positive:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def _rate(num: int, den: int) -> float:
    return num / den if den else 0.0


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation coefficient, 0 when any denominator factor is 0."""
    factors = (
        cm.tp + cm.fp,
        cm.tp + cm.fn,
        cm.tn + cm.fp,
        cm.tn + cm.fn,
    )
    if any(f == 0 for f in factors):
        return 0.0
    num = cm.tp * cm.tn - cm.fp * cm.fn
    return num / math.sqrt(math.prod(factors))


def compute_metrics(
    cm: ConfusionMatrix, notification_totals: dict | None = None
) -> MetricsReport:
    """All report metrics from a confusion matrix."""
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no instances")
    precision = _rate(cm.tp, cm.tp + cm.fp)
    tpr = _rate(cm.tp, cm.tp + cm.fn)
    fpr = _rate(cm.fp, cm.fp + cm.tn)
    f1 = 2.0 * precision * tpr / (precision + tpr) if precision + tpr > 0 else 0.0
    return MetricsReport(
        mcc=mcc(cm),
        tpr=tpr,
        fpr=fpr,
        precision=precision,
        f1=f1,
        counts=cm,
        notification_totals=dict(notification_totals or {}),
    )


def evaluate_notifications(
    notifications: Sequence[Verdict],
    model_preds: Sequence[int],
    actual_labels: Sequence[int],
    uncertain_as_alarm: bool = True,
) -> MetricsReport:
    cm = build_confusion(notifications, model_preds, actual_labels, uncertain_as_alarm)
    return compute_metrics(cm, count_verdicts(notifications))


def round_half_up(value: float, places: int) -> str:
    """Decimal string with exactly `places` digits, rounding halves up."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def report_to_dict(report: MetricsReport) -> dict:
    """Machine-readable report: raw values plus display-rounded strings."""
    cm = report.counts
    return {
        "counts": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
        "notification_totals": dict(report.notification_totals),
        "metrics": {
            "mcc": report.mcc,
            "tpr": report.tpr,
            "fpr": report.fpr,
            "precision": report.precision,
            "f1": report.f1,
        },
        "display": {
            "mcc": round_half_up(report.mcc, 3),
            "tpr": round_half_up(report.tpr * 100.0, 2) + "%",
            "fpr": round_half_up(report.fpr * 100.0, 2) + "%",
            "precision": round_half_up(report.precision * 100.0, 2) + "%",
            "f1": round_half_up(report.f1 * 100.0, 2) + "%",
        },
    }


def render_report(report: MetricsReport) -> str:
    """Human-readable one-block rendering for the CLI."""
    cm = report.counts
    disp = report_to_dict(report)["display"]
    lines = [
        f"{'TP':>6} {'FP':>6} {'TN':>6} {'FN':>6} "
        f"{'TPR':>8} {'FPR':>8} {'Prec.':>8} {'F1':>8} {'MCC':>7}",
        f"{cm.tp:>6} {cm.fp:>6} {cm.tn:>6} {cm.fn:>6} "
        f"{disp['tpr']:>8} {disp['fpr']:>8} {disp['precision']:>8} "
        f"{disp['f1']:>8} {disp['mcc']:>7}",
    ]
    if report.notification_totals:
        t = report.notification_totals
        lines.append(
            f"notifications: correct={t.get('correct', 0)} "
            f"incorrect={t.get('incorrect', 0)} uncertain={t.get('uncertain', 0)}"
        )
    return "\n".join(lines)
