#!/usr/bin/env python3
"""Confusion-matrix conventions and the metric formulas.

Misclassification is the positive class; uncertain counts as an alarm.
MCC is the headline metric because it is immune to class swapping and
uses all four cells.
"""

from trustmon import ConfusionMatrix, Verdict, build_confusion, compute_metrics
from trustmon.metrics import render_report, report_to_dict

# verdicts vs. (model prediction, actual label) for six instances
notifications = [
    Verdict.CORRECT,    # model right, no alarm        -> tn
    Verdict.INCORRECT,  # model right, alarm           -> fp
    Verdict.UNCERTAIN,  # model right, uncertain alarm -> fp
    Verdict.CORRECT,    # model wrong, no alarm        -> fn
    Verdict.INCORRECT,  # model wrong, alarm           -> tp
    Verdict.UNCERTAIN,  # model wrong, uncertain alarm -> tp
]
preds = [1, 1, 1, 0, 0, 0]
labels = [1, 1, 1, 1, 1, 1]

cm = build_confusion(notifications, preds, labels)
print(f"six-instance fixture: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")

abstain = build_confusion(notifications, preds, labels, uncertain_as_alarm=False)
print(f"with the abstain policy, uncertains drop out: total {abstain.total} of 6")

print("\nA published detector row, recomputed from its confusion matrix:")
report = compute_metrics(ConfusionMatrix(tp=248, fp=28, tn=492, fn=290))
print(render_report(report))

print("\nmachine-readable form keeps raw precision beside display rounding:")
d = report_to_dict(report)
print(f"  raw mcc     = {d['metrics']['mcc']!r}")
print(f"  display mcc = {d['display']['mcc']!r} (half-up rounding)")

print("\nclass-swap invariance of MCC:")
swapped = compute_metrics(report.counts.swapped())
print(f"  original {report.mcc:+.6f}  swapped {swapped.mcc:+.6f}")
