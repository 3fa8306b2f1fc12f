"""Verdicts and the notifications CSV interchange format.

A notification is the per-instance verdict a detector emits about the
monitored model's prediction. The CSV layout (`instance_index,verdict`)
is the canonical exchange format between the execute and evaluate steps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class Verdict(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True)
class NotificationRecord:
    instance_index: int
    verdict: Verdict


NOTIFICATIONS_HEADER = ("instance_index", "verdict")


def write_notifications(path: str | Path, verdicts: Sequence[Verdict]) -> None:
    """Write one record per test instance, indices 0..n-1 in order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NOTIFICATIONS_HEADER)
        for i, v in enumerate(verdicts):
            writer.writerow([i, v.value])


def read_notifications(path: str | Path) -> list[NotificationRecord]:
    """Read a notifications file, validating header and index coverage."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != NOTIFICATIONS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(NOTIFICATIONS_HEADER)}")
        records = []
        for row in reader:
            if len(row) != 2:
                raise ValueError(f"{path}: malformed row {row!r}")
            records.append(NotificationRecord(int(row[0]), Verdict(row[1])))
    indices = [r.instance_index for r in records]
    if indices != list(range(len(records))):
        raise ValueError(f"{path}: instance indices must be 0..n-1 exactly once")
    return records


def count_verdicts(verdicts: Iterable[Verdict]) -> dict[str, int]:
    totals = {"correct": 0, "incorrect": 0, "uncertain": 0}
    for v in verdicts:
        totals[v.value] += 1
    return totals
