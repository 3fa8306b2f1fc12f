"""Wall-clock and peak-RSS profiling of analyze/infer phases.

A sampler thread reads the resident set size of the current process and
all of its children every 200 ms, sums each sample across the tree, and
keeps the maximum. RSS covers non-swapped physical memory only, so the
figure understates other memory kinds (e.g. swapped or virtual pages).
Sampling stops when the profiled phase returns.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable

from .errors import ProfilerUnavailable

SAMPLE_INTERVAL_S = 0.2
MIB = 1024 * 1024


@dataclass(frozen=True)
class EfficiencyRecord:
    phase: str  # "analyze" | "infer"
    duration_s: float
    peak_rss_mib: float | None  # None when the platform exposes no RSS


def _tree_rss(process) -> int:
    """Summed RSS of the process and its recursive children, in bytes."""
    import psutil

    total = process.memory_info().rss
    for child in process.children(recursive=True):
        try:
            total += child.memory_info().rss
        except (psutil.NoSuchProcess, psutil.AccessDenied):
            continue
    return total


class _RssSampler(threading.Thread):
    """Background peak tracker. `peak_bytes` is a single int updated
    atomically under the GIL, so readers never observe a torn value."""

    def __init__(self, process, interval: float):
        super().__init__(daemon=True)
        self.process = process
        self.interval = interval
        self.peak_bytes = 0
        self._stop_event = threading.Event()

    def sample_once(self) -> None:
        rss = _tree_rss(self.process)
        if rss > self.peak_bytes:
            self.peak_bytes = rss

    def run(self) -> None:
        while not self._stop_event.is_set():
            try:
                self.sample_once()
            except Exception:
                break
            self._stop_event.wait(self.interval)

    def stop(self) -> None:
        self._stop_event.set()


def _current_process():
    try:
        import psutil

        process = psutil.Process()
        process.memory_info()  # probe that RSS is actually readable
        return process
    except Exception as exc:
        raise ProfilerUnavailable(f"cannot read process RSS: {exc}") from exc


def profile(phase: str, fn: Callable, *args, interval: float = SAMPLE_INTERVAL_S, **kwargs):
    """Run fn(*args, **kwargs) under the profiler.

    Returns (result, EfficiencyRecord). When RSS cannot be read the phase
    still runs and the record carries a duration but no memory figure.
    """
    sampler = None
    try:
        process = _current_process()
        sampler = _RssSampler(process, interval)
        sampler.sample_once()  # baseline so short phases still report
        sampler.start()
    except ProfilerUnavailable:
        sampler = None

    start = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
    finally:
        duration = time.perf_counter() - start
        if sampler is not None:
            sampler.stop()
            sampler.join()
            try:
                sampler.sample_once()  # closing sample at phase end
            except Exception:
                pass

    peak = sampler.peak_bytes / MIB if sampler is not None else None
    return result, EfficiencyRecord(phase=phase, duration_s=duration, peak_rss_mib=peak)
