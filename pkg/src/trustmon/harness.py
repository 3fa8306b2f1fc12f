"""Configuration-driven two-step workflow: execute (analyze / infer) and
evaluate (effectiveness / efficiency).

Each detector runs in-process behind a small adapter; both phases are
wrapped by the RSS profiler and leave their outputs in
workdir/<tool>/: artifacts.json, notifications.csv, predictions.csv,
efficiency.json and, for effectiveness evaluation, report.json. The
notifications CSV is the canonical interchange format, so evaluation is
recomputed from files rather than from in-process state.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import deepinfer, prophecy, selfchecker
from .data import load_manifest, manifest_name
from .errors import ConfigError, DetectorError, MissingOutputs
from .metrics import MetricsReport, evaluate_notifications, report_to_dict
from .network import Network, forward_trace, load_model
from .notifications import Verdict, read_notifications, write_notifications
from .profiler import EfficiencyRecord, profile

TOOLS = ("selfchecker", "deepinfer", "prophecy")

_RUN_CONFIG_KEYS = {"tool", "benchmark", "model", "tool_config", "workdir"}


@dataclass(frozen=True)
class RunConfig:
    tool: str
    benchmark: Path  # manifest path
    model: Path  # model-file path
    tool_config: dict
    workdir: Path

    def __post_init__(self):
        if self.tool not in TOOLS:
            raise ConfigError(f"unknown tool {self.tool!r}; expected one of {TOOLS}")
        # validating eagerly means unknown keys fail before any computation
        parse_tool_config(self.tool, self.tool_config)

    def tool_dir(self) -> Path:
        return Path(self.workdir) / self.tool


def parse_tool_config(tool: str, obj: dict):
    if tool == "selfchecker":
        return selfchecker.SelfCheckerConfig.from_dict(obj)
    if tool == "deepinfer":
        return deepinfer.DeepInferConfig.from_dict(obj)
    if tool == "prophecy":
        return prophecy.ProphecyConfig.from_dict(obj)
    raise ConfigError(f"unknown tool {tool!r}")


def load_run_config(
    path: str | Path, tool: str | None = None, workdir: str | Path | None = None
) -> RunConfig:
    """Read a run-config JSON; --tool / --workdir from the CLI take precedence."""
    path = Path(path)
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(obj) - _RUN_CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    chosen_tool = tool or obj.get("tool")
    if chosen_tool is None:
        raise ConfigError(f"{path}: no tool given (config key or --tool)")
    if tool and "tool" in obj and obj["tool"] != tool:
        raise ConfigError(
            f"{path}: config names tool {obj['tool']!r} but --tool says {tool!r}"
        )
    chosen_workdir = workdir or obj.get("workdir")
    if chosen_workdir is None:
        raise ConfigError(f"{path}: no workdir given (config key or --workdir)")
    for key in ("benchmark", "model"):
        if key not in obj:
            raise ConfigError(f"{path}: missing key {key!r}")
    base = path.parent
    return RunConfig(
        tool=chosen_tool,
        benchmark=(base / obj["benchmark"]).resolve(),
        model=(base / obj["model"]).resolve(),
        tool_config=obj.get("tool_config", {}),
        workdir=Path(chosen_workdir),
    )


# --- detector adapters ------------------------------------------------------

def _analyze(config: RunConfig, net: Network, train, val):
    cfg = parse_tool_config(config.tool, config.tool_config)
    if config.tool == "selfchecker":
        return selfchecker.analyze(net, train, val, cfg)
    if config.tool == "deepinfer":
        return deepinfer.analyze(net, train, val, cfg)
    return prophecy.analyze(net, train, cfg)


def _save_artifacts(tool: str, artifacts, path: Path) -> None:
    {"selfchecker": selfchecker, "deepinfer": deepinfer, "prophecy": prophecy}[
        tool
    ].save_artifacts(artifacts, path)


def _load_artifacts(tool: str, path: Path):
    return {
        "selfchecker": selfchecker,
        "deepinfer": deepinfer,
        "prophecy": prophecy,
    }[tool].load_artifacts(path)


def _infer_all(tool: str, artifacts, net: Network, test):
    """Verdicts for every test row, plus optional per-instance extras."""
    verdicts: list[Verdict] = []
    extras: list[dict] = []
    for row in test.features:
        if tool == "selfchecker":
            verdicts.append(selfchecker.infer(artifacts, net, row))
        elif tool == "deepinfer":
            verdict, violations, satisfactions = deepinfer.infer_at_input(
                artifacts, net, row
            )
            verdicts.append(verdict)
            extras.append({"violations": violations, "satisfactions": satisfactions})
        else:
            verdicts.append(prophecy.infer(artifacts, net, row))
    return verdicts, extras


# --- execute ----------------------------------------------------------------

def _run_subprocess_phase(config: RunConfig, phase: str, command: list[str]) -> None:
    """Plug-in mode: delegate the phase to an external tool process.

    The command is invoked with `--phase/--benchmark/--model/--workdir`
    appended and must leave the canonical outputs under
    workdir/<tool>/ itself (artifacts for analyze; notifications.csv and
    predictions.csv for infer). The profiler wrapping the call samples
    the whole process tree, so the child's memory is accounted for.
    """
    import subprocess

    argv = list(command) + [
        "--phase",
        phase,
        "--benchmark",
        str(config.benchmark),
        "--model",
        str(config.model),
        "--workdir",
        str(config.tool_dir()),
    ]
    result = subprocess.run(argv)
    if result.returncode != 0:
        raise DetectorError(
            f"subprocess tool exited with {result.returncode}: {' '.join(command)}"
        )


def execute(
    config: RunConfig, phase: str, subprocess_command: list[str] | None = None
) -> EfficiencyRecord:
    """Run one phase for one tool, writing its outputs under the workdir.

    With subprocess_command the phase is delegated to an external tool
    (cross-language plug-in mode); otherwise the detector runs in
    process.
    """
    if phase not in ("analyze", "infer"):
        raise ConfigError(f"phase must be analyze or infer, got {phase!r}")
    tool_dir = config.tool_dir()
    tool_dir.mkdir(parents=True, exist_ok=True)

    if subprocess_command is not None:
        _, record = profile(phase, _run_subprocess_phase, config, phase, subprocess_command)
        if phase == "infer":
            for required in ("notifications.csv", "predictions.csv"):
                if not (tool_dir / required).exists():
                    raise DetectorError(
                        f"subprocess tool did not write {tool_dir / required}"
                    )
        _append_efficiency(tool_dir / "efficiency.json", config, record)
        return record

    net = load_model(config.model)
    train, val, test = load_manifest(config.benchmark)
    artifacts_path = tool_dir / "artifacts.json"

    if phase == "analyze":
        artifacts, record = profile(
            "analyze", _analyze, config, net, train, val
        )
        _save_artifacts(config.tool, artifacts, artifacts_path)
    else:
        if not artifacts_path.exists():
            raise DetectorError(
                f"infer requires prior analyze artifacts: missing {artifacts_path}"
            )
        artifacts = _load_artifacts(config.tool, artifacts_path)
        (verdicts, extras), record = profile(
            "infer", _infer_all, config.tool, artifacts, net, test
        )
        write_notifications(tool_dir / "notifications.csv", verdicts)
        _write_predictions(tool_dir / "predictions.csv", net, test)
        if extras:
            _write_details(tool_dir / "details.csv", extras)

    _append_efficiency(tool_dir / "efficiency.json", config, record)
    return record


def _write_predictions(path: Path, net: Network, test) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_index", "model_pred", "actual_label"])
        for i, (row, label) in enumerate(zip(test.features, test.labels)):
            writer.writerow([i, forward_trace(net, row).predicted_class, int(label)])


def _write_details(path: Path, extras: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_index", "violations", "satisfactions"])
        for i, extra in enumerate(extras):
            writer.writerow([i, extra["violations"], extra["satisfactions"]])


def _append_efficiency(path: Path, config: RunConfig, record: EfficiencyRecord) -> None:
    rows = []
    if path.exists():
        rows = json.loads(path.read_text())
    rows.append(
        {
            "tool": config.tool,
            "benchmark": manifest_name(config.benchmark),
            "phase": record.phase,
            "duration_s": record.duration_s,
            "peak_rss_mib": record.peak_rss_mib,
        }
    )
    path.write_text(json.dumps(rows, indent=2, sort_keys=True))


# --- evaluate ---------------------------------------------------------------

def _read_predictions(path: Path) -> tuple[list[int], list[int]]:
    preds, labels = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["instance_index", "model_pred", "actual_label"]:
            raise MissingOutputs(f"{path}: unexpected predictions header")
        for row in reader:
            preds.append(int(row[1]))
            labels.append(int(row[2]))
    return preds, labels


def evaluate_effectiveness(
    workdir: str | Path, tool: str, uncertain_as_alarm: bool = True
) -> MetricsReport:
    """Recompute the metrics report from the files a prior infer wrote."""
    tool_dir = Path(workdir) / tool
    notif_path = tool_dir / "notifications.csv"
    preds_path = tool_dir / "predictions.csv"
    for required in (notif_path, preds_path):
        if not required.exists():
            raise MissingOutputs(f"missing output file: {required}")
    records = read_notifications(notif_path)
    verdicts = [r.verdict for r in records]
    preds, labels = _read_predictions(preds_path)
    report = evaluate_notifications(verdicts, preds, labels, uncertain_as_alarm)
    (tool_dir / "report.json").write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True)
    )
    return report


def evaluate_efficiency(workdir: str | Path) -> list[dict]:
    """Aggregate efficiency records per (tool, benchmark, phase).

    Reports the mean duration and the maximum peak RSS over runs,
    mirroring the usual duration/memory table layout.
    """
    rows = []
    workdir = Path(workdir)
    for eff_path in sorted(workdir.glob("*/efficiency.json")):
        rows.extend(json.loads(eff_path.read_text()))
    if not rows:
        raise MissingOutputs(f"no efficiency.json found under {workdir}")
    grouped: dict[tuple, list[dict]] = {}
    for row in rows:
        grouped.setdefault((row["tool"], row["benchmark"], row["phase"]), []).append(row)
    table = []
    for (tool, benchmark, phase), runs in sorted(grouped.items()):
        durations = [r["duration_s"] for r in runs]
        peaks = [r["peak_rss_mib"] for r in runs if r["peak_rss_mib"] is not None]
        table.append(
            {
                "tool": tool,
                "benchmark": benchmark,
                "phase": phase,
                "runs": len(runs),
                "mean_duration_s": float(np.mean(durations)),
                "peak_rss_mib": max(peaks) if peaks else None,
            }
        )
    return table


def evaluate(kind: str, workdir: str | Path, tool: str | None = None):
    if kind == "effectiveness":
        if tool is not None:
            return {tool: evaluate_effectiveness(workdir, tool)}
        reports = {}
        for candidate in TOOLS:
            if (Path(workdir) / candidate / "notifications.csv").exists():
                reports[candidate] = evaluate_effectiveness(workdir, candidate)
        if not reports:
            raise MissingOutputs(f"no notifications.csv found under {workdir}")
        return reports
    if kind == "efficiency":
        return evaluate_efficiency(workdir)
    raise ConfigError(f"kind must be effectiveness or efficiency, got {kind!r}")


# --- benchmark summary (detail command) --------------------------------------

def describe_benchmark(manifest_path: str | Path, model_path: str | Path | None = None) -> str:
    """Dataset (and optionally model) summary tables."""
    train, val, test = load_manifest(manifest_path)
    name = manifest_name(manifest_path)
    total = len(train) + len(val) + len(test)
    lines = [
        f"{'Dataset':<12} {'Total':>7} {'Train':>7} {'Val':>6} {'Test':>6} "
        f"{'Input':>6} {'#L':>4}",
        f"{name:<12} {total:>7} {len(train):>7} {len(val):>6} {len(test):>6} "
        f"{train.features.shape[1]:>6} {train.class_count:>4}",
    ]
    if model_path is not None:
        net = load_model(model_path)
        preds = [forward_trace(net, row).predicted_class for row in test.features]
        acc = float(np.mean(np.asarray(preds) == test.labels))
        correct = int(np.sum(np.asarray(preds) == test.labels))
        lines += [
            "",
            f"{'Model':<12} {'#C':>6} {'#I':>6} {'#Layers':>8} {'#Params':>8} {'Acc.':>8}",
            f"{Path(model_path).stem:<12} {correct:>6} {len(test) - correct:>6} "
            f"{len(net.layers):>8} {net.param_count:>8} {acc * 100:>7.2f}%",
        ]
    return "\n".join(lines)
