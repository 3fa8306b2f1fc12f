#!/usr/bin/env python3
"""The whole harness: execute (analyze, infer) and evaluate, like the CLI.

Generates the blob benchmark, runs all three detectors through the
profiled two-step workflow, and prints the effectiveness and efficiency
tables. Equivalent shell session:

    trustmon execute --tool prophecy --phase analyze --config cfg.json --workdir out
    trustmon execute --tool prophecy --phase infer   --config cfg.json --workdir out
    trustmon evaluate --kind effectiveness --workdir out
    trustmon evaluate --kind efficiency    --workdir out
"""

import json
import tempfile
from pathlib import Path

from trustmon.harness import (
    describe_benchmark,
    evaluate_effectiveness,
    evaluate_efficiency,
    execute,
    load_run_config,
)
from trustmon.metrics import render_report
from trustmon.synth import write_benchmark

ROOT = Path(__file__).resolve().parents[1]
MODEL = ROOT / "models" / "desk_blobs_mlp.json"

TOOL_CONFIGS = {
    "selfchecker": {"var_threshold": 1e-5, "only_activation_layers": True, "batch_size": 128},
    "deepinfer": {"condition": ">=", "prediction_interval": 0.95},
    "prophecy": {
        "only_activation_layers": True,
        "only_dense_layers": True,
        "random_state": 42,
        "skip_rules": True,
    },
}

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    manifest = write_benchmark(tmp / "bench")
    workdir = tmp / "out"

    print(describe_benchmark(manifest, MODEL))
    print()

    for tool, tool_config in TOOL_CONFIGS.items():
        cfg_path = tmp / f"{tool}.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "tool": tool,
                    "benchmark": str(manifest),
                    "model": str(MODEL),
                    "tool_config": tool_config,
                }
            )
        )
        config = load_run_config(cfg_path, workdir=workdir)
        for phase in ("analyze", "infer"):
            record = execute(config, phase)
            mem = f"{record.peak_rss_mib:.0f} MiB" if record.peak_rss_mib else "n/a"
            print(f"{tool:12s} {phase:8s} {record.duration_s:6.2f} s   peak {mem}")

    print("\n=== effectiveness (from the notification files) ===")
    for tool in TOOL_CONFIGS:
        print(f"\n-- {tool} --")
        print(render_report(evaluate_effectiveness(workdir, tool)))

    print("\n=== efficiency ===")
    for row in evaluate_efficiency(workdir):
        mem = f"{row['peak_rss_mib']:.1f}" if row["peak_rss_mib"] else "n/a"
        print(
            f"{row['tool']:12s} {row['phase']:8s} runs={row['runs']} "
            f"mean {row['mean_duration_s']:.2f} s   peak {mem} MiB"
        )
