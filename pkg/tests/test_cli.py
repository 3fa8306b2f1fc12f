import json

from trustmon.cli import main


def test_execute_and_evaluate_flow(run_config_file, tmp_path, capsys):
    cfg = run_config_file("prophecy", {"random_state": 42, "skip_rules": True})
    workdir = tmp_path / "work"
    args = ["execute", "--tool", "prophecy", "--config", str(cfg), "--workdir", str(workdir)]
    assert main(args + ["--phase", "analyze"]) == 0
    assert main(args + ["--phase", "infer"]) == 0
    out = capsys.readouterr().out
    assert "analyze" in out and "infer" in out

    assert main(["evaluate", "--kind", "effectiveness", "--workdir", str(workdir)]) == 0
    out = capsys.readouterr().out
    assert "prophecy" in out and "MCC" in out

    assert main(["evaluate", "--kind", "efficiency", "--workdir", str(workdir)]) == 0
    out = capsys.readouterr().out
    assert "Duration" in out


def test_infer_before_analyze_exits_3(run_config_file, tmp_path, capsys):
    cfg = run_config_file("deepinfer", {"prediction_interval": 0.95})
    code = main(
        [
            "execute",
            "--tool",
            "deepinfer",
            "--phase",
            "infer",
            "--config",
            str(cfg),
            "--workdir",
            str(tmp_path / "empty"),
        ]
    )
    assert code == 3
    err = capsys.readouterr().err
    assert "artifacts.json" in err


def test_unknown_tool_config_key_exits_2(run_config_file, tmp_path, capsys):
    cfg = run_config_file("selfchecker", {"var_threshold": 1e-5, "nope": 1})
    code = main(
        [
            "execute",
            "--tool",
            "selfchecker",
            "--phase",
            "analyze",
            "--config",
            str(cfg),
            "--workdir",
            str(tmp_path / "w"),
        ]
    )
    assert code == 2
    assert "error[config]" in capsys.readouterr().err


def test_missing_model_file_exits_4(tmp_path, desk_benchmark, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(
        json.dumps(
            {
                "tool": "prophecy",
                "benchmark": str(desk_benchmark),
                "model": str(tmp_path / "missing_model.json"),
            }
        )
    )
    code = main(
        [
            "execute",
            "--tool",
            "prophecy",
            "--phase",
            "analyze",
            "--config",
            str(cfg),
            "--workdir",
            str(tmp_path / "w"),
        ]
    )
    assert code == 4
    assert "error[io]" in capsys.readouterr().err


def test_detail_prints_tables(desk_benchmark, desk_model_path, capsys):
    code = main(
        [
            "detail",
            "--benchmark",
            str(desk_benchmark),
            "--model",
            str(desk_model_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "Dataset" in out and "Model" in out and "Acc." in out


def test_evaluate_missing_outputs_exits_4(tmp_path, capsys):
    code = main(["evaluate", "--kind", "effectiveness", "--workdir", str(tmp_path)])
    assert code == 4


def test_execute_command_plugin_mode(run_config_file, tmp_path, capsys):
    import sys

    stub = tmp_path / "stub.py"
    stub.write_text(
        "import argparse, json, pathlib\n"
        "p = argparse.ArgumentParser()\n"
        "for flag in ('--phase', '--benchmark', '--model', '--workdir'):\n"
        "    p.add_argument(flag)\n"
        "args = p.parse_args()\n"
        "out = pathlib.Path(args.workdir)\n"
        "out.mkdir(parents=True, exist_ok=True)\n"
        "(out / 'artifacts.json').write_text(json.dumps({'phase': args.phase}))\n"
    )
    cfg = run_config_file("prophecy", {"random_state": 42})
    code = main(
        [
            "execute",
            "--tool",
            "prophecy",
            "--phase",
            "analyze",
            "--config",
            str(cfg),
            "--workdir",
            str(tmp_path / "w"),
            "--command",
            f"{sys.executable} {stub}",
        ]
    )
    assert code == 0
    assert (tmp_path / "w" / "prophecy" / "artifacts.json").exists()
