import json
from pathlib import Path

import pytest

from trustmon.synth import write_benchmark

REPO_ROOT = Path(__file__).resolve().parents[1]
DESK_MODEL = REPO_ROOT / "models" / "desk_blobs_mlp.json"


@pytest.fixture(scope="session")
def desk_benchmark(tmp_path_factory):
    """Manifest path for the deterministic blob benchmark."""
    directory = tmp_path_factory.mktemp("desk")
    return write_benchmark(directory)


@pytest.fixture(scope="session")
def desk_model_path():
    assert DESK_MODEL.exists(), "fixture model missing; run scripts/train_desk_model.py"
    return DESK_MODEL


@pytest.fixture()
def run_config_file(tmp_path, desk_benchmark, desk_model_path):
    """Factory writing a run-config JSON for a given tool."""

    def make(tool: str, tool_config: dict | None = None) -> Path:
        path = tmp_path / f"{tool}_config.json"
        path.write_text(
            json.dumps(
                {
                    "tool": tool,
                    "benchmark": str(desk_benchmark),
                    "model": str(desk_model_path),
                    "tool_config": tool_config or {},
                }
            )
        )
        return path

    return make
