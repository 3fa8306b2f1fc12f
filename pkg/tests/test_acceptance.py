"""Acceptance suite: one test per criterion, tolerances pinned inline.

Each test prints a `criterion N [...]: PASS` line once its assertions
hold (run pytest with -s to see them); a failure surfaces as a normal
pytest failure for that criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from test_kde import brute_force_log_density
from trustmon.deepinfer import Halfspace, wp_backward
from trustmon.harness import evaluate_effectiveness, execute, load_run_config
from trustmon.kde import estimate_log_density, fit_density
from trustmon.metrics import (
    ConfusionMatrix,
    build_confusion,
    compute_metrics,
    mcc,
)
from trustmon.network import Network, dense
from trustmon.notifications import Verdict, read_notifications, write_notifications
from trustmon.profiler import profile
from trustmon.prophecy import ProphecyArtifacts, ProphecyConfig
from trustmon.prophecy import infer as prophecy_infer
from trustmon.tree import DecisionTree, TreeParams, fit_tree

TOOLS = ("selfchecker", "deepinfer", "prophecy")

# Config per tool for the desk benchmark; keys follow the published
# replication/comparison configuration listings.
DESK_CONFIGS = {
    "selfchecker": {
        "var_threshold": 1e-5,
        "only_activation_layers": True,
        "batch_size": 128,
    },
    "deepinfer": {"condition": ">=", "prediction_interval": 0.95},
    "prophecy": {
        "only_activation_layers": True,
        "only_dense_layers": True,
        "random_state": 42,
        "skip_rules": True,
    },
}


def run_all_detectors(workdir, run_config_file):
    for tool in TOOLS:
        cfg_path = run_config_file(tool, DESK_CONFIGS[tool])
        config = load_run_config(cfg_path, workdir=workdir)
        execute(config, "analyze")
        execute(config, "infer")


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory, desk_benchmark, desk_model_path):
    """One full analyze+infer run of all three tools, plus its wall time."""
    workdir = tmp_path_factory.mktemp("desk_run")
    cfg_dir = tmp_path_factory.mktemp("cfgs")

    def make_cfg(tool, tool_config):
        path = cfg_dir / f"{tool}.json"
        path.write_text(
            json.dumps(
                {
                    "tool": tool,
                    "benchmark": str(desk_benchmark),
                    "model": str(desk_model_path),
                    "tool_config": tool_config,
                }
            )
        )
        return path

    start = time.perf_counter()
    run_all_detectors(workdir, make_cfg)
    elapsed = time.perf_counter() - start
    return workdir, make_cfg, elapsed


# --- criterion 1 -------------------------------------------------------------

# (tool, row, tp, fp, tn, fn, tpr%, fpr%, prec% or None, f1%, mcc or None)
GOLDEN_ROWS = [
    # required rows
    ("selfchecker", "BM10", 248, 28, 492, 290, 46.10, 5.38, 89.86, 60.93, 0.464),
    ("deepinfer", "HP1", 64, 5, 60, 17, 79.01, 7.69, 92.75, 85.33, 0.710),
    ("deepinfer", "BM9", 0, 0, 857, 201, 0.0, 0.0, 0.0, 0.0, 0.0),
    ("selfchecker", "CIFAR10-replication", 1251, 239, 7806, 704, 63.99, 2.97, None, 72.63, None),
    # additional rows drawn across the effectiveness tables
    ("selfchecker", "BM1", 538, 444, 76, 0, 100.0, 85.38, 54.79, 70.79, 0.283),
    ("selfchecker", "GC5", 20, 17, 50, 13, 60.61, 25.37, 54.05, 57.14, 0.343),
    ("selfchecker", "HP2", 60, 9, 65, 12, 83.33, 12.16, 86.96, 85.11, 0.713),
    ("selfchecker", "PD4", 24, 6, 39, 8, 75.0, 13.33, 80.0, 77.42, 0.623),
    ("selfchecker", "CIFAR10", 1244, 207, 7838, 711, 63.63, 2.57, 85.73, 73.05, 0.688),
    ("deepinfer", "BM5", 427, 125, 429, 77, 84.72, 22.56, 77.36, 80.87, 0.621),
    ("deepinfer", "GC8", 33, 3, 34, 30, 52.38, 8.11, 91.67, 66.67, 0.445),
    ("deepinfer", "HP4", 60, 8, 68, 10, 85.71, 10.53, 88.24, 86.96, 0.753),
    ("deepinfer", "PD1", 21, 3, 40, 13, 61.76, 6.98, 87.5, 72.41, 0.587),
    ("deepinfer", "PD3", 19, 17, 27, 14, 57.58, 38.64, 52.78, 55.07, 0.188),
    ("deepinfer", "CIFAR10", 3938, 1492, 4107, 463, 89.48, 26.65, 72.52, 80.11, 0.626),
    ("prophecy", "BM3", 253, 98, 597, 110, 69.7, 14.1, 72.08, 70.87, 0.561),
    ("prophecy", "GC1", 35, 22, 32, 11, 76.09, 40.74, 61.4, 67.96, 0.356),
    ("prophecy", "HP4", 16, 7, 112, 11, 59.26, 5.88, 69.57, 64.0, 0.569),
    ("prophecy", "PD4", 15, 4, 47, 11, 57.69, 7.84, 78.95, 66.67, 0.547),
    ("prophecy", "CIFAR10-balanced", 1511, 1423, 6534, 532, 73.96, 17.88, 51.5, 60.72, 0.497),
]

PCT_TOL = 0.005  # percentage points
MCC_TOL = 0.0005


def test_criterion_1_metric_goldens():
    start = time.perf_counter()
    extra_rows = len(GOLDEN_ROWS) - 4
    assert extra_rows >= 10
    for tool, row, tp, fp, tn, fn, tpr, fpr, prec, f1, m in GOLDEN_ROWS:
        r = compute_metrics(ConfusionMatrix(tp, fp, tn, fn))
        label = f"{tool}/{row}"
        assert r.tpr * 100 == pytest.approx(tpr, abs=PCT_TOL), label
        assert r.fpr * 100 == pytest.approx(fpr, abs=PCT_TOL), label
        if prec is not None:
            assert r.precision * 100 == pytest.approx(prec, abs=PCT_TOL), label
        assert r.f1 * 100 == pytest.approx(f1, abs=PCT_TOL), label
        if m is not None:
            assert r.mcc == pytest.approx(m, abs=MCC_TOL), label
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(
        f"\ncriterion 1 [metric goldens, {len(GOLDEN_ROWS)} rows, "
        f"{elapsed:.3f}s]: PASS"
    )


# --- criterion 2 -------------------------------------------------------------

def test_criterion_2_mcc_properties():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    counts = rng.integers(0, 1000, size=(100_000, 4))
    violations = 0
    for tp, fp, tn, fn in counts:
        cm = ConfusionMatrix(int(tp), int(fp), int(tn), int(fn))
        value = mcc(cm)
        if not -1.0 <= value <= 1.0:
            violations += 1
        if abs(mcc(cm.swapped()) - value) > 1e-12:
            violations += 1
        factors = (tp + fp, tp + fn, tn + fp, tn + fn)
        if any(f == 0 for f in factors) and value != 0.0:
            violations += 1
    assert violations == 0
    assert mcc(ConfusionMatrix(10, 0, 10, 0)) == 1.0
    assert mcc(ConfusionMatrix(0, 10, 0, 10)) == -1.0
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(f"\ncriterion 2 [MCC properties, 1e5 matrices, {elapsed:.2f}s]: PASS")


# --- criterion 3 -------------------------------------------------------------

def test_criterion_3_wp_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    tol = 1e-9
    checked = 0
    for _ in range(100):
        depth = int(rng.integers(1, 5))
        input_dim = int(rng.integers(1, 17))
        widths = [int(rng.integers(1, 17)) for _ in range(depth)]
        layers = []
        w_in = input_dim
        for w_out in widths:
            layers.append(
                dense(
                    rng.standard_normal((w_out, w_in)),
                    rng.standard_normal(w_out),
                    "linear",
                )
            )
            w_in = w_out
        net = Network(layers=tuple(layers), input_dim=input_dim, class_count=2)
        w = rng.standard_normal(widths[-1])
        if not np.any(w):
            w[0] = 1.0
        c = float(rng.standard_normal())
        relation = "ge" if rng.integers(2) else "le"
        pre = wp_backward(net, Halfspace(w, c, relation), anchor_layer=0)

        X = rng.standard_normal((10_000, input_dim))
        # independent oracle: plain matrix forward pass
        out = X
        for layer in net.layers:
            out = out @ layer.weights.T + layer.bias
        fwd_margin = out @ w - c
        back_margin = X @ pre.weights - pre.offset
        # the two margins are the same functional computed two ways
        scale = 1.0 + np.abs(fwd_margin)
        assert np.all(np.abs(fwd_margin - back_margin) <= tol * scale)
        # membership agrees wherever the point is not within tolerance
        # of the boundary
        clear = np.abs(fwd_margin) > tol * scale
        if relation == "ge":
            fwd_in, back_in = fwd_margin >= 0, back_margin >= 0
        else:
            fwd_in, back_in = fwd_margin <= 0, back_margin <= 0
        assert np.array_equal(fwd_in[clear], back_in[clear])
        checked += int(clear.sum())
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    print(
        f"\ncriterion 3 [WP oracle, 100 nets x 1e4 points, "
        f"{checked} memberships, {elapsed:.1f}s]: PASS"
    )


# --- criterion 4 -------------------------------------------------------------

def test_criterion_4_kde_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(404)

    # 1-D
    samples = rng.standard_normal((40, 1)) * 2.0
    dm = fit_density(samples, var_threshold=1e-5)
    cov = dm.bandwidth_factor**2 * np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
    for _ in range(50):
        x = rng.standard_normal(1) * 3
        assert estimate_log_density(dm, x) == pytest.approx(
            brute_force_log_density(samples, x, cov), abs=1e-12
        )

    # 3-D
    samples = rng.standard_normal((30, 3)) @ np.diag([0.5, 1.0, 2.0])
    dm = fit_density(samples, var_threshold=1e-5)
    cov = dm.bandwidth_factor**2 * np.cov(samples, rowvar=False, ddof=1)
    for _ in range(50):
        x = rng.standard_normal(3) * 2
        assert estimate_log_density(dm, x) == pytest.approx(
            brute_force_log_density(samples, x, cov), abs=1e-12
        )

    # regularized fallback on an exactly singular covariance
    col = rng.standard_normal((25, 1))
    singular = np.hstack([col, col, rng.standard_normal((25, 1))])
    alpha = 0.1
    dm = fit_density(singular, var_threshold=1e-5, alpha=alpha)
    assert dm.regularized, "singular fixture must take the fallback path"
    base = np.cov(singular, rowvar=False, ddof=1)
    reg = base + alpha * (np.trace(base) / 3) * np.eye(3)
    kernel_cov = dm.bandwidth_factor**2 * reg
    for _ in range(50):
        x = rng.standard_normal(3)
        got = estimate_log_density(dm, x)
        assert math.isfinite(got)
        assert got == pytest.approx(
            brute_force_log_density(singular, x, kernel_cov), abs=1e-12
        )

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(f"\ncriterion 4 [KDE oracle 1-D/3-D + fallback, {elapsed:.2f}s]: PASS")


# --- criterion 5 -------------------------------------------------------------

def test_criterion_5_tree_properties():
    start = time.perf_counter()
    rng = np.random.default_rng(505)
    X = rng.standard_normal((400, 5))
    y = ((X[:, 0] > 0.1) & (X[:, 3] < 0.4)).tolist()
    params = TreeParams(min_samples_leaf=5, random_state=42)
    tree = fit_tree(X, y, params)

    # determinism across 20 repeated fits
    for _ in range(20):
        assert fit_tree(X, y, params).nodes == tree.nodes

    # XOR training-set consistency
    xor_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    xor_y = [True, False, False, True]
    xor_tree = fit_tree(xor_X, xor_y, TreeParams(min_samples_leaf=1))
    assert all(xor_tree.predict(x) is label for x, label in zip(xor_X, xor_y))

    # leaf partition + rule-evaluation equivalence on 1e4 random inputs
    paths = tree.decision_paths()
    probes = rng.standard_normal((10_000, 5)) * 2
    for x in probes:
        matched = sum(
            1
            for constraints, _ in paths
            if all((x[f] <= t) if op == "<=" else (x[f] > t) for f, op, t in constraints)
        )
        assert matched == 1
        assert tree.predict_by_rules(x) is tree.predict(x)

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"\ncriterion 5 [tree properties, 1e4 inputs, {elapsed:.1f}s]: PASS")


# --- criteria 6, 8, 9 (share the desk-benchmark run) -------------------------

def test_criterion_6_end_to_end_desk_benchmark(desk_run):
    workdir, _, elapsed = desk_run
    assert elapsed < 120.0
    mccs = {}
    for tool in TOOLS:
        records = read_notifications(workdir / tool / "notifications.csv")
        assert len(records) == 200
        report = evaluate_effectiveness(workdir, tool)
        mccs[tool] = report.mcc
        assert report.mcc > 0.0, f"{tool} must achieve positive MCC"
    summary = ", ".join(f"{t}={m:+.3f}" for t, m in mccs.items())
    print(f"\ncriterion 6 [desk benchmark, {elapsed:.1f}s, MCC {summary}]: PASS")


def test_criterion_7_uncertain_plumbing(tmp_path):
    # a two-layer vote tie produces an uncertain verdict end to end
    rng = np.random.default_rng(707)
    net = Network(
        layers=(
            dense(rng.standard_normal((3, 2)), np.zeros(3), "relu"),
            dense(rng.standard_normal((2, 3)), np.zeros(2), "softmax"),
        ),
        input_dim=2,
        class_count=2,
    )
    art = ProphecyArtifacts(
        trees={
            0: DecisionTree(nodes=[{"label": "pass", "support": [0, 1]}]),
            1: DecisionTree(nodes=[{"label": "fail", "support": [1, 0]}]),
        },
        selected_layers=[0, 1],
        skip_rules=True,
        balanced=False,
        config=ProphecyConfig(),
    )
    verdicts = [prophecy_infer(art, net, x) for x in rng.standard_normal((4, 2))]
    assert all(v is Verdict.UNCERTAIN for v in verdicts)

    path = tmp_path / "notifications.csv"
    write_notifications(path, verdicts)
    records = read_notifications(path)
    assert [r.verdict for r in records] == [Verdict.UNCERTAIN] * 4

    # uncertain counts as a positive alarm: 2 misclassified -> tp,
    # 2 correctly classified -> fp, exact counts
    cm = build_confusion([r.verdict for r in records], [0, 0, 1, 1], [1, 1, 1, 1])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 2, 0, 0)
    print("\ncriterion 7 [uncertain plumbing, exact counts]: PASS")


def test_criterion_8_efficiency_profiler(desk_run):
    # controlled 256 MiB allocation
    def allocate():
        block = np.ones(256 * 1024 * 1024 // 8, dtype=np.float64)
        time.sleep(0.6)
        return float(block.sum())

    wall_start = time.perf_counter()
    _, record = profile("analyze", allocate)
    wall = time.perf_counter() - wall_start
    assert record.peak_rss_mib is not None and record.peak_rss_mib >= 256
    assert record.duration_s <= wall
    assert wall <= record.duration_s * 1.5

    # both phases of the desk run emitted records for every tool
    workdir, _, _ = desk_run
    for tool in TOOLS:
        rows = json.loads((workdir / tool / "efficiency.json").read_text())
        phases = {row["phase"] for row in rows}
        assert phases == {"analyze", "infer"}
        assert all(row["duration_s"] > 0 for row in rows)
    print(
        f"\ncriterion 8 [profiler, peak {record.peak_rss_mib:.0f} MiB, "
        f"duration {record.duration_s:.2f}s]: PASS"
    )


def test_criterion_9_determinism(desk_run, tmp_path_factory):
    workdir_a, make_cfg, _ = desk_run
    workdir_b = tmp_path_factory.mktemp("desk_repeat")
    run_all_detectors(workdir_b, make_cfg)
    for tool in TOOLS:
        a = (workdir_a / tool / "notifications.csv").read_bytes()
        b = (workdir_b / tool / "notifications.csv").read_bytes()
        assert a == b, f"{tool} notifications differ between identical runs"
    print("\ncriterion 9 [determinism across repeated runs]: PASS")
