"""Workload harness: bench reports, stress verdicts, simulation sweeps."""

import math

import pytest

from flatpq.bench import (CSV_HEADER, SIM_CSV_HEADER, SimReport, SimRow,
                          WorkloadConfig, run_bench, run_simulate, run_stress,
                          simulate_batch, write_csv)
from flatpq.heap import BinaryHeap


def test_config_validation():
    WorkloadConfig().validate()
    with pytest.raises(ValueError):
        WorkloadConfig(threads=0).validate()
    with pytest.raises(ValueError):
        WorkloadConfig(ratio=1.5).validate()
    with pytest.raises(ValueError):
        WorkloadConfig(key_range=0).validate()
    with pytest.raises(ValueError):
        WorkloadConfig(runs=0).validate()
    with pytest.raises(ValueError):
        WorkloadConfig(init_size=-1).validate()


def test_fixed_op_bench_counts_exactly():
    cfg = WorkloadConfig(impl="coarse-lock", threads=2, init_size=200,
                         key_range=100, runs=2, seed=5, ops_per_run=2000)
    report = run_bench(cfg)
    assert report.ops == [2000, 2000]
    assert len(report.durations) == 2
    assert all(d > 0 for d in report.durations)
    assert report.mean_mops() > 0
    rows = report.csv_rows()
    assert len(rows) == 2
    for i, row in enumerate(rows):
        fields = row.split(",")
        assert len(fields) == len(CSV_HEADER.split(","))
        assert fields[0] == "coarse-lock"
        assert fields[1] == "2"
        assert fields[5] == str(i)
        assert fields[6] == "2000"


def test_timed_bench_runs_for_the_window():
    cfg = WorkloadConfig(impl="fc-sequential", threads=1, init_size=100,
                         key_range=50, duration_s=0.05, warmup_s=0.0, runs=1)
    report = run_bench(cfg)
    assert len(report.ops) == 1
    assert report.ops[0] > 0
    assert report.durations == [0.05]


def test_write_csv_header_once(tmp_path):
    cfg = WorkloadConfig(impl="coarse-lock", threads=1, init_size=50,
                         key_range=50, runs=1, ops_per_run=500)
    report = run_bench(cfg)
    path = tmp_path / "out.csv"
    write_csv(str(path), [report])
    write_csv(str(path), [report], append=True)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert all(not line.startswith("impl,") for line in lines[1:])


def test_stress_passes_and_reports(tmp_path):
    cfg = WorkloadConfig(impl="coarse-lock", threads=2, init_size=500,
                         key_range=300, seed=3)
    verdict = run_stress(cfg, total_ops=20_000)
    assert verdict.passed
    assert verdict.total_ops == 20_000
    assert verdict.summary().startswith("PASS")


def test_stress_ratio_zero_never_extracts():
    cfg = WorkloadConfig(impl="coarse-lock", threads=1, init_size=100,
                         key_range=50, ratio=0.0, seed=1)
    verdict = run_stress(cfg, total_ops=3000)
    assert verdict.passed
    assert verdict.empties == 0


def test_stress_ratio_one_drains_the_heap():
    cfg = WorkloadConfig(impl="coarse-lock", threads=1, init_size=1000,
                         key_range=50, ratio=1.0, seed=1)
    verdict = run_stress(cfg, total_ops=3000)
    assert verdict.passed
    assert verdict.empties == 2000


def test_simulate_sweep_shape_and_bounds():
    report = run_simulate([64, 256], [1, 2, 4, 8], seeds=3)
    assert len(report.rows) == 2 * 4 * 3 * 2
    consts = report.constants()
    assert set(consts) == {"work", "span", "remote"}
    for name, value in consts.items():
        assert value <= 4.0, f"{name} constant {value} above ceiling"
    for row in report.rows:
        fields = row.csv_row().split(",")
        assert len(fields) == len(SIM_CSV_HEADER.split(","))
        assert row.span <= row.work


def test_simulate_skips_batches_larger_than_the_heap():
    assert run_simulate([4], [8], seeds=2).rows == []


def test_simulate_batch_rejects_unknown_op():
    h = BinaryHeap.from_values([1, 2, 3])
    with pytest.raises(ValueError):
        simulate_batch(h, "merge", 1, 0)


def test_simulate_batch_leaves_the_input_heap_alone():
    h = BinaryHeap.from_values([5, 2, 9, 4])
    before = list(h.values)
    simulate_batch(h, "extract", 2, 1)
    assert h.values == before
    assert h.size == 4


def test_constants_ratio_math():
    row = SimRow("extract", 1024, 4, 0, work=80, span=20, max_remote=26,
                 tasks=4)
    consts = SimReport(rows=[row]).constants()
    assert math.isclose(consts["work"], 80 / (4 * 11))
    assert math.isclose(consts["span"], 20 / 14)
    assert math.isclose(consts["remote"], 26 / 14)
