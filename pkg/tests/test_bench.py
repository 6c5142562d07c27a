import pytest

from nettwin.bench import (BenchReport, project_pipeline, run_quality_study,
                           time_speedup)
from nettwin.data import SweepSpec
from nettwin.denoise import FilterSpec, NoiseSpec
from nettwin.errors import InvalidConfigError
from nettwin.jsonio import QUARANTINED_KEYS, strip_quarantined

from conftest import TINY_FLOW, synth_dataset


def test_projection_reference_constants():
    # 900 h of full-grid simulation vs a 3.4 h pipeline
    grid = 194_481
    sim_mean = 900 * 3600 / grid
    train_time = 3.4 * 3600 - 400 * sim_mean - 60.0
    out = project_pipeline(grid, sim_mean, 400, train_time, 60.0)
    assert out["full_grid_sim_hours"] == pytest.approx(900.0)
    assert out["pipeline_hours"] == pytest.approx(3.4)
    assert out["projection_factor"] == pytest.approx(264.7, abs=0.1)


def test_projection_identity_factor():
    # a pipeline that costs exactly the full grid has factor 1
    out = project_pipeline(1000, 0.5, 1000, 0.0, 0.0)
    assert out["projection_factor"] == pytest.approx(1.0)


def test_projection_input_validation():
    with pytest.raises(InvalidConfigError):
        project_pipeline(0, 1.0, 10, 1.0, 1.0)
    with pytest.raises(InvalidConfigError):
        project_pipeline(10, -1.0, 10, 1.0, 1.0)


def test_time_speedup_measures_both_sides(tiny_twin):
    configs = [s.config for s in synth_dataset(30, seed=30).rows]
    sim_mean, twin_mean, speedup = time_speedup(tiny_twin, TINY_FLOW, configs,
                                                repeats=3)
    assert sim_mean > 0
    assert twin_mean > 0
    assert speedup == sim_mean / twin_mean


def test_time_speedup_validates_inputs(tiny_twin):
    configs = [s.config for s in synth_dataset(30, seed=31).rows]
    with pytest.raises(InvalidConfigError):
        time_speedup(tiny_twin, TINY_FLOW, configs[:5], repeats=3)
    with pytest.raises(InvalidConfigError):
        time_speedup(tiny_twin, TINY_FLOW, configs, repeats=1)


def test_bench_report_invariants():
    with pytest.raises(InvalidConfigError):
        BenchReport(sim_mean_s=1.0, twin_mean_s=1.0, speedup=0.0, n_timed=30,
                    repeats=3, accuracy={}, projection={})
    with pytest.raises(InvalidConfigError):
        BenchReport(sim_mean_s=1.0, twin_mean_s=1.0, speedup=2.0, n_timed=5,
                    repeats=3, accuracy={}, projection={})


def test_bench_report_timing_is_quarantined():
    report = BenchReport(sim_mean_s=0.1, twin_mean_s=0.001, speedup=100.0,
                         n_timed=30, repeats=5, accuracy={},
                         projection={"projection_factor": 60.0},
                         params={"seed": 7})
    doc = report.to_json()
    assert "timing" in QUARANTINED_KEYS
    stripped = strip_quarantined(doc)
    assert "timing" not in stripped
    assert stripped["params"] == {"seed": 7}
    # two differently-timed reports agree outside quarantined fields
    other = BenchReport(sim_mean_s=0.2, twin_mean_s=0.002, speedup=100.0,
                        n_timed=30, repeats=5, accuracy={},
                        projection={"projection_factor": 60.0},
                        params={"seed": 7})
    assert strip_quarantined(other.to_json()) == stripped


def test_quality_study_smoke():
    train = synth_dataset(60, seed=40)
    test = synth_dataset(30, seed=41)
    study = run_quality_study(
        SweepSpec(), TINY_FLOW,
        NoiseSpec(sigma=0.05, seed=1), FilterSpec(window=11, order=3),
        budget_s=60.0, seed=2, train=train, test=test, preset="fast")
    assert set(study["twins"]) == {"raw", "noised", "cleaned"}
    assert set(study["metrics"]) == {"raw", "noised", "cleaned"}
    for per_target in study["metrics"].values():
        assert set(per_target) == {"path1", "path2"}
    assert study["clamped"] >= 0
    assert len(study["series"]["noised"]["path1"]) == len(train)
