import json

import pytest

from nettwin.cli import main
from nettwin.data import write_csv

from conftest import synth_dataset

SMALL_CONFIG = {
    "sweep": {"bw_min": 25, "bw_max": 45, "bw_step": 5,
              "q_min": 50, "q_max": 70, "q_step": 5},
    "flow": {"file_bytes": 300_000},
    "sample_n": 40,
    "test_n": 25,
    "budget_s": 60,
    "preset": "fast",
    "seed": 9,
    "bench": {"n_configs": 30, "repeats": 3},
}


@pytest.fixture()
def config_file(tmp_path):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(SMALL_CONFIG))
    return str(p)


@pytest.fixture()
def data_csv(tmp_path):
    p = tmp_path / "data.csv"
    write_csv(synth_dataset(60, seed=50), p)
    return str(p)


def test_missing_required_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--data", "x.csv"])  # --out missing
    assert exc.value.code == 2
    capsys.readouterr()


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_missing_input_file_exits_3(tmp_path):
    assert main(["eval", "--twin", str(tmp_path / "nope.json"),
                 "--truth", str(tmp_path / "nope.csv")]) == 3


def test_even_filter_window_exits_2(tmp_path, data_csv):
    out = str(tmp_path / "out.csv")
    assert main(["denoise", "--in", data_csv, "--out", out, "--window", "4"]) == 2


def test_malformed_dataset_exits_4(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,real,header\n")
    assert main(["train", "--data", str(bad), "--out", str(tmp_path / "t.json")]) == 4


def test_grid_command(tmp_path, config_file):
    out = tmp_path / "grid.csv"
    assert main(["grid", "--out", str(out), "--sample", "10",
                 "--config", config_file]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bw1_mbps,q1_pkts,bw2_mbps,q2_pkts,lat1_s,lat2_s"
    assert len(lines) == 11


def test_train_predict_eval_noise_denoise(tmp_path, data_csv):
    twin = str(tmp_path / "twin.json")
    lb = str(tmp_path / "lb.json")
    assert main(["train", "--data", data_csv, "--budget", "60",
                 "--preset", "fast", "--seed", "3", "--out", twin,
                 "--leaderboard", lb]) == 0
    lb_doc = json.loads((tmp_path / "lb.json").read_text())
    assert set(lb_doc) == {"path1", "path2"}

    report = str(tmp_path / "eval.json")
    assert main(["eval", "--twin", twin, "--truth", data_csv,
                 "--report", report]) == 0
    rep = json.loads((tmp_path / "eval.json").read_text())
    assert rep["path1"]["accuracy_pct"] > 90

    preds = str(tmp_path / "preds.csv")
    assert main(["predict", "--twin", twin, "--in", data_csv,
                 "--out", preds]) == 0
    assert (tmp_path / "preds.csv").read_text().startswith("bw1_mbps")

    noisy = str(tmp_path / "noisy.csv")
    assert main(["noise", "--in", data_csv, "--out", noisy,
                 "--sigma", "0.1", "--seed", "1"]) == 0
    meta = json.loads((tmp_path / "noisy.csv.meta.json").read_text())
    assert meta["sigma"] == 0.1
    assert meta["rows"] == 60

    clean = str(tmp_path / "clean.csv")
    assert main(["denoise", "--in", noisy, "--out", clean]) == 0
    assert len((tmp_path / "clean.csv").read_text().splitlines()) == 61


def test_pipeline_command_produces_artifacts(tmp_path, config_file):
    out = tmp_path / "run"
    config_before = (tmp_path / "config.json").read_text()
    assert main(["pipeline", "--config", config_file, "--out", str(out)]) == 0
    expected = [
        "config_used.json", "train.csv", "test.csv", "twin.json",
        "leaderboard.json", "eval.json", "noisy.csv", "noisy.csv.meta.json",
        "clean.csv", "quality.json", "bench.json", "summary.txt",
        "twin_raw.json", "twin_noised.json", "twin_cleaned.json",
        "series_raw_path1.csv", "series_noised_path2.csv",
    ]
    for name in expected:
        assert (out / name).exists(), name
    quality = json.loads((out / "quality.json").read_text())
    assert set(quality["variants"]) == {"raw", "noised", "cleaned"}
    summary = (out / "summary.txt").read_text()
    assert "speedup" in summary
    # the pipeline never mutates its inputs
    assert (tmp_path / "config.json").read_text() == config_before
