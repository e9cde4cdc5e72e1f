import numpy as np
import pytest

from owmatcc import FaultEpisode, FaultSchedule, fileio
from owmatcc.cli import main

XI_ARG = "0.0319,-0.2740,0.9611,-0.0098"


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    code = run("simulate", "--process", "ar1", "--train-sets", "400",
               "--window", "5", "--gap", "20", "--n", "150",
               "--seed", "3", "--out", out)
    assert code == 0
    return out


def test_simulate_writes_expected_rows(data_dir):
    train_lines = (data_dir / "train.csv").read_text().splitlines()
    assert len(train_lines) == 400 * 5 + 1
    assert train_lines[0] == "set,j,x1,x2,x3,x4"
    test_lines = (data_dir / "test.csv").read_text().splitlines()
    assert len(test_lines) == 150 + 1


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("simulate", "--train-sets", "50", "--window", "4",
                   "--gap", "10", "--n", "40", "--seed", "9",
                   "--out", out) == 0
    assert (a / "train.csv").read_bytes() == (b / "train.csv").read_bytes()
    assert (a / "test.csv").read_bytes() == (b / "test.csv").read_bytes()


def test_training_roundtrip(data_dir):
    training = fileio.read_training(data_dir / "train.csv")
    assert training.sets.shape == (400, 5, 4)


def test_weights_command(data_dir, tmp_path, capsys):
    code = run("weights", "--train", data_dir / "train.csv",
               "--xi", XI_ARG, "--w", "5", "--out", tmp_path)
    assert code == 0
    w = fileio.read_weights(tmp_path / "weights_w5.csv")
    assert len(w) == 5
    assert w.sum() == pytest.approx(1.0, abs=1e-10)
    assert "W,iterations,converged" in capsys.readouterr().out


def test_weights_range(data_dir, tmp_path):
    code = run("weights", "--train", data_dir / "train.csv",
               "--xi", XI_ARG, "--w-range", "2:4", "--out", tmp_path)
    assert code == 0
    for W in (2, 3, 4):
        assert (tmp_path / f"weights_w{W}.csv").exists()


def test_train_monitor_evaluate_pipeline(data_dir, tmp_path):
    assert run("weights", "--train", data_dir / "train.csv",
               "--xi", XI_ARG, "--w", "5", "--out", tmp_path) == 0
    wfile = tmp_path / "weights_w5.csv"
    assert run("train", "--train", data_dir / "train.csv",
               "--weights", wfile, "--out", tmp_path) == 0
    assert "limit=" in (tmp_path / "chart.txt").read_text()
    assert run("monitor", "--train", data_dir / "train.csv",
               "--weights", wfile, "--test", data_dir / "test.csv",
               "--out", tmp_path) == 0
    stats = fileio.read_statistics(tmp_path / "statistics.csv")
    assert stats.t[0] == 5 and len(stats.t) == 146

    sched = FaultSchedule(
        episodes=[FaultEpisode(mu=60, nu=90, f=1.0,
                               xi=np.array([0, 0, 1.0, 0]))],
        horizon=150)
    fileio.write_schedule(tmp_path / "schedule.csv", sched, p=4)
    assert run("evaluate", "--stats", tmp_path / "statistics.csv",
               "--schedule", tmp_path / "schedule.csv",
               "--out", tmp_path) == 0
    metrics = (tmp_path / "metrics.csv").read_text()
    assert metrics.startswith("far=")
    assert "q,appeared_at,detected_at" in metrics


def test_monitor_ma_flag(data_dir, tmp_path):
    assert run("monitor", "--train", data_dir / "train.csv", "--ma",
               "--test", data_dir / "test.csv", "--out", tmp_path) == 0


def test_detectability_command(data_dir, capsys):
    code = run("detectability", "--train", data_dir / "train.csv",
               "--xi", XI_ARG, "--f", "0.42", "--tau-o", "15",
               "--tau-r", "20")
    assert code == 0
    assert "g_detectable=" in capsys.readouterr().out


def test_detectability_select(data_dir, capsys):
    code = run("detectability", "--train", data_dir / "train.csv",
               "--xi", XI_ARG, "--f", "0.42", "--tau-o", "15",
               "--tau-r", "20", "--select")
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("W,beta,margin")
    assert "# W*=" in out


def test_empty_test_file_is_config_error(data_dir, tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,x1,x2,x3,x4\n")
    assert run("monitor", "--train", data_dir / "train.csv", "--ma",
               "--test", empty) == 2


def test_bad_xi_is_config_error(data_dir):
    assert run("weights", "--train", data_dir / "train.csv",
               "--xi", "not,numbers") == 2


def test_degenerate_training_is_numerical_error(tmp_path):
    # second variable duplicates the first: singular weighted covariance
    rng = np.random.default_rng(1)
    x = rng.standard_normal((200, 3, 1))
    from owmatcc import TrainingSet
    fileio.write_training(tmp_path / "train.csv",
                          TrainingSet(np.concatenate([x, x], axis=2)))
    assert run("weights", "--train", tmp_path / "train.csv",
               "--xi", "1,0") == 3


def test_reproduce_unknown_preset(tmp_path, capsys):
    assert run("reproduce", "no-such-preset", "--out", tmp_path) == 2
    assert "num-gaussian" in capsys.readouterr().err


def test_reproduce_num_uniform_small(tmp_path):
    code = run("reproduce", "num-uniform", "--seeds", "2",
               "--out", tmp_path)
    assert code == 0
    out = tmp_path / "num-uniform"
    for name in ("summary.csv", "weights.csv", "schedule.csv",
                 "owma_statistics.csv", "owma_metrics.csv"):
        assert (out / name).exists()
    summary = (out / "summary.csv").read_text()
    assert "owma" in summary and "ma" in summary
