"""Delimited-text readers and writers for every artifact the CLI exchanges.

All files are plain comma-separated text with a header row (weights files
use one value per line plus `#` trailer comments).  Parsers are strict:
a wrong column count or a non-numeric field is a ConfigError.
"""

import configparser

import numpy as np

from .detectability import FaultEpisode, FaultSchedule
from .errors import ConfigError
from .stationary_model import TrainingSet


def _parse_row(line, expected, path, lineno):
    parts = line.rstrip("\n").split(",")
    if len(parts) != expected:
        raise ConfigError(
            f"{path}:{lineno}: expected {expected} columns, got {len(parts)}")
    try:
        return [float(x) for x in parts]
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: non-numeric field") from exc


def write_observations(path, X):
    X = np.asarray(X, dtype=float)
    header = "t," + ",".join(f"x{i+1}" for i in range(X.shape[1]))
    body = np.column_stack([np.arange(1, len(X) + 1), X])
    fmt = ["%d"] + ["%.17g"] * X.shape[1]
    np.savetxt(path, body, fmt=fmt, delimiter=",", header=header,
               comments="")


def read_observations(path):
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].startswith("t,"):
        raise ConfigError(f"{path}: missing observation header")
    p = len(lines[0].split(",")) - 1
    rows = [_parse_row(ln, p + 1, path, i + 2)
            for i, ln in enumerate(lines[1:]) if ln.strip()]
    if not rows:
        raise ConfigError(f"{path}: no observations")
    return np.array(rows)[:, 1:]


def write_training(path, training):
    sets = training.sets
    N, W, p = sets.shape
    with open(path, "w") as fh:
        fh.write("set," + "j," + ",".join(f"x{i+1}" for i in range(p))
                 + "\n")
        for i in range(N):
            for row in range(W):
                j = W - row  # stored chronologically; j counts back in time
                vals = ",".join(f"{v:.17g}" for v in sets[i, row])
                fh.write(f"{i+1},{j},{vals}\n")


def read_training(path):
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].startswith("set,j,"):
        raise ConfigError(f"{path}: missing training header")
    p = len(lines[0].split(",")) - 2
    rows = [_parse_row(ln, p + 2, path, i + 2)
            for i, ln in enumerate(lines[1:]) if ln.strip()]
    if not rows:
        raise ConfigError(f"{path}: no training rows")
    arr = np.array(rows)
    set_ids = arr[:, 0].astype(int)
    N = set_ids.max()
    W = int((set_ids == 1).sum())
    if len(rows) != N * W:
        raise ConfigError(f"{path}: ragged training sets")
    data = arr[:, 2:].reshape(N, W, p)
    j = arr[:W, 1].astype(int)
    if not np.array_equal(j, np.arange(W, 0, -1)):
        raise ConfigError(f"{path}: j must run W..1 within each set")
    return TrainingSet(data)


def write_weights(path, report):
    with open(path, "w") as fh:
        for w in report.weight:
            fh.write(f"{w:.17g}\n")
        fh.write(f"# W={len(report.weight)}\n")
        fh.write(f"# residual={report.residual:.6e}\n")
        fh.write(f"# beta={report.beta_value:.17g}\n")
        fh.write(f"# iterations={report.iterations}\n")
        fh.write(f"# converged={int(report.converged)}\n")


def read_weights(path):
    weights = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                weights.append(float(line))
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: non-numeric weight") from exc
    if not weights:
        raise ConfigError(f"{path}: no weights")
    return np.array(weights)


def write_statistics(path, series):
    with open(path, "w") as fh:
        fh.write("t,value,limit,alarm\n")
        for t, v, al in zip(series.t, series.value, series.alarm):
            fh.write(f"{t},{v:.17g},{series.limit:.17g},{int(al)}\n")


def read_statistics(path):
    from .detection import StatisticSeries
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or lines[0].strip() != "t,value,limit,alarm":
        raise ConfigError(f"{path}: missing statistic header")
    rows = [_parse_row(ln, 4, path, i + 2)
            for i, ln in enumerate(lines[1:]) if ln.strip()]
    if not rows:
        raise ConfigError(f"{path}: empty statistic series")
    arr = np.array(rows)
    return StatisticSeries(t=arr[:, 0].astype(int), value=arr[:, 1],
                           limit=float(arr[0, 2]))


def write_schedule(path, schedule, p):
    with open(path, "w") as fh:
        fh.write("q,mu,nu,f," + ",".join(f"xi_{i+1}" for i in range(p))
                 + "\n")
        for q, ep in enumerate(schedule.episodes, 1):
            xi = ",".join(f"{v:.17g}" for v in ep.xi)
            fh.write(f"{q},{ep.mu},{ep.nu},{ep.f:.17g},{xi}\n")
        fh.write(f"# horizon={schedule.horizon}\n")


def read_schedule(path):
    with open(path) as fh:
        lines = fh.readlines()
    if not lines or not lines[0].startswith("q,mu,nu,f,"):
        raise ConfigError(f"{path}: missing schedule header")
    p = len(lines[0].split(",")) - 4
    horizon = 0
    episodes = []
    for i, ln in enumerate(lines[1:]):
        if ln.startswith("# horizon="):
            horizon = int(ln.split("=", 1)[1])
            continue
        if not ln.strip():
            continue
        row = _parse_row(ln, p + 4, path, i + 2)
        episodes.append(FaultEpisode(mu=int(row[1]), nu=int(row[2]),
                                     f=row[3], xi=np.array(row[4:])))
    if horizon == 0:
        horizon = episodes[-1].nu if episodes else 1
    return FaultSchedule(episodes=episodes, horizon=horizon)


def write_metrics(path, metrics):
    with open(path, "w") as fh:
        fh.write(f"far={metrics.far:.6f}\n")
        fh.write(f"fdr_active={metrics.fdr_active:.6f}\n")
        fh.write(f"episodes={len(metrics.episode_table)}\n")
        fh.write(f"all_detected={int(metrics.all_detected)}\n")
        fh.write(f"all_cleared={int(metrics.all_cleared)}\n")
        fh.write("q,appeared_at,detected_at,disappeared_at,cleared_at\n")
        for row in metrics.episode_table:
            fh.write(",".join(str(x) for x in row) + "\n")


def read_config(path):
    """INI-style experiment configuration."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parser
