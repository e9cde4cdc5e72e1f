"""Canned benchmark experiments, runnable end-to-end from the CLI.

Each preset fixes every constant of one experiment — process model, fault
class, chart settings, seeds — and produces plot-ready CSVs plus a summary
table.  Five presets are shipped:

  num-gaussian   4-d AR(1) benchmark, Gaussian noise, F-limit charts,
                 full method roster (owma, ma, pca, ma-pca, dpca).
  num-uniform    same process with uniform noise and empirical limits.
  cstr-gaussian  closed-loop CSTR with intermittent feed-temperature
                 disturbances (owma vs ma).
  cstr-uniform   CSTR with uniform process noise.
  cstr-tau1      CSTR stress case with one-sample fault pulses, monitored
                 at W = 10 and W = 40.
"""

from pathlib import Path

import numpy as np

from . import baselines, fileio
from .detectability import (FaultEpisode, FaultProfile, FaultSchedule,
                            schedule_from_profile, verdict)
from .detection import StatisticSeries, evaluate, monitor, train_chart
from .simulators import (AR1Config, CSTRConfig, disturbance_from_schedule,
                         inject_faults, sample_training_sets, simulate_ar1,
                         simulate_cstr)
from .stationary_model import estimate_autocovariance
from .weight_solver import fixed_point_solve

# 4-d AR(1) benchmark constants
AR1_XI = np.array([0.0319, -0.2740, 0.9611, -0.0098])
AR1_F_LB = {"gaussian": 0.42, "uniform": 0.105}
AR1_TAU_O = 15
AR1_TAU_R = 20
AR1_N_SETS = 5000
AR1_HORIZON = 800
AR1_FAULT_START = 401

# CSTR benchmark constants (feed-temperature disturbance, K)
CSTR_F_LB = 2.5
CSTR_TAU = 10
CSTR_N_SETS = 2000
CSTR_HORIZON = 700
CSTR_FAULT_START = 401
# The PI control law makes the manipulated variables near-linear functions
# of the sampled outputs, so the block covariance of closed-loop CSTR data
# is numerically rank deficient; a small ridge restores positive
# definiteness without visibly biasing the weights.
CSTR_RIDGE = 1e-6

ALPHA = 0.01
DEFAULT_W = 10
BASELINE_FIT_SAMPLES = 50000

PRESET_NAMES = ("num-gaussian", "num-uniform", "cstr-gaussian",
                "cstr-uniform", "cstr-tau1")


def ar1_profile(noise_kind="gaussian"):
    return FaultProfile(xi=AR1_XI, f_lb=AR1_F_LB[noise_kind],
                        tau_o_lb=AR1_TAU_O, tau_r_lb=AR1_TAU_R)


def cstr_profile():
    return FaultProfile(xi=np.array([0.0, 0.0, 1.0, 0.0]), f_lb=CSTR_F_LB,
                        tau_o_lb=CSTR_TAU, tau_r_lb=CSTR_TAU)


def ar1_training(noise_kind="gaussian", W=DEFAULT_W, N=AR1_N_SETS, seed=1,
                 gap=None):
    config = AR1Config(noise_kind=noise_kind)
    gap = gap if gap is not None else 10 * W
    return sample_training_sets(
        lambda n, s: simulate_ar1(config, n, s), N, W, gap, seed)


def cstr_training(config=None, W=DEFAULT_W, N=CSTR_N_SETS, seed=1,
                  gap=None):
    config = config or CSTRConfig()
    gap = gap if gap is not None else 10 * W
    return sample_training_sets(
        lambda n, s: simulate_cstr(config, n, s), N, W, gap, seed)


def owma_chart(training, xi, alpha=ALPHA, limit_kind="f", ridge=0.0):
    """Solve for optimal weights on the training data, then train."""
    table = estimate_autocovariance(training)
    report = fixed_point_solve(table, xi, training.W, ridge=ridge)
    chart = train_chart(training, report.weight, alpha=alpha,
                        limit_kind=limit_kind)
    return chart, report


def _episode_stats(metrics):
    delays = metrics.detection_delay
    return {
        "episodes": len(metrics.episode_table),
        "detected": int((delays >= 0).sum()),
        "cleared": int((metrics.clearance_delay >= 0).sum()),
        "far": metrics.far,
    }


def _pca_series(values, limit, t0):
    return StatisticSeries(t=np.arange(t0, t0 + len(values)),
                           value=np.asarray(values), limit=float(limit))


def _summary_row(method, statistic, stats_per_seed):
    n = len(stats_per_seed)
    return {
        "method": method,
        "statistic": statistic,
        "seeds": n,
        "far_mean": sum(s["far"] for s in stats_per_seed) / n,
        "episodes": sum(s["episodes"] for s in stats_per_seed),
        "detected": sum(s["detected"] for s in stats_per_seed),
        "cleared": sum(s["cleared"] for s in stats_per_seed),
    }


def write_summary(path, rows):
    keys = list(rows[0].keys())
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(
                f"{row[k]:.6f}" if isinstance(row[k], float) else str(row[k])
                for k in keys) + "\n")


def run_numerical(out_dir, noise_kind="gaussian", n_seeds=20, base_seed=100,
                  W=DEFAULT_W, ridge=None):

    """AR(1) benchmark: OWMA vs MA charts plus the PCA-family baselines."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ridge = 0.0 if ridge is None else ridge
    config = AR1Config(noise_kind=noise_kind)
    profile = ar1_profile(noise_kind)
    limit_kind = "f" if noise_kind == "gaussian" else "empirical"

    training = ar1_training(noise_kind, W=W)
    chart, report = owma_chart(training, profile.xi, limit_kind=limit_kind,
                               ridge=ridge)
    ma_chart = baselines.ma_tcc(training, alpha=ALPHA,
                                limit_kind=limit_kind)
    fileio.write_weights(out / "weights.csv", report)

    with_baselines = noise_kind == "gaussian"
    if with_baselines:
        fit_run = simulate_ar1(config, BASELINE_FIT_SAMPLES, seed=7)
        pca = baselines.pca_fit(fit_run, cpv=0.95, alpha=ALPHA)
        dpca1 = baselines.dpca_fit(fit_run, lag=1, cpv=0.99, alpha=ALPHA)
        dpca9 = baselines.dpca_fit(fit_run, lag=9, cpv=0.99, alpha=ALPHA)

    per_method = {}
    for rep in range(n_seeds):
        seed = base_seed + rep
        schedule = schedule_from_profile(profile, AR1_HORIZON,
                                         seed=seed + 5000,
                                         start=AR1_FAULT_START)
        clean = simulate_ar1(config, AR1_HORIZON, seed=seed)
        test = inject_faults(clean, schedule)
        runs = {
            "owma": monitor(test, chart),
            "ma": monitor(test, ma_chart),
        }
        if with_baselines:
            t2, q = baselines.pca_scores(pca, test)
            runs["pca@t2"] = _pca_series(t2, pca.t2_limit, 1)
            runs["pca@q"] = _pca_series(q, pca.q_limit, 1)
            mp = baselines.ma_pca(pca, test, W)
            runs["ma-pca@t2"] = _pca_series(mp.t2, mp.t2_limit, W)
            runs["ma-pca@q"] = _pca_series(mp.q, mp.q_limit, W)
            for name, model in (("dpca1", dpca1), ("dpca9", dpca9)):
                t2, q = baselines.dpca_scores(model, test)
                runs[f"{name}@t2"] = _pca_series(t2, model.pca.t2_limit,
                                                 model.lag + 1)
                runs[f"{name}@q"] = _pca_series(q, model.pca.q_limit,
                                                model.lag + 1)
        for key, series in runs.items():
            metrics = evaluate(series, schedule)
            per_method.setdefault(key, []).append(_episode_stats(metrics))
        if rep == 0:
            fileio.write_schedule(out / "schedule.csv", schedule,
                                  p=training.p)
            fileio.write_observations(out / "test.csv", test)
            fileio.write_statistics(out / "owma_statistics.csv",
                                    runs["owma"])
            fileio.write_statistics(out / "ma_statistics.csv", runs["ma"])
            fileio.write_metrics(out / "owma_metrics.csv",
                                 evaluate(runs["owma"], schedule))
            fileio.write_metrics(out / "ma_metrics.csv",
                                 evaluate(runs["ma"], schedule))

    rows = []
    for key, stats in per_method.items():
        method, _, statistic = key.partition("@")
        rows.append(_summary_row(method, statistic or "t2", stats))
    v = verdict(profile, chart)
    rows.append({"method": "owma-verdict", "statistic": "g-detectable",
                 "seeds": n_seeds, "far_mean": v.margin,
                 "episodes": int(v.g_detectable), "detected": "",
                 "cleared": ""})
    write_summary(out / "summary.csv", rows)
    return rows


def run_cstr(out_dir, noise_kind="gaussian", n_seeds=20, base_seed=300,
             W=DEFAULT_W, ridge=None):
    """CSTR benchmark: intermittent feed-temperature disturbances."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ridge = CSTR_RIDGE if ridge is None else ridge
    config = CSTRConfig(noise_kind=noise_kind)
    profile = cstr_profile()
    limit_kind = "f" if noise_kind == "gaussian" else "empirical"

    training = cstr_training(config, W=W)
    chart, report = owma_chart(training, profile.xi, limit_kind=limit_kind,
                               ridge=ridge)
    ma_chart = baselines.ma_tcc(training, alpha=ALPHA,
                                limit_kind=limit_kind)
    fileio.write_weights(out / "weights.csv", report)

    per_method = {}
    for rep in range(n_seeds):
        seed = base_seed + rep
        schedule = schedule_from_profile(profile, CSTR_HORIZON,
                                         seed=seed + 5000,
                                         start=CSTR_FAULT_START)
        trace = disturbance_from_schedule(schedule, CSTR_HORIZON)
        test = simulate_cstr(config, CSTR_HORIZON, seed=seed,
                             tf_disturbance=trace)
        runs = {"owma": monitor(test, chart), "ma": monitor(test, ma_chart)}
        for key, series in runs.items():
            metrics = evaluate(series, schedule)
            per_method.setdefault(key, []).append(_episode_stats(metrics))
        if rep == 0:
            fileio.write_schedule(out / "schedule.csv", schedule,
                                  p=training.p)
            fileio.write_observations(out / "test.csv", test)
            fileio.write_statistics(out / "owma_statistics.csv",
                                    runs["owma"])
            fileio.write_metrics(out / "owma_metrics.csv",
                                 evaluate(runs["owma"], schedule))

    rows = [_summary_row(m, "t2", s) for m, s in per_method.items()]
    write_summary(out / "summary.csv", rows)
    return rows


def tau1_schedule(horizon=CSTR_HORIZON, seed=43, start=CSTR_FAULT_START,
                  f_lb=CSTR_F_LB, mean_excess=0.3):
    """One-sample pulses every other sample from `start` to the horizon."""
    rng = np.random.default_rng(seed)
    xi = np.array([0.0, 0.0, 1.0, 0.0])
    episodes = []
    k = start
    while k + 1 <= horizon:
        f = f_lb * (1 + rng.exponential(mean_excess))
        episodes.append(FaultEpisode(mu=k, nu=k + 1, f=f, xi=xi))
        k += 2
    return FaultSchedule(episodes=episodes, horizon=horizon)


def run_cstr_tau1(out_dir, n_seeds=1, base_seed=77, ridge=None):
    """Stress case: one-sample pulses, W = 10 vs W = 40.

    With pulses shorter than the window no worst-case guarantee exists;
    the long window trades detection delay for sensitivity and removes
    the missed alarms once its window has filled with the pulse train.
    """
    ridge = CSTR_RIDGE if ridge is None else ridge
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = CSTRConfig()
    xi = np.array([0.0, 0.0, 1.0, 0.0])

    charts = {}
    for W, seed in ((10, 1), (40, 2)):
        training = cstr_training(config, W=W, seed=seed)
        charts[W], report = owma_chart(training, xi, ridge=ridge)
        fileio.write_weights(out / f"weights_w{W}.csv", report)

    rows = []
    for rep in range(n_seeds):
        seed = base_seed + rep
        schedule = tau1_schedule(seed=43 + rep)
        trace = disturbance_from_schedule(schedule, CSTR_HORIZON)
        test = simulate_cstr(config, CSTR_HORIZON, seed=seed,
                             tf_disturbance=trace)
        pulses = [ep.mu for ep in schedule.episodes]
        for W, chart in charts.items():
            series = monitor(test, chart)
            alarm_at = dict(zip(series.t, series.alarm))
            missed = [mu for mu in pulses if not alarm_at[mu]]
            # count misses only once the window holds the pulse train
            settled = CSTR_FAULT_START + 3 * (W // 2)
            missed_settled = [mu for mu in missed if mu >= settled]
            rows.append({
                "method": f"owma-w{W}", "statistic": "t2", "seeds": 1,
                "far_mean": float(series.alarm[
                    series.t < CSTR_FAULT_START].mean()),
                "pulses": len(pulses),
                "missed": len(missed),
                "missed_after_fill": len(missed_settled),
            })
            if rep == 0:
                fileio.write_statistics(
                    out / f"owma_w{W}_statistics.csv", series)
        if rep == 0:
            fileio.write_schedule(out / "schedule.csv", schedule, p=4)
            fileio.write_observations(out / "test.csv", test)
    write_summary(out / "summary.csv", rows)
    return rows


def run_preset(name, out_dir, n_seeds=None, ridge=None):
    if name == "num-gaussian":
        return run_numerical(out_dir, "gaussian", n_seeds or 20,
                             ridge=ridge)
    if name == "num-uniform":
        return run_numerical(out_dir, "uniform", n_seeds or 20, ridge=ridge)
    if name == "cstr-gaussian":
        return run_cstr(out_dir, "gaussian", n_seeds or 5, ridge=ridge)
    if name == "cstr-uniform":
        return run_cstr(out_dir, "uniform", n_seeds or 5, ridge=ridge)
    if name == "cstr-tau1":
        return run_cstr_tau1(out_dir, n_seeds or 1, ridge=ridge)
    raise KeyError(name)
