"""Trained control charts and the weighted moving-average T^2 statistic.

A chart holds the weight vector a, the reference mean of the weighted
window average, its covariance S (Cholesky-factored once), and a control
limit.  At time k >= W the monitored statistic is

    T2_k = (xw_k - x_ref)^T S^{-1} (xw_k - x_ref),

where xw_k = sum_j a_j X_{k-j+1} (a_1 on the newest sample).  Limits come
from the scaled F quantile (Gaussian case) or from empirical / KDE
quantiles of the training statistic values (distribution-free case).
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, special
from scipy.stats import f as f_dist

from .errors import ConfigError, SingularCovarianceError
from .stationary_model import weighted_means

LIMIT_KINDS = ("f", "empirical", "kde")


@dataclass(frozen=True)
class ControlChart:
    weight: np.ndarray        # (W,)
    x_tilde: np.ndarray       # (p,) reference mean
    s_tilde: np.ndarray       # (p, p)
    cho: tuple                # Cholesky factorization of s_tilde
    limit: float
    limit_kind: str
    alpha: float
    N: int

    @property
    def W(self):
        return len(self.weight)

    @property
    def p(self):
        return len(self.x_tilde)

    @property
    def delta(self):
        return float(np.sqrt(self.limit))


@dataclass(frozen=True)
class StatisticSeries:
    t: np.ndarray       # 1-based sample index, starting at W
    value: np.ndarray
    limit: float

    @property
    def alarm(self):
        return self.value > self.limit


@dataclass(frozen=True)
class DetectionMetrics:
    far: float
    fdr_active: float
    detection_delay: np.ndarray   # per episode, -1 when missed
    clearance_delay: np.ndarray   # per episode, -1 when not cleared
    episode_table: list           # (q, mu, detected_at, nu, cleared_at)

    @property
    def all_detected(self):
        return bool(np.all(self.detection_delay >= 0))

    @property
    def all_cleared(self):
        return bool(np.all(self.clearance_delay >= 0))


def f_limit(p, N, alpha):
    """Scaled F quantile p(N^2-1)/(N(N-p)) * F_{1-alpha}(p, N-p)."""
    if N <= p:
        raise ConfigError("F limit needs more training sets than dimensions")
    return p * (N ** 2 - 1) / (N * (N - p)) * f_dist.ppf(1 - alpha, p, N - p)


def kde_limit(sample, alpha, bandwidth=None):
    """(1-alpha) quantile of a Gaussian-kernel density estimate.

    Silverman's rule 1.06 * sigma * n^(-1/5) unless a bandwidth is given;
    the quantile is found by bisection on the smoothed CDF to 1e-8.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 100:
        raise ValueError("KDE limit needs at least 100 statistic values")
    if not 0 < alpha < 1:
        raise ValueError("alpha outside (0, 1)")
    if bandwidth is None:
        bandwidth = 1.06 * x.std(ddof=1) * x.size ** (-1 / 5)
    if bandwidth <= 0:
        return float(np.quantile(x, 1 - alpha))

    def cdf(q):
        return special.ndtr((q - x) / bandwidth).mean()

    lo = x.min() - 10 * bandwidth
    hi = x.max() + 10 * bandwidth
    return float(optimize.brentq(lambda q: cdf(q) - (1 - alpha), lo, hi,
                                 xtol=1e-8))


def training_statistics(training, a):
    """T^2 of each training set's weighted mean against the pooled fit."""
    x_tilde_i, x_bar = weighted_means(training, a)
    d = x_tilde_i - x_bar
    S = d.T @ d / (training.N - 1)
    cho = _factor(S)
    return np.einsum("np,np->n", d, linalg.cho_solve(cho, d.T).T)


def _factor(S):
    try:
        return linalg.cho_factor(S)
    except linalg.LinAlgError as exc:
        lmin = float(np.linalg.eigvalsh(S)[0])
        raise SingularCovarianceError(
            f"chart covariance singular (lambda_min={lmin:.3e})",
            lambda_min=lmin,
        ) from exc


def train_chart(training, a, alpha=0.01, limit_kind="f"):
    """Fit reference statistics from set-structured training data."""
    if limit_kind not in LIMIT_KINDS:
        raise ConfigError(f"unknown limit kind {limit_kind!r}")
    if not 0 < alpha < 1:
        raise ConfigError("alpha outside (0, 1)")
    a = np.asarray(a, dtype=float)
    x_tilde_i, x_bar = weighted_means(training, a)
    d = x_tilde_i - x_bar
    S = d.T @ d / (training.N - 1)
    cho = _factor(S)
    if limit_kind == "f":
        limit = f_limit(training.p, training.N, alpha)
    else:
        t2 = np.einsum("np,np->n", d, linalg.cho_solve(cho, d.T).T)
        if limit_kind == "empirical":
            # type-7 interpolated order statistic, numpy's default
            limit = float(np.quantile(t2, 1 - alpha))
        else:
            limit = kde_limit(t2, alpha)
    return ControlChart(weight=a, x_tilde=x_bar, s_tilde=S, cho=cho,
                        limit=float(limit), limit_kind=limit_kind,
                        alpha=alpha, N=training.N)


def wma_t2(window, chart):
    """Statistic for one window of the W most recent observations.

    The window is chronological: window[-1] is the newest sample, which
    the first weight entry multiplies.
    """
    window = np.asarray(window, dtype=float)
    if window.shape != (chart.W, chart.p):
        raise ValueError(
            f"window shape {window.shape} != ({chart.W}, {chart.p})")
    d = chart.weight @ window[::-1] - chart.x_tilde
    return float(d @ linalg.cho_solve(chart.cho, d))


def monitor(series, chart):
    """Score every complete window of an observation sequence."""
    X = np.asarray(series, dtype=float)
    n, W = len(X), chart.W
    if n < W:
        raise ValueError("series shorter than the window")
    windows = np.lib.stride_tricks.sliding_window_view(X, W, axis=0)
    # windows[k] is X[k:k+W] with time along the last axis (newest last)
    d = np.einsum("j,ipj->ip", chart.weight[::-1], windows) - chart.x_tilde
    vals = np.einsum("ip,ip->i", d, linalg.cho_solve(chart.cho, d.T).T)
    return StatisticSeries(t=np.arange(W, n + 1), value=vals,
                           limit=chart.limit)


def evaluate(series, schedule, fault_free_end=None):
    """Score a statistic series against a known fault schedule.

    Episodes use 1-based sample indices with active span [mu, nu).  FAR is
    the alarm fraction on t < fault_free_end (default: the first
    appearance).  An appearance counts as detected at the first alarm
    inside its active span; a disappearance as cleared at the first
    non-alarmed t in the following inactive span.
    """
    alarms = series.alarm
    t = series.t
    episodes = list(schedule.episodes)
    horizon = int(t[-1]) + 1
    if fault_free_end is None:
        fault_free_end = episodes[0].mu if episodes else horizon
    pre = t < fault_free_end
    far = float(alarms[pre].mean()) if pre.any() else 0.0

    active = np.zeros(horizon, dtype=bool)
    for ep in episodes:
        active[ep.mu:ep.nu] = True
    act_mask = active[t]
    fdr = float(alarms[act_mask].mean()) if act_mask.any() else 0.0

    det = np.full(len(episodes), -1, dtype=int)
    clr = np.full(len(episodes), -1, dtype=int)
    table = []
    for q, ep in enumerate(episodes):
        span = (t >= ep.mu) & (t < ep.nu)
        hit = np.flatnonzero(span & alarms)
        detected_at = int(t[hit[0]]) if hit.size else -1
        if detected_at >= 0:
            det[q] = detected_at - ep.mu
        next_mu = episodes[q + 1].mu if q + 1 < len(episodes) else horizon
        gap = (t >= ep.nu) & (t < next_mu)
        ok = np.flatnonzero(gap & ~alarms)
        cleared_at = int(t[ok[0]]) if ok.size else -1
        if cleared_at >= 0:
            clr[q] = cleared_at - ep.nu
        table.append((q + 1, ep.mu, detected_at, ep.nu, cleared_at))
    return DetectionMetrics(far=far, fdr_active=fdr, detection_delay=det,
                            clearance_delay=clr, episode_table=table)
