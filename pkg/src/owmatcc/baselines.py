"""Comparison detectors: MA-TCC, PCA, MA-smoothed PCA, and dynamic PCA.

PCA models are fitted on autoscaled data (correlation PCA) by default and
retain the smallest component count reaching the CPV threshold.  T^2 uses
the scaled-F limit, Q the Jackson-Mudholkar normal approximation, both
with an empirical-quantile fallback.

MA-PCA smooths either the T^2/Q statistic series (default; limits follow
from averaging W independent chi-square variates) or the observations
before scoring — the two orderings give visibly different false-alarm
behavior on autocorrelated data, which is the point of the comparison.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .detection import f_limit, train_chart


def ma_tcc(training, alpha=0.01, limit_kind="f"):
    """Equal-weight chart: train_chart with a = 1/W."""
    W = training.W
    return train_chart(training, np.full(W, 1.0 / W), alpha=alpha,
                       limit_kind=limit_kind)


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    scale: np.ndarray       # per-variable std (ones when not autoscaled)
    loadings: np.ndarray    # (p, p) full orthonormal basis
    variances: np.ndarray   # all eigenvalues, descending
    r: int
    t2_limit: float
    q_limit: float
    n: int
    alpha: float


def _jackson_mudholkar(res_var, alpha):
    th1 = res_var.sum()
    th2 = (res_var ** 2).sum()
    th3 = (res_var ** 3).sum()
    if th1 <= 0 or th2 <= 0:
        return 0.0
    h0 = 1 - 2 * th1 * th3 / (3 * th2 ** 2)
    ca = norm.ppf(1 - alpha)
    return float(th1 * (ca * np.sqrt(2 * th2 * h0 ** 2) / th1 + 1
                        + th2 * h0 * (h0 - 1) / th1 ** 2) ** (1 / h0))


def pca_fit(data, cpv=0.95, alpha=0.01, standardize=True):
    """PCA with CPV-based component retention and alpha-level limits."""
    X = np.asarray(data, dtype=float)
    n, p = X.shape
    if n < p:
        raise ValueError("need at least p rows to fit PCA")
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1) if standardize else np.ones(p)
    if np.any(scale == 0):
        raise ValueError("constant variable cannot be autoscaled")
    Z = (X - mean) / scale
    C = Z.T @ Z / (n - 1)
    vals, vecs = np.linalg.eigh(C)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    vals = np.clip(vals, 0.0, None)
    r = int(np.searchsorted(np.cumsum(vals) / vals.sum(), cpv) + 1)
    return PcaModel(mean=mean, scale=scale, loadings=vecs, variances=vals,
                    r=r, t2_limit=f_limit(r, n, alpha),
                    q_limit=_jackson_mudholkar(vals[r:], alpha),
                    n=n, alpha=alpha)


def pca_scores(model, data):
    """(T^2, Q) per row of data under a fitted model."""
    Z = (np.asarray(data, dtype=float) - model.mean) / model.scale
    P = model.loadings[:, :model.r]
    t = Z @ P
    T2 = np.einsum("ij,j,ij->i", t, 1.0 / model.variances[:model.r], t)
    res = Z - t @ P.T
    Q = np.einsum("ij,ij->i", res, res)
    return T2, Q


def ma_smooth(series, W):
    """Sliding equal-weight average; output index i covers input i..i+W-1."""
    if W < 1:
        raise ValueError("window must be at least 1")
    X = np.asarray(series, dtype=float)
    return np.lib.stride_tricks.sliding_window_view(X, W, axis=0).mean(
        axis=-1)


@dataclass(frozen=True)
class MaPcaResult:
    t2: np.ndarray
    q: np.ndarray
    t2_limit: float
    q_limit: float

    @property
    def t2_alarm(self):
        return self.t2 > self.t2_limit

    @property
    def q_alarm(self):
        return self.q > self.q_limit


def ma_pca(model, data, W, mode="statistic"):
    """Moving-average PCA scores of a test sequence.

    mode="statistic" scores every sample, then averages W consecutive
    T^2 (resp. Q) values; limits are chi2(W r)/W and the Box
    approximation g chi2(W h)/W of the averaged residual statistic.
    mode="observation" averages W consecutive (autoscaled) observations
    first, scores the smoothed vector, and scales by W against the plain
    single-sample limits.
    """
    alpha = model.alpha
    r = model.r
    if mode == "statistic":
        T2, Q = pca_scores(model, data)
        res_var = model.variances[r:]
        th1, th2 = res_var.sum(), (res_var ** 2).sum()
        g = th2 / th1 if th1 > 0 else 1.0
        h = th1 ** 2 / th2 if th2 > 0 else 1.0
        return MaPcaResult(
            t2=ma_smooth(T2, W),
            q=ma_smooth(Q, W),
            t2_limit=float(chi2.ppf(1 - alpha, W * r) / W),
            q_limit=float(g * chi2.ppf(1 - alpha, W * h) / W),
        )
    if mode != "observation":
        raise ValueError(f"unknown MA-PCA mode {mode!r}")
    Z = (np.asarray(data, dtype=float) - model.mean) / model.scale
    sm = ma_smooth(Z, W)
    P = model.loadings[:, :r]
    t = sm @ P
    T2 = W * np.einsum("ij,j,ij->i", t, 1.0 / model.variances[:r], t)
    res = sm - t @ P.T
    Q = W * np.einsum("ij,ij->i", res, res)
    return MaPcaResult(t2=T2, q=Q, t2_limit=model.t2_limit,
                       q_limit=model.q_limit)


@dataclass(frozen=True)
class DpcaModel:
    lag: int
    pca: PcaModel


def lag_stack(data, lag):
    """[x_k; x_{k-1}; ...; x_{k-lag}] rows, newest block first."""
    X = np.asarray(data, dtype=float)
    n = len(X)
    if n <= lag:
        raise ValueError("series shorter than the lag")
    return np.concatenate([X[lag - i:n - i] for i in range(lag + 1)],
                          axis=1)


def dpca_fit(data, lag, cpv=0.99, alpha=0.01, standardize=True):
    return DpcaModel(lag=lag,
                     pca=pca_fit(lag_stack(data, lag), cpv=cpv, alpha=alpha,
                                 standardize=standardize))


def dpca_scores(model, data):
    return pca_scores(model.pca, lag_stack(data, model.lag))
