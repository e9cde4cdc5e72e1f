"""Benchmark process simulators with intermittent-fault injection.

Two processes are shipped:

  - a 4-dimensional autocorrelated AR(1) benchmark: a 2-d output state z
    driven by a 2-d AR(1) input u, measured as y = z + v and monitored as
    X = [y; u];
  - a non-isothermal CSTR (A -> B, cooling jacket) under two PI loops,
    sampled every 3 s, where an intermittent feed-temperature disturbance
    is absorbed by the coolant temperature T_c.

Inner integration loops are numba-compiled: training a single chart needs
on the order of 10^5..10^6 sequential samples.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DivergenceError
from .stationary_model import TrainingSet

DEFAULT_BURN_IN = 1000


@njit(cache=True)
def _linear_loop(m, Az, Bz, Au, Bu, w):
    u = np.zeros((m, 2))
    z = np.zeros((m, 2))
    for k in range(1, m):
        u[k] = Au @ u[k - 1] + Bu @ w[k - 1]
        z[k] = Az @ z[k - 1] + Bz @ u[k - 1]
    return z, u


@njit(cache=True)
def _var1_loop(m, A, e):
    p = A.shape[0]
    x = np.zeros((m, p))
    for k in range(1, m):
        x[k] = A @ x[k - 1] + e[k - 1]
    return x


@dataclass(frozen=True)
class AR1Config:
    Az: np.ndarray = field(default_factory=lambda: np.array(
        [[0.118, -0.191], [0.847, 0.264]]))
    Bz: np.ndarray = field(default_factory=lambda: np.array(
        [[1.0, 2.0], [3.0, -4.0]]))
    Au: np.ndarray = field(default_factory=lambda: np.array(
        [[0.811, -0.226], [0.477, 0.415]]))
    Bu: np.ndarray = field(default_factory=lambda: np.array(
        [[0.193, 0.689], [-0.320, -0.749]]))
    noise_kind: str = "gaussian"   # "gaussian" | "uniform"
    w_scale: float = 1.0           # multiplies the base process noise
    v_scale: float = 1.0           # multiplies the base measurement noise

    def __post_init__(self):
        for name in ("Az", "Au"):
            A = getattr(self, name)
            if np.abs(np.linalg.eigvals(A)).max() >= 1:
                raise ValueError(f"{name} is not a stable state matrix")
        if self.noise_kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")


def _ar1_noise(config, rng, m):
    # base scales: unit-variance w, variance-0.1 v (Gaussian case);
    # uniform case draws U(-0.5, 0.5) and sqrt(0.1) * U(-0.5, 0.5)
    if config.noise_kind == "gaussian":
        w = rng.standard_normal((m, 2))
        v = np.sqrt(0.1) * rng.standard_normal((m, 2))
    else:
        w = rng.uniform(-0.5, 0.5, (m, 2))
        v = np.sqrt(0.1) * rng.uniform(-0.5, 0.5, (m, 2))
    return config.w_scale * w, config.v_scale * v


def simulate_ar1(config, n, seed, burn_in=DEFAULT_BURN_IN):
    """n samples of the 4-d benchmark X = [y1, y2, u1, u2]."""
    rng = np.random.default_rng(seed)
    m = n + burn_in
    w, v = _ar1_noise(config, rng, m)
    z, u = _linear_loop(m, config.Az, config.Bz, config.Au, config.Bu, w)
    X = np.concatenate([z + v, u], axis=1)
    return X[burn_in:]


def simulate_var1(A, noise_chol, n, seed, burn_in=DEFAULT_BURN_IN):
    """Generic stable VAR(1) x_k = A x_{k-1} + e_k, e ~ N(0, L L^T)."""
    A = np.asarray(A, dtype=float)
    if np.abs(np.linalg.eigvals(A)).max() >= 1:
        raise ValueError("state matrix is not stable")
    rng = np.random.default_rng(seed)
    m = n + burn_in
    e = rng.standard_normal((m, A.shape[0])) @ np.asarray(noise_chol).T
    return _var1_loop(m, A, e)[burn_in:]


@njit(cache=True)
def _cstr_loop(n, h, substeps, v, tf_dist, params, ss, gains, rk4):
    V, CAf, Tf0, k0, EoverR, dHrc, uac = params
    CAs, Ts, Tcs, qs = ss
    KcT, tauIT, Kcq, tauIq = gains
    CA, T = CAs, Ts
    iT = 0.0
    iC = 0.0
    dt = h * substeps
    out = np.empty((n, 4))
    for k in range(n):
        # PI loops, updated once per sample: Tc regulates T, q regulates CA
        eT = Ts - T
        eC = CAs - CA
        iT += eT * dt
        iC += eC * dt
        Tc = Tcs + KcT * (eT + iT / tauIT)
        q = qs + Kcq * (eC + iC / tauIq)
        Tf = Tf0 + tf_dist[k]
        v1 = v[k, 0]
        v2 = v[k, 1]
        for _ in range(substeps):
            kr = k0 * np.exp(-EoverR / T)
            d1c = q / V * (CAf - CA) - kr * CA + v1
            d1t = q / V * (Tf - T) - dHrc * kr * CA + uac * (Tc - T) + v2
            if not rk4:
                CA += h * d1c
                T += h * d1t
                continue
            CA2 = CA + 0.5 * h * d1c
            T2 = T + 0.5 * h * d1t
            kr = k0 * np.exp(-EoverR / T2)
            d2c = q / V * (CAf - CA2) - kr * CA2 + v1
            d2t = q / V * (Tf - T2) - dHrc * kr * CA2 + uac * (Tc - T2) + v2
            CA3 = CA + 0.5 * h * d2c
            T3 = T + 0.5 * h * d2t
            kr = k0 * np.exp(-EoverR / T3)
            d3c = q / V * (CAf - CA3) - kr * CA3 + v1
            d3t = q / V * (Tf - T3) - dHrc * kr * CA3 + uac * (Tc - T3) + v2
            CA4 = CA + h * d3c
            T4 = T + h * d3t
            kr = k0 * np.exp(-EoverR / T4)
            d4c = q / V * (CAf - CA4) - kr * CA4 + v1
            d4t = q / V * (Tf - T4) - dHrc * kr * CA4 + uac * (Tc - T4) + v2
            CA += h / 6 * (d1c + 2 * d2c + 2 * d3c + d4c)
            T += h / 6 * (d1t + 2 * d2t + 2 * d3t + d4t)
        out[k, 0] = CA
        out[k, 1] = T
        out[k, 2] = Tc
        out[k, 3] = q
    return out


@dataclass(frozen=True)
class CSTRConfig:
    # physical parameters (L, mol, K, min, J)
    V: float = 100.0
    CAf: float = 1.0
    Tf: float = 350.0
    k0: float = 7.2e10
    EoverR: float = 8750.0
    dH: float = -5.0e4
    rho: float = 1000.0
    Cp: float = 0.239
    UA: float = 5.0e4
    # setpoints; flow and coolant steady states are solved exactly
    CA_sp: float = 0.5
    T_sp: float = 350.0
    # PI gains: Tc regulates T, q regulates CA
    KcT: float = 8.0
    tauIT: float = 0.3
    Kcq: float = 150.0
    tauIq: float = 0.5
    # timing: 3 s sampling, RK4 at sampling_interval / substeps
    sampling_minutes: float = 0.05
    substeps: int = 10
    method: str = "rk4"            # "rk4" | "euler"
    # process noise on the two ODEs, piecewise constant per sample
    noise_std: tuple = (0.08, 0.08)
    noise_kind: str = "gaussian"   # "gaussian" | "uniform"

    def __post_init__(self):
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.noise_kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")
        if self.substeps < 1 or self.sampling_minutes <= 0:
            raise ValueError("invalid integration timing")

    @property
    def dHrc(self):
        return self.dH / (self.rho * self.Cp)

    @property
    def uac(self):
        return self.UA / (self.V * self.rho * self.Cp)

    def steady_state(self):
        """Exact (CA, T, Tc, q) equilibrium at the configured setpoints."""
        kss = self.k0 * np.exp(-self.EoverR / self.T_sp)
        q_ss = self.V * kss * self.CA_sp / (self.CAf - self.CA_sp)
        Tc_ss = self.T_sp - (q_ss / self.V * (self.Tf - self.T_sp)
                             - self.dHrc * kss * self.CA_sp) / self.uac
        return np.array([self.CA_sp, self.T_sp, Tc_ss, q_ss])

    def _packed(self):
        params = np.array([self.V, self.CAf, self.Tf, self.k0, self.EoverR,
                           self.dHrc, self.uac])
        gains = np.array([self.KcT, self.tauIT, self.Kcq, self.tauIq])
        return params, self.steady_state(), gains


def simulate_cstr(config, n, seed, tf_disturbance=None,
                  burn_in=DEFAULT_BURN_IN):
    """n samples of the closed-loop CSTR, measured as [CA, T, Tc, q].

    tf_disturbance, when given, is an additive feed-temperature offset per
    (post-burn-in) sample — the fault entry point of this benchmark.
    """
    rng = np.random.default_rng(seed)
    m = n + burn_in
    sv = np.asarray(config.noise_std, dtype=float)
    if config.noise_kind == "gaussian":
        v = rng.standard_normal((m, 2)) * sv
    else:
        # matched variance: U(-0.5, 0.5) has std 1/sqrt(12)
        v = rng.uniform(-0.5, 0.5, (m, 2)) * (sv * np.sqrt(12.0))
    td = np.zeros(m)
    if tf_disturbance is not None:
        td[burn_in:] = np.asarray(tf_disturbance, dtype=float)[:n]
    params, ss, gains = config._packed()
    h = config.sampling_minutes / config.substeps
    out = _cstr_loop(m, h, config.substeps, v, td, params, ss, gains,
                     config.method == "rk4")
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out).all(axis=1))[0])
        raise DivergenceError(
            f"CSTR integration produced non-finite state at sample {bad}; "
            "check controller gains and step size")
    return out[burn_in:]


def inject_faults(series, schedule):
    """Additive injection: X_k + xi_q f_q on each active span [mu, nu)."""
    X = np.array(series, dtype=float)
    for ep in schedule.episodes:
        X[ep.mu - 1:ep.nu - 1] += ep.f * ep.xi
    return X


def disturbance_from_schedule(schedule, n):
    """Per-sample scalar disturbance trace (CSTR feed-temperature target)."""
    d = np.zeros(n)
    for ep in schedule.episodes:
        d[ep.mu - 1:ep.nu - 1] = ep.f
    return d


def sample_training_sets(generator, N, W, gap, seed):
    """N sets of W consecutive samples, `gap` samples discarded between.

    The generator is any callable (n, seed) -> (n, p) array; one long run
    is drawn so within-set dynamics match test data exactly.
    """
    if gap < 1:
        raise ValueError("training sets need a positive separation gap")
    X = np.asarray(generator(N * (W + gap), seed), dtype=float)
    p = X.shape[1]
    return TrainingSet(X.reshape(N, W + gap, p)[:, gap:, :])
