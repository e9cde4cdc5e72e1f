"""Intermittent-fault model and guaranteed-detectability calculus.

An intermittent fault is a train of rectangular pulses: episode q adds
xi_q * f_q to the observations on the 1-based sample span [mu_q, nu_q).
A fault class is summarized by a direction, a magnitude lower bound, and
lower bounds on active/inactive durations.  Guarantees are worst-case:

  - appearance detectable  iff  ||S^{-1/2} xi f|| > 2 delta  and the window
    fits inside both the previous inactive span and the active span;
  - disappearance detectable  iff  the window fits the inactive span;
  - guaranteed (G) detectable = both.

W# = min of the three duration bounds is the largest window for which the
guarantee calculus applies; the window selector searches 1..W# for the
smallest W whose optimal weight satisfies beta(a*_W) f^2 > 2 delta^2.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .detection import f_limit
from .weight_solver import SolverConfig, fixed_point_solve


@dataclass(frozen=True)
class FaultEpisode:
    mu: int             # appearance sample (1-based, inclusive)
    nu: int             # disappearance sample (exclusive)
    f: float
    xi: np.ndarray

    def __post_init__(self):
        if self.mu >= self.nu:
            raise ValueError("episode must satisfy mu < nu")
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True)
class FaultSchedule:
    episodes: list
    horizon: int

    def __post_init__(self):
        eps = list(self.episodes)
        for prev, cur in zip(eps, eps[1:]):
            if prev.nu > cur.mu:
                raise ValueError("episodes must be ordered and disjoint")
        object.__setattr__(self, "episodes", eps)


@dataclass(frozen=True)
class FaultProfile:
    xi: np.ndarray          # unit direction
    f_lb: float             # magnitude lower bound
    tau_o_lb: int           # active-duration lower bound
    tau_r_lb: int           # inactive-duration lower bound
    tau_r_prev_lb: int = 0  # inactive span before appearance; 0 = tau_r_lb

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        nrm = np.linalg.norm(xi)
        if nrm == 0:
            raise ValueError("fault direction must be nonzero")
        object.__setattr__(self, "xi", xi / nrm)
        if self.f_lb < 0 or self.tau_o_lb < 1 or self.tau_r_lb < 1:
            raise ValueError("invalid fault profile bounds")
        if self.tau_r_prev_lb == 0:
            object.__setattr__(self, "tau_r_prev_lb", self.tau_r_lb)

    @property
    def w_sharp(self):
        return min(self.tau_o_lb, self.tau_r_lb, self.tau_r_prev_lb)


@dataclass(frozen=True)
class DetectabilityVerdict:
    ap_detectable: bool
    dp_detectable: bool
    margin: float           # ||S^{-1/2} xi f|| - 2 delta
    w_sharp: int
    guaranteed_regime: bool  # W <= W#
    reason: str = ""

    @property
    def g_detectable(self):
        return self.ap_detectable and self.dp_detectable


def fault_gain(chart, xi, f):
    """||S^{-1/2} xi f|| for the chart's weighted covariance."""
    xi = np.asarray(xi, dtype=float)
    return abs(f) * float(np.sqrt(xi @ linalg.cho_solve(chart.cho, xi)))


def verdict(profile, chart):
    """Guaranteed-detectability verdict for a fault class under a chart."""
    W = chart.W
    margin = fault_gain(chart, profile.xi, profile.f_lb) - 2 * chart.delta
    w_sharp = profile.w_sharp
    if W > w_sharp:
        return DetectabilityVerdict(
            ap_detectable=False, dp_detectable=False, margin=margin,
            w_sharp=w_sharp, guaranteed_regime=False,
            reason=f"window {W} exceeds W#={w_sharp}: no worst-case "
                   "guarantee (the chart may still alarm in practice)")
    ap = margin > 0 and W <= min(profile.tau_r_prev_lb, profile.tau_o_lb)
    dp = W <= profile.tau_r_lb
    return DetectabilityVerdict(ap_detectable=ap, dp_detectable=dp,
                                margin=margin, w_sharp=w_sharp,
                                guaranteed_regime=True)


@dataclass(frozen=True)
class WindowSelection:
    w_star: int             # 0 when infeasible
    w_sharp: int
    betas: np.ndarray       # beta(a*_W) for W = 1..W#
    margins: np.ndarray     # beta(a*_W) f^2 - 2 delta^2
    weights: list           # optimal weight per W

    @property
    def feasible(self):
        return self.w_star > 0


def select_window(profile, table, alpha, N, config=None, ridge=0.0):
    """Smallest window whose optimal chart guarantees appearance detection.

    Evaluates beta(a*_W) f_lb^2 - 2 delta^2 exhaustively for W = 1..W#
    (delta^2 being the scaled-F limit for the given alpha and N) and picks
    the first strictly positive margin.
    """
    config = config or SolverConfig()
    w_max = min(profile.w_sharp, table.W)
    delta2 = f_limit(table.p, N, alpha)
    betas = np.empty(w_max)
    weights = []
    for W in range(1, w_max + 1):
        rep = fixed_point_solve(table, profile.xi, W, config, ridge=ridge)
        betas[W - 1] = rep.beta_value
        weights.append(rep.weight)
    margins = betas * profile.f_lb ** 2 - 2 * delta2
    qualifying = np.flatnonzero(margins > 0)
    w_star = int(qualifying[0]) + 1 if qualifying.size else 0
    return WindowSelection(w_star=w_star, w_sharp=profile.w_sharp,
                           betas=betas, margins=margins, weights=weights)


def schedule_from_profile(profile, horizon, seed, start=None,
                          mean_excess=0.3):
    """Random fault schedule honoring the profile's lower bounds.

    Durations are bound * (1 + E) and magnitudes f_lb * (1 + E) with E
    exponential of the given mean, so every draw respects its bound.
    Episodes are appended while the active span plus a minimal recovery
    span of tau_r_lb samples still fits before the horizon, so every
    scheduled episode leaves room for its disappearance to be observed.
    Deterministic per seed.
    """
    if horizon <= profile.tau_o_lb + profile.tau_r_prev_lb:
        raise ValueError("horizon too short for one episode")
    rng = np.random.default_rng(seed)
    k = start if start is not None else profile.tau_r_prev_lb + 1
    episodes = []
    while True:
        tau_o = int(np.ceil(profile.tau_o_lb *
                            (1 + rng.exponential(mean_excess))))
        tau_r = int(np.ceil(profile.tau_r_lb *
                            (1 + rng.exponential(mean_excess))))
        f = profile.f_lb * (1 + rng.exponential(mean_excess))
        if k + tau_o + profile.tau_r_lb > horizon + 1:
            break
        episodes.append(FaultEpisode(mu=k, nu=k + tau_o, f=f,
                                     xi=profile.xi))
        k += tau_o + tau_r
    return FaultSchedule(episodes=episodes, horizon=horizon)
