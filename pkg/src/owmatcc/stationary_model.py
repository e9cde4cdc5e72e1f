"""Set-structured stationary training data and covariance estimation.

Training data are N independent sets of W consecutive p-dimensional
observations.  Within a set, index j counts backwards in time: j=1 is the
newest sample, j=W the oldest.  Arrays store each set in chronological
order, so sets[i, -1] is the j=1 sample of set i.

From the sets we estimate the W x W grid of lagged cross-covariance blocks

    Rhat[l, j] = 1/(N-1) * sum_i (X^l_i - Xbar^l)(X^j_i - Xbar^j)^T

which satisfies the finite-sample identity Rhat[l, j] = Rhat[j, l]^T and,
for a weakly stationary process, estimates the lag-(l-j) autocovariance.
The assembled pk x pk block matrix Gamma^k and the weighted covariance
S(a) = sum_i sum_j a_i a_j Rhat[i, j] are what the weight solver and the
control chart consume.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularCovarianceError

# relative eigenvalue floor below which Gamma / S are declared singular
PD_RTOL = 1e-10


@dataclass(frozen=True)
class TrainingSet:
    """N sets of W consecutive observations, chronological within a set."""

    sets: np.ndarray  # (N, W, p), sets[:, -1, :] is the newest sample (j=1)

    def __post_init__(self):
        arr = np.asarray(self.sets, dtype=float)
        if arr.ndim != 3:
            raise ValueError("sets must be a (N, W, p) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("training data contain non-finite values")
        object.__setattr__(self, "sets", arr)

    @property
    def N(self):
        return self.sets.shape[0]

    @property
    def W(self):
        return self.sets.shape[1]

    @property
    def p(self):
        return self.sets.shape[2]

    def window(self, w):
        """Restrict every set to its w newest samples."""
        if not 1 <= w <= self.W:
            raise ValueError(f"window {w} outside [1, {self.W}]")
        return TrainingSet(self.sets[:, self.W - w:, :])


@dataclass(frozen=True)
class AutocovarianceTable:
    """Grid of lagged blocks; blocks[l-1, j-1] = Rhat_{lj} (1-based l, j)."""

    blocks: np.ndarray     # (W, W, p, p)
    set_means: np.ndarray  # (W, p), set_means[j-1] = Xbar^j

    @property
    def W(self):
        return self.blocks.shape[0]

    @property
    def p(self):
        return self.blocks.shape[2]

    def head(self, w):
        """Sub-table for the first w positions (newest w samples)."""
        if not 1 <= w <= self.W:
            raise ValueError(f"order {w} outside [1, {self.W}]")
        return AutocovarianceTable(self.blocks[:w, :w], self.set_means[:w])

    def lag(self, m):
        """Average estimate of the lag-m autocovariance, 0 <= m < W."""
        W = self.W
        if not 0 <= m < W:
            raise ValueError(f"lag {m} outside [0, {W})")
        # Rhat_{lj} with l - j = m estimates R_m = Cov(X_t, X_{t+m})
        idx = np.arange(W - m)
        return self.blocks[idx + m, idx].mean(axis=0)


@dataclass(frozen=True)
class BlockCovariance:
    """Assembled pk x pk matrix Gamma^k with its spectral summary."""

    gamma: np.ndarray
    k: int
    p: int
    lambda_min: float
    lambda_max: float
    positive_definite: bool
    ridge: float = 0.0

    @property
    def cond_estimate(self):
        if self.lambda_min <= 0:
            return np.inf
        return self.lambda_max / self.lambda_min


@dataclass(frozen=True)
class WeightedCovariance:
    matrix: np.ndarray  # (p, p)
    weight: np.ndarray  # (W,)


def estimate_autocovariance(training):
    """Estimate the full W x W grid of lagged cross-covariance blocks."""
    sets = training.sets
    N = training.N
    if N < 2:
        raise ValueError("need at least two training sets")
    # Y[j-1] = the j-th newest sample of every set, shape (W, N, p)
    Y = sets[:, ::-1, :].transpose(1, 0, 2)
    means = Y.mean(axis=1)
    C = Y - means[:, None, :]
    blocks = np.einsum("lni,jnk->ljik", C, C) / (N - 1)
    return AutocovarianceTable(blocks=blocks, set_means=means)


def assemble_block_covariance(table, k, ridge=0.0):
    """Materialize Gamma^k from the block grid.

    Asymmetry beyond 1e-10 relative is a hard error; below that the matrix
    is symmetrized exactly so eigen-routines can rely on symmetry.  With
    ridge > 0, ridge * I is added (escape hatch for near-singular data; the
    amount is recorded on the result).
    """
    if not 1 <= k <= table.W:
        raise ValueError(f"order {k} outside [1, {table.W}]")
    p = table.p
    gamma = table.blocks[:k, :k].transpose(0, 2, 1, 3).reshape(k * p, k * p)
    scale = np.abs(gamma).max()
    defect = np.abs(gamma - gamma.T).max()
    if scale > 0 and defect > 1e-10 * scale:
        raise ValueError(f"Gamma^{k} asymmetry {defect:.3e} exceeds tolerance")
    gamma = (gamma + gamma.T) / 2
    if ridge:
        gamma = gamma + ridge * np.eye(k * p)
    eig = np.linalg.eigvalsh(gamma)
    lmin, lmax = float(eig[0]), float(eig[-1])
    return BlockCovariance(
        gamma=gamma,
        k=k,
        p=p,
        lambda_min=lmin,
        lambda_max=lmax,
        positive_definite=lmin > PD_RTOL * max(lmax, 0.0),
        ridge=ridge,
    )


def weighted_covariance(gamma, a):
    """S(a) via the Kronecker identity (a (x) I_p)^T Gamma (a (x) I_p)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (gamma.k,):
        raise ValueError(f"weight length {a.shape} does not match k={gamma.k}")
    if not np.all(np.isfinite(a)) or np.all(a == 0):
        raise ValueError("weight must be finite and nonzero")
    M = np.kron(a[:, None], np.eye(gamma.p))
    S = M.T @ gamma.gamma @ M
    S = (S + S.T) / 2
    eig = np.linalg.eigvalsh(S)
    if eig[0] <= PD_RTOL * max(eig[-1], 0.0):
        raise SingularCovarianceError(
            f"weighted covariance singular (lambda_min={eig[0]:.3e})",
            lambda_min=float(eig[0]),
        )
    return WeightedCovariance(matrix=S, weight=a)


def weighted_covariance_blocks(blocks, a):
    """S(a) as the explicit double sum over the block grid (no PD check)."""
    return np.einsum("i,j,ijkl->kl", a, a, blocks)


def weighted_means(training, a):
    """Per-set weighted means and their grand mean.

    Weight a_j multiplies the j-th newest sample of each set, so a[0] acts
    on sets[:, -1, :].
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (training.W,):
        raise ValueError("weight length does not match window")
    x_tilde_i = np.einsum("j,njp->np", a, training.sets[:, ::-1, :])
    return x_tilde_i, x_tilde_i.mean(axis=0)
