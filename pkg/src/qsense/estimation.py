"""Grid-based Bayesian inference of the oscillator frequency.

The posterior over omega lives on a uniform grid and is carried in log
domain so that many-shot likelihood products cannot underflow. Updates,
point estimation (argmax refined by a local parabola), RMS uncertainty,
and window changes (regrid) are pure functions returning new posteriors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

LOG_FLOOR = -745.0
P_CLAMP = 1e-12

__all__ = [
    "LOG_FLOOR",
    "P_CLAMP",
    "Posterior",
    "Estimate",
    "gaussian_prior",
    "bayes_update",
    "mle",
    "uncertainty",
    "regrid",
]


@dataclass(frozen=True)
class Posterior:
    """Normalized log-domain posterior on a uniform frequency grid."""

    omega_min: float
    omega_max: float
    log_weights: np.ndarray
    n_points: int

    def __post_init__(self):
        if not self.omega_min < self.omega_max:
            raise ValueError(f"need omega_min < omega_max, got [{self.omega_min}, {self.omega_max}]")
        if self.n_points < 64:
            raise ValueError(f"n_points must be >= 64, got {self.n_points}")
        if len(self.log_weights) != self.n_points:
            raise ValueError("log_weights length does not match n_points")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


@dataclass(frozen=True)
class Estimate:
    """Point estimate of omega with its RMS uncertainty."""

    omega_hat: float
    delta_omega: float

    def __post_init__(self):
        if not self.delta_omega > 0:
            raise ValueError(f"delta_omega must be positive, got {self.delta_omega}")


def _normalized(log_weights: np.ndarray) -> np.ndarray:
    lw = log_weights - log_weights.max()
    lw = lw - np.log(np.exp(lw).sum())
    return np.maximum(lw, LOG_FLOOR)


def gaussian_prior(omega0: float, delta_omega0: float, span_sigmas: float,
                   n_points: int) -> Posterior:
    """Gaussian prior on a grid spanning omega0 +- span_sigmas*delta_omega0."""
    if not delta_omega0 > 0:
        raise ValueError(f"delta_omega0 must be positive, got {delta_omega0}")
    if not span_sigmas > 0:
        raise ValueError(f"span_sigmas must be positive, got {span_sigmas}")
    half = span_sigmas * delta_omega0
    grid = np.linspace(omega0 - half, omega0 + half, n_points)
    lw = -((grid - omega0) ** 2) / (2.0 * delta_omega0**2)
    return Posterior(omega0 - half, omega0 + half, _normalized(lw), n_points)


def bayes_update(post: Posterior, p_plus: np.ndarray, n_plus: int,
                 n_minus: int) -> Posterior:
    """Multiply in a batch of binary outcomes with per-node probability p_plus.

    log-weights gain n_plus*log(P+) + n_minus*log(1-P+), then
    renormalize. P+ is clamped to [1e-12, 1-1e-12] before the logs so a
    single contrary outcome at a likelihood node cannot zero the
    posterior. Batches compose associatively.
    """
    p = np.asarray(p_plus, dtype=float)
    if p.shape != (post.n_points,):
        raise ValueError(f"p_plus has shape {p.shape}, grid has {post.n_points} nodes")
    if n_plus < 0 or n_minus < 0:
        raise ValueError("outcome counts must be nonnegative")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("per-node probabilities must lie in [0, 1]")
    pc = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    lw = post.log_weights + n_plus * np.log(pc) + n_minus * np.log1p(-pc)
    return Posterior(post.omega_min, post.omega_max, _normalized(lw), post.n_points)


def mle(post: Posterior) -> float:
    """Maximum of the posterior, refined by a three-point parabola.

    Ties are broken toward the node closest to the grid center, then
    the lower index. A perfectly flat posterior is degenerate; the grid
    center is returned with a warning.
    """
    w = post.weights
    if np.all(w == w[0]):
        warnings.warn("degenerate posterior: all weights equal, returning grid center")
        return 0.5 * (post.omega_min + post.omega_max)
    grid = post.grid
    top = np.flatnonzero(w == w.max())
    if len(top) > 1:
        center = 0.5 * (post.omega_min + post.omega_max)
        i = int(top[np.argmin(np.abs(grid[top] - center))])
    else:
        i = int(top[0])
    omega_hat = grid[i]
    if 0 < i < post.n_points - 1:
        l0, l1, l2 = post.log_weights[i - 1], post.log_weights[i], post.log_weights[i + 1]
        den = l0 - 2.0 * l1 + l2
        if den < 0:
            off = 0.5 * (l0 - l2) / den
            if abs(off) <= 0.5:
                omega_hat = grid[i] + off * post.spacing
    return float(omega_hat)


def uncertainty(post: Posterior, omega_hat: float) -> float:
    """RMS deviation of the posterior about omega_hat, trapezoid weighted.

    A posterior concentrated on a single node is resolution limited;
    the grid-cell RMS dx/sqrt(12) is returned with a warning in that
    case.
    """
    w = post.weights
    coeff = np.ones(post.n_points)
    coeff[0] = coeff[-1] = 0.5
    cw = coeff * w
    den = cw.sum()
    if not den > 0.0:
        raise ValueError("degenerate posterior: zero total weight")
    grid = post.grid
    var = float(np.sum(cw * (grid - omega_hat) ** 2) / den)
    floor = post.spacing / np.sqrt(12.0)
    rms = np.sqrt(var)
    if rms < floor:
        warnings.warn("resolution-limited posterior: RMS below one grid cell")
        return float(floor)
    return float(rms)


def regrid(post: Posterior, center: float, half_width: float,
           n_points: int) -> Posterior:
    """Move the posterior to a new uniform window by log-linear interpolation.

    Mass outside the old grid is set to the log floor; the result is
    renormalized. The new window must overlap the old grid.
    """
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    lo, hi = center - half_width, center + half_width
    if hi <= post.omega_min or lo >= post.omega_max:
        raise ValueError(
            f"new window [{lo}, {hi}] does not overlap grid [{post.omega_min}, {post.omega_max}]"
        )
    new_grid = np.linspace(lo, hi, n_points)
    lw = np.interp(new_grid, post.grid, post.log_weights, left=LOG_FLOOR, right=LOG_FLOOR)
    return Posterior(lo, hi, _normalized(lw), n_points)
