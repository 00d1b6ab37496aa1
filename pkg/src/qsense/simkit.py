"""Monte Carlo harnesses: outcome sampling, ensemble averaging, scans, fits.

Repetitions of the adaptive run are independent given their seeds, so
they execute in a process pool and are merged in repetition order
(deterministic reduction). Trajectories are aligned by step index, not
by time, because step durations are estimate dependent; the mean
cumulative time per step is reported alongside the mean precision.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .information import g_finite, g_sq_mean, g_universal
from .model import interference_factor
from .protocol import STAGE_II, AdaptiveConfig, Trajectory, run_adaptive

__all__ = [
    "ScanResult",
    "AggregateResult",
    "sample_outcomes",
    "resolve_workers",
    "run_repetitions",
    "fringe_scan",
    "gsq_scan",
    "fit_loglog_slope",
]


@dataclass(frozen=True)
class ScanResult:
    """One tabulated curve y(x) with a label."""

    x_values: np.ndarray
    y_values: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.x_values) != len(self.y_values):
            raise ValueError("x and y lengths differ")
        if len(self.x_values) > 1 and np.any(np.diff(self.x_values) <= 0):
            raise ValueError("x grid must be strictly increasing")


@dataclass(frozen=True)
class AggregateResult:
    """Step-aligned ensemble means over repeated adaptive runs.

    stage_column is 2 at a step only when every repetition has entered
    stage (ii) there; mean_n_units, mean_tau, mean_nu average the
    per-step plans. n_common_steps counts the aligned prefix when
    trajectories end at different lengths.
    """

    step_axis: np.ndarray
    mean_delta_omega: np.ndarray
    mean_cumulative_time: np.ndarray
    mean_zeta: np.ndarray
    mean_scaled_alpha: np.ndarray
    n_repetitions: int
    fit_slope: float
    fit_window: tuple[int, int]
    stage_column: np.ndarray
    mean_n_units: np.ndarray
    mean_tau: np.ndarray
    mean_nu: np.ndarray
    n_common_steps: int
    n_aborted: int = 0

    def __post_init__(self):
        n = len(self.step_axis)
        for name in ("mean_delta_omega", "mean_cumulative_time", "mean_zeta",
                     "mean_scaled_alpha", "stage_column", "mean_n_units",
                     "mean_tau", "mean_nu"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from step_axis")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be >= 1")
        lo, hi = self.fit_window
        if not (0 <= lo <= hi < n):
            raise ValueError(f"fit_window {self.fit_window} outside [0, {n})")


def sample_outcomes(p_plus: float, repetitions: int,
                    rng: np.random.Generator) -> tuple[int, int]:
    """Draw binary measurement outcomes: binomial n_plus, remainder n_minus."""
    if not 0.0 <= p_plus <= 1.0:
        raise ValueError(f"p_plus must lie in [0, 1], got {p_plus}")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    n_plus = int(rng.binomial(repetitions, p_plus))
    return n_plus, repetitions - n_plus


def resolve_workers(n_workers: int | None, n_jobs: int) -> int:
    """Worker count from the argument, QSENSE_THREADS, or the CPU count."""
    if n_workers is None:
        env = os.environ.get("QSENSE_THREADS", "").strip()
        if env:
            n_workers = int(env)
        else:
            n_workers = os.cpu_count() or 1
    return max(1, min(n_workers, n_jobs))


def _replace_seed(cfg: AdaptiveConfig, seed: int) -> AdaptiveConfig:
    from dataclasses import replace

    return replace(cfg, seed=seed)


def _run_one(args) -> tuple:
    cfg, seed = args
    traj = run_adaptive(_replace_seed(cfg, seed))
    rec = traj.records
    return (
        np.array([r.plan.stage for r in rec], dtype=np.int64),
        np.array([r.delta_omega_k for r in rec]),
        np.array([r.cumulative_time for r in rec]),
        np.array([r.zeta_k for r in rec]),
        np.array([r.scaled_alpha_k for r in rec]),
        np.array([r.plan.n_units for r in rec], dtype=np.int64),
        np.array([r.plan.tau for r in rec]),
        np.array([r.plan.repetitions for r in rec], dtype=np.int64),
        traj.aborted,
    )


def run_repetitions(cfg: AdaptiveConfig, n_reps: int, master_seed: int,
                    n_workers: int | None = None,
                    fit_tail_fraction: float = 0.6) -> AggregateResult:
    """Average n_reps independent adaptive runs and fit the late-time scaling.

    Per-repetition seeds derive from the master seed by an additive
    split fed through the generator's seed hash, so streams stay
    independent and the whole result is a pure function of
    (cfg, master_seed). The log-log precision-vs-time slope is fitted
    over the trailing fit_tail_fraction of the steps where every
    repetition has reached stage (ii).
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    if not 0.0 < fit_tail_fraction <= 1.0:
        raise ValueError(f"fit_tail_fraction must lie in (0, 1], got {fit_tail_fraction}")
    jobs = [(cfg, master_seed + r) for r in range(n_reps)]
    workers = resolve_workers(n_workers, n_reps)
    if workers == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, jobs, chunksize=max(1, n_reps // (4 * workers))))

    n_common = min(len(res[0]) for res in results)
    if n_common < 1:
        raise ValueError("trajectories contain no recorded steps")
    stg = np.stack([res[0][:n_common] for res in results])
    dw = np.stack([res[1][:n_common] for res in results])
    tt = np.stack([res[2][:n_common] for res in results])
    zt = np.stack([res[3][:n_common] for res in results])
    sa = np.stack([res[4][:n_common] for res in results])
    n_units_arr = np.stack([res[5][:n_common] for res in results])
    tau_arr = np.stack([res[6][:n_common] for res in results])
    nu_arr = np.stack([res[7][:n_common] for res in results])

    mean_dw = dw.mean(axis=0)
    mean_tt = tt.mean(axis=0)
    stage_col = np.where((stg == STAGE_II).all(axis=0), STAGE_II, 1)

    all2 = np.flatnonzero(stage_col == STAGE_II)
    s = int(all2[0]) if len(all2) else n_common - 1
    lo = s + int(math.ceil((1.0 - fit_tail_fraction) * (n_common - s)))
    lo = min(lo, n_common - 3) if n_common >= 3 else 0
    lo = max(lo, 0)
    slope = fit_loglog_slope(mean_tt, mean_dw, (lo, n_common - 1))

    return AggregateResult(
        step_axis=np.arange(n_common),
        mean_delta_omega=mean_dw,
        mean_cumulative_time=mean_tt,
        mean_zeta=zt.mean(axis=0),
        mean_scaled_alpha=sa.mean(axis=0),
        n_repetitions=n_reps,
        fit_slope=float(slope),
        fit_window=(int(lo), int(n_common - 1)),
        stage_column=stage_col,
        mean_n_units=n_units_arr.mean(axis=0),
        mean_tau=tau_arr.mean(axis=0),
        mean_nu=nu_arr.mean(axis=0),
        n_common_steps=int(n_common),
        n_aborted=sum(1 for res in results if res[8]),
    )


def fringe_scan(n_units: int, zeta_range: tuple[float, float],
                n_points: int) -> tuple[ScanResult, ScanResult, ScanResult]:
    """Tabulate the normalized fringe pattern and its derivative envelopes.

    The frequency axis is parameterized by the fringe label through
    omega*tau = 2*pi*(1 + zeta/N). Returns (|K|/N, finite-N derivative,
    universal envelope) on the same zeta grid.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    z0, z1 = zeta_range
    if not z0 < z1:
        raise ValueError(f"need zeta_min < zeta_max, got ({z0}, {z1})")
    z = np.linspace(z0, z1, n_points)
    tau = 2 * np.pi
    omega = 1.0 + z / n_units
    k_over_n = np.abs(interference_factor(n_units, omega, tau)) / n_units
    return (
        ScanResult(z, k_over_n, "k_over_n"),
        ScanResult(z, np.asarray(g_finite(n_units, z)), "g_finite"),
        ScanResult(z, np.asarray(g_universal(z)), "g_universal"),
    )


def gsq_scan(delta_zeta_values) -> ScanResult:
    """Mean squared fringe derivative over windows of increasing half-width."""
    dz = np.asarray(delta_zeta_values, dtype=float)
    if len(dz) == 0:
        raise ValueError("delta_zeta_values must be nonempty")
    if np.any(dz <= 0):
        raise ValueError("delta_zeta_values must be positive")
    if len(dz) > 1 and np.any(np.diff(dz) <= 0):
        raise ValueError("delta_zeta_values must be strictly increasing")
    y = np.array([g_sq_mean(d) for d in dz])
    return ScanResult(dz, y, "g_sq_mean")


def fit_loglog_slope(x, y, window: tuple[int, int]) -> float:
    """Least-squares slope of log y against log x over an inclusive index window."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    if not (0 <= lo <= hi < len(x)) or len(x) != len(y):
        raise ValueError(f"window {window} outside data of length {len(x)}")
    if hi - lo + 1 < 3:
        raise ValueError("fit window must contain at least 3 points")
    xs = x[lo:hi + 1]
    ys = y[lo:hi + 1]
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires positive values")
    lx = np.log(xs)
    ly = np.log(ys)
    design = np.vstack([lx, np.ones_like(lx)]).T
    slope, _ = np.linalg.lstsq(design, ly, rcond=None)[0]
    return float(slope)
