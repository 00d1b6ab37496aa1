"""Reproduce the precision-versus-time scaling of the adaptive protocol.

Runs ensembles of the two-stage adaptive estimator at two oscillator
temperatures (nbar = 10 and nbar = 1000), averages the per-step
uncertainty and cumulative interrogation time over repetitions, fits
the late-time log-log slope (expected near -2), and reports the
precision ratio between the two temperatures at the matched total time.
With the default 500 repetitions this takes a couple of minutes on one
core; pass --reps 50 for a quick look.
"""

import argparse
import time

import numpy as np

from qsense.protocol import AdaptiveConfig
from qsense.simkit import run_repetitions


def run_ensemble(nbar, reps, steps, seed, workers):
    cfg = AdaptiveConfig(omega_true=50.0, omega0=50.5, delta_omega0=0.5,
                         lam=0.1, nbar=nbar, c_i=0.1, kappa_i=2.0,
                         c=0.1, kappa=2.0, max_steps=steps, seed=seed)
    t0 = time.perf_counter()
    agg = run_repetitions(cfg, reps, master_seed=seed, n_workers=workers)
    wall = time.perf_counter() - t0
    print(f"nbar = {nbar:g}: {reps} reps x {agg.n_common_steps} steps "
          f"in {wall:.1f} s, slope {agg.fit_slope:.3f} "
          f"over window {agg.fit_window}, aborted {agg.n_aborted}")
    return agg


def matched_time_ratio(agg_cold, agg_hot):
    # interpolate both mean curves (log-log) at the smaller final mean time
    t_star = min(agg_cold.mean_cumulative_time[-1], agg_hot.mean_cumulative_time[-1])
    out = []
    for agg in (agg_cold, agg_hot):
        lt = np.log(agg.mean_cumulative_time)
        ld = np.log(agg.mean_delta_omega)
        out.append(np.exp(np.interp(np.log(t_star), lt, ld)))
    return t_star, out[0] / out[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--steps", type=int, default=250)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    cold = run_ensemble(10.0, args.reps, args.steps, args.seed, args.threads)
    hot = run_ensemble(1000.0, args.reps, args.steps, args.seed, args.threads)

    t_star, ratio = matched_time_ratio(cold, hot)
    print(f"matched total time {t_star:.3e}: "
          f"precision ratio (nbar 10 over nbar 1000) = {ratio:.2f}")
    print(f"final mean uncertainty, nbar=10:   {cold.mean_delta_omega[-1]:.3e}")
    print(f"final mean uncertainty, nbar=1000: {hot.mean_delta_omega[-1]:.3e}")


if __name__ == "__main__":
    main()
