"""Ensemble machinery: sampling, aggregation, scans, and scaling fits.

Aggregation is checked for exact linearity against hand-stacked single
runs, the sampler against binomial moments, and the fit harness against
synthetic power laws with known exponents.
"""

import dataclasses
import math

import numpy as np
import pytest

from conftest import reference_config
from qsense.protocol import run_adaptive
from qsense.simkit import (
    AggregateResult,
    ScanResult,
    fit_loglog_slope,
    fringe_scan,
    gsq_scan,
    resolve_workers,
    run_repetitions,
    sample_outcomes,
)
from qsense.information import g_sq_mean


class TestSampleOutcomes:
    def test_certain_outcomes(self):
        rng = np.random.default_rng(0)
        assert sample_outcomes(1.0, 17, rng) == (17, 0)
        assert sample_outcomes(0.0, 17, rng) == (0, 17)

    def test_counts_partition(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n_plus, n_minus = sample_outcomes(0.37, 25, rng)
            assert n_plus + n_minus == 25
            assert n_plus >= 0 and n_minus >= 0

    def test_large_sample_concentration(self):
        rng = np.random.default_rng(11)
        n_plus, _ = sample_outcomes(0.5, 10**6, rng)
        assert 0.4985 <= n_plus / 10**6 <= 0.5015

    def test_binomial_moments(self):
        # one independent generator per seed; sample mean and variance
        # must sit within 3 standard errors of n*p and n*p*(1-p)
        n, p, n_seeds = 100, 0.3, 10_000
        draws = np.array([
            sample_outcomes(p, n, np.random.default_rng(seed))[0]
            for seed in range(n_seeds)
        ], dtype=float)
        mean_se = np.sqrt(n * p * (1 - p) / n_seeds)
        assert abs(draws.mean() - n * p) <= 3 * mean_se
        assert abs(draws.var(ddof=1) - n * p * (1 - p)) <= 1.0

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            sample_outcomes(1.5, 10, rng)
        with pytest.raises(ValueError):
            sample_outcomes(0.5, 0, rng)


class TestResolveWorkers:
    def test_explicit_argument_wins(self, monkeypatch):
        monkeypatch.setenv("QSENSE_THREADS", "3")
        assert resolve_workers(2, 8) == 2

    def test_environment_fallback(self, monkeypatch):
        monkeypatch.setenv("QSENSE_THREADS", "3")
        assert resolve_workers(None, 8) == 3

    def test_clamped_to_job_count(self, monkeypatch):
        monkeypatch.delenv("QSENSE_THREADS", raising=False)
        assert resolve_workers(99, 4) == 4
        assert resolve_workers(0, 4) == 1


class TestRunRepetitions:
    def test_single_repetition_equals_trajectory(self):
        cfg = reference_config(nbar=1000.0, max_steps=12, seed=777)
        agg = run_repetitions(cfg, 1, master_seed=777, n_workers=1)
        traj = run_adaptive(cfg)
        assert np.array_equal(agg.mean_delta_omega,
                              [r.delta_omega_k for r in traj.records])
        assert np.array_equal(agg.mean_cumulative_time,
                              [r.cumulative_time for r in traj.records])
        assert agg.n_repetitions == 1
        assert agg.n_aborted == 0

    def test_aggregation_linearity(self):
        cfg = reference_config(nbar=1000.0, max_steps=10)
        master = 4242
        agg = run_repetitions(cfg, 3, master_seed=master, n_workers=1)
        singles = []
        for r in range(3):
            traj = run_adaptive(dataclasses.replace(cfg, seed=master + r))
            singles.append([rec.delta_omega_k for rec in traj.records])
        n_common = min(len(s) for s in singles)
        hand = np.stack([np.array(s[:n_common]) for s in singles]).mean(axis=0)
        assert np.array_equal(agg.mean_delta_omega, hand)

    def test_deterministic_given_master_seed(self):
        cfg = reference_config(nbar=1000.0, max_steps=10)
        a = run_repetitions(cfg, 4, master_seed=99, n_workers=1)
        b = run_repetitions(cfg, 4, master_seed=99, n_workers=1)
        assert np.array_equal(a.mean_delta_omega, b.mean_delta_omega)
        assert np.array_equal(a.mean_cumulative_time, b.mean_cumulative_time)
        assert a.fit_slope == b.fit_slope

    def test_pool_matches_serial(self):
        cfg = reference_config(nbar=1000.0, max_steps=8)
        serial = run_repetitions(cfg, 3, master_seed=5, n_workers=1)
        pooled = run_repetitions(cfg, 3, master_seed=5, n_workers=2)
        assert np.array_equal(serial.mean_delta_omega, pooled.mean_delta_omega)
        assert serial.fit_slope == pooled.fit_slope

    def test_stage_column_requires_unanimity(self):
        cfg = reference_config(nbar=10.0, max_steps=15)
        agg = run_repetitions(cfg, 4, master_seed=12345, n_workers=1)
        assert agg.stage_column[0] == 1
        assert agg.stage_column[-1] == 2
        assert np.all(np.diff(agg.stage_column) >= 0)

    def test_fit_window_covers_stage_two_tail(self):
        cfg = reference_config(nbar=1000.0, max_steps=20)
        agg = run_repetitions(cfg, 2, master_seed=7, n_workers=1)
        lo, hi = agg.fit_window
        assert hi == agg.n_common_steps - 1
        # hot-start runs enter stage (ii) immediately, so the window is
        # the plain trailing fraction of all recorded steps
        assert np.all(agg.stage_column == 2)
        assert lo == min(math.ceil(0.4 * agg.n_common_steps),
                         agg.n_common_steps - 3)

    def test_validation(self):
        cfg = reference_config(nbar=1000.0, max_steps=5)
        with pytest.raises(ValueError):
            run_repetitions(cfg, 0, master_seed=1)
        with pytest.raises(ValueError):
            run_repetitions(cfg, 2, master_seed=1, fit_tail_fraction=0.0)


class TestFringeScan:
    def test_peak_and_nodes(self):
        k_scan, _, _ = fringe_scan(50, (-10.0, 10.0), 2001)
        z = k_scan.x_values
        y = k_scan.y_values
        assert y[np.argmin(np.abs(z))] == pytest.approx(1.0, abs=1e-12)
        for node in (-2.0, -1.0, 1.0, 2.0):
            assert y[np.argmin(np.abs(z - node))] <= 1e-10

    def test_symmetry_under_zeta_reflection(self):
        k_scan, _, _ = fringe_scan(50, (-3.0, 3.0), 601)
        assert np.max(np.abs(k_scan.y_values - k_scan.y_values[::-1])) <= 1e-10

    def test_overlay_tracks_universal_envelope(self):
        _, gf, gu = fringe_scan(50, (-3.0, 3.0), 1201)
        assert np.max(np.abs(gf.y_values - gu.y_values)) < 5e-3

    def test_grid_contract(self):
        k_scan, gf, gu = fringe_scan(50, (-10.0, 10.0), 2001)
        assert len(k_scan.x_values) == 2001
        assert np.all(np.diff(k_scan.x_values) > 0)
        assert np.array_equal(k_scan.x_values, gf.x_values)
        assert np.array_equal(k_scan.x_values, gu.x_values)

    def test_validation(self):
        with pytest.raises(ValueError):
            fringe_scan(50, (3.0, -3.0), 100)
        with pytest.raises(ValueError):
            fringe_scan(50, (-3.0, 3.0), 1)


class TestGsqScan:
    def test_matches_pointwise_evaluation(self):
        dz = np.array([0.5, 1.0, 2.0, 8.0])
        scan = gsq_scan(dz)
        for x, y in zip(scan.x_values, scan.y_values):
            assert y == pytest.approx(g_sq_mean(float(x)), rel=1e-12)

    def test_first_window_value(self):
        scan = gsq_scan(np.array([1.0]))
        assert scan.y_values[0] == pytest.approx(0.6980, abs=1e-3)

    def test_validation(self):
        with pytest.raises(ValueError):
            gsq_scan(np.array([]))
        with pytest.raises(ValueError):
            gsq_scan(np.array([1.0, 0.5]))
        with pytest.raises(ValueError):
            gsq_scan(np.array([-1.0, 2.0]))


class TestLogLogFit:
    def test_exact_square_law(self):
        x = np.logspace(0, 2, 30)
        slope = fit_loglog_slope(x, x**2, (0, 29))
        assert slope == pytest.approx(2.0, abs=1e-12)

    def test_exact_inverse_law(self):
        x = np.logspace(0, 2, 30)
        slope = fit_loglog_slope(x, 7.0 / x, (0, 29))
        assert slope == pytest.approx(-1.0, abs=1e-12)

    def test_noisy_inverse_square(self):
        rng = np.random.default_rng(5)
        x = np.logspace(0, 2, 40)
        y = x**-2 * (1.0 + 0.01 * rng.standard_normal(40))
        slope = fit_loglog_slope(x, y, (0, 39))
        assert slope == pytest.approx(-2.0, abs=0.02)

    def test_window_is_inclusive_and_selective(self):
        x = np.logspace(0, 2, 30)
        y = x**2
        y[:5] = 1e6
        slope = fit_loglog_slope(x, y, (5, 29))
        assert slope == pytest.approx(2.0, abs=1e-12)

    def test_window_too_small(self):
        x = np.logspace(0, 1, 10)
        with pytest.raises(ValueError):
            fit_loglog_slope(x, x, (4, 5))

    def test_window_bounds_checked(self):
        x = np.logspace(0, 1, 10)
        with pytest.raises(ValueError):
            fit_loglog_slope(x, x, (0, 10))

    def test_positive_values_required(self):
        x = np.logspace(0, 1, 10)
        y = x.copy()
        y[3] = -1.0
        with pytest.raises(ValueError):
            fit_loglog_slope(x, y, (0, 9))


class TestResultTypes:
    def test_scan_length_mismatch(self):
        with pytest.raises(ValueError):
            ScanResult(np.arange(3.0), np.arange(4.0), "bad")

    def test_scan_requires_increasing_x(self):
        with pytest.raises(ValueError):
            ScanResult(np.array([1.0, 1.0]), np.array([0.0, 0.0]), "bad")

    def test_aggregate_length_validation(self):
        n = 5
        good = dict(
            step_axis=np.arange(n),
            mean_delta_omega=np.ones(n),
            mean_cumulative_time=np.ones(n),
            mean_zeta=np.ones(n),
            mean_scaled_alpha=np.ones(n),
            n_repetitions=2,
            fit_slope=-2.0,
            fit_window=(0, n - 1),
            stage_column=np.full(n, 2),
            mean_n_units=np.ones(n),
            mean_tau=np.ones(n),
            mean_nu=np.ones(n),
            n_common_steps=n,
        )
        AggregateResult(**good)
        bad = dict(good, mean_zeta=np.ones(n + 1))
        with pytest.raises(ValueError):
            AggregateResult(**bad)
        with pytest.raises(ValueError):
            AggregateResult(**dict(good, fit_window=(0, n)))
