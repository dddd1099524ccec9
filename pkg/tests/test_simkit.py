"""Synthetic panel generator and Monte Carlo harness behavior."""

import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from premiaroll.simkit import (
    DgpSpec,
    mc_experiment,
    random_spec,
    simulate,
    trading_dates,
)


class TestTradingDates:
    def test_weekdays_only_and_increasing(self):
        dates = trading_dates(500)
        assert len(dates) == 500
        assert all(d.weekday() < 5 for d in dates)
        assert all(b > a for a, b in zip(dates, dates[1:]))


class TestSimulate:
    def test_fixed_seed_reproduces_panel(self):
        spec = random_spec(n=6, m=2, T=150, seed=0)
        a = simulate(spec)
        b = simulate(spec)
        assert_array_equal(a.excess_returns, b.excess_returns)
        assert_array_equal(a.factor_matrix, b.factor_matrix)
        assert a.dates == b.dates

    def test_different_seeds_differ(self):
        a = simulate(random_spec(n=6, m=2, T=150, seed=0))
        b = simulate(random_spec(n=6, m=2, T=150, seed=1))
        assert not np.array_equal(a.excess_returns, b.excess_returns)

    def test_noiseless_panel_is_exactly_linear(self):
        base = random_spec(n=6, m=2, T=100, seed=2)
        spec = dataclasses.replace(
            base, alpha=np.zeros(6), resid_cov=np.zeros((6, 6))
        )
        panel = simulate(spec)
        want = panel.factor_matrix @ spec.beta.T
        assert_array_equal(panel.excess_returns, want)

    def test_factor_means_obey_law_of_large_numbers(self):
        spec = random_spec(n=5, m=3, T=100_000, seed=3)
        panel = simulate(spec)
        sd = np.sqrt(np.diag(spec.factor_cov))
        bound = 4.0 * sd / np.sqrt(spec.T)
        assert (np.abs(panel.factor_matrix.mean(axis=0) - spec.premia) < bound).all()

    def test_student_t_innovations_have_unit_scale(self):
        spec = random_spec(n=5, m=2, T=50_000, seed=4, innovations="student_t", t_dof=6.0)
        panel = simulate(spec)
        sd = panel.factor_matrix.std(axis=0)
        assert_allclose(sd, np.sqrt(np.diag(spec.factor_cov)), rtol=0.05)

    def test_non_psd_covariance_rejected(self):
        base = random_spec(n=5, m=2, T=100, seed=5)
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
        with pytest.raises(ValueError, match="positive semidefinite"):
            dataclasses.replace(base, factor_cov=bad)

    def test_m_not_below_n_rejected(self):
        with pytest.raises(ValueError, match="m < n"):
            DgpSpec(
                n=3,
                m=3,
                T=100,
                alpha=np.zeros(3),
                beta=np.ones((3, 3)),
                premia=np.zeros(3),
                factor_cov=np.eye(3),
                resid_cov=np.eye(3),
            )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="beta"):
            DgpSpec(
                n=3,
                m=1,
                T=100,
                alpha=np.zeros(3),
                beta=np.ones((2, 1)),
                premia=np.zeros(1),
                factor_cov=np.eye(1),
                resid_cov=np.eye(3),
            )


class TestMcExperiment:
    def test_single_replication_aggregates_without_error(self):
        spec = random_spec(n=5, m=2, T=120, seed=6)
        result = mc_experiment(spec, reps=1)
        assert result.reps == 1
        assert result.failures == 0
        assert result.rejection_rate in (0.0, 1.0)
        assert result.premia_bias.shape == (2,)
        rows = result.rows()
        assert ("reps", "", 1.0) in rows

    def test_schedule_independence_across_worker_counts(self):
        spec = random_spec(n=5, m=2, T=200, seed=7)
        serial = mc_experiment(spec, reps=60, threads=1)
        threaded = mc_experiment(spec, reps=60, threads=4)
        assert serial.rejection_rate == threaded.rejection_rate
        assert_array_equal(serial.premia_bias, threaded.premia_bias)
        assert_array_equal(serial.alpha_sd, threaded.alpha_sd)
        assert serial.beta_rmse == threaded.beta_rmse

    def test_failures_are_counted_not_raised(self):
        base = random_spec(n=5, m=2, T=120, seed=8)
        # T at the degrees-of-freedom boundary makes every replication fail
        spec = dataclasses.replace(base, T=8)
        result = mc_experiment(spec, reps=5)
        assert result.failures == 5
        assert np.isnan(result.rejection_rate)

    def test_null_size_is_close_to_nominal(self):
        spec = random_spec(n=8, m=2, T=300, seed=9)
        result = mc_experiment(spec, reps=400, threads=2)
        assert 0.02 <= result.rejection_rate <= 0.09

    def test_alpha_sd_scales_power_grid(self):
        spec = random_spec(n=6, m=2, T=250, seed=10)
        null = mc_experiment(spec, reps=300, threads=2)
        assert (null.alpha_sd > 0).all()
        loud = dataclasses.replace(spec, alpha=4.0 * null.alpha_sd)
        power = mc_experiment(loud, reps=300, threads=2)
        assert power.rejection_rate > 0.5

    def test_invalid_arguments(self):
        spec = random_spec(n=5, m=2, T=120, seed=11)
        with pytest.raises(ValueError, match="reps"):
            mc_experiment(spec, reps=0)
        with pytest.raises(ValueError, match="test_level"):
            mc_experiment(spec, reps=2, test_level=1.5)

    def test_loading_rmse_shrinks_at_root_t(self):
        spec = random_spec(n=6, m=2, T=500, seed=12)
        sizes = (500, 2000, 8000)
        rmses = [
            mc_experiment(dataclasses.replace(spec, T=T), reps=150, threads=2).beta_rmse
            for T in sizes
        ]
        slope = np.polyfit(np.log(sizes), np.log(rmses), 1)[0]
        assert -0.65 <= slope <= -0.35
