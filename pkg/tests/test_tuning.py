import math

import numpy as np
import pytest

from conftest import rig_params, simulate_rig
from tiltkit import reference as ref
from tiltkit.correction import run_correction_arrays, scale_factor
from tiltkit.errors import OptimizationFailure, ParameterError
from tiltkit.filters import make_filter, run_filter_arrays
from tiltkit.analysis import mse
from tiltkit.tuning import (
    OptimizerConfig,
    TuningResult,
    estimate_static_bias,
    fit_scale_factor,
    fit_scale_factor_degrees,
    nelder_mead,
    tune_filter,
    tune_time_constants,
)

G = ref.GRAVITY


class TestNelderMead:
    def test_quadratic(self):
        res = nelder_mead(lambda x: (x[0] - 3.0) ** 2, [0.0],
                          OptimizerConfig(restarts=1))
        assert abs(res.x[0] - 3.0) < 1e-6

    def test_rosenbrock(self):
        def rosen(v):
            return (1 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2

        res = nelder_mead(rosen, [-1.2, 1.0],
                          OptimizerConfig(max_iterations=5000, restarts=3))
        assert np.max(np.abs(res.x - 1.0)) < 1e-4

    def test_constant_objective_returns_start(self):
        res = nelder_mead(lambda x: 5.0, [1.5, -2.5], OptimizerConfig(restarts=1))
        assert res.x == pytest.approx([1.5, -2.5])
        assert res.converged
        assert res.fun == 5.0

    def test_deterministic(self):
        def bumpy(v):
            return math.sin(3 * v[0]) * 0.1 + v[0] ** 2

        a = nelder_mead(bumpy, [2.0], OptimizerConfig(seed=42))
        b = nelder_mead(bumpy, [2.0], OptimizerConfig(seed=42))
        assert a.x == pytest.approx(b.x, abs=0.0)
        assert a.fun == b.fun

    def test_all_non_finite_fails(self):
        with pytest.raises(OptimizationFailure):
            nelder_mead(lambda x: float("inf"), [0.0], OptimizerConfig(restarts=2))

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            OptimizerConfig(tol_f=0.0)
        with pytest.raises(ParameterError):
            OptimizerConfig(restarts=0)


class TestEstimateStaticBias:
    def test_constant_channel(self):
        est = estimate_static_bias(np.full(1000, 2.5))
        assert est.bias == 2.5
        assert est.minimum == est.maximum == 2.5

    def test_matches_arithmetic_mean(self):
        rng = np.random.default_rng(0)
        values = rng.normal(-1.9, 0.17, 250_000)
        est = estimate_static_bias(values)
        assert est.bias == pytest.approx(np.mean(values), abs=1e-12)
        assert len(est.window_means) == 2  # two full 1e5 windows

    def test_clt_bound(self):
        rng = np.random.default_rng(5)
        values = -1.91195 + rng.normal(0.0, 0.17, 100_000)
        est = estimate_static_bias(values)
        assert abs(est.bias + 1.91195) < 3 * 0.17 / math.sqrt(100_000)

    def test_extremes_reported(self):
        values = np.full(100, -1.9)
        values[10] = ref.GYRO_STATIC_MAX_DPS
        values[50] = ref.GYRO_STATIC_MIN_DPS
        est = estimate_static_bias(values)
        assert est.minimum == ref.GYRO_STATIC_MIN_DPS
        assert est.maximum == ref.GYRO_STATIC_MAX_DPS

    def test_window_means_detect_drift(self):
        values = np.concatenate([np.full(100_000, -1.8), np.full(100_000, -2.0)])
        est = estimate_static_bias(values)
        assert est.window_means == pytest.approx((-1.8, -2.0))

    def test_rawlog_channel_extraction(self):
        truth, log, params = simulate_rig(duration=1.0, gyro_noise=0.1, seed=3)
        est = estimate_static_bias(log, "gyro_dps")
        assert est.bias == pytest.approx(math.fsum(log.gyro_dps) / len(log), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            estimate_static_bias(np.empty(0))


def make_pairs(poly, phi_max_deg=75.0, n=240, axis="x", noise=0.0, seed=0):
    """(p, a_ref) pairs consistent with the correction convention:
    a_ref = p - S(p) by construction, so `poly` is the exact optimum."""
    rng = np.random.default_rng(seed)
    phis = np.radians(np.linspace(-phi_max_deg, phi_max_deg, n))
    a_true = G * np.sin(phis) if axis == "x" else G * np.cos(phis)
    p = a_true + np.array([scale_factor(v, poly) for v in a_true])
    a_ref = p - np.array([scale_factor(v, poly) for v in p])
    if noise:
        p = p + rng.normal(0.0, noise, n)
    return np.column_stack([p, a_ref])


class TestFitScaleFactor:
    def test_zero_polynomial_recovered(self):
        pairs = make_pairs((0.0,) * 5)
        fit = fit_scale_factor(pairs)
        assert np.max(np.abs(fit.coefficients)) < 1e-6
        assert fit.mse < 1e-12

    @pytest.mark.parametrize("poly,axis", [(ref.SCALE_POLY_X, "x"),
                                           (ref.SCALE_POLY_Y, "y")])
    def test_reference_polynomials_recovered(self, poly, axis):
        pairs = make_pairs(poly, axis=axis)
        fit = fit_scale_factor(pairs)
        assert np.max(np.abs(np.array(fit.coefficients) - np.array(poly))) < 1e-4

    def test_noisy_fit_beats_bias_only(self):
        pairs = make_pairs(ref.SCALE_POLY_X, noise=0.1, n=2000, seed=1)
        fit = fit_scale_factor(pairs)
        p, a_ref = pairs[:, 0], pairs[:, 1]
        mse_bias_only = float(np.mean((p - a_ref) ** 2))
        corrected = p - np.array([scale_factor(v, fit.coefficients) for v in p])
        mse_fit = float(np.mean((corrected - a_ref) ** 2))
        assert mse_fit < 0.7 * mse_bias_only

    def test_noise_free_fit_strictly_beats_bias_only(self):
        # nonzero polynomial in the data: the fitted correction wins outright
        pairs = make_pairs(ref.SCALE_POLY_X)
        fit = fit_scale_factor(pairs)
        p, a_ref = pairs[:, 0], pairs[:, 1]
        mse_bias_only = float(np.mean((p - a_ref) ** 2))
        assert mse_bias_only > 0
        assert fit.mse < mse_bias_only

    def test_degree_monotonicity(self):
        pairs = make_pairs(ref.SCALE_POLY_X, noise=0.05, n=500, seed=2)
        fits = fit_scale_factor_degrees(pairs)
        mses = [fits[d].mse for d in sorted(fits)]
        for lo, hi in zip(mses[1:], mses):
            assert lo <= hi + 1e-12

    def test_degenerate_data_rejected(self):
        pairs = np.column_stack([np.full(10, 1.0), np.full(10, 0.9)])
        with pytest.raises(ParameterError):
            fit_scale_factor(pairs)


class TestTuneTimeConstants:
    def test_flat_objective_zero_motion(self):
        from tiltkit.model import GyroErrorModel, AccelErrorModel, simulate_run, zero_motion_profile
        params = rig_params(with_errors=False)
        truth, log = simulate_run(zero_motion_profile(2.0, 0.01),
                                  GyroErrorModel(), AccelErrorModel(), params, 0)
        res = tune_time_constants(log, truth.phi_deg, params,
                                  OptimizerConfig(restarts=1, max_iterations=200))
        assert res.mse < 1e-20
        assert res.opt.converged

    def test_constraint_and_dominance(self):
        truth, log, params = simulate_rig(duration=6.0, gyro_noise=0.1,
                                          accel_noise=0.05, seed=21)
        baseline = (ref.lowpass_tuning(10.0).T_omega, ref.lowpass_tuning(10.0).T_v)
        res = tune_time_constants(log, truth.phi_deg, params,
                                  OptimizerConfig(restarts=1, max_iterations=150,
                                                  tol_f=1e-10, tol_x=1e-8),
                                  x0=baseline)
        assert params.dt + res.T_omega > 0
        assert params.dt + res.T_v > 0
        # seeded at the baseline, the simplex can only improve on it
        from dataclasses import replace
        trial = replace(params, T_omega=baseline[0], T_v=baseline[1])
        phi_bar, _ = run_correction_arrays(log, trial)
        assert res.mse <= mse(truth.phi_deg, phi_bar) + 1e-15


@pytest.fixture(scope="module")
def noisy_stream():
    truth, log, params = simulate_rig(duration=8.0, gyro_noise=0.17,
                                      accel_noise=0.1, seed=33)
    phi_bar, rate_bar = run_correction_arrays(log, params)
    return (phi_bar, rate_bar), truth.phi_deg


class TestTuneFilter:
    def test_wb_seeded_dominance(self, noisy_stream):
        stream, ref_phi = noisy_stream
        seed_pt = [0.00185, -0.00018]
        spec = make_filter("wb", {"alpha": seed_pt[0], "beta": seed_pt[1]}, 0.01)
        seed_mse = mse(ref_phi, run_filter_arrays(spec, *stream))
        res = tune_filter("wb", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=150, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7), x0=seed_pt)
        assert res.training_mse <= seed_mse + 1e-15
        assert res.stability_report.max_magnitude <= 1.0 + 1e-9

    def test_passthrough_dominance_wob(self, noisy_stream):
        # alpha=1 makes wob reproduce phi_bar exactly; tuned result can
        # never be worse than the corrected-only signal when seeded there
        stream, ref_phi = noisy_stream
        passthrough_mse = mse(ref_phi, stream[0])
        res = tune_filter("wob", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=150, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7), x0=[1.0, 1.0])
        assert res.training_mse <= passthrough_mse + 1e-15

    def test_passthrough_dominance_complementary(self, noisy_stream):
        stream, ref_phi = noisy_stream
        passthrough_mse = mse(ref_phi, stream[0])
        res = tune_filter("complementary", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=100, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7), x0=[0.0])
        assert res.training_mse <= passthrough_mse + 1e-15

    def test_returned_parameters_stable(self, noisy_stream):
        stream, ref_phi = noisy_stream
        res = tune_filter("wob", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=100, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7), x0=[0.1, 0.5])
        assert res.stability_report.max_magnitude <= 1.0 + 1e-9

    def test_kalman_star_nonnegative(self, noisy_stream):
        stream, ref_phi = noisy_stream
        res = tune_filter("kalman_star", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=120, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7),
                          x0=[1e-5, 0.0, 2.3],
                          kalman_init_gains=(0.00185, -0.00018))
        assert res.parameters["q1"] >= 0
        assert res.parameters["q2"] >= 0
        assert res.parameters["r"] >= 0
        assert res.stability_report is None

    def test_determinism(self, noisy_stream):
        stream, ref_phi = noisy_stream
        cfg = OptimizerConfig(max_iterations=60, restarts=2, seed=5,
                              tol_f=1e-9, tol_x=1e-7)
        a = tune_filter("wb", stream, ref_phi, 0.01, cfg, x0=[0.01, -0.001])
        b = tune_filter("wb", stream, ref_phi, 0.01, cfg, x0=[0.01, -0.001])
        assert a.parameters == b.parameters
        assert a.training_mse == b.training_mse

    def test_verification_evaluation(self, noisy_stream):
        stream, ref_phi = noisy_stream
        truth_v, log_v, params_v = simulate_rig(duration=4.0, gyro_noise=0.17,
                                                accel_noise=0.1, seed=34)
        stream_v = run_correction_arrays(log_v, params_v)
        res = tune_filter("wb", stream, ref_phi, 0.01,
                          OptimizerConfig(max_iterations=60, restarts=1,
                                          tol_f=1e-9, tol_x=1e-7),
                          x0=[0.00185, -0.00018],
                          verification=(stream_v, truth_v.phi_deg))
        assert math.isfinite(res.verification_mse)
        assert res.verification_mse >= 0

    def test_all_unstable_fails(self, noisy_stream):
        stream, ref_phi = noisy_stream
        cfg = OptimizerConfig(max_iterations=10, restarts=1,
                              initial_scale=1e-6, tol_f=1e-9, tol_x=1e-7)
        with pytest.raises(OptimizationFailure):
            tune_filter("wob", stream, ref_phi, 0.01, cfg, x0=[-5.0, -5.0])

    def test_negative_training_mse_rejected(self):
        with pytest.raises(ParameterError):
            TuningResult("wb", 0.01, {}, training_mse=-1.0)
