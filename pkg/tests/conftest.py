import time

import pytest

_SESSION_T0 = time.perf_counter()


def session_elapsed():
    """Wall time since the pytest process imported this conftest."""
    return time.perf_counter() - _SESSION_T0

from tiltkit import reference as ref
from tiltkit.correction import CorrectionParams
from tiltkit.model import AccelErrorModel, GyroErrorModel, default_dynamic_profile, simulate_run

# Encoder resolution of the synthetic acceptance rig.  High on purpose: one
# pulse per sample period maps to a reconstructed-acceleration step of
# 2*pi*R_w/(N*dt*(dt+T_v)), and that step feeds the scale-factor polynomials,
# whose inversion residual is what the round-trip tolerances measure.
RIG_N_DRIVE = 65536


def rig_params(dt=0.01, with_errors=True, N_drive=RIG_N_DRIVE):
    """CorrectionParams of the synthetic rig at a given sample time."""
    lp = ref.lowpass_tuning(dt * 1000.0)
    if with_errors:
        return CorrectionParams(
            dt=dt, N_drive=N_drive,
            gyro_bias=ref.GYRO_BIAS_DPS,
            accel_bias_x=ref.ACCEL_BIAS_X_MPS2,
            accel_bias_y=ref.ACCEL_BIAS_Y_MPS2,
            scale_poly_x=ref.SCALE_POLY_X,
            scale_poly_y=ref.SCALE_POLY_Y,
            T_omega=lp.T_omega, T_v=lp.T_v)
    return CorrectionParams(dt=dt, N_drive=N_drive, T_omega=lp.T_omega, T_v=lp.T_v)


def rig_models(with_errors=True, gyro_noise=0.0, accel_noise=0.0):
    """(GyroErrorModel, AccelErrorModel) of the synthetic rig."""
    if with_errors:
        gyro = GyroErrorModel(bias=ref.GYRO_BIAS_DPS, noise_std=gyro_noise)
        accel = AccelErrorModel(
            bias_x=ref.ACCEL_BIAS_X_MPS2, bias_y=ref.ACCEL_BIAS_Y_MPS2,
            scale_poly_x=ref.SCALE_POLY_X, scale_poly_y=ref.SCALE_POLY_Y,
            noise_std=accel_noise)
    else:
        gyro = GyroErrorModel(noise_std=gyro_noise)
        accel = AccelErrorModel(noise_std=accel_noise)
    return gyro, accel


def simulate_rig(duration=20.0, dt=0.01, with_errors=True, gyro_noise=0.0,
                 accel_noise=0.0, seed=7, N_drive=RIG_N_DRIVE):
    """Convenience: simulate the default dynamic profile on the rig."""
    params = rig_params(dt=dt, with_errors=with_errors, N_drive=N_drive)
    gyro, accel = rig_models(with_errors=with_errors, gyro_noise=gyro_noise,
                             accel_noise=accel_noise)
    profile = default_dynamic_profile(duration, dt)
    truth, log = simulate_run(profile, gyro, accel, params, seed)
    return truth, log, params


@pytest.fixture(scope="session")
def dynamic_run_clean():
    """Noise-free, zero-error dynamic run (10 ms, 20 s)."""
    return simulate_rig(with_errors=False)


@pytest.fixture(scope="session")
def dynamic_run_reference_models():
    """Noise-free dynamic run with the reference deterministic errors."""
    return simulate_rig(with_errors=True)
