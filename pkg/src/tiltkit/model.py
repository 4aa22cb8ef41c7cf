"""Discrete robot kinematics and synthetic sensor generation.

The simulator replaces recorded rig trajectories: it advances the
ground-truth state with the forward-Euler kinematics, then corrupts ideal
sensor readings with the configured deterministic and stochastic
interference (bias, scale-factor polynomial, white noise, saturation,
encoder quantisation).

Invertibility contract: the accelerometer channels embed exactly the
motion-induced interference that the correction chain will reconstruct,
obtained from a shadow copy of the chain itself (same initialisation, same
low-pass filters and backward differences, same quantised encoder
velocity, projections on the chain's own previous tilt).  Correcting a
noise-free log with matching parameters therefore recovers the true tilt
to floating-point precision when the scale polynomials are zero, and up to
the small scale-factor inversion residual otherwise.  The contract assumes
no sample hits the saturation clamp.

Randomness comes from ``numpy.random.Generator`` (PCG64 via
``default_rng(seed)``); per sample the draw order is gyro, accel x', then
accel y', and a channel with zero noise draws nothing.  Identical
(profile, models, seed) inputs reproduce logs bit for bit.  Everything
here is a pure function over value types; one run is single-threaded, and
independent runs (distinct seeds) can execute concurrently.
"""

from dataclasses import dataclass, field
from math import cos, floor, isfinite, pi, radians, sin
from typing import Callable

import numpy as np

from .correction import CorrectionState, correction_pipeline_step, motion_terms
from .errors import ParameterError, SimulationError
from .logio import RawLog, RawSample, TruthLog
from .reference import ACCEL_SATURATION_MPS2, GRAVITY, GYRO_SATURATION_DPS


@dataclass(frozen=True)
class RobotState:
    """Ground-truth motion of the robot at one instant."""

    phi: float = 0.0        # tilt from vertical, degrees
    phi_dot: float = 0.0    # angular rate, deg/s
    phi_ddot: float = 0.0   # angular acceleration, deg/s^2
    x_pos: float = 0.0      # progressive position, m
    v_t: float = 0.0        # translational velocity, m/s
    a_t: float = 0.0        # translational acceleration, m/s^2

    def is_finite(self):
        return all(isfinite(v) for v in
                   (self.phi, self.phi_dot, self.phi_ddot, self.x_pos, self.v_t, self.a_t))


@dataclass(frozen=True)
class GyroErrorModel:
    """Additive bias + zero-mean white noise + symmetric full-scale clamp."""

    bias: float = 0.0                        # deg/s
    noise_std: float = 0.0                   # deg/s
    saturation: float = GYRO_SATURATION_DPS  # deg/s

    def __post_init__(self):
        if self.noise_std < 0:
            raise ParameterError("noise_std must be >= 0")
        if not self.saturation > 0:
            raise ParameterError("saturation must be positive")


@dataclass(frozen=True)
class AccelErrorModel:
    """Per-axis bias and degree-5 scale-factor polynomial, shared noise/clamp.

    The polynomials have a structurally absent intercept: coefficient i
    multiplies the (i+1)-th power of the true acceleration.
    """

    bias_x: float = 0.0
    bias_y: float = 0.0
    scale_poly_x: tuple = (0.0,) * 5
    scale_poly_y: tuple = (0.0,) * 5
    noise_std: float = 0.0                     # m/s^2
    saturation: float = ACCEL_SATURATION_MPS2  # m/s^2

    def __post_init__(self):
        if self.noise_std < 0:
            raise ParameterError("noise_std must be >= 0")
        if not self.saturation > 0:
            raise ParameterError("saturation must be positive")
        if len(self.scale_poly_x) != 5 or len(self.scale_poly_y) != 5:
            raise ParameterError("scale polynomials take exactly 5 coefficients")


@dataclass(frozen=True)
class MotionProfile:
    """Closed-form drive signals for a simulation run.

    ``phi_ddot_fn(t)`` returns the angular acceleration in deg/s^2 and
    ``a_t_fn(t)`` the translational acceleration in m/s^2 at time t seconds.
    """

    duration: float
    dt: float
    phi_ddot_fn: Callable[[float], float] = field(default=lambda t: 0.0)
    a_t_fn: Callable[[float], float] = field(default=lambda t: 0.0)
    phi0: float = 0.0
    phi_dot0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if self.duration < self.dt:
            raise ParameterError("duration must be at least one sample period")

    @property
    def n_samples(self):
        return int(floor(self.duration / self.dt))


def zero_motion_profile(duration, dt):
    """Robot standing still and vertical."""
    return MotionProfile(duration=duration, dt=dt)


def default_dynamic_profile(duration, dt, tilt_amp_deg=0.15, tilt_freq_hz=0.7,
                            a_t_amp=0.008, a_t_freq_hz=0.25):
    """Gentle rocking plus a translational sway.

    The default amplitudes keep the x'-axis specific force small, so the
    scale-factor inversion residual stays inside the round-trip tolerances,
    while the rate and acceleration terms remain large enough to visibly
    corrupt the raw arctangent tilt.
    """
    w_phi = 2.0 * pi * tilt_freq_hz
    w_a = 2.0 * pi * a_t_freq_hz

    def phi_ddot_fn(t):
        return -tilt_amp_deg * w_phi * w_phi * sin(w_phi * t)

    def a_t_fn(t):
        return a_t_amp * sin(w_a * t)

    return MotionProfile(duration=duration, dt=dt,
                         phi_ddot_fn=phi_ddot_fn, a_t_fn=a_t_fn,
                         phi0=0.0, phi_dot0=tilt_amp_deg * w_phi)


def step_kinematics(state, dt):
    """Advance the state one forward-Euler step of length dt.

    phi gains phi_dot*dt + phi_ddot*dt^2/2, phi_dot gains phi_ddot*dt, the
    accelerations carry over unchanged, and the translational triplet
    advances the same way.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if not state.is_finite():
        raise ParameterError(f"non-finite robot state: {state}")
    return RobotState(
        phi=state.phi + state.phi_dot * dt + 0.5 * state.phi_ddot * dt * dt,
        phi_dot=state.phi_dot + state.phi_ddot * dt,
        phi_ddot=state.phi_ddot,
        x_pos=state.x_pos + state.v_t * dt + 0.5 * state.a_t * dt * dt,
        v_t=state.v_t + state.a_t * dt,
        a_t=state.a_t,
    )


def _clamp(x, limit):
    if x > limit:
        return limit
    if x < -limit:
        return -limit
    return x


def synthesize_gyro(true_rate, model, rng, size=None):
    """Corrupt a true angular rate: clamp(rate + bias + noise, +/-saturation).

    With ``size`` given, returns an ndarray of independent draws for the
    same true rate (handy for long static logs).
    """
    if size is not None:
        vals = np.full(size, true_rate + model.bias, dtype=float)
        if model.noise_std > 0:
            vals += rng.normal(0.0, model.noise_std, size)
        return np.clip(vals, -model.saturation, model.saturation)
    value = true_rate + model.bias
    if model.noise_std > 0:
        value += rng.normal(0.0, model.noise_std)
    return _clamp(value, model.saturation)


def true_accel_components(phi_deg, a_e, a_c, a_t_x, a_t_y):
    """Ideal accelerometer readings for a given tilt and motion terms.

    Inverts the corrected-tilt equation: the x' channel reads the gravity
    projection minus the terms the correction later adds back, the y'
    channel the gravity projection minus the centrifugal term plus the
    translational projection.
    """
    phi_r = radians(phi_deg)
    ax = GRAVITY * sin(phi_r) - a_e - a_t_x
    ay = GRAVITY * cos(phi_r) - a_c + a_t_y
    return ax, ay


def _corrupt_accel_axis(a_true, bias, poly, noise, saturation):
    # Forward scale-factor distortion evaluates the polynomial at the true
    # component; the correction side evaluates it at measurement - bias.
    acc = 0.0
    for c in reversed(poly):
        acc = acc * a_true + c
    return _clamp(a_true + acc * a_true + bias + noise, saturation)


def synthesize_accel(state, model, params, rng):
    """Corrupt the ideal accelerometer pair implied by a true robot state.

    Motion terms come from the true state directly: a_c from the true rate,
    a_e from the true angular acceleration, translational projections from
    the true tilt.  The full simulator instead mirrors the correction
    chain; see :func:`simulate_run`.
    """
    rate_r = radians(state.phi_dot)
    a_c = rate_r * rate_r * params.R
    a_e = radians(state.phi_ddot) * params.R
    phi_r = radians(state.phi)
    a_t_x = state.a_t * cos(phi_r)
    a_t_y = state.a_t * sin(phi_r)
    ax_true, ay_true = true_accel_components(state.phi, a_e, a_c, a_t_x, a_t_y)
    nx = rng.normal(0.0, model.noise_std) if model.noise_std > 0 else 0.0
    ny = rng.normal(0.0, model.noise_std) if model.noise_std > 0 else 0.0
    ax = _corrupt_accel_axis(ax_true, model.bias_x, model.scale_poly_x, nx, model.saturation)
    ay = _corrupt_accel_axis(ay_true, model.bias_y, model.scale_poly_y, ny, model.saturation)
    return ax, ay


def simulate_run(profile, gyro, accel, params, seed):
    """Simulate a full run; returns ``(TruthLog, RawLog)`` of equal length.

    Encoder counts are the integer part of the accumulated fractional pulse
    count implied by wheel travel, with the residual carried to the next
    sample so no pulse is ever lost.  The accelerometer interference terms
    are produced by a shadow instance of the correction pipeline running on
    the measurements as they are generated; the first sample embeds no
    motion terms, mirroring the pipeline's raw-arctangent initialisation.
    """
    dt = profile.dt
    n = profile.n_samples
    rng = np.random.default_rng(seed)

    state = RobotState(phi=profile.phi0, phi_dot=profile.phi_dot0,
                       phi_ddot=profile.phi_ddot_fn(0.0), a_t=profile.a_t_fn(0.0))

    t_arr = np.empty(n)
    phi_arr = np.empty(n)
    phi_dot_arr = np.empty(n)
    phi_ddot_arr = np.empty(n)
    x_arr = np.empty(n)
    v_arr = np.empty(n)
    a_t_arr = np.empty(n)
    gyro_arr = np.empty(n)
    acc_x_arr = np.empty(n)
    acc_y_arr = np.empty(n)
    enc_arr = np.empty(n, dtype=np.int64)

    pulses_per_m = params.N_drive / (2.0 * pi * params.R_w)
    pulse_residual = 0.0
    prev_x = state.x_pos

    shadow = CorrectionState()

    for k in range(n):
        if not state.is_finite():
            raise SimulationError(k)
        t = k * dt
        t_arr[k] = t
        phi_arr[k] = state.phi
        phi_dot_arr[k] = state.phi_dot
        phi_ddot_arr[k] = state.phi_ddot
        x_arr[k] = state.x_pos
        v_arr[k] = state.v_t
        a_t_arr[k] = state.a_t

        # Encoder: quantise the wheel travel of the period ending at t_k.
        if k == 0:
            n_pulses = 0
        else:
            pulse_residual += (state.x_pos - prev_x) * pulses_per_m
            n_pulses = floor(pulse_residual)
            pulse_residual -= n_pulses
        prev_x = state.x_pos
        enc_arr[k] = n_pulses

        gyro_meas = synthesize_gyro(state.phi_dot, gyro, rng)

        # Interference terms exactly as the corrector will reconstruct them
        # at this sample.  The first sample embeds nothing because the
        # pipeline initialises from the raw arctangent.
        if k == 0:
            a_c = a_e = a_t_x = a_t_y = 0.0
        else:
            rate_bar = gyro_meas - params.gyro_bias
            a_c, a_e, _a_t, a_t_x, a_t_y, _rf, _vf = motion_terms(
                rate_bar, n_pulses, shadow, params)

        ax_true, ay_true = true_accel_components(state.phi, a_e, a_c, a_t_x, a_t_y)
        nx = rng.normal(0.0, accel.noise_std) if accel.noise_std > 0 else 0.0
        ny = rng.normal(0.0, accel.noise_std) if accel.noise_std > 0 else 0.0
        ax_meas = _corrupt_accel_axis(ax_true, accel.bias_x, accel.scale_poly_x,
                                      nx, accel.saturation)
        ay_meas = _corrupt_accel_axis(ay_true, accel.bias_y, accel.scale_poly_y,
                                      ny, accel.saturation)

        gyro_arr[k] = gyro_meas
        acc_x_arr[k] = ax_meas
        acc_y_arr[k] = ay_meas

        # Advance the shadow by running the real pipeline on the sample just
        # generated, so simulator and corrector share identical state.
        raw = RawSample(t=t, gyro_dps=gyro_meas, acc_x_mps2=ax_meas,
                        acc_y_mps2=ay_meas, enc_count=n_pulses)
        _, shadow = correction_pipeline_step(raw, params, shadow)

        # Ground truth advances by the pure Euler step, then the profile
        # re-drives the accelerations for the next instant.
        state = step_kinematics(state, dt)
        t_next = (k + 1) * dt
        state = RobotState(phi=state.phi, phi_dot=state.phi_dot,
                           phi_ddot=profile.phi_ddot_fn(t_next),
                           x_pos=state.x_pos, v_t=state.v_t,
                           a_t=profile.a_t_fn(t_next))

    truth = TruthLog(t_arr, phi_arr, phi_dot_arr, phi_ddot_arr, x_arr, v_arr, a_t_arr)
    log = RawLog(t_arr, gyro_arr, acc_x_arr, acc_y_arr, enc_arr)
    return truth, log
