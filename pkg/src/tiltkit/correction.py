"""Deterministic measurement correction.

Removes the gyro bias, the accelerometer biases and scale-factor
distortion, compensates the motion-induced accelerations sensed by an IMU
mounted off the wheel axis (centrifugal, angular-acceleration and
translational terms, the latter reconstructed from the drive encoder), and
produces the corrected tilt ``phi_bar`` and corrected rate ``rate_bar``.

Angle convention: degrees end to end.  Radians appear only inside
:func:`motion_accelerations`, where the rate is converted with pi/180
before the centrifugal and angular-acceleration terms are formed.

The per-sample state machine is strictly causal and single-owner: one
:class:`CorrectionState` belongs to one stream.  Separate streams can be
processed concurrently with independent states.
"""

from dataclasses import dataclass, replace
from math import atan2, cos, degrees, pi, sin
from typing import Optional

from .errors import DegenerateTiltError, ParameterError


@dataclass(frozen=True)
class CorrectionParams:
    """Everything the correction chain needs to know about the rig.

    ``N_drive`` (drive-encoder pulses per revolution) has no default on
    purpose: it is rig-specific and silently guessing it would corrupt the
    translational-acceleration compensation.
    """

    dt: float                      # sample period, seconds
    N_drive: int                   # drive-encoder pulses per revolution
    gyro_bias: float = 0.0         # deg/s
    accel_bias_x: float = 0.0      # m/s^2
    accel_bias_y: float = 0.0      # m/s^2
    scale_poly_x: tuple = (0.0,) * 5   # coefficients for p^1..p^5, zero intercept
    scale_poly_y: tuple = (0.0,) * 5
    R: float = 0.135               # sensor distance from the rotation axis, m
    R_w: float = 0.0375            # wheel radius, m
    T_omega: float = 0.02557       # rate low-pass time constant, s
    T_v: float = 0.02045           # velocity low-pass time constant, s

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.N_drive < 1:
            raise ParameterError(f"N_drive must be >= 1, got {self.N_drive}")
        if not self.R > 0 or not self.R_w > 0:
            raise ParameterError("R and R_w must be positive")
        # Negative time constants are allowed (they occur in tuned results)
        # as long as the low-pass recurrence stays contractive.
        if not self.dt + self.T_omega > 0:
            raise ParameterError(f"dt + T_omega must be positive, got {self.dt + self.T_omega}")
        if not self.dt + self.T_v > 0:
            raise ParameterError(f"dt + T_v must be positive, got {self.dt + self.T_v}")
        if len(self.scale_poly_x) != 5 or len(self.scale_poly_y) != 5:
            raise ParameterError("scale polynomials take exactly 5 coefficients (degrees 1..5)")


@dataclass(frozen=True)
class CorrectionState:
    """Carry-over values between consecutive pipeline steps."""

    prev_phi_bar: float = 0.0        # degrees
    prev_rate_filtered: float = 0.0  # rad/s
    prev_v_filtered: float = 0.0     # m/s
    initialized: bool = False


@dataclass(frozen=True)
class CorrectedSample:
    """Output of one pipeline step, intermediates exposed for testing."""

    phi_bar: float        # corrected tilt, degrees, in (-180, 180]
    rate_bar: float       # corrected rate, deg/s
    a_c: float = 0.0      # centrifugal acceleration, m/s^2
    a_e: float = 0.0      # angular-acceleration term, m/s^2
    a_t: float = 0.0      # translational acceleration, m/s^2
    a_t_x: float = 0.0    # its projection on the x' axis, m/s^2
    a_t_y: float = 0.0    # its projection on the y' axis, m/s^2
    degenerate: bool = False     # arctangent was undefined, previous tilt reused
    enc_missing: bool = False    # encoder count was absent, zero assumed


def correct_gyro(rate_meas, gyro_bias):
    """Remove the constant gyro bias: measured rate minus bias, deg/s."""
    return rate_meas - gyro_bias


def scale_factor(p, poly):
    """Evaluate the zero-intercept error polynomial sum(c_i * p**i, i=1..5)."""
    # Horner on p * (c1 + p*(c2 + ...)) keeps the zero intercept structural.
    acc = 0.0
    for c in reversed(poly):
        acc = acc * p + c
    return acc * p


def correct_accel(a_meas, bias, poly):
    """Remove bias and scale-factor distortion from one accelerometer axis.

    The polynomial argument is the bias-corrected measurement, matching the
    convention under which the polynomials are calibrated.
    """
    p = a_meas - bias
    return p - scale_factor(p, poly)


def lowpass_step(x, y_prev, T, dt):
    """One step of the first-order discrete low-pass (x*dt + y_prev*T)/(dt + T).

    T = 0 passes the input through.  Negative T is accepted while dt + T > 0;
    the recurrence is then still a contraction (|T/(dt+T)| < 1).
    """
    if not dt + T > 0:
        raise ParameterError(f"low-pass needs dt + T > 0, got dt={dt}, T={T}")
    return (x * dt + y_prev * T) / (dt + T)


def discrete_derivative(y, y_prev, dt):
    """Backward-difference derivative (y - y_prev)/dt."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    return (y - y_prev) / dt


def encoder_velocity(n, N, R_w, dt):
    """Translational velocity from n pulses in one period: 2*pi*R_w*n/(N*dt)."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    return 2.0 * pi * R_w * n / (N * dt)


def motion_accelerations(rate_bar, state, params):
    """Centrifugal and angular-acceleration terms for the current rate.

    Returns ``(a_c, a_e, rate_filtered)`` where ``rate_filtered`` (rad/s) is
    the new low-pass output to be stored for the next step.  The centrifugal
    term uses the unfiltered converted rate; the low-pass only feeds the
    derivative that forms the angular-acceleration term.
    """
    rate_r = rate_bar * pi / 180.0
    rate_f = lowpass_step(rate_r, state.prev_rate_filtered, params.T_omega, params.dt)
    omega_dot = discrete_derivative(rate_f, state.prev_rate_filtered, params.dt)
    a_c = rate_r * rate_r * params.R
    a_e = omega_dot * params.R
    return a_c, a_e, rate_f


def corrected_tilt(ax_bar, ay_bar, a_e, a_c, a_t_x, a_t_y):
    """Tilt from the compensated acceleration components, degrees.

    Quadrant-aware arctangent of (ax_bar + a_e + a_t_x) over
    (ay_bar + a_c - a_t_y); result in (-180, 180].  Raises
    :class:`DegenerateTiltError` when both arguments are zero so the caller
    can substitute the previous tilt and keep the stream length intact.
    """
    num = ax_bar + a_e + a_t_x
    den = ay_bar + a_c - a_t_y
    if num == 0.0 and den == 0.0:
        raise DegenerateTiltError("both arctangent arguments are zero")
    phi = degrees(atan2(num, den))
    if phi <= -180.0:
        phi += 360.0
    return phi


def motion_terms(rate_bar, enc_count, state, params):
    """All motion-interference terms for one initialised step.

    Returns ``(a_c, a_e, a_t, a_t_x, a_t_y, rate_filtered, v_filtered)``.
    Shared by :func:`correction_pipeline_step` and by the simulator's shadow
    chain so that both reconstruct byte-identical interference.
    """
    v_t = encoder_velocity(enc_count, params.N_drive, params.R_w, params.dt)
    v_f = lowpass_step(v_t, state.prev_v_filtered, params.T_v, params.dt)
    a_t = discrete_derivative(v_f, state.prev_v_filtered, params.dt)
    prev_rad = state.prev_phi_bar * pi / 180.0
    a_t_x = a_t * cos(prev_rad)
    a_t_y = a_t * sin(prev_rad)
    a_c, a_e, rate_f = motion_accelerations(rate_bar, state, params)
    return a_c, a_e, a_t, a_t_x, a_t_y, rate_f, v_f


def raw_arctan_tilt(acc_x, acc_y):
    """Uncompensated tilt straight from the accelerometer pair, degrees."""
    phi = degrees(atan2(acc_x, acc_y))
    if phi <= -180.0:
        phi += 360.0
    return phi


def correction_pipeline_step(raw, params, state):
    """Run one raw sample through the full correction chain.

    Returns ``(CorrectedSample, CorrectionState)``.  The first sample
    initialises the chain: the stored tilt comes from the raw arctangent of
    the accelerations, the rate low-pass from the first corrected rate, and
    the velocity low-pass from zero.
    """
    rate_bar = correct_gyro(raw.gyro_dps, params.gyro_bias)
    ax_bar = correct_accel(raw.acc_x_mps2, params.accel_bias_x, params.scale_poly_x)
    ay_bar = correct_accel(raw.acc_y_mps2, params.accel_bias_y, params.scale_poly_y)

    if not state.initialized:
        rate_f = rate_bar * pi / 180.0
        phi0 = raw_arctan_tilt(raw.acc_x_mps2, raw.acc_y_mps2)
        out = CorrectedSample(phi_bar=phi0, rate_bar=rate_bar,
                              enc_missing=getattr(raw, "enc_missing", False))
        new_state = CorrectionState(prev_phi_bar=phi0, prev_rate_filtered=rate_f,
                                    prev_v_filtered=0.0, initialized=True)
        return out, new_state

    enc_missing = bool(getattr(raw, "enc_missing", False))
    n = 0 if enc_missing else raw.enc_count
    a_c, a_e, a_t, a_t_x, a_t_y, rate_f, v_f = motion_terms(rate_bar, n, state, params)

    degenerate = False
    try:
        phi_bar = corrected_tilt(ax_bar, ay_bar, a_e, a_c, a_t_x, a_t_y)
    except DegenerateTiltError:
        phi_bar = state.prev_phi_bar
        degenerate = True

    out = CorrectedSample(phi_bar=phi_bar, rate_bar=rate_bar, a_c=a_c, a_e=a_e,
                          a_t=a_t, a_t_x=a_t_x, a_t_y=a_t_y,
                          degenerate=degenerate, enc_missing=enc_missing)
    new_state = replace(state, prev_phi_bar=phi_bar, prev_rate_filtered=rate_f,
                        prev_v_filtered=v_f)
    return out, new_state


def run_correction(log, params, state: Optional[CorrectionState] = None):
    """Run the pipeline over a whole log, returning a list of CorrectedSample."""
    if state is None:
        state = CorrectionState()
    out = []
    for raw in log:
        cs, state = correction_pipeline_step(raw, params, state)
        out.append(cs)
    return out


def run_correction_arrays(log, params):
    """Fast whole-log correction; returns ``(phi_bar, rate_bar)`` ndarrays.

    Arithmetic is step-for-step identical to :func:`correction_pipeline_step`
    (same helpers, same order); this path just skips the per-sample objects,
    which matters inside tuning loops.  ``log`` needs array attributes like
    :class:`tiltkit.logio.RawLog`.
    """
    import numpy as np

    gyro = log.gyro_dps
    acc_x = log.acc_x_mps2
    acc_y = log.acc_y_mps2
    enc = log.enc_count
    enc_missing = log.enc_missing
    n = len(gyro)
    if n == 0:
        return np.empty(0), np.empty(0)

    phi_out = np.empty(n)
    rate_out = np.empty(n)

    dt = params.dt
    bias = params.gyro_bias
    bx, by = params.accel_bias_x, params.accel_bias_y
    poly_x, poly_y = params.scale_poly_x, params.scale_poly_y

    rate_bar = gyro[0] - bias
    prev_phi = raw_arctan_tilt(acc_x[0], acc_y[0])
    prev_rf = rate_bar * pi / 180.0
    prev_vf = 0.0
    phi_out[0] = prev_phi
    rate_out[0] = rate_bar

    for k in range(1, n):
        rate_bar = correct_gyro(gyro[k], bias)
        ax_bar = correct_accel(acc_x[k], bx, poly_x)
        ay_bar = correct_accel(acc_y[k], by, poly_y)

        n_pulses = 0 if enc_missing[k] else enc[k]
        v_t = encoder_velocity(n_pulses, params.N_drive, params.R_w, dt)
        v_f = lowpass_step(v_t, prev_vf, params.T_v, dt)
        a_t = discrete_derivative(v_f, prev_vf, dt)
        prev_rad = prev_phi * pi / 180.0
        a_t_x = a_t * cos(prev_rad)
        a_t_y = a_t * sin(prev_rad)

        rate_r = rate_bar * pi / 180.0
        rate_f = lowpass_step(rate_r, prev_rf, params.T_omega, dt)
        omega_dot = discrete_derivative(rate_f, prev_rf, dt)
        a_c = rate_r * rate_r * params.R
        a_e = omega_dot * params.R

        try:
            phi = corrected_tilt(ax_bar, ay_bar, a_e, a_c, a_t_x, a_t_y)
        except DegenerateTiltError:
            phi = prev_phi

        phi_out[k] = phi
        rate_out[k] = rate_bar
        prev_phi = phi
        prev_rf = rate_f
        prev_vf = v_f

    return phi_out, rate_out
