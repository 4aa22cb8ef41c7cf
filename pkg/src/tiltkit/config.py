"""Flat key=value run configuration.

The format is intentionally plain text so that configs diff cleanly and
can be produced by anything::

    # comment
    dt_ms = 10
    N_drive = 1024
    variant = wb
    alpha = 0.00185
    beta = -0.00018

Floats serialise with ``repr`` so an echoed config re-parses to an equal
:class:`RunConfig`.  ``dt_ms`` and ``N_drive`` are required; the drive
encoder resolution is rig-specific and has no safe default.
"""

from dataclasses import dataclass, fields
from typing import Optional

from .correction import CorrectionParams
from .errors import ConfigError, ParseError
from .model import AccelErrorModel, GyroErrorModel
from .reference import (
    ACCEL_SATURATION_MPS2,
    GYRO_SATURATION_DPS,
    REF_ENCODER_PULSES_PER_REV,
)
from .tuning import OptimizerConfig

_FILTER_PARAM_KEYS = ("alpha", "beta", "theta", "gamma", "T_c", "q1", "q2", "r")


@dataclass
class RunConfig:
    """Everything a batch command needs, resolved and validated."""

    dt_ms: float
    N_drive: int
    seed: int = 0
    duration_s: float = 20.0
    profile: str = "dynamic"          # "zero" | "dynamic"

    gyro_bias_dps: float = 0.0
    gyro_noise_std_dps: float = 0.0
    gyro_saturation_dps: float = GYRO_SATURATION_DPS
    accel_bias_x_mps2: float = 0.0
    accel_bias_y_mps2: float = 0.0
    accel_noise_std_mps2: float = 0.0
    accel_saturation_mps2: float = ACCEL_SATURATION_MPS2
    poly_x_1: float = 0.0
    poly_x_2: float = 0.0
    poly_x_3: float = 0.0
    poly_x_4: float = 0.0
    poly_x_5: float = 0.0
    poly_y_1: float = 0.0
    poly_y_2: float = 0.0
    poly_y_3: float = 0.0
    poly_y_4: float = 0.0
    poly_y_5: float = 0.0

    R_m: float = 0.135
    Rw_m: float = 0.0375
    N_ref: int = REF_ENCODER_PULSES_PER_REV
    T_omega_s: float = 0.02557
    T_v_s: float = 0.02045

    variant: str = "wb"
    alpha: Optional[float] = None
    beta: Optional[float] = None
    theta: Optional[float] = None
    gamma: Optional[float] = None
    T_c: Optional[float] = None
    q1: Optional[float] = None
    q2: Optional[float] = None
    r: Optional[float] = None

    opt_max_iterations: int = 400
    opt_initial_scale: float = 1.0
    opt_tol_f: float = 1e-9
    opt_tol_x: float = 1e-7
    opt_restarts: int = 2

    @property
    def dt(self):
        return self.dt_ms / 1000.0

    def gyro_model(self):
        return GyroErrorModel(bias=self.gyro_bias_dps,
                              noise_std=self.gyro_noise_std_dps,
                              saturation=self.gyro_saturation_dps)

    def accel_model(self):
        return AccelErrorModel(
            bias_x=self.accel_bias_x_mps2, bias_y=self.accel_bias_y_mps2,
            scale_poly_x=self.scale_poly_x(), scale_poly_y=self.scale_poly_y(),
            noise_std=self.accel_noise_std_mps2,
            saturation=self.accel_saturation_mps2)

    def scale_poly_x(self):
        return (self.poly_x_1, self.poly_x_2, self.poly_x_3, self.poly_x_4, self.poly_x_5)

    def scale_poly_y(self):
        return (self.poly_y_1, self.poly_y_2, self.poly_y_3, self.poly_y_4, self.poly_y_5)

    def correction_params(self):
        return CorrectionParams(
            dt=self.dt, N_drive=self.N_drive, gyro_bias=self.gyro_bias_dps,
            accel_bias_x=self.accel_bias_x_mps2, accel_bias_y=self.accel_bias_y_mps2,
            scale_poly_x=self.scale_poly_x(), scale_poly_y=self.scale_poly_y(),
            R=self.R_m, R_w=self.Rw_m, T_omega=self.T_omega_s, T_v=self.T_v_s)

    def filter_params(self):
        """The parameter dict for the configured variant, or None if any of
        the variant's parameters is missing."""
        from .filters import canonical_variant
        variant = canonical_variant(self.variant)
        needed = {
            "wob": ("alpha", "beta"),
            "wb": ("alpha", "beta"),
            "abtg": ("alpha", "beta", "theta", "gamma"),
            "wa_a": ("alpha", "beta", "theta"),
            "wa_b": ("alpha", "beta", "theta"),
            "complementary": ("T_c",),
            "kalman": ("q1", "q2", "r"),
            "kalman_star": ("q1", "q2", "r"),
        }[variant]
        values = {name: getattr(self, name) for name in needed}
        if any(v is None for v in values.values()):
            return None
        return values

    def optimizer_config(self):
        return OptimizerConfig(max_iterations=self.opt_max_iterations,
                               initial_scale=self.opt_initial_scale,
                               tol_f=self.opt_tol_f, tol_x=self.opt_tol_x,
                               restarts=self.opt_restarts, seed=self.seed)

    def to_text(self):
        """Serialise as key=value lines; floats use repr for exact round-trip."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name}={text}")
        return "\n".join(lines) + "\n"


_INT_KEYS = {"N_drive", "N_ref", "seed", "opt_max_iterations", "opt_restarts"}
_STR_KEYS = {"variant", "profile"}


def parse_config_text(text):
    """Parse key=value text into a :class:`RunConfig`."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", line=line_no)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in known:
            raise ParseError(f"unknown configuration key {key!r}", line=line_no)
        try:
            if key in _STR_KEYS:
                values[key] = val
            elif key in _INT_KEYS:
                values[key] = int(val)
            else:
                values[key] = float(val)
        except ValueError:
            raise ParseError(f"bad value {val!r} for key {key!r}", line=line_no) from None
    missing = {"dt_ms", "N_drive"} - values.keys()
    if missing:
        raise ParseError(f"missing required keys: {', '.join(sorted(missing))}")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ParseError(f"bad configuration: {exc}") from None


def load_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def check_dt_matches(config, log):
    """Raise :class:`ConfigError` when the log's sample period disagrees
    with the configured one (relative tolerance 1e-6)."""
    log_dt = log.dt
    if abs(log_dt - config.dt) > 1e-6 * max(log_dt, config.dt):
        raise ConfigError(
            f"configured dt is {config.dt} s but the log is sampled at "
            f"{log_dt} s")
