"""Calibration and parameter optimisation by MSE minimisation.

All tuners share one derivative-free simplex search (Nelder-Mead, the same
family of algorithm the original rig tuning used), run as best-of-restarts
from seeded perturbations.  Objectives return ``inf`` outside their
feasible region (non-contractive low-pass constants, unstable filter
gains), which the simplex handles by reflecting away.

Determinism: every tuner is a pure function of (data, config); restart
perturbations come from a generator seeded by ``OptimizerConfig.seed``.
Objective evaluations are pure over immutable inputs, so candidates could
be evaluated concurrently; the simplex update itself is sequential.
"""

from dataclasses import dataclass, replace
from math import fsum, isfinite
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .analysis import mse
from .correction import run_correction_arrays
from .errors import (
    FilterConfigError,
    FilterDesignError,
    OptimizationFailure,
    ParameterError,
)
from .filters import (
    KALMAN_VARIANTS,
    canonical_variant,
    check_stability,
    make_filter,
    run_filter_arrays,
)


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the simplex search.

    ``initial_scale`` sets the per-coordinate simplex step: scale times
    |x0_i|, or scale/100 for coordinates that start at zero.  ``restarts``
    is the total number of passes; passes after the first start from a
    seeded perturbation of the best point so far and the best result wins.
    """

    max_iterations: int = 2000
    initial_scale: float = 1.0
    tol_f: float = 1e-12
    tol_x: float = 1e-10
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.tol_f > 0 or not self.tol_x > 0:
            raise ParameterError("tolerances must be positive")
        if not self.initial_scale > 0:
            raise ParameterError("initial_scale must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise ParameterError("max_iterations and restarts must be >= 1")


@dataclass
class OptResult:
    """Best point found by :func:`nelder_mead`."""

    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    passes: int


def _initial_simplex(x0, scale):
    n = len(x0)
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        step = scale * abs(x0[i]) if x0[i] != 0.0 else scale * 0.01
        sim[i + 1, i] += step
    return sim


def nelder_mead(objective, x0, cfg: Optional[OptimizerConfig] = None):
    """Minimise ``objective`` from ``x0`` with restarts; returns OptResult.

    Raises :class:`OptimizationFailure` when no trial start produces a
    finite objective value.
    """
    if cfg is None:
        cfg = OptimizerConfig()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    rng = np.random.default_rng(cfg.seed)

    best = None
    iterations = 0
    start = x0
    for _ in range(cfg.restarts):
        f0 = objective(start)
        if isfinite(f0):
            res = minimize(objective, start, method="Nelder-Mead", options={
                "initial_simplex": _initial_simplex(start, cfg.initial_scale),
                "maxiter": cfg.max_iterations,
                "maxfev": 10 * cfg.max_iterations * max(1, len(start)),
                "xatol": cfg.tol_x,
                "fatol": cfg.tol_f,
                "adaptive": False,
            })
            iterations += res.nit
            if best is None or res.fun < best.fun:
                best = OptResult(x=np.asarray(res.x, dtype=float), fun=float(res.fun),
                                 iterations=iterations, converged=bool(res.success),
                                 passes=0)
        anchor = x0 if best is None else best.x
        steps = np.array([cfg.initial_scale * (abs(v) if v != 0.0 else 0.01)
                          for v in anchor])
        start = anchor + rng.uniform(-0.5, 0.5, len(anchor)) * steps

    if best is None:
        raise OptimizationFailure("objective was non-finite at every trial start")
    best.iterations = iterations
    best.passes = cfg.restarts
    return best


@dataclass(frozen=True)
class BiasEstimate:
    """Mean of a static channel plus the spread diagnostics used to judge
    whether treating the bias as constant is reasonable."""

    bias: float
    minimum: float
    maximum: float
    window_means: tuple
    n_samples: int


def _channel_values(log, channel):
    if hasattr(log, channel) and not isinstance(log, (list, tuple)):
        return np.asarray(getattr(log, channel), dtype=float)
    arr = np.asarray(log, dtype=object)
    if arr.size and hasattr(arr.flat[0], channel):
        return np.array([getattr(s, channel) for s in log], dtype=float)
    return np.asarray(log, dtype=float)


def estimate_static_bias(log, channel="gyro_dps", window=100_000):
    """Bias of a channel recorded at rest: its compensated-sum mean.

    ``log`` may be a RawLog, a sequence of samples, or a plain array of
    channel values.  Diagnostics report the min, max and the means over
    consecutive ``window``-sample blocks (a single block when the log is
    shorter than one window), so a caller can reject drifting logs.
    """
    values = _channel_values(log, channel)
    if values.size == 0:
        raise ParameterError("cannot estimate a bias from an empty log")
    n = values.size
    bias = fsum(values) / n
    n_windows = n // window
    if n_windows == 0:
        means = (bias,)
    else:
        means = tuple(fsum(values[i * window:(i + 1) * window]) / window
                      for i in range(n_windows))
    return BiasEstimate(bias=bias, minimum=float(np.min(values)),
                        maximum=float(np.max(values)), window_means=means,
                        n_samples=n)


@dataclass
class ScaleFactorFit:
    """Recovered scale-factor polynomial and the MSE it achieves."""

    coefficients: tuple
    mse: float
    opt: OptResult


def fit_scale_factor(pairs, degree=5, cfg: Optional[OptimizerConfig] = None):
    """Fit the zero-intercept error polynomial from (p, a_ref) pairs.

    ``p`` is the bias-corrected measurement, ``a_ref`` the reference
    acceleration; the fit minimises the MSE between p - S(p) and a_ref.
    The simplex search is seeded at the linear least-squares solution (the
    objective is linear in the coefficients, so the seed already sits at
    the optimum and the search acts as a verification polish; with a poor
    seed alone the 5-D simplex cannot reliably reach coefficient-level
    accuracy).
    """
    arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                     dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParameterError("pairs must be a sequence of (p, a_ref) tuples")
    if not 1 <= degree <= 10:
        raise ParameterError(f"degree must be in 1..10, got {degree}")
    p = arr[:, 0]
    a_ref = arr[:, 1]
    if np.unique(p).size < degree + 1:
        raise ParameterError(
            f"need at least {degree + 1} distinct p values to fit degree {degree}")

    powers = np.vander(p, degree + 1, increasing=True)[:, 1:]  # p^1 .. p^degree
    target = p - a_ref

    def objective(c):
        resid = target - powers @ c
        return float(resid @ resid) / len(resid)

    c_seed, *_ = np.linalg.lstsq(powers, target, rcond=None)
    if cfg is None:
        cfg = OptimizerConfig(initial_scale=0.1, restarts=1)
    opt = nelder_mead(objective, c_seed, cfg)
    best = opt.x if opt.fun <= objective(c_seed) else c_seed
    return ScaleFactorFit(coefficients=tuple(float(v) for v in best),
                          mse=float(objective(best)), opt=opt)


def fit_scale_factor_degrees(pairs, degrees=range(1, 6), cfg=None):
    """Fit every degree in ``degrees`` and report all results."""
    return {d: fit_scale_factor(pairs, degree=d, cfg=cfg) for d in degrees}


@dataclass
class TimeConstantResult:
    T_omega: float
    T_v: float
    mse: float
    opt: OptResult


def tune_time_constants(log, ref_phi, params, cfg: Optional[OptimizerConfig] = None,
                        x0=None):
    """Pick the two low-pass constants minimising corrected-tilt MSE.

    The feasible region is dt + T > 0 for both constants; outside it the
    objective is inf.
    """
    ref = np.asarray(ref_phi, dtype=float)
    if len(ref) != len(log):
        raise ParameterError("log and reference must have equal length")

    def objective(T):
        t_omega, t_v = float(T[0]), float(T[1])
        if params.dt + t_omega <= 0 or params.dt + t_v <= 0:
            return float("inf")
        trial = replace(params, T_omega=t_omega, T_v=t_v)
        phi_bar, _ = run_correction_arrays(log, trial)
        return mse(ref, phi_bar)

    if x0 is None:
        x0 = (2.0 * params.dt, 2.0 * params.dt)
    if cfg is None:
        cfg = OptimizerConfig(initial_scale=1.0, restarts=2, tol_f=1e-10, tol_x=1e-8)
    opt = nelder_mead(objective, x0, cfg)
    return TimeConstantResult(T_omega=float(opt.x[0]), T_v=float(opt.x[1]),
                              mse=opt.fun, opt=opt)


@dataclass
class TuningResult:
    """Outcome of one filter tuning run."""

    variant: str
    dt: float
    parameters: dict
    training_mse: float
    verification_mse: float = float("nan")
    iterations: int = 0
    converged: bool = False
    stability_report: object = None

    def __post_init__(self):
        if self.training_mse < 0:
            raise ParameterError("training_mse cannot be negative")


PARAM_ORDER = {
    "wob": ("alpha", "beta"),
    "wb": ("alpha", "beta"),
    "abtg": ("alpha", "beta", "theta", "gamma"),
    "wa_a": ("alpha", "beta", "theta"),
    "wa_b": ("alpha", "beta", "theta"),
    "complementary": ("T_c",),
    "kalman": ("q1", "q2", "r"),
    "kalman_star": ("q1", "q2", "r"),
}

_DEFAULT_X0 = {
    "wob": (0.1, 0.1),
    "wb": (0.01, -0.0001),
    "abtg": (0.01, -0.0001, 0.5, 0.01),
    "wa_a": (0.01, 0.5, 0.001),
    "wa_b": (0.01, 0.5, 0.01),
    "complementary": (1.0,),
    "kalman": (0.01, 0.0001, 1.0),
    "kalman_star": (0.01, 0.0001, 1.0),
}


def tune_filter(variant, corrected, ref_phi, dt, cfg: Optional[OptimizerConfig] = None,
                x0=None, kalman_init_gains=None, verification=None):
    """Minimise estimate MSE over a variant's parameters.

    Fixed-gain variants search their named gains directly and reject
    candidates whose error dynamics have an eigenvalue beyond 1 + 1e-9; the
    kalman variants search (q1, q2, r) through a squared reparameterisation
    that keeps them nonnegative, optionally pinning the first gain to
    ``kalman_init_gains`` = (alpha0, beta0).

    ``corrected`` may be a sequence of CorrectedSample or a (phi_bar,
    rate_bar) array pair.  ``verification``, when given, is a second
    (corrected, ref_phi) set evaluated once at the tuned parameters.
    """
    variant = canonical_variant(variant)
    phi_bar, rate_bar = _stream_arrays(corrected)
    ref = np.asarray(ref_phi, dtype=float)
    if len(ref) != len(phi_bar):
        raise ParameterError("stream and reference must have equal length")

    names = PARAM_ORDER[variant]
    is_kalman = variant in KALMAN_VARIANTS

    def params_from_vector(vec):
        if is_kalman:
            p = {name: float(v) * float(v) for name, v in zip(names, vec)}
            if kalman_init_gains is not None:
                p["alpha0"], p["beta0"] = kalman_init_gains
            return p
        return {name: float(v) for name, v in zip(names, vec)}

    def objective(vec):
        p = params_from_vector(vec)
        try:
            spec = make_filter(variant, p, dt)
            if not is_kalman:
                report = check_stability(spec)
                if report.max_magnitude > 1.0 + 1e-9:
                    return float("inf")
            est = run_filter_arrays(spec, phi_bar, rate_bar)
        except (ParameterError, FilterConfigError, FilterDesignError):
            return float("inf")
        err = mse(ref, est)
        return err if isfinite(err) else float("inf")

    if x0 is None:
        x0 = _DEFAULT_X0[variant]
    vec0 = np.asarray(x0, dtype=float)
    if is_kalman:
        if np.any(vec0 < 0):
            raise ParameterError("kalman seeds (q1, q2, r) must be nonnegative")
        vec0 = np.sqrt(vec0)
    if cfg is None:
        cfg = OptimizerConfig(max_iterations=400, initial_scale=1.0,
                              tol_f=1e-9, tol_x=1e-7, restarts=2)

    try:
        opt = nelder_mead(objective, vec0, cfg)
    except OptimizationFailure as exc:
        raise OptimizationFailure(
            f"no stable {variant} parameters found from seed {list(x0)}",
            best=exc.best) from None

    params = params_from_vector(opt.x)
    spec = make_filter(variant, params, dt)
    report = None if is_kalman else check_stability(spec)
    result = TuningResult(variant=variant, dt=dt, parameters=params,
                          training_mse=opt.fun, iterations=opt.iterations,
                          converged=opt.converged, stability_report=report)
    if verification is not None:
        v_stream, v_ref = verification
        v_phi, v_rate = _stream_arrays(v_stream)
        est = run_filter_arrays(spec, v_phi, v_rate)
        result.verification_mse = mse(np.asarray(v_ref, dtype=float), est)
    return result


def _stream_arrays(corrected):
    if isinstance(corrected, tuple) and len(corrected) == 2:
        return (np.asarray(corrected[0], dtype=float),
                np.asarray(corrected[1], dtype=float))
    n = len(corrected)
    phi = np.fromiter((c.phi_bar for c in corrected), dtype=float, count=n)
    rate = np.fromiter((c.rate_bar for c in corrected), dtype=float, count=n)
    return phi, rate
