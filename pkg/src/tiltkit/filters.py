"""Discrete linear tilt filters in the unified gain form.

Every variant is expressed as

    x_hat(k) = [A - KCA] x_hat(k-1) + [B - KCB] u(k-1) + K y_bar(k)

with variant-specific A, B, C, K.  Fixed-gain variants:

``wob``            two states [phi, phi_dot], measurements [phi_bar,
                   rate_bar], gains diag(alpha, beta).
``wb``             two states [phi, gyro-bias], rate input, tilt
                   measurement, gains [alpha, beta].
``abtg``           like ``wob`` but with the full 2x2 gain matrix
                   [[alpha, theta*dt], [beta/dt, gamma]].
``wa_a``/``wa_b``  three states [phi, phi_dot, phi_ddot]; the acceleration
                   is corrected from the tilt residual (a: gain theta/dt^2)
                   or the rate residual (b: gain theta/dt).
``complementary``  one state, current-sample inputs [phi_bar, rate_bar],
                   coefficients T_c/(dt+T_c) and dt/(dt+T_c); C = K = 0.

``kalman`` and ``kalman_star`` share the ``wb`` structure but recompute the
gain each step from the covariance recursion (identical algorithms, the
tags record whether the covariances came from noise analysis or from
optimisation).  Covariance prediction uses A P A^T + Q and P is
re-symmetrised after every update to suppress floating-point drift.

Stability of a spec is judged from the eigenvalues of [A - KCA]: strictly
stable when every magnitude is below 1 - 1e-9, marginal when the largest
magnitude sits within 1e-9 of one, unstable above 1 + 1e-9.  Eigenvalues
are computed in closed form (quadratic for 2x2, a Cardano/trigonometric
characteristic-cubic solver for 3x3).  For the kalman variants the check
runs the covariance recursion until the gain settles (tolerance 1e-12,
capped at 50000 iterations) and evaluates the error dynamics at that gain.

Specs are immutable and shareable; filter/Kalman states are single-owner
sequential values, so many (spec, log) pairs can be evaluated in parallel.
"""

from dataclasses import dataclass, field
from math import acos, cos, pi, sqrt
from typing import Optional

import numpy as np

from .errors import FilterConfigError, FilterDesignError, ParameterError

WOB = "wob"
WB = "wb"
ABTG = "abtg"
WA_A = "wa_a"
WA_B = "wa_b"
COMPLEMENTARY = "complementary"
KALMAN = "kalman"
KALMAN_STAR = "kalman_star"

FIXED_GAIN_VARIANTS = (WOB, WB, ABTG, WA_A, WA_B, COMPLEMENTARY)
KALMAN_VARIANTS = (KALMAN, KALMAN_STAR)
ALL_VARIANTS = FIXED_GAIN_VARIANTS + KALMAN_VARIANTS

_REQUIRED_PARAMS = {
    WOB: frozenset({"alpha", "beta"}),
    WB: frozenset({"alpha", "beta"}),
    ABTG: frozenset({"alpha", "beta", "theta", "gamma"}),
    WA_A: frozenset({"alpha", "beta", "theta"}),
    WA_B: frozenset({"alpha", "beta", "theta"}),
    COMPLEMENTARY: frozenset({"T_c"}),
    KALMAN: frozenset({"q1", "q2", "r"}),
    KALMAN_STAR: frozenset({"q1", "q2", "r"}),
}
_OPTIONAL_PARAMS = {
    KALMAN: frozenset({"alpha0", "beta0"}),
    KALMAN_STAR: frozenset({"alpha0", "beta0"}),
}

_STABILITY_TOL = 1e-9
_RICCATI_TOL = 1e-12
_RICCATI_MAX_ITER = 50_000
_INIT_P_MARGIN = 1e-9


def canonical_variant(name):
    """Normalise a variant name ('WA-a', 'kalman*', ...) to its tag."""
    tag = str(name).strip().lower().replace("-", "_").replace("*", "_star")
    if tag == "kalman_star_star":
        tag = "kalman_star"
    if tag not in ALL_VARIANTS:
        raise FilterConfigError(f"unknown filter variant {name!r}; "
                                f"choose from {', '.join(ALL_VARIANTS)}")
    return tag


@dataclass(frozen=True)
class FilterSpec:
    """Matrices and metadata of one filter variant at one sample time."""

    variant: str
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: Optional[np.ndarray]
    dt: float
    params: dict = field(default_factory=dict)
    state_labels: tuple = ()
    current_input: bool = False  # True when u is taken at sample k, not k-1

    @property
    def n_states(self):
        return self.A.shape[0]


@dataclass
class FilterState:
    """State vector of a fixed-gain filter; component 0 is the tilt estimate."""

    x_hat: np.ndarray


@dataclass
class KalmanState:
    """State, covariance and noise model of the time-varying filter."""

    x_hat: np.ndarray          # [phi_hat (deg), bias_hat (deg/s)]
    P: np.ndarray              # 2x2 estimate covariance
    Q: np.ndarray              # 2x2 process covariance, diag(q1*dt, q2)
    r: float                   # scalar measurement variance
    K_current: Optional[np.ndarray] = None  # last gain, 2-vector

    def __post_init__(self):
        if self.r < 0:
            raise ParameterError("measurement variance r must be >= 0")
        if self.Q[0, 0] < 0 or self.Q[1, 1] < 0:
            raise ParameterError("process covariances must be >= 0")


def make_filter(variant, params, dt):
    """Build the :class:`FilterSpec` of a variant from its named scalars.

    Raises :class:`FilterConfigError` when the parameter set does not match
    the variant (each variant's set is part of the error message).
    """
    variant = canonical_variant(variant)
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    required = _REQUIRED_PARAMS[variant]
    optional = _OPTIONAL_PARAMS.get(variant, frozenset())
    given = frozenset(params)
    if not (required <= given <= required | optional):
        raise FilterConfigError(
            f"variant {variant} takes parameters {sorted(required)}"
            + (f" (optional: {sorted(optional)})" if optional else "")
            + f", got {sorted(given)}")

    p = dict(params)
    if variant == WOB:
        A = np.array([[1.0, dt], [0.0, 1.0]])
        B = np.zeros((2, 0))
        C = np.eye(2)
        K = np.array([[p["alpha"], 0.0], [0.0, p["beta"]]])
        labels = ("phi", "phi_dot")
    elif variant == WB:
        A = np.array([[1.0, -dt], [0.0, 1.0]])
        B = np.array([[dt], [0.0]])
        C = np.array([[1.0, 0.0]])
        K = np.array([[p["alpha"]], [p["beta"]]])
        labels = ("phi", "bias")
    elif variant == ABTG:
        A = np.array([[1.0, dt], [0.0, 1.0]])
        B = np.zeros((2, 0))
        C = np.eye(2)
        K = np.array([[p["alpha"], p["theta"] * dt],
                      [p["beta"] / dt, p["gamma"]]])
        labels = ("phi", "phi_dot")
    elif variant in (WA_A, WA_B):
        A = np.array([[1.0, dt, dt * dt / 2.0],
                      [0.0, 1.0, dt],
                      [0.0, 0.0, 1.0]])
        B = np.zeros((3, 0))
        C = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        if variant == WA_A:
            K = np.array([[p["alpha"], 0.0],
                          [0.0, p["beta"]],
                          [p["theta"] / (dt * dt), 0.0]])
        else:
            K = np.array([[p["alpha"], 0.0],
                          [0.0, p["beta"]],
                          [0.0, p["theta"] / dt]])
        labels = ("phi", "phi_dot", "phi_ddot")
    elif variant == COMPLEMENTARY:
        T_c = p["T_c"]
        if not dt + T_c > 0:
            raise FilterConfigError(f"complementary filter needs dt + T_c > 0, "
                                    f"got dt={dt}, T_c={T_c}")
        den = dt + T_c
        A = np.array([[T_c / den]])
        B = np.array([[dt / den, T_c * dt / den]])
        C = np.zeros((1, 1))
        K = np.zeros((1, 1))
        labels = ("phi",)
        return FilterSpec(variant, A, B, C, K, dt, p, labels, current_input=True)
    else:  # kalman variants share the wb structure; K is produced per step
        if p["q1"] < 0 or p["q2"] < 0 or p["r"] < 0:
            raise FilterConfigError("q1, q2 and r must be >= 0")
        A = np.array([[1.0, -dt], [0.0, 1.0]])
        B = np.array([[dt], [0.0]])
        C = np.array([[1.0, 0.0]])
        return FilterSpec(variant, A, B, C, None, dt, p, ("phi", "bias"))

    return FilterSpec(variant, A, B, C, K, dt, p, labels)


def filter_step(spec, state, u=None, y_bar=None):
    """Advance a fixed-gain filter one sample.

    ``u`` is the input vector (previous sample, except for the
    complementary variant which takes the current one) and ``y_bar`` the
    measurement vector at the current sample.  Returns a new FilterState.
    """
    if spec.variant in KALMAN_VARIANTS:
        raise FilterConfigError("time-varying specs advance through kalman_step")
    x = np.asarray(state.x_hat, dtype=float)
    if x.shape != (spec.n_states,):
        raise ParameterError(f"state has shape {x.shape}, spec wants ({spec.n_states},)")

    K, C, A, B = spec.K, spec.C, spec.A, spec.B
    M = A - K @ C @ A
    x_new = M @ x

    if B.shape[1]:
        u_vec = np.atleast_1d(np.asarray(u, dtype=float))
        if u_vec.shape != (B.shape[1],):
            raise ParameterError(f"input has shape {u_vec.shape}, spec wants ({B.shape[1]},)")
        x_new = x_new + (B - K @ C @ B) @ u_vec
    elif u is not None and np.any(np.asarray(u)):
        raise ParameterError(f"variant {spec.variant} takes no input")

    if np.any(K):
        y_vec = np.atleast_1d(np.asarray(y_bar, dtype=float))
        if y_vec.shape != (K.shape[1],):
            raise ParameterError(f"measurement has shape {y_vec.shape}, "
                                 f"spec wants ({K.shape[1]},)")
        x_new = x_new + K @ y_vec

    return FilterState(x_hat=x_new)


def make_kalman_state(spec, phi0=0.0, rate_bias0=0.0, P0=None):
    """Initial :class:`KalmanState` for a kalman-variant spec.

    When ``P0`` is not given it comes from :func:`kalman_init_P` if the spec
    carries ``alpha0``/``beta0`` (first gain matches those values), else it
    falls back to the identity.
    """
    if spec.variant not in KALMAN_VARIANTS:
        raise FilterConfigError(f"{spec.variant} is not a kalman variant")
    q1, q2, r = spec.params["q1"], spec.params["q2"], spec.params["r"]
    Q = np.diag([q1 * spec.dt, q2])
    if P0 is None:
        if "alpha0" in spec.params:
            P0 = kalman_init_P(spec.params["alpha0"], spec.params.get("beta0", 0.0),
                               Q, r, spec.dt)
        else:
            P0 = np.eye(2)
    return KalmanState(x_hat=np.array([phi0, rate_bias0], dtype=float),
                       P=np.asarray(P0, dtype=float).copy(), Q=Q, r=float(r))


def kalman_step(ks, u, y_bar, dt):
    """One predict/correct cycle of the time-varying filter.

    ``u`` is the corrected rate at the previous sample (deg/s), ``y_bar``
    the corrected tilt at the current one (deg).  Returns a new state; the
    gain that produced it is stored in ``K_current``.
    """
    A = np.array([[1.0, -dt], [0.0, 1.0]])
    B = np.array([dt, 0.0])
    x_pred = A @ ks.x_hat + B * u
    P_pred = A @ ks.P @ A.T + ks.Q
    s = P_pred[0, 0] + ks.r
    if s == 0.0:
        raise FilterDesignError("singular innovation covariance (C P C^T + r = 0)")
    K = P_pred[:, 0] / s
    x_new = x_pred + K * (y_bar - x_pred[0])
    P_new = P_pred - np.outer(K, P_pred[0, :])
    P_new = (P_new + P_new.T) / 2.0
    return KalmanState(x_hat=x_new, P=P_new, Q=ks.Q, r=ks.r, K_current=K)


def kalman_init_P(alpha, beta, Q, r, dt):
    """Initial covariance whose first computed gain equals [alpha, beta].

    Inverts one predict/gain cycle: the predicted covariance entries that
    the gain formula sees are fixed by (alpha, beta, r); the free (2,2)
    entry is set to the smallest value keeping P0 positive semidefinite,
    plus a fixed 1e-9 margin.  Raises :class:`FilterDesignError` when no
    PSD P0 can produce the requested gains.
    """
    if not 0 <= alpha < 1:
        raise FilterDesignError(f"alpha must be in [0, 1), got {alpha}")
    Q = np.asarray(Q, dtype=float)
    p_pred_11 = r * alpha / (1.0 - alpha)
    c2 = beta * r / (1.0 - alpha)
    denom = p_pred_11 - Q[0, 0]
    if beta == 0.0:
        s_min = 0.0
    else:
        if denom <= 0.0:
            raise FilterDesignError(
                f"gains (alpha={alpha}, beta={beta}) infeasible: need "
                f"r*alpha/(1-alpha) > q1*dt, got {p_pred_11} <= {Q[0, 0]}")
        s_min = c2 * c2 / denom
    s = s_min + _INIT_P_MARGIN
    p12 = c2 + dt * s
    p11 = p_pred_11 + 2.0 * dt * c2 - Q[0, 0] + dt * dt * s
    if p11 < 0.0:
        raise FilterDesignError(
            f"gains (alpha={alpha}, beta={beta}) infeasible: q1*dt exceeds "
            f"the implied predicted variance")
    P0 = np.array([[p11, p12], [p12, s]])
    if np.linalg.eigvalsh(P0)[0] < -1e-12 * max(1.0, p11, s):
        raise FilterDesignError("requested gains produced an indefinite P0")
    return P0


def _eig_closed_form(M):
    """Eigenvalues of a 1x1, 2x2 or 3x3 matrix without an iterative solver."""
    n = M.shape[0]
    if n == 1:
        return (complex(M[0, 0]),)
    if n == 2:
        tr = M[0, 0] + M[1, 1]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        half = tr / 2.0
        disc = half * half - det
        if disc >= 0.0:
            root = sqrt(disc)
            return (complex(half + root), complex(half - root))
        root = sqrt(-disc)
        return (complex(half, root), complex(half, -root))
    if n == 3:
        return _eig_cubic(M)
    raise ParameterError(f"stability check supports 1x1..3x3, got {n}x{n}")


def _cbrt(x):
    return np.copysign(abs(x) ** (1.0 / 3.0), x)


def _eig_cubic(M):
    """Roots of the 3x3 characteristic polynomial via Cardano/trigonometric,
    finished with Newton steps to recover accuracy near multiple roots."""
    a = -(M[0, 0] + M[1, 1] + M[2, 2])
    b = (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
         + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
         + M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    c = -float(np.linalg.det(M))
    # depressed cubic y^3 + p y + q with lambda = y - a/3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p == 0.0 and q == 0.0:
        roots = [complex(shift)] * 3
    elif disc > 0.0:
        u = _cbrt(-q / 2.0 + sqrt(disc))
        v = _cbrt(-q / 2.0 - sqrt(disc))
        y1 = u + v
        re = -y1 / 2.0
        im = sqrt(3.0) / 2.0 * (u - v)
        roots = [complex(y1 + shift), complex(re + shift, im), complex(re + shift, -im)]
    else:
        # three real roots, trigonometric form
        m = 2.0 * sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = acos(arg)
        roots = [complex(m * cos((theta - 2.0 * pi * k) / 3.0) + shift)
                 for k in range(3)]
    return tuple(_newton_polish(z, a, b, c) for z in roots)


def _newton_polish(z, a, b, c, steps=3):
    for _ in range(steps):
        f = ((z + a) * z + b) * z + c
        df = (3.0 * z + 2.0 * a) * z + b
        if df == 0:
            break
        step = f / df
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    if abs(z.imag) < 1e-14 * max(1.0, abs(z.real)):
        z = complex(z.real)
    return z


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues of the error dynamics [A - KCA] and their verdict."""

    eigenvalues: tuple
    magnitudes: tuple
    classification: str  # "stable" | "marginal" | "unstable"
    gain: Optional[tuple] = None  # converged gain, kalman variants only

    @property
    def max_magnitude(self):
        return max(self.magnitudes)

    @property
    def stable(self):
        return self.classification == "stable"

    @property
    def marginal(self):
        return self.classification == "marginal"


def _classify(magnitudes):
    m = max(magnitudes)
    if m > 1.0 + _STABILITY_TOL:
        return "unstable"
    if m >= 1.0 - _STABILITY_TOL:
        return "marginal"
    return "stable"


def steady_kalman_gain(spec, P0=None, tol=_RICCATI_TOL, max_iter=_RICCATI_MAX_ITER):
    """Iterate the covariance recursion until the gain settles.

    Returns ``(k1, k2)``.  With q2 = 0 the bias gain decays towards zero
    like 1/k; the returned value is the numerically converged truncation
    (documented: change below ``tol`` or ``max_iter`` reached).
    """
    q1, q2, r = spec.params["q1"], spec.params["q2"], spec.params["r"]
    dt = spec.dt
    if P0 is None:
        if "alpha0" in spec.params:
            P0 = kalman_init_P(spec.params["alpha0"], spec.params.get("beta0", 0.0),
                               np.diag([q1 * dt, q2]), r, dt)
        else:
            P0 = np.eye(2)
    p11, p12, p22 = float(P0[0, 0]), float(P0[0, 1]), float(P0[1, 1])
    k1 = k2 = float("inf")
    for _ in range(max_iter):
        a11 = p11 - 2.0 * dt * p12 + dt * dt * p22 + q1 * dt
        a12 = p12 - dt * p22
        a22 = p22 + q2
        s = a11 + r
        if s == 0.0:
            raise FilterDesignError("singular innovation covariance during convergence")
        nk1 = a11 / s
        nk2 = a12 / s
        p11 = (1.0 - nk1) * a11
        p12 = a12 * r / s  # equals both (1-k1)*a12 and a12 - k2*a11
        p22 = a22 - nk2 * a12
        if abs(nk1 - k1) < tol and abs(nk2 - k2) < tol:
            return nk1, nk2
        k1, k2 = nk1, nk2
    return k1, k2


def check_stability(spec, P0=None):
    """Eigenvalue stability of a spec's error dynamics.

    Fixed-gain variants evaluate [A - KCA] directly; kalman variants first
    converge the covariance recursion (see :func:`steady_kalman_gain`) and
    evaluate the error dynamics at that gain.
    """
    if spec.variant in KALMAN_VARIANTS:
        k1, k2 = steady_kalman_gain(spec, P0=P0)
        K = np.array([[k1], [k2]])
        M = spec.A - K @ spec.C @ spec.A
        eig = _eig_closed_form(M)
        mags = tuple(abs(v) for v in eig)
        return StabilityReport(eig, mags, _classify(mags), gain=(k1, k2))
    M = spec.A - spec.K @ spec.C @ spec.A
    eig = _eig_closed_form(M)
    mags = tuple(abs(v) for v in eig)
    return StabilityReport(eig, mags, _classify(mags))


def default_initial_state(spec, first_sample):
    """Initial filter state: tilt and rate from the first corrected sample,
    acceleration and bias estimates zero."""
    phi0 = first_sample.phi_bar
    rate0 = first_sample.rate_bar
    if spec.variant in (WOB, ABTG):
        return FilterState(np.array([phi0, rate0]))
    if spec.variant in (WA_A, WA_B):
        return FilterState(np.array([phi0, rate0, 0.0]))
    if spec.variant == COMPLEMENTARY:
        return FilterState(np.array([phi0]))
    # wb and the kalman variants estimate the residual bias of the already
    # corrected rate, so it starts at zero; feeding raw rates with the
    # calibrated bias as the start value gives the identical tilt stream.
    return FilterState(np.array([phi0, 0.0]))


def run_filter(spec, corrected, initial=None):
    """Run a spec over a corrected stream; returns the per-sample tilt
    estimates as an ndarray.

    The loops are unrolled per variant for speed (tuning evaluates this
    hot); they are algebraically identical to iterating
    :func:`filter_step` / :func:`kalman_step`.
    """
    n = len(corrected)
    if n == 0:
        raise ParameterError("corrected stream is empty")
    phi = np.fromiter((c.phi_bar for c in corrected), dtype=float, count=n)
    rate = np.fromiter((c.rate_bar for c in corrected), dtype=float, count=n)
    return run_filter_arrays(spec, phi, rate, initial)


def run_filter_arrays(spec, phi_bar, rate_bar, initial=None):
    """Like :func:`run_filter` but on plain phi_bar/rate_bar arrays."""
    n = len(phi_bar)
    if n == 0:
        raise ParameterError("corrected stream is empty")
    if initial is None:
        x0 = _default_x0(spec, float(phi_bar[0]), float(rate_bar[0]))
    else:
        x0 = np.asarray(initial.x_hat, dtype=float)
        if x0.shape != (spec.n_states,):
            raise ParameterError(f"initial state has shape {x0.shape}, "
                                 f"spec wants ({spec.n_states},)")

    out = np.empty(n)
    out[0] = x0[0]

    if spec.variant in KALMAN_VARIANTS:
        return _run_kalman(spec, phi_bar, rate_bar, x0, out)

    M = spec.A - spec.K @ spec.C @ spec.A
    if spec.variant == COMPLEMENTARY:
        a = float(M[0, 0])
        b1, b2 = float(spec.B[0, 0]), float(spec.B[0, 1])
        x = float(x0[0])
        for k in range(1, n):
            x = a * x + b1 * phi_bar[k] + b2 * rate_bar[k]
            out[k] = x
        return out

    if spec.variant == WB:
        N = spec.B - spec.K @ spec.C @ spec.B
        m11, m12 = float(M[0, 0]), float(M[0, 1])
        m21, m22 = float(M[1, 0]), float(M[1, 1])
        n1, n2 = float(N[0, 0]), float(N[1, 0])
        k1, k2 = float(spec.K[0, 0]), float(spec.K[1, 0])
        x1, x2 = float(x0[0]), float(x0[1])
        for k in range(1, n):
            u = rate_bar[k - 1]
            y = phi_bar[k]
            x1, x2 = (m11 * x1 + m12 * x2 + n1 * u + k1 * y,
                      m21 * x1 + m22 * x2 + n2 * u + k2 * y)
            out[k] = x1
        return out

    if spec.variant in (WOB, ABTG):
        m11, m12 = float(M[0, 0]), float(M[0, 1])
        m21, m22 = float(M[1, 0]), float(M[1, 1])
        k11, k12 = float(spec.K[0, 0]), float(spec.K[0, 1])
        k21, k22 = float(spec.K[1, 0]), float(spec.K[1, 1])
        x1, x2 = float(x0[0]), float(x0[1])
        for k in range(1, n):
            y1 = phi_bar[k]
            y2 = rate_bar[k]
            x1, x2 = (m11 * x1 + m12 * x2 + k11 * y1 + k12 * y2,
                      m21 * x1 + m22 * x2 + k21 * y1 + k22 * y2)
            out[k] = x1
        return out

    # wa_a / wa_b
    m = [[float(M[i, j]) for j in range(3)] for i in range(3)]
    km = [[float(spec.K[i, j]) for j in range(2)] for i in range(3)]
    x1, x2, x3 = float(x0[0]), float(x0[1]), float(x0[2])
    for k in range(1, n):
        y1 = phi_bar[k]
        y2 = rate_bar[k]
        x1, x2, x3 = (
            m[0][0] * x1 + m[0][1] * x2 + m[0][2] * x3 + km[0][0] * y1 + km[0][1] * y2,
            m[1][0] * x1 + m[1][1] * x2 + m[1][2] * x3 + km[1][0] * y1 + km[1][1] * y2,
            m[2][0] * x1 + m[2][1] * x2 + m[2][2] * x3 + km[2][0] * y1 + km[2][1] * y2,
        )
        out[k] = x1
    return out


def _default_x0(spec, phi0, rate0):
    if spec.variant in (WOB, ABTG):
        return np.array([phi0, rate0])
    if spec.variant in (WA_A, WA_B):
        return np.array([phi0, rate0, 0.0])
    if spec.variant == COMPLEMENTARY:
        return np.array([phi0])
    return np.array([phi0, 0.0])


def _run_kalman(spec, phi_bar, rate_bar, x0, out):
    q1, q2, r = spec.params["q1"], spec.params["q2"], spec.params["r"]
    dt = spec.dt
    if "alpha0" in spec.params:
        P0 = kalman_init_P(spec.params["alpha0"], spec.params.get("beta0", 0.0),
                           np.diag([q1 * dt, q2]), r, dt)
        p11, p12, p22 = float(P0[0, 0]), float(P0[0, 1]), float(P0[1, 1])
    else:
        p11, p12, p22 = 1.0, 0.0, 1.0
    q1dt = q1 * dt
    x1, x2 = float(x0[0]), float(x0[1])
    n = len(phi_bar)
    for k in range(1, n):
        # predict
        x1p = x1 - dt * x2 + dt * rate_bar[k - 1]
        a11 = p11 - 2.0 * dt * p12 + dt * dt * p22 + q1dt
        a12 = p12 - dt * p22
        a22 = p22 + q2
        s = a11 + r
        if s == 0.0:
            raise FilterDesignError(f"singular innovation covariance at sample {k}")
        k1 = a11 / s
        k2 = a12 / s
        resid = phi_bar[k] - x1p
        x1 = x1p + k1 * resid
        x2 = x2 + k2 * resid
        p11 = (1.0 - k1) * a11
        p12 = a12 * r / s
        p22 = a22 - k2 * a12
        out[k] = x1
    return out
