"""Independent reference implementations used as test oracles.

The two-phase functions write out each variant's predict/correct equations
directly; the textbook Kalman filter is a plain matrix-form implementation.
Both stay deliberately separate from the package code paths they check.
"""

import numpy as np


def two_phase_wob(x, y_phi, y_rate, dt, alpha, beta):
    phi_p = x[0] + x[1] * dt
    rate_p = x[1]
    return np.array([phi_p + alpha * (y_phi - phi_p),
                     rate_p + beta * (y_rate - rate_p)])


def two_phase_wb(x, u_prev, y_phi, dt, alpha, beta):
    phi_p = x[0] + (u_prev - x[1]) * dt
    b_p = x[1]
    resid = y_phi - phi_p
    return np.array([phi_p + alpha * resid, b_p + beta * resid])


def two_phase_abtg(x, y_phi, y_rate, dt, alpha, beta, theta, gamma):
    phi_p = x[0] + x[1] * dt
    rate_p = x[1]
    r1 = y_phi - phi_p
    r2 = y_rate - rate_p
    return np.array([phi_p + alpha * r1 + theta * dt * r2,
                     rate_p + (beta / dt) * r1 + gamma * r2])


def two_phase_wa(x, y_phi, y_rate, dt, alpha, beta, theta, from_rate):
    phi_p = x[0] + x[1] * dt + 0.5 * x[2] * dt * dt
    rate_p = x[1] + x[2] * dt
    acc_p = x[2]
    r1 = y_phi - phi_p
    r2 = y_rate - rate_p
    acc = acc_p + ((theta / dt) * r2 if from_rate else (theta / (dt * dt)) * r1)
    return np.array([phi_p + alpha * r1, rate_p + beta * r2, acc])


def two_phase_complementary(x, y_phi, y_rate, dt, T_c):
    den = dt + T_c
    return np.array([T_c / den * x[0] + dt / den * y_phi + T_c * dt / den * y_rate])


def textbook_kalman(phi_bar, rate_bar, dt, q1, q2, r, P0, x0):
    """Independent matrix-form reference filter (predict, gain, correct)."""
    A = np.array([[1.0, -dt], [0.0, 1.0]])
    B = np.array([dt, 0.0])
    C = np.array([[1.0, 0.0]])
    Q = np.diag([q1 * dt, q2])
    x = np.array(x0, dtype=float)
    P = np.array(P0, dtype=float)
    out = np.empty(len(phi_bar))
    out[0] = x[0]
    for k in range(1, len(phi_bar)):
        x = A @ x + B * rate_bar[k - 1]
        P = A @ P @ A.T + Q
        S = (C @ P @ C.T)[0, 0] + r
        K = (P @ C.T)[:, 0] / S
        x = x + K * (phi_bar[k] - x[0])
        P = (np.eye(2) - np.outer(K, C[0])) @ P
        P = (P + P.T) / 2.0
        out[k] = x[0]
    return out


