"""Compiled integration loop.

Mirrors ClosedLoop.evaluate / advance / barrier_check in simulator.py
operation for operation; the two engines are cross-checked in the tests.
All configuration arrives as flat arrays so the loop stays in nopython mode.
"""

import math

import numpy as np
from numba import njit

# flags
F_N, F_NONLINEAR, F_MODREF, F_BARRIER, F_SOFT, F_TRUTH, F_ABORT_MARGIN, F_TABLE = range(8)
# scalars
(
    S_MU,
    S_FM,
    S_MSQ,
    S_SIGN,
    S_GK,
    S_GL,
    S_GK1,
    S_MK,
    S_ML_LO,
    S_ML_HI,
    S_MK1,
    S_OFFSET,
    S_LTRUE,
    S_SOFT_FRAC,
) = range(14)

STATUS_OK, STATUS_BARRIER, STATUS_NONFINITE, STATUS_MARGIN = 0, 1, 2, 3

BARRIER_FLOOR = 1e-12
BAND = 1e-9

NL_CODES = {"tanh": 0, "sin": 1, "cos_minus_one": 2, "softsat": 3}


@njit(cache=True)
def _reference(t, sc, flags, amp, omega, phase, tab_t, tab_f):
    if flags[F_TABLE]:
        return np.interp(t, tab_t, tab_f)
    v = sc[S_OFFSET]
    for i in range(amp.shape[0]):
        v += amp[i] * math.sin(omega[i] * t + phase[i])
    return v


@njit(cache=True)
def _phi(X, codes):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        c = codes[i]
        x = X[i]
        if c == 0:
            out[i] = math.tanh(x)
        elif c == 1:
            out[i] = math.sin(x)
        elif c == 2:
            out[i] = math.cos(x) - 1.0
        else:
            out[i] = x / (1.0 + abs(x))
    return out


@njit(cache=True)
def _ball(theta, v, radius):
    norm_sq = theta.dot(theta)
    if norm_sq < (radius * (1.0 - BAND)) ** 2:
        return v
    radial = theta.dot(v)
    if radial <= 0.0:
        return v
    return v - theta * (radial / norm_sq)


@njit(cache=True)
def evaluate(t, z, out, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f):
    """Fill ``out`` with dz; returns (u, g, u_applied, margin, epe, f, mode, floor_hit, soft_hit, status)."""
    n = flags[F_N]
    X = z[:n]
    X_m = z[n : 2 * n]
    X_ms = z[2 * n : 3 * n]
    K_hat = z[3 * n : 4 * n]
    l_hat = z[4 * n]
    f = _reference(t, sc, flags, amp, omega, phase, tab_t, tab_f)

    fb = K_hat.dot(X)
    phi = np.zeros(n)
    if flags[F_NONLINEAR]:
        phi = _phi(X, codes)
        fb += z[4 * n + 1 :].dot(phi)
    u = fb + l_hat * f
    M_u = sc[S_MU]
    g = 0.0
    u_applied = u
    mode = 0
    if flags[F_MODREF]:
        if u >= M_u:
            g = (M_u - u) / l_hat
            u_applied = M_u
            mode = 1
        elif u <= -M_u:
            g = (-M_u - u) / l_hat
            u_applied = -M_u
            mode = -1
        E = X - X_ms
    else:
        E = X - X_m
    r = f + g

    M_sq = sc[S_MSQ]
    sign_l = sc[S_SIGN]
    epe = E.dot(P.dot(E))
    epb = E.dot(PBm)
    floor_hit = 0
    soft_hit = 0
    margin = M_u - (abs(fb) - l_hat * sign_l * sc[S_FM])
    if not math.isfinite(epe):
        return u, g, u_applied, margin, epe, f, mode, floor_hit, soft_hit, STATUS_NONFINITE
    if flags[F_BARRIER]:
        if flags[F_SOFT] and not epe < M_sq:
            scale = math.sqrt(sc[S_SOFT_FRAC] * M_sq / epe)
            epe = epe * scale * scale
            epb = epb * scale
            soft_hit = 1
        if not epe < M_sq:
            return u, g, u_applied, margin, epe, f, mode, floor_hit, soft_hit, STATUS_BARRIER
        denom = (M_sq - epe) ** 2
        if denom < BARRIER_FLOOR:
            denom = BARRIER_FLOOR
            floor_hit = 1
        mu = 2.0 * M_sq * epb * sign_l / denom
    else:
        mu = 2.0 * epb * sign_l

    out[:n] = A.dot(X) + b * u_applied
    if flags[F_NONLINEAR]:
        out[:n] += A1.dot(phi)
    out[n : 2 * n] = A_m.dot(X_m) + B_m * f
    out[2 * n : 3 * n] = A_m.dot(X_ms) + B_m * r
    out[3 * n : 4 * n] = _ball(K_hat, -sc[S_GK] * mu * X, sc[S_MK])

    drive = mu * r * l_hat
    a = abs(l_hat)
    if a <= sc[S_ML_LO] * (1.0 + BAND) and drive > 0.0:
        out[4 * n] = 0.0
    elif a >= sc[S_ML_HI] * (1.0 - BAND) and drive < 0.0:
        out[4 * n] = 0.0
    else:
        out[4 * n] = -sc[S_GL] * mu * r
    if flags[F_NONLINEAR]:
        out[4 * n + 1 :] = _ball(z[4 * n + 1 :], -sc[S_GK1] * mu * phi, sc[S_MK1])
    return u, g, u_applied, margin, epe, f, mode, floor_hit, soft_hit, STATUS_OK


@njit(cache=True)
def _project(z, flags, sc):
    n = flags[F_N]
    corrected = False
    K = z[3 * n : 4 * n]
    norm = math.sqrt(K.dot(K))
    if norm > sc[S_MK] * (1.0 + BAND):
        z[3 * n : 4 * n] = K * (sc[S_MK] / norm)
        corrected = True
    l_hat = z[4 * n]
    a = abs(l_hat)
    sign = sc[S_SIGN]
    if a < sc[S_ML_LO] * (1.0 - BAND) or np.sign(l_hat) != sign:
        z[4 * n] = sign * sc[S_ML_LO]
        corrected = True
    elif a > sc[S_ML_HI] * (1.0 + BAND):
        z[4 * n] = sign * sc[S_ML_HI]
        corrected = True
    if flags[F_NONLINEAR]:
        K1 = z[4 * n + 1 :]
        norm1 = math.sqrt(K1.dot(K1))
        if norm1 > sc[S_MK1] * (1.0 + BAND):
            z[4 * n + 1 :] = K1 * (sc[S_MK1] / norm1)
            corrected = True
    return corrected


@njit(cache=True)
def _lyapunov(z, epe, flags, sc, K_true, K1_true):
    n = flags[F_N]
    gamma = sc[S_SIGN] / sc[S_LTRUE]
    dK = z[3 * n : 4 * n] - K_true
    dl = z[4 * n] - sc[S_LTRUE]
    if flags[F_BARRIER]:
        head = epe / (sc[S_MSQ] - epe)
    else:
        head = epe
    V = head + gamma * dK.dot(dK) / (2.0 * sc[S_GK]) + gamma * dl * dl / (2.0 * sc[S_GL])
    if flags[F_NONLINEAR]:
        dK1 = z[4 * n + 1 :] - K1_true
        V += gamma * dK1.dot(dK1) / (2.0 * sc[S_GK1])
    return V


@njit(cache=True)
def integrate(z0, steps, h, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f, K_true, K1_true):
    N = steps + 1
    size = z0.shape[0]
    n = flags[F_N]
    Z = np.empty((N, size))
    rec = np.empty((N, 8))  # f, u, g, u_applied, margin, mode, barrier fraction, V
    floors = np.zeros(N, dtype=np.int64)
    renorm = np.zeros(N, dtype=np.int64)
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    z = z0.copy()
    count = 0
    status = STATUS_OK
    status_t = 0.0
    status_val = 0.0
    corrections = 0
    soft_hits = 0
    first_neg = -1
    M_sq = sc[S_MSQ]

    for k in range(N):
        t = k * h
        u, g, ua, margin, epe, f, mode, fl, sh, st = evaluate(
            t, z, k1, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f
        )
        if st != STATUS_OK:
            status, status_t, status_val = st, t, epe
            break
        Z[k] = z
        rec[k, 0] = f
        rec[k, 1] = u
        rec[k, 2] = g
        rec[k, 3] = ua
        rec[k, 4] = margin
        rec[k, 5] = mode
        rec[k, 6] = epe / M_sq
        rec[k, 7] = _lyapunov(z, epe, flags, sc, K_true, K1_true) if flags[F_TRUTH] else np.nan
        floors[k] += fl
        soft_hits += sh
        count = k + 1
        if margin < 0.0 and first_neg < 0:
            first_neg = k
            if flags[F_ABORT_MARGIN]:
                status, status_t, status_val = STATUS_MARGIN, t, margin
                break
        if k == steps:
            break

        r2 = evaluate(t + 0.5 * h, z + 0.5 * h * k1, k2, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f)
        if r2[9] != STATUS_OK:
            status, status_t, status_val = r2[9], t + 0.5 * h, r2[4]
            break
        r3 = evaluate(t + 0.5 * h, z + 0.5 * h * k2, k3, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f)
        if r3[9] != STATUS_OK:
            status, status_t, status_val = r3[9], t + 0.5 * h, r3[4]
            break
        r4 = evaluate(t + h, z + h * k3, k4, flags, sc, A, A_m, b, B_m, P, PBm, A1, codes, amp, omega, phase, tab_t, tab_f)
        if r4[9] != STATUS_OK:
            status, status_t, status_val = r4[9], t + h, r4[4]
            break
        floors[k] += r2[7] + r3[7] + r4[7]
        soft_hits += r2[8] + r3[8] + r4[8]
        z_next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z_next)):
            status, status_t = STATUS_NONFINITE, t + h
            break
        if _project(z_next, flags, sc):
            corrections += 1

        if flags[F_BARRIER]:
            if flags[F_MODREF]:
                E = z_next[:n] - z_next[2 * n : 3 * n]
                anchor = z_next[2 * n : 3 * n].copy()
            else:
                E = z_next[:n] - z_next[n : 2 * n]
                anchor = z_next[n : 2 * n].copy()
            epe_next = E.dot(P.dot(E))
            if not epe_next < M_sq:
                if not flags[F_SOFT]:
                    status, status_t, status_val = STATUS_BARRIER, t + h, epe_next
                    break
                z_next[:n] = anchor + E * math.sqrt(sc[S_SOFT_FRAC] * M_sq / epe_next)
                renorm[k + 1] = 1
        z = z_next

    return Z, rec, floors, renorm, count, status, status_t, status_val, corrections, soft_hits, first_neg
