"""Dormand-Prince 5(4) stepping kernel for planar polynomial fields.

The right-hand side is a compiled monomial table (coefficient + integer
exponent arrays), so the whole accepted-step loop runs inside one jitted
function. LIENARD_LAB_DISABLE_JIT=1 executes the identical code as plain
Python (see _jit).

Status codes: 0 ok, 1 step-size underflow, 2 non-finite state, 3 step cap.
"""

import numpy as np

from ._jit import njit

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAXSTEPS = 3

# Dormand-Prince coefficients (FSAL pair, 5th order propagated)
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense-output weights (Hairer & Wanner, DOPRI5)
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)


@njit(cache=True)
def _eval_rhs(cx, nx, mx, cy, ny, my, x, y):
    dx = 0.0
    for i in range(cx.shape[0]):
        dx += cx[i] * x ** nx[i] * y ** mx[i]
    dy = 0.0
    for i in range(cy.shape[0]):
        dy += cy[i] * x ** ny[i] * y ** my[i]
    return dx, dy


@njit(cache=True)
def integrate_dp54(
    cx, nx, mx, cy, ny, my,
    x0, y0, t0, t_end,
    rtol, atol, max_step, max_steps,
    A, B, E, D,
):
    """Adaptive DP54 with PI step control and per-step dense coefficients.

    Returns (ts, ys, dense, n_steps, status): ts has n_steps+1 entries,
    ys is (n_steps+1, 2), dense is (n_steps, 5, 2) holding the quartic
    interpolant coefficients of each accepted step.
    """
    cap = 4096
    ts = np.empty(cap + 1)
    ys = np.empty((cap + 1, 2))
    dense = np.empty((cap, 5, 2))
    k = np.empty((7, 2))

    t = t0
    x = x0
    y = y0
    ts[0] = t
    ys[0, 0] = x
    ys[0, 1] = y
    fx, fy = _eval_rhs(cx, nx, mx, cy, ny, my, x, y)
    k[0, 0] = fx
    k[0, 1] = fy

    # initial step guess
    span = t_end - t0
    scale0 = atol + rtol * max(abs(x), abs(y))
    d0 = max(abs(fx), abs(fy))
    if d0 > 1e-10:
        h = min(0.01 * scale0 / d0 + 1e-12, 0.1 * span)
    else:
        h = 1e-3 * span
    if h > max_step:
        h = max_step
    if h <= 0.0:
        h = 1e-6 * span

    err_old = 1e-4
    n = 0
    status = STATUS_OK
    safety = 0.9
    alpha = 0.7 / 5.0
    beta = 0.4 / 5.0

    while t < t_end:
        if n >= max_steps:
            status = STATUS_MAXSTEPS
            break
        if t + h > t_end:
            h = t_end - t
        if h < 1e-14 * (abs(t) + 1.0):
            status = STATUS_UNDERFLOW
            break

        for s in range(1, 7):
            xs = x
            ysv = y
            for j in range(s):
                xs += h * A[s, j] * k[j, 0]
                ysv += h * A[s, j] * k[j, 1]
            fx, fy = _eval_rhs(cx, nx, mx, cy, ny, my, xs, ysv)
            k[s, 0] = fx
            k[s, 1] = fy

        xn = x
        yn = y
        for j in range(7):
            xn += h * B[j] * k[j, 0]
            yn += h * B[j] * k[j, 1]

        if not (np.isfinite(xn) and np.isfinite(yn)):
            status = STATUS_NONFINITE
            break

        ex = 0.0
        ey = 0.0
        for j in range(7):
            ex += E[j] * k[j, 0]
            ey += E[j] * k[j, 1]
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = np.sqrt(0.5 * ((h * ex / sx) ** 2 + (h * ey / sy) ** 2))

        if err <= 1.0:
            # accept; build dense coefficients
            if n >= cap:
                cap2 = cap * 2
                ts2 = np.empty(cap2 + 1)
                ys2 = np.empty((cap2 + 1, 2))
                dense2 = np.empty((cap2, 5, 2))
                ts2[: n + 1] = ts[: n + 1]
                ys2[: n + 1] = ys[: n + 1]
                dense2[:n] = dense[:n]
                ts = ts2
                ys = ys2
                dense = dense2
                cap = cap2

            for c in range(2):
                dy_ = (yn if c == 1 else xn) - (y if c == 1 else x)
                y_old = y if c == 1 else x
                bspl = h * k[0, c] - dy_
                dsum = 0.0
                for j in range(7):
                    dsum += D[j] * k[j, c]
                dense[n, 0, c] = y_old
                dense[n, 1, c] = dy_
                dense[n, 2, c] = bspl
                dense[n, 3, c] = dy_ - h * k[6, c] - bspl
                dense[n, 4, c] = h * dsum

            t += h
            x = xn
            y = yn
            n += 1
            ts[n] = t
            ys[n, 0] = x
            ys[n, 1] = y
            k[0, 0] = k[6, 0]  # FSAL
            k[0, 1] = k[6, 1]

            fac = safety * max(err, 1e-300) ** (-alpha) * err_old**beta
            if fac > 10.0:
                fac = 10.0
            if fac < 0.2:
                fac = 0.2
            h *= fac
            if h > max_step:
                h = max_step
            err_old = max(err, 1e-10)
        else:
            fac = safety * max(err, 1e-300) ** (-alpha)
            if fac < 0.2:
                fac = 0.2
            h *= fac

    return ts[: n + 1], ys[: n + 1], dense[:n], n, status


@njit(cache=True)
def dense_eval(ts, dense, idx, t):
    """Evaluate the dense interpolant of accepted step idx at time t."""
    h = ts[idx + 1] - ts[idx]
    theta = (t - ts[idx]) / h
    out = np.empty(2)
    for c in range(2):
        r1 = dense[idx, 0, c]
        r2 = dense[idx, 1, c]
        r3 = dense[idx, 2, c]
        r4 = dense[idx, 3, c]
        r5 = dense[idx, 4, c]
        out[c] = r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)))
    return out
