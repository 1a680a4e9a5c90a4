"""Numeric inner loops, in a compiled form and a vectorized numpy form.

Each public name resolves to one of the two implementations according to
``scpath._accel.USE_NUMBA``; the ``*_numpy`` and ``*_numba`` variants stay
importable for equivalence tests and for ``benchmarks/bench_kernels.py``.
"""
import math

import numpy as np

from ._accel import njit, pick

# a tangent point this far inside the other circle (signed distance) is rejected
INSIDE_TOL = 1e-9
# same-direction candidates accept lines this far negative as zero length
LINE_TOL = 1e-9
# arc angles within this of a full turn are treated as zero
FULL_TURN_SNAP = 1e-9
# candidates closer than this in length count as tied; the earlier one wins
TIE_TOL = 1e-9
TWO_PI = 2.0 * math.pi


def _theta_poly(a0, a1, a2, a3, theta0, s):
    return theta0 + s * (a0 + s * (a1 / 2.0 + s * (a2 / 3.0 + s * (a3 / 4.0))))


# ---------------------------------------------------------------------------
# cubic-curvature quadrature (midpoint rule, analytic heading)


def integrate_cubic_numpy(a0, a1, a2, a3, theta0, x0, y0, s):
    theta = _theta_poly(a0, a1, a2, a3, theta0, s)
    n = s.shape[0]
    x = np.empty(n)
    y = np.empty(n)
    x[0] = x0
    y[0] = y0
    if n > 1:
        h = s[1:] - s[:-1]
        tm = _theta_poly(a0, a1, a2, a3, theta0, 0.5 * (s[1:] + s[:-1]))
        x[1:] = h * np.cos(tm)
        y[1:] = h * np.sin(tm)
        np.cumsum(x, out=x)
        np.cumsum(y, out=y)
    return x, y, theta


@njit
def integrate_cubic_numba(a0, a1, a2, a3, theta0, x0, y0, s):
    n = s.shape[0]
    x = np.empty(n)
    y = np.empty(n)
    theta = np.empty(n)
    x[0] = x0
    y[0] = y0
    for i in range(n):
        si = s[i]
        theta[i] = theta0 + si * (a0 + si * (a1 / 2.0 + si * (a2 / 3.0 + si * (a3 / 4.0))))
    for i in range(1, n):
        h = s[i] - s[i - 1]
        sm = 0.5 * (s[i] + s[i - 1])
        tm = theta0 + sm * (a0 + sm * (a1 / 2.0 + sm * (a2 / 3.0 + sm * (a3 / 4.0))))
        x[i] = x[i - 1] + h * math.cos(tm)
        y[i] = y[i - 1] + h * math.sin(tm)
    return x, y, theta


integrate_cubic = pick(integrate_cubic_numba, integrate_cubic_numpy)


# ---------------------------------------------------------------------------
# steering angle, rate and acceleration along a cubic at fixed speed


def steering_series_numpy(a0, a1, a2, a3, s, wheelbase, speed):
    kappa = a0 + s * (a1 + s * (a2 + s * a3))
    alpha = a1 + s * (2.0 * a2 + s * 3.0 * a3)
    kl = kappa * wheelbase
    phi = np.arctan(kl)
    phi_dot = speed * wheelbase * alpha / (1.0 + kl * kl)
    if s.shape[0] >= 3:
        phi_ddot = speed * np.gradient(phi_dot, s, edge_order=2)
    else:
        phi_ddot = np.zeros_like(s)
    return phi, phi_dot, phi_ddot


@njit
def steering_series_numba(a0, a1, a2, a3, s, wheelbase, speed):
    n = s.shape[0]
    phi = np.empty(n)
    phi_dot = np.empty(n)
    phi_ddot = np.zeros(n)
    for i in range(n):
        si = s[i]
        kl = (a0 + si * (a1 + si * (a2 + si * a3))) * wheelbase
        alpha = a1 + si * (2.0 * a2 + si * 3.0 * a3)
        phi[i] = math.atan(kl)
        phi_dot[i] = speed * wheelbase * alpha / (1.0 + kl * kl)
    if n >= 3:
        # second-order differences on a (possibly non-uniform) grid, as np.gradient
        for i in range(1, n - 1):
            hl = s[i] - s[i - 1]
            hr = s[i + 1] - s[i]
            phi_ddot[i] = speed * (
                -hr / (hl * (hl + hr)) * phi_dot[i - 1]
                + (hr - hl) / (hl * hr) * phi_dot[i]
                + hl / (hr * (hl + hr)) * phi_dot[i + 1]
            )
        h1 = s[1] - s[0]
        h2 = s[2] - s[1]
        phi_ddot[0] = speed * (
            -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * phi_dot[0]
            + (h1 + h2) / (h1 * h2) * phi_dot[1]
            - h1 / (h2 * (h1 + h2)) * phi_dot[2]
        )
        h1 = s[n - 2] - s[n - 3]
        h2 = s[n - 1] - s[n - 2]
        phi_ddot[n - 1] = speed * (
            h2 / (h1 * (h1 + h2)) * phi_dot[n - 3]
            - (h1 + h2) / (h1 * h2) * phi_dot[n - 2]
            + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * phi_dot[n - 1]
        )
    return phi, phi_dot, phi_ddot


steering_series = pick(steering_series_numba, steering_series_numpy)


# ---------------------------------------------------------------------------
# line tangent to two omega circles


@njit
def tangent_points(cax, cay, ra, hoa, travel_a, cbx, cby, rb, hob, root):
    """Line leaving circle a and entering circle b.

    ``hoa``/``hob`` are the circles' heading offsets and ``travel_a`` the sign
    of the first turn's travel. Returns ``(ok, xa, ya, xb, yb, theta)``.
    """
    dx = cbx - cax
    dy = cby - cay
    dist = math.hypot(dx, dy)
    if dist < 1e-12:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    flip = math.pi if travel_a < 0 else 0.0
    ga = hoa + flip
    gb = hob + flip
    y_aux = rb * math.sin(gb) - ra * math.sin(ga)
    radicand = dist * dist - y_aux * y_aux
    if radicand < 0.0:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    x_aux = root * math.sqrt(radicand)
    heading = math.atan2(dy, dx) - math.atan2(y_aux, x_aux)
    psi_a = heading - ga
    psi_b = heading - gb
    xa = cax + ra * math.cos(psi_a)
    ya = cay + ra * math.sin(psi_a)
    xb = cbx + rb * math.cos(psi_b)
    yb = cby + rb * math.sin(psi_b)
    if math.hypot(xa - cbx, ya - cby) - rb < -INSIDE_TOL:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    if math.hypot(xb - cax, yb - cay) - ra < -INSIDE_TOL:
        return False, 0.0, 0.0, 0.0, 0.0, 0.0
    return True, xa, ya, xb, yb, heading - flip


# ---------------------------------------------------------------------------
# scoring all start/goal turn pairs of a query
#
# Each turn is one row of TURN_FIELDS floats. Travel signs are those the
# vehicle actually drives; ``build_travel``/``build_sense`` describe the turn as
# constructed (goal turns are built backwards in time from the goal).

TURN_FIELDS = 12
(F_VALID, F_CX, F_CY, F_R, F_OFFSET, F_TRAVEL, F_BUILD_TRAVEL, F_BUILD_SENSE,
 F_ARC_START, F_EXIT_HEADING, F_FIXED_LENGTH, F_RADIUS) = range(TURN_FIELDS)


@njit
def _turn_length(row, theta):
    th_exit = theta + math.pi if row[F_BUILD_TRAVEL] < 0 else theta
    th3 = th_exit - row[F_EXIT_HEADING]
    delta = (row[F_BUILD_SENSE] * (th3 - row[F_ARC_START])) % TWO_PI
    if delta > TWO_PI - FULL_TURN_SNAP:
        delta = 0.0
    return row[F_FIXED_LENGTH] + delta * row[F_RADIUS]


@njit
def candidate_table_numba(starts, goals):
    """Best connection per (start turn, goal turn) pair, flattened start-major.

    Returns ``(total, line, xa, ya, xb, yb, theta)``; infeasible pairs have
    ``total = inf``.
    """
    ns = starts.shape[0]
    ng = goals.shape[0]
    n = ns * ng
    total = np.full(n, np.inf)
    line = np.zeros(n)
    xa = np.zeros(n)
    ya = np.zeros(n)
    xb = np.zeros(n)
    yb = np.zeros(n)
    theta = np.zeros(n)
    for i in range(ns):
        a = starts[i]
        if a[F_VALID] == 0.0:
            continue
        for j in range(ng):
            b = goals[j]
            if b[F_VALID] == 0.0:
                continue
            k = i * ng + j
            same = a[F_TRAVEL] == b[F_TRAVEL]
            n_roots = 1 if same else 2
            for r in range(n_roots):
                root = 1.0 if r == 0 else -1.0
                ok, pxa, pya, pxb, pyb, th = tangent_points(
                    a[F_CX], a[F_CY], a[F_R], a[F_OFFSET], a[F_TRAVEL],
                    b[F_CX], b[F_CY], b[F_R], b[F_OFFSET], root,
                )
                if not ok:
                    continue
                ell = (pxb - pxa) * math.cos(th) + (pyb - pya) * math.sin(th)
                if same and a[F_TRAVEL] * ell < -LINE_TOL:
                    continue
                tot = _turn_length(a, th) + abs(ell) + _turn_length(b, th)
                if tot < total[k] - TIE_TOL:
                    total[k] = tot
                    line[k] = ell
                    xa[k] = pxa
                    ya[k] = pya
                    xb[k] = pxb
                    yb[k] = pyb
                    theta[k] = th
    return total, line, xa, ya, xb, yb, theta


def candidate_table_numpy(starts, goals):
    """Vectorized twin of :func:`candidate_table_numba` over pairs and roots."""
    A = starts[:, None, None, :]
    B = goals[None, :, None, :]
    root = np.array([1.0, -1.0])[None, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        dx = B[..., F_CX] - A[..., F_CX]
        dy = B[..., F_CY] - A[..., F_CY]
        dist = np.hypot(dx, dy)
        flip = np.where(A[..., F_TRAVEL] < 0, math.pi, 0.0)
        ga = A[..., F_OFFSET] + flip
        gb = B[..., F_OFFSET] + flip
        ra = A[..., F_R]
        rb = B[..., F_R]
        y_aux = rb * np.sin(gb) - ra * np.sin(ga)
        radicand = dist * dist - y_aux * y_aux
        x_aux = root * np.sqrt(np.maximum(radicand, 0.0))
        heading = np.arctan2(dy, dx) - np.arctan2(y_aux, x_aux)
        pa = heading - ga
        pb = heading - gb
        pxa = A[..., F_CX] + ra * np.cos(pa)
        pya = A[..., F_CY] + ra * np.sin(pa)
        pxb = B[..., F_CX] + rb * np.cos(pb)
        pyb = B[..., F_CY] + rb * np.sin(pb)
        th = heading - flip
        ell = (pxb - pxa) * np.cos(th) + (pyb - pya) * np.sin(th)
        same = A[..., F_TRAVEL] == B[..., F_TRAVEL]
        ok = (A[..., F_VALID] != 0.0) & (B[..., F_VALID] != 0.0)
        ok = ok & (dist >= 1e-12) & (radicand >= 0.0)
        ok = ok & (np.hypot(pxa - B[..., F_CX], pya - B[..., F_CY]) - rb >= -INSIDE_TOL)
        ok = ok & (np.hypot(pxb - A[..., F_CX], pyb - A[..., F_CY]) - ra >= -INSIDE_TOL)
        ok = ok & ~(same & (A[..., F_TRAVEL] * ell < -LINE_TOL))
        ok[..., 1] &= ~same[..., 0]

        def turn_len(T, theta):
            th_exit = np.where(T[..., F_BUILD_TRAVEL] < 0, theta + math.pi, theta)
            delta = np.mod(T[..., F_BUILD_SENSE] * (th_exit - T[..., F_EXIT_HEADING] - T[..., F_ARC_START]), TWO_PI)
            delta = np.where(delta > TWO_PI - FULL_TURN_SNAP, 0.0, delta)
            return T[..., F_FIXED_LENGTH] + delta * T[..., F_RADIUS]

        tot = turn_len(A, th) + np.abs(ell) + turn_len(B, th)
    tot = np.where(ok, tot, np.inf)
    pick_second = tot[..., 1] < tot[..., 0] - TIE_TOL
    idx = pick_second.astype(np.intp)[..., None]

    total = np.take_along_axis(tot, idx, axis=-1)[..., 0].ravel()
    feasible = np.isfinite(total)

    def take(v):
        picked = np.take_along_axis(np.broadcast_to(v, tot.shape), idx, axis=-1)[..., 0].ravel()
        return np.where(feasible, picked, 0.0)

    return total, take(ell), take(pxa), take(pya), take(pxb), take(pyb), take(th)


candidate_table = pick(candidate_table_numba, candidate_table_numpy)
tangent = pick(tangent_points, tangent_points.py_func)


# ---------------------------------------------------------------------------
# closed-loop tracking of a sampled reference path


@njit
def simulate_loop(px, py, pth, pphi, state0, params, n_steps):
    """Step the vehicle, actuator and controller ``n_steps`` times.

    ``state0`` is ``(x, y, theta, phi, phi_dot)``. ``params`` packs, in order:
    dt, speed, wheelbase, phi_max, phi_dot_max, phi_ddot_max, gain,
    torque_max, kp, ki, kd, k_lat, k_head, anti_windup, feedback (0/1),
    divergence bound.

    Returns the recorded table (rows t, x, y, theta, phi, phi_dot, phi_cmd,
    e_lat, e_head, fractional path index), the number of rows written and a status code:
    0 ran to ``n_steps``, 1 passed the end of the path, 2 diverged.
    """
    dt, v, L, phi_max, phid_max, phidd_max, gain, tq_max = params[0:8]
    kp, ki, kd, k_lat, k_head, windup, feedback, bound = params[8:16]
    n_path = px.shape[0]
    out = np.zeros((n_steps + 1, 10))
    x, y, th, phi, phid = state0[0], state0[1], state0[2], state0[3], state0[4]
    idx = 0
    integ = 0.0
    err_prev = 0.0
    status = 0
    rows = 0
    for k in range(n_steps + 1):
        # closest point on the polyline: advance (monotone progress) while the
        # foot of the perpendicular lies beyond the current segment
        while True:
            dx = px[idx + 1] - px[idx]
            dy = py[idx + 1] - py[idx]
            seg = math.hypot(dx, dy)
            along = (dx * (x - px[idx]) + dy * (y - py[idx])) / seg
            if along < seg or idx + 2 >= n_path:
                break
            idx += 1
        w = along / seg
        past_end = w > 1.0
        w = min(max(w, 0.0), 1.0)
        e_lat = (dx * (y - py[idx]) - dy * (x - px[idx])) / seg
        th_ref = pth[idx] + w * (pth[idx + 1] - pth[idx])
        phi_ref = pphi[idx] + w * (pphi[idx + 1] - pphi[idx])
        e_head = th - th_ref
        e_head -= TWO_PI * math.floor((e_head + math.pi) / TWO_PI)
        cmd = phi_ref
        if feedback != 0.0:
            cmd = phi_ref - k_lat * e_lat - k_head * e_head

        out[k, 0] = k * dt
        out[k, 1] = x
        out[k, 2] = y
        out[k, 3] = th
        out[k, 4] = phi
        out[k, 5] = phid
        out[k, 6] = cmd
        out[k, 7] = e_lat
        out[k, 8] = e_head
        out[k, 9] = idx + w
        rows = k + 1
        if abs(e_lat) > bound:
            status = 2
            break
        if past_end:
            status = 1
            break
        if k == n_steps:
            break

        # PID on the steering angle, derivative on the error
        err = cmd - phi
        integ += err * dt
        if ki != 0.0:
            lim = windup / abs(ki)
            integ = min(max(integ, -lim), lim)
        deriv = 0.0 if k == 0 else (err - err_prev) / dt
        err_prev = err
        torque = kp * err + ki * integ + kd * deriv
        torque = min(max(torque, -tq_max), tq_max)

        # actuator: acceleration, rate and angle clamps
        acc = min(max(gain * torque, -phidd_max), phidd_max)
        lo = phid - phidd_max * dt
        hi = phid + phidd_max * dt
        phid_new = min(max(phid + acc * dt, -phid_max), phid_max)
        # trapezoidal in the rate: exact for constant acceleration
        phi_new = phi + 0.5 * (phid + phid_new) * dt
        if phi_new > phi_max or phi_new < -phi_max:
            phi_new = min(max(phi_new, -phi_max), phi_max)
            # stop at the end stop as fast as the acceleration limit allows
            phid_new = min(max(0.0, lo), hi)
            phid_new = min(max(phid_new, -phid_max), phid_max)

        # kinematic single-track model, trapezoidal curvature, midpoint heading
        th_new = th + 0.5 * v * (math.tan(phi) + math.tan(phi_new)) / L * dt
        phi = phi_new
        phid = phid_new
        th_mid = 0.5 * (th + th_new)
        x += v * dt * math.cos(th_mid)
        y += v * dt * math.sin(th_mid)
        th = th_new
    return out, rows, status


simulate = pick(simulate_loop, simulate_loop.py_func)
