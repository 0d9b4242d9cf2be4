"""Pure-Python Dormand-Prince 5(4) stepping kernel.

Reference implementation of the integration core; ``pwsc._kernel`` is the
compiled twin with identical arithmetic (same tableau, same operation
order), selected automatically at import time by :mod:`pwsc.integrate`.

Conventions: the kernel integrates an internal clock tau from 0 to
``duration``; ``sign`` folds the time direction into the vector field.
Splitting-line handling: every step that crosses x = 0 is cut at the
crossing (located on the dense interpolant) and the integration restarts
exactly on the line, so no step differentiates across the corner.
"""

from __future__ import annotations

import math

from . import _tableau as tb
from .rpn import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EPS,
    OP_EXP,
    OP_LAM,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_TANH,
    OP_X,
    OP_Y,
)

BACKEND_NAME = "python"

STATUS_DONE = 0
STATUS_EVENT = 1
STATUS_MAX_STEPS = 2
STATUS_UNDERFLOW = 3
STATUS_NONFINITE = 4
STATUS_ESCAPE = 5

_EPS = 2.220446049250313e-16
_SUBGRID = (0.25, 0.5, 0.75, 1.0)


def _eval_program(codes, args, n, x, y, lam, eps, stack):
    sp = 0
    for i in range(n):
        op = codes[i]
        if op == OP_CONST:
            stack[sp] = args[i]
            sp += 1
        elif op == OP_X:
            stack[sp] = x
            sp += 1
        elif op == OP_Y:
            stack[sp] = y
            sp += 1
        elif op == OP_LAM:
            stack[sp] = lam
            sp += 1
        elif op == OP_EPS:
            stack[sp] = eps
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            b = stack[sp]
            if b == 0.0:
                return math.nan
            stack[sp - 1] = stack[sp - 1] / b
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            b = stack[sp - 1]
            r = 1.0
            for _ in range(int(args[i])):
                r *= b
            stack[sp - 1] = r
        elif op == OP_SIN:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif op == OP_EXP:
            v = stack[sp - 1]
            try:
                stack[sp - 1] = math.exp(v)
            except OverflowError:
                stack[sp - 1] = math.inf
        elif op == OP_TANH:
            stack[sp - 1] = math.tanh(stack[sp - 1])
        else:  # OP_SQRT
            v = stack[sp - 1]
            if v < 0.0:
                return math.nan
            stack[sp - 1] = math.sqrt(v)
    return stack[0]


def run_ivp(
    fm_codes,
    fm_args,
    fp_codes,
    fp_args,
    g_codes,
    g_args,
    stack_need,
    lam,
    eps,
    sign,
    x0,
    y0,
    duration,
    rtol,
    atol,
    h_max,
    h_init,
    fixed_step,
    max_steps,
    split_enabled,
    escape_radius,
    ev_kind,
    ev_p0,
    ev_dir,
    ev_action,
    ev_fns,
    t0_report,
    store,
):
    stack = [0.0] * max(stack_need, 1)
    n_fm, n_fp, n_g = len(fm_codes), len(fp_codes), len(g_codes)

    def rhs(x, y):
        if x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, x, y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, x, y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, x, y, lam, eps, stack)
        return sign * (fv - y), sign * (eps * gv)

    def F_of(x, y):
        if x < 0.0:
            return _eval_program(fm_codes, fm_args, n_fm, x, y, lam, eps, stack)
        return _eval_program(fp_codes, fp_args, n_fp, x, y, lam, eps, stack)

    n_events = len(ev_kind)

    def ev_value(i, tau, x, y):
        k = ev_kind[i]
        if k == 0:
            return x - ev_p0[i]
        if k == 1:
            return y - ev_p0[i]
        if k == 2:
            return y - F_of(x, y)
        return ev_fns[i](t0_report + sign * tau, x, y)

    ts = [0.0]
    xs = [x0]
    ys = [y0]
    dense_rows = []
    ev_records = []

    x, y = x0, y0
    tau = 0.0
    status = STATUS_DONE

    k1x, k1y = rhs(x, y)
    if not (math.isfinite(k1x) and math.isfinite(k1y)):
        return (STATUS_NONFINITE, ts, xs, ys, dense_rows, ev_records, 0, tau, x, y)

    # --- initial step size -------------------------------------------------
    if fixed_step > 0.0:
        h = min(fixed_step, duration)
    elif h_init > 0.0:
        h = min(h_init, h_max, duration)
    else:
        scx = atol + rtol * abs(x)
        scy = atol + rtol * abs(y)
        d0 = math.sqrt(0.5 * ((x / scx) ** 2 + (y / scy) ** 2))
        d1 = math.sqrt(0.5 * ((k1x / scx) ** 2 + (k1y / scy) ** 2))
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        f1x, f1y = rhs(x + h0 * k1x, y + h0 * k1y)
        if not (math.isfinite(f1x) and math.isfinite(f1y)):
            h = h0
        else:
            d2 = math.sqrt(0.5 * (((f1x - k1x) / scx) ** 2 + ((f1y - k1y) / scy) ** 2)) / h0
            dm = max(d1, d2)
            h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
            h = min(100.0 * h0, h1)
        h = min(h, h_max, duration)

    facold = 1e-4
    reject = False
    n_steps = 0

    qx = [0.0] * 4
    qy = [0.0] * 4

    def dense_xy(theta):
        u = theta
        dx = x + h_used * u * (qx[0] + u * (qx[1] + u * (qx[2] + u * qx[3])))
        dy = y + h_used * u * (qy[0] + u * (qy[1] + u * (qy[2] + u * qy[3])))
        return dx, dy

    def brent_theta(fn, a, b, fa, fb):
        ttol = max(1e-14 / h_used, 4.0 * _EPS)
        c, fc = a, fa
        d = e = b - a
        for _ in range(100):
            if (fb > 0.0 and fc > 0.0) or (fb < 0.0 and fc < 0.0):
                c, fc = a, fa
                d = e = b - a
            if abs(fc) < abs(fb):
                a, b, c = b, c, b
                fa, fb, fc = fb, fc, fb
            tol1 = 2.0 * _EPS * abs(b) + 0.5 * ttol
            xm = 0.5 * (c - b)
            if abs(xm) <= tol1 or fb == 0.0 or abs(fb) < 1e-12:
                return b
            if abs(e) >= tol1 and abs(fa) > abs(fb):
                s = fb / fa
                if a == c:
                    p = 2.0 * xm * s
                    q = 1.0 - s
                else:
                    q = fa / fc
                    r = fb / fc
                    p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                    q = (q - 1.0) * (r - 1.0) * (s - 1.0)
                if p > 0.0:
                    q = -q
                p = abs(p)
                if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                    e = d
                    d = p / q
                else:
                    d = xm
                    e = d
            else:
                d = xm
                e = d
            a, fa = b, fb
            if abs(d) > tol1:
                b += d
            else:
                b += tol1 if xm > 0.0 else -tol1
            fb = fn(b)
        return b

    while tau < duration:
        if n_steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if fixed_step <= 0.0:
            hmin = 10.0 * _EPS * max(1.0, abs(tau))
            if h < hmin:
                status = STATUS_UNDERFLOW
                break
        h = min(h, h_max)
        last = False
        if tau + h >= duration:
            h = duration - tau
            last = True

        # --- stages --------------------------------------------------------
        s2x = x + h * (tb.A21 * k1x)
        s2y = y + h * (tb.A21 * k1y)
        k2x, k2y = rhs(s2x, s2y)
        s3x = x + h * (tb.A31 * k1x + tb.A32 * k2x)
        s3y = y + h * (tb.A31 * k1y + tb.A32 * k2y)
        k3x, k3y = rhs(s3x, s3y)
        s4x = x + h * (tb.A41 * k1x + tb.A42 * k2x + tb.A43 * k3x)
        s4y = y + h * (tb.A41 * k1y + tb.A42 * k2y + tb.A43 * k3y)
        k4x, k4y = rhs(s4x, s4y)
        s5x = x + h * (tb.A51 * k1x + tb.A52 * k2x + tb.A53 * k3x + tb.A54 * k4x)
        s5y = y + h * (tb.A51 * k1y + tb.A52 * k2y + tb.A53 * k3y + tb.A54 * k4y)
        k5x, k5y = rhs(s5x, s5y)
        s6x = x + h * (tb.A61 * k1x + tb.A62 * k2x + tb.A63 * k3x + tb.A64 * k4x + tb.A65 * k5x)
        s6y = y + h * (tb.A61 * k1y + tb.A62 * k2y + tb.A63 * k3y + tb.A64 * k4y + tb.A65 * k5y)
        k6x, k6y = rhs(s6x, s6y)
        xn = x + h * (tb.B1 * k1x + tb.B3 * k3x + tb.B4 * k4x + tb.B5 * k5x + tb.B6 * k6x)
        yn = y + h * (tb.B1 * k1y + tb.B3 * k3y + tb.B4 * k4y + tb.B5 * k5y + tb.B6 * k6y)
        k7x, k7y = rhs(xn, yn)
        errx = h * (tb.E1 * k1x + tb.E3 * k3x + tb.E4 * k4x + tb.E5 * k5x + tb.E6 * k6x + tb.E7 * k7x)
        erry = h * (tb.E1 * k1y + tb.E3 * k3y + tb.E4 * k4y + tb.E5 * k5y + tb.E6 * k6y + tb.E7 * k7y)

        n_steps += 1

        if fixed_step > 0.0:
            if not (math.isfinite(xn) and math.isfinite(yn)):
                status = STATUS_NONFINITE
                break
            hnext = fixed_step
        else:
            scx = atol + rtol * max(abs(x), abs(xn))
            scy = atol + rtol * max(abs(y), abs(yn))
            err = math.sqrt(0.5 * ((errx / scx) ** 2 + (erry / scy) ** 2))
            if not math.isfinite(err):
                h *= 0.1
                reject = True
                continue
            fac11 = err ** tb.EXPO1
            if err > 1.0:
                h = h / min(1.0 / tb.FAC_MIN, fac11 / tb.SAFETY)
                reject = True
                continue
            fac = fac11 / facold ** tb.BETA
            fac = max(1.0 / tb.FAC_MAX, min(1.0 / tb.FAC_MIN, fac / tb.SAFETY))
            hnext = h / fac
            facold = max(err, 1e-4)
            if reject:
                hnext = min(hnext, h)
            reject = False

        # --- dense coefficients ---------------------------------------------
        h_used = h
        for m in range(4):
            qx[m] = (
                tb.P[0][m] * k1x
                + tb.P[2][m] * k3x
                + tb.P[3][m] * k4x
                + tb.P[4][m] * k5x
                + tb.P[5][m] * k6x
                + tb.P[6][m] * k7x
            )
            qy[m] = (
                tb.P[0][m] * k1y
                + tb.P[2][m] * k3y
                + tb.P[3][m] * k4y
                + tb.P[4][m] * k5y
                + tb.P[5][m] * k6y
                + tb.P[6][m] * k7y
            )

        # --- event scan ------------------------------------------------------
        crossings = []  # (theta, event_index or -1, direction)
        total_events = (1 if split_enabled else 0) + n_events
        for slot in range(total_events):
            if split_enabled and slot == 0:
                idx = -1
            else:
                idx = slot - 1 if split_enabled else slot

            def value_at(theta, _idx=idx):
                if theta == 0.0:
                    sx, sy = x, y
                elif theta == 1.0:
                    sx, sy = xn, yn
                else:
                    sx, sy = dense_xy(theta)
                if _idx < 0:
                    return sx
                return ev_value(_idx, tau + theta * h, sx, sy)

            th_prev = 0.0
            e_prev = value_at(0.0)
            if not math.isfinite(e_prev):
                continue
            if e_prev == 0.0:
                th_prev = 1e-4
                e_prev = value_at(th_prev)
                if e_prev == 0.0 or not math.isfinite(e_prev):
                    continue
            for th in _SUBGRID:
                if th <= th_prev:
                    continue
                e_cur = value_at(th)
                if not math.isfinite(e_cur):
                    break
                if e_cur == 0.0:
                    direction = 1 if e_prev < 0.0 else -1
                    want = 0 if idx < 0 else ev_dir[idx]
                    if want == 0 or want == direction:
                        crossings.append((th, idx, direction))
                    th_prev, e_prev = th, e_cur
                    continue
                if (e_prev < 0.0 < e_cur) or (e_prev > 0.0 > e_cur):
                    direction = 1 if e_cur > 0.0 else -1
                    want = 0 if idx < 0 else ev_dir[idx]
                    if want == 0 or want == direction:
                        th_star = brent_theta(value_at, th_prev, th, e_prev, e_cur)
                        crossings.append((th_star, idx, direction))
                th_prev, e_prev = th, e_cur

        crossings.sort(key=lambda c: c[0])

        cut_theta = -1.0
        cut_idx = 0
        for th_star, idx, direction in crossings:
            ex, ey = dense_xy(th_star)
            if idx < 0:
                ev_records.append((-1, tau + th_star * h, ex, ey, direction))
                cut_theta, cut_idx = th_star, -1
                break
            ev_records.append((idx, tau + th_star * h, ex, ey, direction))
            if ev_action[idx] == 1:
                cut_theta, cut_idx = th_star, idx
                break

        if cut_theta >= 0.0:
            tau_cut = tau + cut_theta * h
            ex, ey = dense_xy(cut_theta)
            if cut_idx < 0:
                ex = 0.0  # restart exactly on the splitting line
            if store:
                dense_rows.append(
                    (tau, h, tau_cut, x, y, qx[0], qx[1], qx[2], qx[3], qy[0], qy[1], qy[2], qy[3])
                )
                ts.append(tau_cut)
                xs.append(ex)
                ys.append(ey)
            tau = tau_cut
            x, y = ex, ey
            if cut_idx >= 0:
                status = STATUS_EVENT
                break
            k1x, k1y = rhs(x, y)
            if not (math.isfinite(k1x) and math.isfinite(k1y)):
                status = STATUS_NONFINITE
                break
            h = hnext
            continue

        # --- commit ----------------------------------------------------------
        tau_new = duration if last else tau + h
        if store:
            dense_rows.append(
                (tau, h, tau_new, x, y, qx[0], qx[1], qx[2], qx[3], qy[0], qy[1], qy[2], qy[3])
            )
            ts.append(tau_new)
            xs.append(xn)
            ys.append(yn)
        tau = tau_new
        x, y = xn, yn
        k1x, k1y = k7x, k7y
        if not (math.isfinite(x) and math.isfinite(y)):
            status = STATUS_NONFINITE
            break
        if abs(x) > escape_radius or abs(y) > escape_radius:
            status = STATUS_ESCAPE
            break
        h = hnext

    if not store:
        ts.append(tau)
        xs.append(x)
        ys.append(y)

    return (status, ts, xs, ys, dense_rows, ev_records, n_steps, tau, x, y)
