# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) stepping kernel.

Mirrors pwsc._kernel_py operation for operation (same tableau module, same
arithmetic order) so both backends produce identical trajectories. The main
loop runs without the GIL; custom Python event callbacks are not supported
here and route to the pure-Python kernel instead.
"""

from libc.math cimport NAN, cos, exp, fabs, isfinite, pow, sin, sqrt, tanh

import numpy as np

from . import _tableau as tb

BACKEND_NAME = "compiled"

STATUS_DONE = 0
STATUS_EVENT = 1
STATUS_MAX_STEPS = 2
STATUS_UNDERFLOW = 3
STATUS_NONFINITE = 4
STATUS_ESCAPE = 5

cdef int _S_DONE = 0
cdef int _S_EVENT = 1
cdef int _S_MAX_STEPS = 2
cdef int _S_UNDERFLOW = 3
cdef int _S_NONFINITE = 4
cdef int _S_ESCAPE = 5
cdef int _ST_SAMPLES_FULL = 100
cdef int _ST_ROWS_FULL = 101
cdef int _ST_EVENTS_FULL = 102

cdef double _EPS = 2.220446049250313e-16
cdef int _MAX_EVENTS = 16
cdef int _STACK_CAP = 256

cdef double A21 = tb.A21
cdef double A31 = tb.A31, A32 = tb.A32
cdef double A41 = tb.A41, A42 = tb.A42, A43 = tb.A43
cdef double A51 = tb.A51, A52 = tb.A52, A53 = tb.A53, A54 = tb.A54
cdef double A61 = tb.A61, A62 = tb.A62, A63 = tb.A63, A64 = tb.A64, A65 = tb.A65
cdef double B1 = tb.B1, B3 = tb.B3, B4 = tb.B4, B5 = tb.B5, B6 = tb.B6
cdef double E1 = tb.E1, E3 = tb.E3, E4 = tb.E4, E5 = tb.E5, E6 = tb.E6, E7 = tb.E7
cdef double SAFETY = tb.SAFETY, BETA = tb.BETA, EXPO1 = tb.EXPO1
cdef double FAC_MIN = tb.FAC_MIN, FAC_MAX = tb.FAC_MAX

cdef double[7][4] P
for _i in range(7):
    for _j in range(4):
        P[_i][_j] = tb.P[_i][_j]

cdef int OP_CONST = 0, OP_X = 1, OP_Y = 2, OP_LAM = 3, OP_EPS = 4
cdef int OP_ADD = 5, OP_SUB = 6, OP_MUL = 7, OP_DIV = 8, OP_NEG = 9
cdef int OP_POW = 10, OP_SIN = 11, OP_COS = 12, OP_EXP = 13, OP_TANH = 14, OP_SQRT = 15


cdef double _eval_program(const int[::1] codes, const double[::1] args, int n,
                          double x, double y, double lam, double eps,
                          double* stack) noexcept nogil:
    cdef int sp = 0, i, op, j, npow
    cdef double b, r, v
    for i in range(n):
        op = codes[i]
        if op == OP_CONST:
            stack[sp] = args[i]; sp += 1
        elif op == OP_X:
            stack[sp] = x; sp += 1
        elif op == OP_Y:
            stack[sp] = y; sp += 1
        elif op == OP_LAM:
            stack[sp] = lam; sp += 1
        elif op == OP_EPS:
            stack[sp] = eps; sp += 1
        elif op == OP_ADD:
            sp -= 1; stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1; stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1; stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            b = stack[sp]
            if b == 0.0:
                return NAN
            stack[sp - 1] = stack[sp - 1] / b
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            b = stack[sp - 1]
            r = 1.0
            npow = <int> args[i]
            for j in range(npow):
                r *= b
            stack[sp - 1] = r
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_TANH:
            stack[sp - 1] = tanh(stack[sp - 1])
        else:
            v = stack[sp - 1]
            if v < 0.0:
                return NAN
            stack[sp - 1] = sqrt(v)
    return stack[0]


cdef inline void _dense_xy(double* D, double theta, double* ox, double* oy) noexcept nogil:
    cdef double u = theta
    ox[0] = D[0] + D[2] * u * (D[3] + u * (D[4] + u * (D[5] + u * D[6])))
    oy[0] = D[1] + D[2] * u * (D[7] + u * (D[8] + u * (D[9] + u * D[10])))


cdef double _ev_theta(int idx, double theta, double* D,
                      double x0e, double y0e, double x1e, double y1e,
                      const int[::1] ev_kind, const double[::1] ev_p0,
                      const int[::1] fm_codes, const double[::1] fm_args, int n_fm,
                      const int[::1] fp_codes, const double[::1] fp_args, int n_fp,
                      double lam, double eps, double* stack) noexcept nogil:
    cdef double sx, sy
    cdef int k
    if theta == 0.0:
        sx = x0e; sy = y0e
    elif theta == 1.0:
        sx = x1e; sy = y1e
    else:
        _dense_xy(D, theta, &sx, &sy)
    if idx < 0:
        return sx
    k = ev_kind[idx]
    if k == 0:
        return sx - ev_p0[idx]
    if k == 1:
        return sy - ev_p0[idx]
    if sx < 0.0:
        return sy - _eval_program(fm_codes, fm_args, n_fm, sx, sy, lam, eps, stack)
    return sy - _eval_program(fp_codes, fp_args, n_fp, sx, sy, lam, eps, stack)


cdef double _brent_ev(int idx, double a, double b, double fa, double fb, double h_used,
                      double* D, double x0e, double y0e, double x1e, double y1e,
                      const int[::1] ev_kind, const double[::1] ev_p0,
                      const int[::1] fm_codes, const double[::1] fm_args, int n_fm,
                      const int[::1] fp_codes, const double[::1] fp_args, int n_fp,
                      double lam, double eps, double* stack) noexcept nogil:
    cdef double ttol = 1e-14 / h_used
    if ttol < 4.0 * _EPS:
        ttol = 4.0 * _EPS
    cdef double c = a, fc = fa
    cdef double d = b - a, e = b - a
    cdef double tol1, xm, s, p, q, r
    cdef int it
    for it in range(100):
        if (fb > 0.0 and fc > 0.0) or (fb < 0.0 and fc < 0.0):
            c = a; fc = fa
            d = b - a; e = b - a
        if fabs(fc) < fabs(fb):
            a = b; b = c; c = a
            fa = fb; fb = fc; fc = fa
        tol1 = 2.0 * _EPS * fabs(b) + 0.5 * ttol
        xm = 0.5 * (c - b)
        if fabs(xm) <= tol1 or fb == 0.0 or fabs(fb) < 1e-12:
            return b
        if fabs(e) >= tol1 and fabs(fa) > fabs(fb):
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
            p = fabs(p)
            if 2.0 * p < (3.0 * xm * q - fabs(tol1 * q) if 3.0 * xm * q - fabs(tol1 * q) < fabs(e * q) else fabs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a = b
        fa = fb
        if fabs(d) > tol1:
            b += d
        else:
            b += tol1 if xm > 0.0 else -tol1
        fb = _ev_theta(idx, b, D, x0e, y0e, x1e, y1e, ev_kind, ev_p0,
                       fm_codes, fm_args, n_fm, fp_codes, fp_args, n_fp, lam, eps, stack)
    return b


cdef int _run(const int[::1] fm_codes, const double[::1] fm_args, int n_fm,
              const int[::1] fp_codes, const double[::1] fp_args, int n_fp,
              const int[::1] g_codes, const double[::1] g_args, int n_g,
              double lam, double eps, double sign, double duration,
              double rtol, double atol, double h_max, double fixed_step,
              long max_steps, int split_enabled, double escape_radius,
              const int[::1] ev_kind, const double[::1] ev_p0,
              const int[::1] ev_dir, const int[::1] ev_action, int n_events,
              int store,
              double[::1] ts, double[::1] xs, double[::1] ys, long n_cap,
              double[:, ::1] rows, long r_cap,
              double[:, ::1] evs, long e_cap,
              double[::1] st, long[::1] sti) noexcept nogil:
    # resume state: st = [tau, x, y, h, facold, k1x, k1y]
    #               sti = [n_steps, reject, n_samples, n_rows, n_ev]
    cdef double tau = st[0], x = st[1], y = st[2], h = st[3], facold = st[4]
    cdef double k1x = st[5], k1y = st[6]
    cdef long n_steps = sti[0]
    cdef int reject = <int> sti[1]
    cdef long ns = sti[2], nr = sti[3], ne = sti[4]
    cdef int status = _S_DONE

    cdef double stack[256]
    cdef double D[11]
    cdef double qx[4]
    cdef double qy[4]

    cdef double s2x, s2y, s3x, s3y, s4x, s4y, s5x, s5y, s6x, s6y
    cdef double k2x, k2y, k3x, k3y, k4x, k4y, k5x, k5y, k6x, k6y, k7x, k7y
    cdef double xn, yn, errx, erry, scx, scy, err, fac11, fac, hnext, hmin
    cdef double fv, gv
    cdef int last, m
    cdef double h_used, tau_new

    # event-scan scratch
    cdef double cr_theta[72]
    cdef int cr_idx[72]
    cdef int cr_dir[72]
    cdef int n_cross, slot, idx, total_events, want, direction, ci, cj
    cdef double th_prev, e_prev, th, e_cur, th_star, tkey
    cdef double ex, ey, tau_cut
    cdef double subgrid[4]
    cdef int cut_found, cut_is_split
    cdef double cut_theta
    cdef int ikey, dkey

    subgrid[0] = 0.25; subgrid[1] = 0.5; subgrid[2] = 0.75; subgrid[3] = 1.0

    while tau < duration:
        if n_steps >= max_steps:
            status = _S_MAX_STEPS
            break
        if fixed_step <= 0.0:
            hmin = 10.0 * _EPS * (1.0 if fabs(tau) < 1.0 else fabs(tau))
            if h < hmin:
                status = _S_UNDERFLOW
                break
        if h > h_max:
            h = h_max
        last = 0
        if tau + h >= duration:
            h = duration - tau
            last = 1

        # stages
        s2x = x + h * (A21 * k1x)
        s2y = y + h * (A21 * k1y)
        if s2x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, s2x, s2y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, s2x, s2y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, s2x, s2y, lam, eps, stack)
        k2x = sign * (fv - s2y); k2y = sign * (eps * gv)

        s3x = x + h * (A31 * k1x + A32 * k2x)
        s3y = y + h * (A31 * k1y + A32 * k2y)
        if s3x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, s3x, s3y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, s3x, s3y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, s3x, s3y, lam, eps, stack)
        k3x = sign * (fv - s3y); k3y = sign * (eps * gv)

        s4x = x + h * (A41 * k1x + A42 * k2x + A43 * k3x)
        s4y = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
        if s4x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, s4x, s4y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, s4x, s4y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, s4x, s4y, lam, eps, stack)
        k4x = sign * (fv - s4y); k4y = sign * (eps * gv)

        s5x = x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x)
        s5y = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
        if s5x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, s5x, s5y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, s5x, s5y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, s5x, s5y, lam, eps, stack)
        k5x = sign * (fv - s5y); k5y = sign * (eps * gv)

        s6x = x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x)
        s6y = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
        if s6x < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, s6x, s6y, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, s6x, s6y, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, s6x, s6y, lam, eps, stack)
        k6x = sign * (fv - s6y); k6y = sign * (eps * gv)

        xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
        if xn < 0.0:
            fv = _eval_program(fm_codes, fm_args, n_fm, xn, yn, lam, eps, stack)
        else:
            fv = _eval_program(fp_codes, fp_args, n_fp, xn, yn, lam, eps, stack)
        gv = _eval_program(g_codes, g_args, n_g, xn, yn, lam, eps, stack)
        k7x = sign * (fv - yn); k7y = sign * (eps * gv)

        errx = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        erry = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)

        n_steps += 1

        if fixed_step > 0.0:
            if not (isfinite(xn) and isfinite(yn)):
                status = _S_NONFINITE
                break
            hnext = fixed_step
        else:
            scx = atol + rtol * (fabs(x) if fabs(x) > fabs(xn) else fabs(xn))
            scy = atol + rtol * (fabs(y) if fabs(y) > fabs(yn) else fabs(yn))
            err = sqrt(0.5 * ((errx / scx) * (errx / scx) + (erry / scy) * (erry / scy)))
            if not isfinite(err):
                h *= 0.1
                reject = 1
                continue
            fac11 = pow(err, EXPO1)
            if err > 1.0:
                fac = fac11 / SAFETY
                if fac > 1.0 / FAC_MIN:
                    fac = 1.0 / FAC_MIN
                h = h / fac
                reject = 1
                continue
            fac = fac11 / pow(facold, BETA)
            fac = fac / SAFETY
            if fac < 1.0 / FAC_MAX:
                fac = 1.0 / FAC_MAX
            if fac > 1.0 / FAC_MIN:
                fac = 1.0 / FAC_MIN
            hnext = h / fac
            facold = err if err > 1e-4 else 1e-4
            if reject and hnext > h:
                hnext = h
            reject = 0

        # dense coefficients
        h_used = h
        for m in range(4):
            qx[m] = (P[0][m] * k1x + P[2][m] * k3x + P[3][m] * k4x
                     + P[4][m] * k5x + P[5][m] * k6x + P[6][m] * k7x)
            qy[m] = (P[0][m] * k1y + P[2][m] * k3y + P[3][m] * k4y
                     + P[4][m] * k5y + P[5][m] * k6y + P[6][m] * k7y)
        D[0] = x; D[1] = y; D[2] = h_used
        D[3] = qx[0]; D[4] = qx[1]; D[5] = qx[2]; D[6] = qx[3]
        D[7] = qy[0]; D[8] = qy[1]; D[9] = qy[2]; D[10] = qy[3]

        # event scan
        n_cross = 0
        total_events = (1 if split_enabled else 0) + n_events
        for slot in range(total_events):
            if split_enabled and slot == 0:
                idx = -1
            else:
                idx = slot - 1 if split_enabled else slot
            th_prev = 0.0
            e_prev = _ev_theta(idx, 0.0, D, x, y, xn, yn, ev_kind, ev_p0,
                               fm_codes, fm_args, n_fm, fp_codes, fp_args, n_fp,
                               lam, eps, stack)
            if not isfinite(e_prev):
                continue
            if e_prev == 0.0:
                th_prev = 1e-4
                e_prev = _ev_theta(idx, th_prev, D, x, y, xn, yn, ev_kind, ev_p0,
                                   fm_codes, fm_args, n_fm, fp_codes, fp_args, n_fp,
                                   lam, eps, stack)
                if e_prev == 0.0 or not isfinite(e_prev):
                    continue
            for m in range(4):
                th = subgrid[m]
                if th <= th_prev:
                    continue
                e_cur = _ev_theta(idx, th, D, x, y, xn, yn, ev_kind, ev_p0,
                                  fm_codes, fm_args, n_fm, fp_codes, fp_args, n_fp,
                                  lam, eps, stack)
                if not isfinite(e_cur):
                    break
                if e_cur == 0.0:
                    direction = 1 if e_prev < 0.0 else -1
                    want = 0 if idx < 0 else ev_dir[idx]
                    if want == 0 or want == direction:
                        cr_theta[n_cross] = th
                        cr_idx[n_cross] = idx
                        cr_dir[n_cross] = direction
                        n_cross += 1
                    th_prev = th
                    e_prev = e_cur
                    continue
                if (e_prev < 0.0 < e_cur) or (e_prev > 0.0 > e_cur):
                    direction = 1 if e_cur > 0.0 else -1
                    want = 0 if idx < 0 else ev_dir[idx]
                    if want == 0 or want == direction:
                        th_star = _brent_ev(idx, th_prev, th, e_prev, e_cur, h_used, D,
                                            x, y, xn, yn, ev_kind, ev_p0,
                                            fm_codes, fm_args, n_fm,
                                            fp_codes, fp_args, n_fp, lam, eps, stack)
                        cr_theta[n_cross] = th_star
                        cr_idx[n_cross] = idx
                        cr_dir[n_cross] = direction
                        n_cross += 1
                th_prev = th
                e_prev = e_cur

        # stable insertion sort by theta
        for ci in range(1, n_cross):
            tkey = cr_theta[ci]
            ikey = cr_idx[ci]
            dkey = cr_dir[ci]
            cj = ci - 1
            while cj >= 0 and cr_theta[cj] > tkey:
                cr_theta[cj + 1] = cr_theta[cj]
                cr_idx[cj + 1] = cr_idx[cj]
                cr_dir[cj + 1] = cr_dir[cj]
                cj -= 1
            cr_theta[cj + 1] = tkey
            cr_idx[cj + 1] = ikey
            cr_dir[cj + 1] = dkey

        cut_found = 0
        cut_is_split = 0
        cut_theta = -1.0
        for ci in range(n_cross):
            th_star = cr_theta[ci]
            idx = cr_idx[ci]
            direction = cr_dir[ci]
            _dense_xy(D, th_star, &ex, &ey)
            if ne >= e_cap:
                status = _ST_EVENTS_FULL
                break
            evs[ne, 0] = <double> idx
            evs[ne, 1] = tau + th_star * h
            evs[ne, 2] = ex
            evs[ne, 3] = ey
            evs[ne, 4] = <double> direction
            ne += 1
            if idx < 0:
                cut_found = 1
                cut_is_split = 1
                cut_theta = th_star
                break
            if ev_action[idx] == 1:
                cut_found = 1
                cut_theta = th_star
                break
        if status == _ST_EVENTS_FULL:
            break

        if cut_found:
            tau_cut = tau + cut_theta * h
            _dense_xy(D, cut_theta, &ex, &ey)
            if cut_is_split:
                ex = 0.0
            if store:
                if nr >= r_cap or ns >= n_cap:
                    status = _ST_ROWS_FULL if nr >= r_cap else _ST_SAMPLES_FULL
                    break
                rows[nr, 0] = tau; rows[nr, 1] = h_used; rows[nr, 2] = tau_cut
                rows[nr, 3] = x; rows[nr, 4] = y
                rows[nr, 5] = qx[0]; rows[nr, 6] = qx[1]; rows[nr, 7] = qx[2]; rows[nr, 8] = qx[3]
                rows[nr, 9] = qy[0]; rows[nr, 10] = qy[1]; rows[nr, 11] = qy[2]; rows[nr, 12] = qy[3]
                nr += 1
                ts[ns] = tau_cut; xs[ns] = ex; ys[ns] = ey
                ns += 1
            tau = tau_cut
            x = ex
            y = ey
            if not cut_is_split:
                status = _S_EVENT
                break
            if x < 0.0:
                fv = _eval_program(fm_codes, fm_args, n_fm, x, y, lam, eps, stack)
            else:
                fv = _eval_program(fp_codes, fp_args, n_fp, x, y, lam, eps, stack)
            gv = _eval_program(g_codes, g_args, n_g, x, y, lam, eps, stack)
            k1x = sign * (fv - y); k1y = sign * (eps * gv)
            if not (isfinite(k1x) and isfinite(k1y)):
                status = _S_NONFINITE
                break
            h = hnext
            continue

        # commit
        tau_new = duration if last else tau + h
        if store:
            if nr >= r_cap or ns >= n_cap:
                status = _ST_ROWS_FULL if nr >= r_cap else _ST_SAMPLES_FULL
                break
            rows[nr, 0] = tau; rows[nr, 1] = h_used; rows[nr, 2] = tau_new
            rows[nr, 3] = x; rows[nr, 4] = y
            rows[nr, 5] = qx[0]; rows[nr, 6] = qx[1]; rows[nr, 7] = qx[2]; rows[nr, 8] = qx[3]
            rows[nr, 9] = qy[0]; rows[nr, 10] = qy[1]; rows[nr, 11] = qy[2]; rows[nr, 12] = qy[3]
            nr += 1
            ts[ns] = tau_new; xs[ns] = xn; ys[ns] = yn
            ns += 1
        tau = tau_new
        x = xn
        y = yn
        k1x = k7x; k1y = k7y
        if not (isfinite(x) and isfinite(y)):
            status = _S_NONFINITE
            break
        if fabs(x) > escape_radius or fabs(y) > escape_radius:
            status = _S_ESCAPE
            break
        h = hnext

    st[0] = tau; st[1] = x; st[2] = y; st[3] = h; st[4] = facold
    st[5] = k1x; st[6] = k1y
    sti[0] = n_steps; sti[1] = reject; sti[2] = ns; sti[3] = nr; sti[4] = ne
    return status


def run_ivp(fm_codes, fm_args, fp_codes, fp_args, g_codes, g_args, stack_need,
            lam, eps, sign, x0, y0, duration,
            rtol, atol, h_max, h_init, fixed_step, max_steps,
            split_enabled, escape_radius,
            ev_kind, ev_p0, ev_dir, ev_action, ev_fns, t0_report, store):
    if stack_need > _STACK_CAP:
        raise ValueError("expression too deep for the compiled kernel")
    if len(ev_kind) > _MAX_EVENTS:
        raise ValueError(f"compiled kernel supports at most {_MAX_EVENTS} events")
    for k in ev_kind:
        if k == 3:
            raise ValueError("custom event functions require the python backend")

    cdef double lam_c = lam, eps_c = eps, sign_c = sign
    cdef double x = x0, y = y0
    cdef double dur = duration

    fm_c = np.ascontiguousarray(fm_codes, dtype=np.int32)
    fm_a = np.ascontiguousarray(fm_args, dtype=np.float64)
    fp_c = np.ascontiguousarray(fp_codes, dtype=np.int32)
    fp_a = np.ascontiguousarray(fp_args, dtype=np.float64)
    g_c = np.ascontiguousarray(g_codes, dtype=np.int32)
    g_a = np.ascontiguousarray(g_args, dtype=np.float64)
    evk = np.ascontiguousarray(ev_kind, dtype=np.int32)
    evp = np.ascontiguousarray(ev_p0, dtype=np.float64)
    evd = np.ascontiguousarray(ev_dir, dtype=np.int32)
    eva = np.ascontiguousarray(ev_action, dtype=np.int32)

    cdef double stack[256]
    cdef int n_fm = len(fm_c), n_fp = len(fp_c), n_g = len(g_c)
    cdef const int[::1] fmc = fm_c
    cdef const double[::1] fma = fm_a
    cdef const int[::1] fpc = fp_c
    cdef const double[::1] fpa = fp_a
    cdef const int[::1] gc = g_c
    cdef const double[::1] ga = g_a

    # initial derivative
    cdef double fv, gv, k1x, k1y
    if x < 0.0:
        fv = _eval_program(fmc, fma, n_fm, x, y, lam_c, eps_c, stack)
    else:
        fv = _eval_program(fpc, fpa, n_fp, x, y, lam_c, eps_c, stack)
    gv = _eval_program(gc, ga, n_g, x, y, lam_c, eps_c, stack)
    k1x = sign_c * (fv - y)
    k1y = sign_c * (eps_c * gv)

    ts0 = [0.0]
    xs0 = [x]
    ys0 = [y]
    if not (isfinite(k1x) and isfinite(k1y)):
        return (STATUS_NONFINITE, np.asarray(ts0), np.asarray(xs0), np.asarray(ys0),
                np.empty((0, 13)), [], 0, 0.0, x, y)

    # initial step size (same arithmetic as the python kernel)
    cdef double h, scx, scy, d0, d1, d2, h0, h1, dm, f1x, f1y
    if fixed_step > 0.0:
        h = min(fixed_step, dur)
    elif h_init > 0.0:
        h = min(h_init, h_max, dur)
    else:
        scx = atol + rtol * fabs(x)
        scy = atol + rtol * fabs(y)
        d0 = sqrt(0.5 * ((x / scx) * (x / scx) + (y / scy) * (y / scy)))
        d1 = sqrt(0.5 * ((k1x / scx) * (k1x / scx) + (k1y / scy) * (k1y / scy)))
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        if x + h0 * k1x < 0.0:
            fv = _eval_program(fmc, fma, n_fm, x + h0 * k1x, y + h0 * k1y, lam_c, eps_c, stack)
        else:
            fv = _eval_program(fpc, fpa, n_fp, x + h0 * k1x, y + h0 * k1y, lam_c, eps_c, stack)
        gv = _eval_program(gc, ga, n_g, x + h0 * k1x, y + h0 * k1y, lam_c, eps_c, stack)
        f1x = sign_c * (fv - (y + h0 * k1y))
        f1y = sign_c * (eps_c * gv)
        if not (isfinite(f1x) and isfinite(f1y)):
            h = h0
        else:
            d2 = sqrt(0.5 * (((f1x - k1x) / scx) * ((f1x - k1x) / scx)
                             + ((f1y - k1y) / scy) * ((f1y - k1y) / scy))) / h0
            dm = d1 if d1 > d2 else d2
            h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else pow(0.01 / dm, 0.2)
            h = min(100.0 * h0, h1)
        h = min(h, h_max, dur)

    cdef long n_cap = 65536 if store else 4
    cdef long r_cap = 65536 if store else 1
    cdef long e_cap = 1024
    ts_arr = np.empty(n_cap, dtype=np.float64)
    xs_arr = np.empty(n_cap, dtype=np.float64)
    ys_arr = np.empty(n_cap, dtype=np.float64)
    rows_arr = np.empty((r_cap, 13), dtype=np.float64)
    evs_arr = np.empty((e_cap, 5), dtype=np.float64)
    if store:
        ts_arr[0] = 0.0
        xs_arr[0] = x
        ys_arr[0] = y

    st = np.array([0.0, x, y, h, 1e-4, k1x, k1y], dtype=np.float64)
    sti = np.array([0, 0, 1 if store else 0, 0, 0], dtype=np.int64)

    cdef double[::1] st_v = st
    cdef long[::1] sti_v = sti
    cdef int status
    cdef long max_steps_c = max_steps
    cdef double h_max_c = h_max, rtol_c = rtol, atol_c = atol
    cdef double fixed_c = fixed_step, esc_c = escape_radius
    cdef int split_c = split_enabled, store_c = store
    cdef int n_events = len(evk)
    cdef const int[::1] evk_v = evk
    cdef const double[::1] evp_v = evp
    cdef const int[::1] evd_v = evd
    cdef const int[::1] eva_v = eva
    cdef double[::1] ts_v, xs_v, ys_v
    cdef double[:, ::1] rows_v, evs_v

    while True:
        ts_v = ts_arr
        xs_v = xs_arr
        ys_v = ys_arr
        rows_v = rows_arr
        evs_v = evs_arr
        with nogil:
            status = _run(fmc, fma, n_fm, fpc, fpa, n_fp, gc, ga, n_g,
                          lam_c, eps_c, sign_c, dur, rtol_c, atol_c, h_max_c,
                          fixed_c, max_steps_c, split_c, esc_c,
                          evk_v, evp_v, evd_v, eva_v, n_events, store_c,
                          ts_v, xs_v, ys_v, n_cap, rows_v, r_cap, evs_v, e_cap,
                          st_v, sti_v)
        if status == _ST_SAMPLES_FULL or status == _ST_ROWS_FULL:
            n_cap *= 2
            r_cap *= 2
            ts_arr = np.resize(ts_arr, n_cap)
            xs_arr = np.resize(xs_arr, n_cap)
            ys_arr = np.resize(ys_arr, n_cap)
            new_rows = np.empty((r_cap, 13), dtype=np.float64)
            new_rows[: rows_arr.shape[0]] = rows_arr
            rows_arr = new_rows
            continue
        if status == _ST_EVENTS_FULL:
            e_cap *= 2
            new_evs = np.empty((e_cap, 5), dtype=np.float64)
            new_evs[: evs_arr.shape[0]] = evs_arr
            evs_arr = new_evs
            continue
        break

    cdef long ns = sti[2], nr = sti[3], ne = sti[4]
    if not store:
        ts_list = [0.0, float(st[0])]
        xs_list = [x0, float(st[1])]
        ys_list = [y0, float(st[2])]
        ts_out = np.asarray(ts_list)
        xs_out = np.asarray(xs_list)
        ys_out = np.asarray(ys_list)
    else:
        ts_out = ts_arr[:ns].copy()
        xs_out = xs_arr[:ns].copy()
        ys_out = ys_arr[:ns].copy()
    rows_out = rows_arr[:nr].copy()
    ev_records = [
        (int(evs_arr[i, 0]), float(evs_arr[i, 1]), float(evs_arr[i, 2]),
         float(evs_arr[i, 3]), int(evs_arr[i, 4]))
        for i in range(ne)
    ]
    return (status, ts_out, xs_out, ys_out, rows_out, ev_records,
            int(sti[0]), float(st[0]), float(st[1]), float(st[2]))
