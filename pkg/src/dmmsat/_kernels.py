"""Jit-compiled numeric kernels shared by dynamics, imperfections, and the solver.

Two parallel derivative evaluators exist: a clean one and one threaded with
multiplicative tolerance factors ("sites"). They perform the same arithmetic
in the same order, so unit factors reproduce the clean results bit for bit;
tests rely on that. Keep the two in lockstep when editing either.

Softmax evaluation: clause weights exp(xl_m) are shared across the up-to-three
variables of a clause by shifting with the global max of xl (one exp per
clause). That shift is only safe while the xl spread stays moderate; for
adversarial states (spread > 600 or max > 700, reachable since xl may grow to
M) the kernel falls back to a per-variable stable softmax. Both paths are pure
functions of the state, so runs stay deterministic.

No fastmath anywhere: result bits must not depend on compiler reassociation.
"""
import numpy as np
from numba import njit

# Tolerance site map: one multiplicative factor per addition/multiplication
# in the derivative evaluation. Per-clause sites (short/long memory channels
# and the clause function):
CS_C = 0  # C = 1 - max(vt)                  (subtraction)
CS_XS_ADD = 1  # xs + eps
CS_XS_SUB = 2  # C - gamma
CS_XS_MUL1 = 3  # beta * (xs + eps)
CS_XS_MUL2 = 4  # (beta*(xs+eps)) * (C - gamma)
CS_XL_SUB = 5  # C - delta
CS_XL_MUL1 = 6  # alpha * exp(-xl)           (exp itself is not an add/mul site)
CS_XL_MUL2 = 7  # (alpha*exp(-xl)) * (C - delta)
N_CLAUSE_SITES = 8

# Per-slot sites (the voltage-channel terms, one set per literal occurrence).
# The softmax internals carry no factors; its weight applications are the
# WXS/EW sites below. Polarity application counts as a multiply by q = +-1.
SS_NEG = 0  # vt = 1 - v (negated literals only; plain literals skip the site)
SS_GQ = 1  # G = q * C
SS_RQ = 2  # R = q * C (evaluated only when the literal attains the clause max)
SS_WXS = 3  # u = w * xs
SS_EU = 4  # t1 = eta * u
SS_T1G = 5  # s1 = t1 * G
SS_EW = 6  # p = eta * w
SS_ZP = 7  # z = zeta * p
SS_OPZ = 8  # o = 1 + z
SS_OXS = 9  # s2 = 1 - xs
SS_OT = 10  # t2 = o * s2
SS_T2R = 11  # s3 = t2 * R
SS_PAIR = 12  # term = s1 + s3 (rigidity active only)
SS_ACC = 13  # dv accumulation: dv = dv + term
N_SLOT_SITES = 14

# Leakage and the final Euler update are physical currents/integration, not
# equation arithmetic: no tolerance sites there.

STATUS_CAP = 0
STATUS_SOLVED = 1
STATUS_NAN = 2

_U64 = np.uint64
# offset for white-noise channels so they never collide with site indices
WN_BASE = _U64(1) << _U64(40)


@njit(cache=True)
def _mix64(z):
    # splitmix64 finalizer; wraps mod 2^64
    z = (z + _U64(0x9E3779B97F4A7C15)) & _U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)) & _U64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)) & _U64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> _U64(31))


@njit(cache=True)
def site_uniform(seed, step, site):
    """Deterministic uniform in [0,1) from the (seed, step, site) counter key."""
    z = _mix64(_mix64(_mix64(_U64(seed)) + _U64(step)) + site)
    return float(z >> _U64(11)) * (2.0**-53)


@njit(cache=True)
def step_normal(seed, step, channel):
    """Standard normal keyed by (seed, step, channel); Box-Muller."""
    z1 = _mix64(_mix64(_mix64(_U64(seed)) + _U64(step)) + (WN_BASE + _U64(2 * channel)))
    z2 = _mix64(_mix64(_mix64(_U64(seed)) + _U64(step)) + (WN_BASE + _U64(2 * channel + 1)))
    u1 = (float(z1 >> _U64(11)) + 1.0) * (2.0**-53)  # (0, 1], keeps log finite
    u2 = float(z2 >> _U64(11)) * (2.0**-53)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@njit(cache=True)
def derivs_clean(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
                 alpha, beta, gamma, delta, eps, eta, zeta, tie_tol,
                 vt, cmax, cval, ew, wsum, wslot, dv, dxs, dxl):
    n = v.shape[0]
    m = xs.shape[0]
    gmax = xl[0]
    gmin = xl[0]
    for i in range(1, m):
        x = xl[i]
        if x > gmax:
            gmax = x
        elif x < gmin:
            gmin = x
    fast = gmax - gmin <= 600.0 and gmax <= 700.0
    emg = np.exp(-gmax)
    for i in range(n):
        wsum[i] = 0.0
        dv[i] = 0.0
    for i in range(m):
        a = v[cv[i, 0]]
        if cn[i, 0] == 1:
            a = 1.0 - a
        b = v[cv[i, 1]]
        if cn[i, 1] == 1:
            b = 1.0 - b
        c = v[cv[i, 2]]
        if cn[i, 2] == 1:
            c = 1.0 - c
        vt[i, 0] = a
        vt[i, 1] = b
        vt[i, 2] = c
        mx = a
        if b > mx:
            mx = b
        if c > mx:
            mx = c
        cmax[i] = mx
        cm = 1.0 - mx
        cval[i] = cm
        dxs[i] = (beta * (xs[i] + eps)) * (cm - gamma)
        if fast:
            e = np.exp(xl[i] - gmax)
            ew[i] = e
            dxl[i] = (alpha * (emg / e)) * (cm - delta)
            wsum[cv[i, 0]] += e
            wsum[cv[i, 1]] += e
            wsum[cv[i, 2]] += e
        else:
            dxl[i] = (alpha * np.exp(-xl[i])) * (cm - delta)
    if fast:
        for i in range(n):
            s = wsum[i]
            if s > 0.0:
                wsum[i] = 1.0 / s
    else:
        for i in range(n):
            lo = iptr[i]
            hi = iptr[i + 1]
            if lo == hi:
                continue
            vm = xl[iclause[lo]]
            for k in range(lo + 1, hi):
                x = xl[iclause[k]]
                if x > vm:
                    vm = x
            s = 0.0
            for k in range(lo, hi):
                s += np.exp(xl[iclause[k]] - vm)
            inv = 1.0 / s
            for k in range(lo, hi):
                wslot[k] = np.exp(xl[iclause[k]] - vm) * inv
    for i in range(m):
        cm = cval[i]
        x = xs[i]
        thr = cmax[i] - tie_tol
        for j in range(3):
            vn = cv[i, j]
            if fast:
                w = ew[i] * wsum[vn]
            else:
                w = wslot[slot_pos[i, j]]
            if cn[i, j] == 1:
                g = -cm
            else:
                g = cm
            u = w * x
            t1 = eta * u
            s1 = t1 * g
            if vt[i, j] >= thr:
                r = g
                p = eta * w
                z = zeta * p
                o = 1.0 + z
                s2 = 1.0 - x
                t2 = o * s2
                s3 = t2 * r
                term = s1 + s3
            else:
                term = s1
            dv[vn] = dv[vn] + term


@njit(cache=True)
def derivs_sites(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
                 alpha, beta, gamma, delta, eps, eta, zeta, tie_tol,
                 fc, fs, resample, eta_tol, seed, step, kappa,
                 vt, cmax, cval, ew, wsum, wslot, dv, dxs, dxl):
    # Mirror of derivs_clean with one multiplicative factor per site and the
    # leakage correction. Same operation order; unit factors and kappa=0
    # reproduce derivs_clean exactly.
    n = v.shape[0]
    m = xs.shape[0]
    slot_base = _U64(N_CLAUSE_SITES) * _U64(m)
    lo_f = 1.0 - eta_tol
    span = 2.0 * eta_tol
    gmax = xl[0]
    gmin = xl[0]
    for i in range(1, m):
        x = xl[i]
        if x > gmax:
            gmax = x
        elif x < gmin:
            gmin = x
    fast = gmax - gmin <= 600.0 and gmax <= 700.0
    emg = np.exp(-gmax)
    for i in range(n):
        wsum[i] = 0.0
        dv[i] = 0.0
    for i in range(m):
        if resample == 1:
            base = _U64(N_CLAUSE_SITES) * _U64(i)
            f_c = lo_f + span * site_uniform(seed, step, base + _U64(CS_C))
            f_xa = lo_f + span * site_uniform(seed, step, base + _U64(CS_XS_ADD))
            f_xs = lo_f + span * site_uniform(seed, step, base + _U64(CS_XS_SUB))
            f_x1 = lo_f + span * site_uniform(seed, step, base + _U64(CS_XS_MUL1))
            f_x2 = lo_f + span * site_uniform(seed, step, base + _U64(CS_XS_MUL2))
            f_ls = lo_f + span * site_uniform(seed, step, base + _U64(CS_XL_SUB))
            f_l1 = lo_f + span * site_uniform(seed, step, base + _U64(CS_XL_MUL1))
            f_l2 = lo_f + span * site_uniform(seed, step, base + _U64(CS_XL_MUL2))
        else:
            f_c = fc[i, CS_C]
            f_xa = fc[i, CS_XS_ADD]
            f_xs = fc[i, CS_XS_SUB]
            f_x1 = fc[i, CS_XS_MUL1]
            f_x2 = fc[i, CS_XS_MUL2]
            f_ls = fc[i, CS_XL_SUB]
            f_l1 = fc[i, CS_XL_MUL1]
            f_l2 = fc[i, CS_XL_MUL2]
        a = v[cv[i, 0]]
        if cn[i, 0] == 1:
            a = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, 0, SS_NEG) * (1.0 - a)
        b = v[cv[i, 1]]
        if cn[i, 1] == 1:
            b = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, 1, SS_NEG) * (1.0 - b)
        c = v[cv[i, 2]]
        if cn[i, 2] == 1:
            c = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, 2, SS_NEG) * (1.0 - c)
        vt[i, 0] = a
        vt[i, 1] = b
        vt[i, 2] = c
        mx = a
        if b > mx:
            mx = b
        if c > mx:
            mx = c
        cmax[i] = mx
        cm = f_c * (1.0 - mx)
        cval[i] = cm
        dxs[i] = f_x2 * ((f_x1 * (beta * (f_xa * (xs[i] + eps)))) * (f_xs * (cm - gamma)))
        if fast:
            e = np.exp(xl[i] - gmax)
            ew[i] = e
            dxl[i] = f_l2 * ((f_l1 * (alpha * (emg / e))) * (f_ls * (cm - delta)))
            wsum[cv[i, 0]] += e
            wsum[cv[i, 1]] += e
            wsum[cv[i, 2]] += e
        else:
            dxl[i] = f_l2 * ((f_l1 * (alpha * np.exp(-xl[i]))) * (f_ls * (cm - delta)))
    if fast:
        for i in range(n):
            s = wsum[i]
            if s > 0.0:
                wsum[i] = 1.0 / s
    else:
        for i in range(n):
            lo = iptr[i]
            hi = iptr[i + 1]
            if lo == hi:
                continue
            vm = xl[iclause[lo]]
            for k in range(lo + 1, hi):
                x = xl[iclause[k]]
                if x > vm:
                    vm = x
            s = 0.0
            for k in range(lo, hi):
                s += np.exp(xl[iclause[k]] - vm)
            inv = 1.0 / s
            for k in range(lo, hi):
                wslot[k] = np.exp(xl[iclause[k]] - vm) * inv
    for i in range(m):
        cm = cval[i]
        x = xs[i]
        thr = cmax[i] - tie_tol
        for j in range(3):
            vn = cv[i, j]
            if fast:
                w = ew[i] * wsum[vn]
            else:
                w = wslot[slot_pos[i, j]]
            if cn[i, j] == 1:
                g = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_GQ) * (-cm)
            else:
                g = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_GQ) * cm
            u = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_WXS) * (w * x)
            t1 = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_EU) * (eta * u)
            s1 = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_T1G) * (t1 * g)
            if vt[i, j] >= thr:
                if cn[i, j] == 1:
                    r = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_RQ) * (-cm)
                else:
                    r = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_RQ) * cm
                p = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_EW) * (eta * w)
                z = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_ZP) * (zeta * p)
                o = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_OPZ) * (1.0 + z)
                s2 = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_OXS) * (1.0 - x)
                t2 = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_OT) * (o * s2)
                s3 = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_T2R) * (t2 * r)
                term = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_PAIR) * (s1 + s3)
            else:
                term = s1
            dv[vn] = _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, SS_ACC) * (dv[vn] + term)
    if kappa != 0.0:
        for i in range(n):
            dv[i] = dv[i] - kappa * v[i]
        for i in range(m):
            dxs[i] = dxs[i] - kappa * xs[i]
            dxl[i] = dxl[i] - kappa * xl[i]


@njit(cache=True, inline="always")
def _slot_fac(fs, resample, lo_f, span, seed, step, slot_base, i, j, s):
    if resample == 1:
        site = slot_base + _U64(N_SLOT_SITES) * _U64(3 * i + j) + _U64(s)
        return lo_f + span * site_uniform(seed, step, site)
    return fs[i, j, s]


@njit(cache=True)
def thresh_sat(v, cv, cn):
    """Clause-by-clause check of the thresholded assignment v > 0.5."""
    m = cv.shape[0]
    for i in range(m):
        ok = False
        for j in range(3):
            t = v[cv[i, j]] > 0.5
            if cn[i, j] == 1:
                t = not t
            if t:
                ok = True
                break
        if not ok:
            return False
    return True


@njit(cache=True)
def run_clean(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
              alpha, beta, gamma, delta, eps, eta, zeta, tie_tol, dt,
              max_steps, check_interval, trace_every, trace_t, trace_v):
    n = v.shape[0]
    m = xs.shape[0]
    xl_hi = float(m)
    vt = np.empty((m, 3))
    cmax = np.empty(m)
    cval = np.empty(m)
    ewb = np.empty(m)
    wsum = np.empty(n)
    wslot = np.empty(3 * m)
    dv = np.empty(n)
    dxs = np.empty(m)
    dxl = np.empty(m)
    ntr = 0
    if trace_every > 0:
        trace_t[0] = 0.0
        for i in range(n):
            trace_v[0, i] = v[i]
        ntr = 1
    if thresh_sat(v, cv, cn):
        return STATUS_SOLVED, 0, ntr
    step = 0
    while step < max_steps:
        derivs_clean(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
                     alpha, beta, gamma, delta, eps, eta, zeta, tie_tol,
                     vt, cmax, cval, ewb, wsum, wslot, dv, dxs, dxl)
        step += 1
        for i in range(n):
            x = v[i] + dt * dv[i]
            if x != x:
                return STATUS_NAN, step, ntr
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            v[i] = x
        for i in range(m):
            x = xs[i] + dt * dxs[i]
            if x != x:
                return STATUS_NAN, step, ntr
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            xs[i] = x
            y = xl[i] + dt * dxl[i]
            if y != y:
                return STATUS_NAN, step, ntr
            if y < 0.0:
                y = 0.0
            elif y > xl_hi:
                y = xl_hi
            xl[i] = y
        if trace_every > 0 and step % trace_every == 0 and ntr < trace_t.shape[0]:
            trace_t[ntr] = step * dt
            for i in range(n):
                trace_v[ntr, i] = v[i]
            ntr += 1
        if step % check_interval == 0 or step == max_steps:
            if thresh_sat(v, cv, cn):
                if trace_every > 0 and step % trace_every != 0 and ntr < trace_t.shape[0]:
                    trace_t[ntr] = step * dt
                    for i in range(n):
                        trace_v[ntr, i] = v[i]
                    ntr += 1
                return STATUS_SOLVED, step, ntr
    return STATUS_CAP, max_steps, ntr


@njit(cache=True)
def run_sites(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
              alpha, beta, gamma, delta, eps, eta, zeta, tie_tol, dt,
              fc, fs, resample, eta_tol, model_seed, kappa, wn_level,
              max_steps, check_interval, trace_every, trace_t, trace_v):
    n = v.shape[0]
    m = xs.shape[0]
    xl_hi = float(m)
    vt = np.empty((m, 3))
    cmax = np.empty(m)
    cval = np.empty(m)
    ewb = np.empty(m)
    wsum = np.empty(n)
    wslot = np.empty(3 * m)
    dv = np.empty(n)
    dxs = np.empty(m)
    dxl = np.empty(m)
    ntr = 0
    if trace_every > 0:
        trace_t[0] = 0.0
        for i in range(n):
            trace_v[0, i] = v[i]
        ntr = 1
    if thresh_sat(v, cv, cn):
        return STATUS_SOLVED, 0, ntr
    step = 0
    while step < max_steps:
        g_t = gamma
        d_t = delta
        e_t = eps
        if wn_level > 0.0:
            # white noise on the parameter-setting sources, redrawn per step
            g_t = gamma * (1.0 + wn_level * step_normal(model_seed, step, 0))
            d_t = delta * (1.0 + wn_level * step_normal(model_seed, step, 1))
            e_t = eps * (1.0 + wn_level * step_normal(model_seed, step, 2))
            if g_t < 1e-6:
                g_t = 1e-6
            if d_t < 1e-6:
                d_t = 1e-6
            if e_t < 1e-6:
                e_t = 1e-6
        derivs_sites(v, xs, xl, cv, cn, iptr, iclause, slot_pos,
                     alpha, beta, g_t, d_t, e_t, eta, zeta, tie_tol,
                     fc, fs, resample, eta_tol, model_seed, step, kappa,
                     vt, cmax, cval, ewb, wsum, wslot, dv, dxs, dxl)
        step += 1
        for i in range(n):
            x = v[i] + dt * dv[i]
            if x != x:
                return STATUS_NAN, step, ntr
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            v[i] = x
        for i in range(m):
            x = xs[i] + dt * dxs[i]
            if x != x:
                return STATUS_NAN, step, ntr
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            xs[i] = x
            y = xl[i] + dt * dxl[i]
            if y != y:
                return STATUS_NAN, step, ntr
            if y < 0.0:
                y = 0.0
            elif y > xl_hi:
                y = xl_hi
            xl[i] = y
        if trace_every > 0 and step % trace_every == 0 and ntr < trace_t.shape[0]:
            trace_t[ntr] = step * dt
            for i in range(n):
                trace_v[ntr, i] = v[i]
            ntr += 1
        if step % check_interval == 0 or step == max_steps:
            if thresh_sat(v, cv, cn):
                if trace_every > 0 and step % trace_every != 0 and ntr < trace_t.shape[0]:
                    trace_t[ntr] = step * dt
                    for i in range(n):
                        trace_v[ntr, i] = v[i]
                    ntr += 1
                return STATUS_SOLVED, step, ntr
    return STATUS_CAP, max_steps, ntr
