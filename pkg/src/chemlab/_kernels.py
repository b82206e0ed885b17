"""Compiled fast path for 1-D time integration (intervals and radial balls).

The stage arithmetic mirrors the numpy operators in solver.py expression by
expression (same reciprocals, same evaluation order), so a trajectory taken
through this kernel matches one stepped through the numpy path bit for bit.
Keep the two in sync when touching either.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# status codes returned by advance_1d, indexed by solver.StepStatus order
OK = 0
DT_FLOOR_HIT = 1
BLOWUP_DETECTED = 2
NEGATIVITY_FAULT = 3

_POS_EPS = 1e-12


@njit(cache=True)
def _stage(u, v, du, dv, flu, flv, flc, af, iw, inv_h, inv_2h,
           chi, lam, mu, c, gamma, upwind):
    n = u.shape[0]
    for j in range(1, n):
        a = af[j]
        flu[j] = a * (u[j] - u[j - 1]) * inv_h
        flv[j] = a * (v[j] - v[j - 1]) * inv_h
        gv = (v[j] - v[j - 1]) * inv_h
        if upwind:
            uf = u[j - 1] if gv > 0.0 else u[j]
        else:
            uf = 0.5 * (u[j - 1] + u[j])
        flc[j] = a * uf * gv
    for j in range(n):
        w = iw[j]
        lap_u = (flu[j + 1] - flu[j]) * w
        lap_v = (flv[j + 1] - flv[j]) * w
        uu = u[j]
        acc = lap_u
        if chi != 0.0:
            acc = acc - chi * ((flc[j + 1] - flc[j]) * w)
        acc = acc + (lam - mu * uu) * uu
        if c != 0.0:
            if j == 0:
                g = (u[1] - u[0]) * inv_2h
            elif j == n - 1:
                g = (u[n - 1] - u[n - 2]) * inv_2h
            else:
                g = (u[j + 1] - u[j - 1]) * inv_2h
            mag = math.sqrt(g * g)
            if gamma == 2.0:
                gm = mag * mag
            elif gamma == 1.0:
                gm = mag
            else:
                gm = mag**gamma
            acc = acc - c * gm
        du[j] = acc
        dv[j] = lap_v - uu * v[j]


@njit(cache=True)
def advance_1d(u, v, t, t_target, af, iw, h, chi, lam, mu, c, gamma,
               dt_init, cfl_safety, dt_min, blowup_threshold, upwind):
    """Advance (u, v) in place to t_target; returns (t, status, last dt)."""
    n = u.shape[0]
    inv_h = 1.0 / h
    inv_2h = 1.0 / (2.0 * h)
    d_eff = 1.0
    dt_diff = cfl_safety * h * h / (2.0 * d_eff)

    du = np.empty(n)
    dv = np.empty(n)
    s1u = np.empty(n)
    s1v = np.empty(n)
    s2u = np.empty(n)
    s2v = np.empty(n)
    nu = np.empty(n)
    nv = np.empty(n)
    flu = np.zeros(n + 1)
    flv = np.zeros(n + 1)
    flc = np.zeros(n + 1)

    third = 1.0 / 3.0
    rel = 1e-14 * max(1.0, abs(t_target))
    dt_used = 0.0

    while t < t_target:
        gmax = 0.0
        for j in range(1, n):
            g = abs(v[j] - v[j - 1]) * inv_h
            if g > gmax:
                gmax = g
        dt = dt_init
        if dt_diff < dt:
            dt = dt_diff
        speed = chi * gmax
        if speed > 0.0:
            dta = cfl_safety * h / speed
            if dta < dt:
                dt = dta
        if dt < dt_min:
            return t, DT_FLOOR_HIT, 0.0
        if t_target - t < dt:
            dt = t_target - t

        while True:
            ok = True
            _stage(u, v, du, dv, flu, flv, flc, af, iw, inv_h, inv_2h,
                   chi, lam, mu, c, gamma, upwind)
            smin = math.inf
            for j in range(n):
                a = u[j] + dt * du[j]
                b = v[j] + dt * dv[j]
                s1u[j] = a
                s1v[j] = b
                if a < smin:
                    smin = a
                if b < smin:
                    smin = b
            if smin >= -_POS_EPS:
                _stage(s1u, s1v, du, dv, flu, flv, flc, af, iw, inv_h, inv_2h,
                       chi, lam, mu, c, gamma, upwind)
                smin = math.inf
                for j in range(n):
                    a = 0.75 * u[j] + 0.25 * (s1u[j] + dt * du[j])
                    b = 0.75 * v[j] + 0.25 * (s1v[j] + dt * dv[j])
                    s2u[j] = a
                    s2v[j] = b
                    if a < smin:
                        smin = a
                    if b < smin:
                        smin = b
                if smin >= -_POS_EPS:
                    _stage(s2u, s2v, du, dv, flu, flv, flc, af, iw, inv_h,
                           inv_2h, chi, lam, mu, c, gamma, upwind)
                    smin = math.inf
                    for j in range(n):
                        a = third * u[j] + 2.0 * third * (s2u[j] + dt * du[j])
                        b = third * v[j] + 2.0 * third * (s2v[j] + dt * dv[j])
                        nu[j] = a
                        nv[j] = b
                        if a < smin:
                            smin = a
                        if b < smin:
                            smin = b
                    if smin >= -_POS_EPS:
                        break
                    ok = False
                else:
                    ok = False
            else:
                ok = False
            if not ok:
                dt *= 0.5
                if dt < dt_min:
                    return t, NEGATIVITY_FAULT, 0.0

        umax = -math.inf
        finite = True
        for j in range(n):
            a = nu[j]
            b = nv[j]
            u[j] = a
            v[j] = b
            if not (math.isfinite(a) and math.isfinite(b)):
                finite = False
            if a > umax:
                umax = a
        t = t + dt
        dt_used = dt
        if not finite or umax > blowup_threshold:
            return t, BLOWUP_DETECTED, dt_used
        if t_target - t <= rel:
            t = t_target
    return t, OK, dt_used
