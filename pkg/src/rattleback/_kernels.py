"""Compiled right-hand sides ``rhs(t, y, args)`` for the built-in models."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def prs_rhs(t, y, args):
    lam = args[0]
    p, r, s = y[0], y[1], y[2]
    out = np.empty(3)
    out[0] = lam * p * s
    out[1] = -r * s
    out[2] = r * r - lam * p * p
    return out


@njit(cache=True)
def dual_rhs(t, y, args):
    # K(x) grad C(x), evaluated entrywise
    lam = args[0]
    p, r, s = y[0], y[1], y[2]
    r1 = r ** (1.0 - lam)
    r2 = r ** (2.0 - lam)
    c1 = r**lam
    c2 = lam * p * r ** (lam - 1.0)
    out = np.empty(3)
    out[0] = r1 * s * c2
    out[1] = -r1 * s * c1
    out[2] = r2 * c1 - p * r1 * c2
    return out


@njit(cache=True)
def darboux_rhs(t, y, args):
    lam = args[0]
    out = np.empty(3)
    out[0] = y[1]
    out[1] = math.exp(-2.0 * y[0]) - lam * y[2] * y[2] * math.exp(2.0 * lam * y[0])
    out[2] = 0.0
    return out


@njit(cache=True)
def extended_rhs(t, y, args):
    lam, eps = args[0], args[1]
    e = math.exp(2.0 * lam * y[0])
    out = np.empty(4)
    out[0] = y[1]
    out[1] = math.exp(-2.0 * y[0]) - lam * y[2] * y[2] * e
    out[2] = eps * y[3]
    out[3] = -y[2] * e - eps * y[2]
    return out


@njit(cache=True)
def y_rhs(t, y, args):
    lam = args[0]
    y1, y2, y3 = y[0], y[1], y[2]
    out = np.empty(3)
    if y1 <= 0.0 or y2 <= 0.0:
        # outside the principal branch the chart is invalid
        out[:] = np.nan
        return out
    rho2 = y1 * y1 + y3 * y3
    rho = math.sqrt(rho2)
    psi = math.atan(y3 / y1)
    k = y2 ** (lam - 1.0)
    g = k * psi
    cg, sg = math.cos(g), math.sin(g)
    yl = y2**lam
    d1 = yl * (y1 / rho * cg + rho * sg * k * y3 / rho2)
    d3 = yl * (y3 / rho * cg - rho * sg * k * y1 / rho2)
    d2 = lam * k * rho * cg - yl * rho * sg * (lam - 1.0) * y2 ** (lam - 2.0) * psi
    f = y2 ** (2.0 - 2.0 * lam)
    out[0] = f * (y3 * d2 - y2 * d3)
    out[1] = f * (-y3 * d1 + y1 * d3)
    out[2] = f * (y2 * d1 - y1 * d2)
    return out


@njit(cache=True)
def harmonic_rhs(t, y, args):
    out = np.empty(2)
    out[0] = y[1]
    out[1] = -y[0]
    return out


PRS, DUAL, DARBOUX, EXTENDED, SO3, HARMONIC = range(6)


@njit(cache=True)
def rhs(model, t, y, args):
    if model == PRS:
        return prs_rhs(t, y, args)
    if model == DUAL:
        return dual_rhs(t, y, args)
    if model == DARBOUX:
        return darboux_rhs(t, y, args)
    if model == EXTENDED:
        return extended_rhs(t, y, args)
    if model == SO3:
        return y_rhs(t, y, args)
    return harmonic_rhs(t, y, args)
