"""Time integration: adaptive Dormand-Prince 5(4), symplectic leapfrog, event location.

The adaptive stepper is a single loop compiled with numba. Built-in models
are passed as :class:`CompiledField` and run at native speed; any other
callable ``f(t, y)`` runs through the identical loop in pure Python.
"""

import csv
import math
import types
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _kernels
from ._validation import IntegrationError, ParameterError

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
D1, D3, D4, D5, D6, D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

# PI step-size controller
SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
FAC_MIN = 0.2
FAC_MAX = 10.0

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2
STATUS_MAXSTEPS = 3


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for :func:`integrate_adaptive` and :func:`integrate_leapfrog_z`.

    ``initial_step = 0`` selects an automatic first step; ``max_step = 0``
    means unbounded. ``dt`` is the fixed step of the leapfrog method.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-20
    initial_step: float = 0.0
    max_step: float = 0.0
    method: str = "adaptive_rk"
    dt: float = 1e-3
    max_steps: int = 50_000_000
    dense: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("tolerances must be positive")
        if self.method not in ("adaptive_rk", "leapfrog"):
            raise ParameterError(f"unknown method {self.method!r}")
        if self.method == "leapfrog" and not self.dt > 0:
            raise ParameterError("leapfrog requires a positive fixed step dt")
        if self.initial_step < 0 or self.max_step < 0:
            raise ParameterError("step sizes must be non-negative")


@dataclass(frozen=True)
class CompiledField:
    """A built-in compiled right-hand side, identified by model id, with its parameters."""

    model: int
    args: tuple
    dim: int

    def __call__(self, t, y):
        return _kernels.rhs(self.model, t, np.asarray(y, dtype=float), self.args)


def prs(lam=4.0):
    return CompiledField(_kernels.PRS, (float(lam), 0.0), 3)


def dual(lam=4.0):
    return CompiledField(_kernels.DUAL, (float(lam), 0.0), 3)


def darboux(lam=4.0):
    return CompiledField(_kernels.DARBOUX, (float(lam), 0.0), 3)


def extended(lam=4.0, epsilon=2e-7):
    return CompiledField(_kernels.EXTENDED, (float(lam), float(epsilon)), 4)


def so3(lam=4.0):
    return CompiledField(_kernels.SO3, (float(lam), 0.0), 3)


def harmonic():
    return CompiledField(_kernels.HARMONIC, (0.0, 0.0), 2)


class Trajectory:
    """Time-stamped states with a piecewise-polynomial interpolant.

    Between nodes the interpolant is the Dormand-Prince quartic continuous
    extension when ``dense`` coefficients are present and the cubic Hermite
    interpolant built from ``derivs`` otherwise.
    """

    def __init__(self, times, states, derivs=None, dense=None, names=None):
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or len(times) != len(states):
            raise ValueError("times and states must have matching lengths")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(states)):
            raise ValueError("states must be finite")
        self.times = times
        self.states = states
        self.derivs = None if derivs is None else np.asarray(derivs, dtype=float)
        self.dense = None if dense is None else np.asarray(dense, dtype=float)
        self.names = list(names) if names else [f"y{i + 1}" for i in range(states.shape[1])]
        for a in (self.times, self.states, self.derivs, self.dense):
            if a is not None:
                a.setflags(write=False)

    def __len__(self):
        return len(self.times)

    @property
    def t_span(self):
        return float(self.times[0]), float(self.times[-1])

    @property
    def final_state(self):
        return self.states[-1]

    def component(self, index):
        return self.states[:, index]

    def _segment(self, t):
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), len(self.times) - 2)

    def evaluate(self, t, component=None):
        """Interpolated state (or one component) at time ``t``."""
        t0, t1 = self.t_span
        if not (t0 <= t <= t1):
            raise ValueError(f"t = {t} outside trajectory span [{t0}, {t1}]")
        if len(self.times) == 1:
            y = self.states[0]
            return y if component is None else y[component]
        i = self._segment(t)
        sl = slice(None) if component is None else component
        ta, tb = self.times[i], self.times[i + 1]
        h = tb - ta
        th = (t - ta) / h
        ya, yb = self.states[i, sl], self.states[i + 1, sl]
        if self.derivs is None:
            return ya + th * (yb - ya)
        r2 = yb - ya
        r3 = h * self.derivs[i, sl] - r2
        r4 = r2 - h * self.derivs[i + 1, sl] - r3
        r5 = self.dense[i, sl] if self.dense is not None else 0.0
        th1 = 1.0 - th
        return ya + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))

    __call__ = evaluate

    def to_csv(self, path_or_file, precision=17):
        """Write ``t,<names>`` rows with ``precision`` significant digits."""
        fmt = f"{{:.{precision - 1}e}}"
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *self.names])
            for t, row in zip(self.times, self.states):
                w.writerow([fmt.format(t), *(fmt.format(v) for v in row)])
        finally:
            if own:
                fh.close()

    @classmethod
    def from_csv(cls, path):
        """Read a trajectory written by :meth:`to_csv` (linear interpolation only)."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        if header[0] != "t":
            raise ValueError(f"{path}: first column must be 't'")
        return cls(body[:, 0], body[:, 1:], names=header[1:])


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince loop

_rhs = _kernels.rhs


@njit(cache=True)
def _grow(a, n):
    out = np.empty((2 * a.shape[0], a.shape[1]))
    out[:n] = a[:n]
    return out


@njit(cache=True)
def _err_norm(y, ynew, err, rtol, atol):
    acc = 0.0
    for i in range(y.shape[0]):
        sk = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        acc += (err[i] / sk) ** 2
    return math.sqrt(acc / y.shape[0])


@njit(cache=True)
def _initial_step(model, args, t0, y0, f0, rtol, atol, hmax):
    sk = atol + rtol * np.abs(y0)
    d0 = math.sqrt(np.mean((y0 / sk) ** 2))
    d1 = math.sqrt(np.mean((f0 / sk) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, hmax)
    f1 = _rhs(model, t0 + h0, y0 + h0 * f0, args)
    d2 = math.sqrt(np.mean(((f1 - f0) / sk) ** 2)) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, hmax)


@njit(cache=True)
def _dopri5(model, args, t0, t1, y0, rtol, atol, h_init, hmax, max_steps, dense):
    n = y0.shape[0]
    cap = 1024
    ts = np.empty((cap, 1))
    ys = np.empty((cap, n))
    fs = np.empty((cap, n)) if dense else np.empty((1, n))
    ds = np.empty((cap, n)) if dense else np.empty((1, n))
    t = t0
    y = y0.copy()
    k1 = _rhs(model, t, y, args)
    ts[0, 0] = t
    ys[0] = y
    fs[0] = k1
    count = 1
    if hmax <= 0.0:
        hmax = abs(t1 - t0)
    h = min(h_init, hmax)
    facold = 1e-4
    rejected = False
    status = 0
    steps = 0
    while t < t1:
        if steps >= max_steps:
            status = 3
            break
        if t + h >= t1:
            h = t1 - t
        if not h > 1e-14 * max(1.0, abs(t)):
            status = 1
            break
        k2 = _rhs(model, t + C2 * h, y + h * (A21 * k1), args)
        k3 = _rhs(model, t + C3 * h, y + h * (A31 * k1 + A32 * k2), args)
        k4 = _rhs(model, t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3), args)
        k5 = _rhs(model, t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), args)
        k6 = _rhs(model, t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), args)
        ynew = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = _rhs(model, t + h, ynew, args)
        steps += 1
        errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        if not (np.all(np.isfinite(ynew)) and np.all(np.isfinite(k7))):
            err = np.inf
        else:
            err = _err_norm(y, ynew, errv, rtol, atol)
        if not math.isfinite(err):
            h *= 0.25
            rejected = True
            if not h > 1e-14 * max(1.0, abs(t)):
                status = 2
                break
            continue
        fac11 = err**EXPO1
        if err <= 1.0:
            fac = fac11 / facold**BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFETY))
            hnew = h / fac
            facold = max(err, 1e-4)
            if count >= ts.shape[0]:
                ts = _grow(ts, count)
                ys = _grow(ys, count)
                if dense:
                    fs = _grow(fs, count)
                    ds = _grow(ds, count - 1)
            if dense:
                fs[count] = k7
                ds[count - 1] = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
            t = t + h if t + h < t1 else t1
            y = ynew
            k1 = k7
            ts[count, 0] = t
            ys[count] = y
            count += 1
            if rejected:
                hnew = min(hnew, h)
            rejected = False
            h = min(hnew, hmax)
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
            rejected = True
    nf = count if dense else 0
    nd = count - 1 if dense else 0
    return ts[:count, 0].copy(), ys[:count].copy(), fs[:nf].copy(), ds[:nd].copy(), status, steps


def _py_rhs(field, t, y, args):
    return np.asarray(field(t, y), dtype=float)


def _with_python_rhs(jitted):
    # same loop source, but ``_rhs`` resolves to a plain call of a Python callable
    env = dict(jitted.py_func.__globals__, _rhs=_py_rhs)
    return types.FunctionType(jitted.py_func.__code__, env, jitted.py_func.__name__)


_dopri5_py = _with_python_rhs(_dopri5)
_initial_step_py = _with_python_rhs(_initial_step)


def integrate_adaptive(field, y0, t_span, cfg=None, names=None):
    """Integrate ``dy/dt = field(t, y)`` with Dormand-Prince 5(4) and PI step control.

    Parameters
    ----------
    field : CompiledField or callable
        Either a compiled built-in field (see :func:`prs`, :func:`extended`,
        ...) or any Python callable ``field(t, y) -> array``.
    y0 : array_like
    t_span : (float, float)
        Start and end time, ``t_span[1] > t_span[0]``.
    cfg : IntegratorConfig, optional

    Returns
    -------
    Trajectory
        Contains every accepted step. With ``cfg.dense`` (default) it also
        holds node derivatives and continuous-extension coefficients;
        otherwise it interpolates linearly, which saves memory on long runs.

    Raises
    ------
    IntegrationError
        On step-size underflow, non-finite field values or exceeding
        ``cfg.max_steps``. The exception carries the last valid time and state.
    """
    cfg = cfg or IntegratorConfig()
    y0 = np.array(y0, dtype=float)
    t0, t1 = map(float, t_span)
    if not (math.isfinite(t0) and math.isfinite(t1)) or not np.all(np.isfinite(y0)):
        raise ValueError("t_span and y0 must be finite")
    if t1 <= t0:
        raise ValueError("t_span must be increasing")
    if isinstance(field, CompiledField):
        loop, init, model, args = _dopri5, _initial_step, field.model, field.args
        f0 = _rhs(model, t0, y0, args)
    else:
        loop, init, model, args = _dopri5_py, _initial_step_py, field, ()
        f0 = _py_rhs(field, t0, y0, args)
    if not np.all(np.isfinite(f0)):
        raise IntegrationError(f"non-finite field value at t = {t0!r}", t0, y0)
    hmax = cfg.max_step if cfg.max_step > 0 else t1 - t0
    h0 = cfg.initial_step
    if h0 <= 0:
        h0 = init(model, args, t0, y0, f0, cfg.rel_tol, cfg.abs_tol, hmax)
    ts, ys, fs, ds, status, _ = loop(
        model, args, t0, t1, y0, cfg.rel_tol, cfg.abs_tol, h0,
        cfg.max_step, cfg.max_steps, cfg.dense,
    )
    if status != STATUS_OK:
        reason = {
            STATUS_UNDERFLOW: "step size underflow",
            STATUS_NONFINITE: "non-finite field values",
            STATUS_MAXSTEPS: "maximum number of steps exceeded",
        }[status]
        t_fail = float(ts[-1])
        raise IntegrationError(f"{reason} at t = {t_fail!r}", t_fail, ys[-1])
    if not cfg.dense:
        return Trajectory(ts, ys, names=names)
    return Trajectory(ts, ys, derivs=fs, dense=ds, names=names)


# ---------------------------------------------------------------------------
# leapfrog in Darboux coordinates


@njit(cache=True)
def _leapfrog(z0, lam, dt, n_steps):
    out = np.empty((n_steps + 1, 3))
    der = np.empty((n_steps + 1, 3))
    z1, z2, z3 = z0[0], z0[1], z0[2]
    c2 = lam * z3 * z3
    out[0, 0], out[0, 1], out[0, 2] = z1, z2, z3
    for n in range(n_steps + 1):
        if 2.0 * lam * z1 > 700.0 or -2.0 * z1 > 700.0:
            return out[:n], der[:n], n
        force = math.exp(-2.0 * z1) - c2 * math.exp(2.0 * lam * z1)
        der[n, 0], der[n, 1], der[n, 2] = z2, force, 0.0
        if n == n_steps:
            break
        z2 += 0.5 * dt * force
        z1 += dt * z2
        if 2.0 * lam * z1 > 700.0 or -2.0 * z1 > 700.0:
            return out[: n + 1], der[: n + 1], n + 1
        z2 += 0.5 * dt * (math.exp(-2.0 * z1) - c2 * math.exp(2.0 * lam * z1))
        out[n + 1, 0], out[n + 1, 1], out[n + 1, 2] = z1, z2, z3
    return out, der, n_steps + 1


def integrate_leapfrog_z(z0, lam=4.0, dt=1e-3, n_steps=1000, t0=0.0):
    """Kick-drift-kick leapfrog for ``H = Z2**2/2 + U(Z1; Z3)``.

    ``Z3`` is copied unchanged into every state. The returned trajectory
    uses cubic Hermite interpolation between steps.

    Raises
    ------
    IntegrationError
        If an exponential in the potential would overflow.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    z0 = np.array(z0, dtype=float)
    states, derivs, n = _leapfrog(z0, float(lam), float(dt), int(n_steps))
    if n < n_steps + 1:
        t_fail = t0 + dt * max(n - 1, 0)
        raise IntegrationError(
            f"exponential overflow on the potential cliff at t = {t_fail!r}; reduce dt",
            t_fail, states[-1] if len(states) else z0,
        )
    times = t0 + dt * np.arange(n_steps + 1)
    return Trajectory(times, states, derivs=derivs, names=["Z1", "Z2", "Z3"])


# ---------------------------------------------------------------------------
# event location


def _sign_change_intervals(vals):
    s = np.sign(vals)
    nz = np.flatnonzero(s != 0)
    out = []
    for a, b in zip(nz[:-1], nz[1:]):
        if s[a] != s[b]:
            out.append((a, b))
    return out


def find_level_crossings(traj, component_index, level=0.0, refine_tol=1e-10):
    """Times where ``component - level`` changes sign, refined by bisection.

    Each bracketing pair of nodes is bisected on the interpolant until the
    bracket is narrower than ``refine_tol`` or the interpolated value hits
    the level exactly.
    """
    vals = traj.component(component_index) - level
    times = traj.times
    out = []
    for a, b in _sign_change_intervals(vals):
        if b == a + 2 and vals[a + 1] == 0.0:
            out.append(float(times[a + 1]))
            continue
        lo, hi = times[a], times[b]
        flo = vals[a]
        for _ in range(200):
            if hi - lo <= refine_tol:
                break
            mid = 0.5 * (lo + hi)
            fm = traj.evaluate(mid, component_index) - level
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(float(0.5 * (lo + hi)))
    return out


def find_zero_crossings(traj, component_index, refine_tol=1e-10):
    """Times where one component of ``traj`` changes sign (see :func:`find_level_crossings`)."""
    return find_level_crossings(traj, component_index, 0.0, refine_tol)
