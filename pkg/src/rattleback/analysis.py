"""Post-processing of trajectories: reversals, conservation, leaf wandering, figure data."""

from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import DomainError, InsufficientDataError, ParameterError, is_integer_valued
from .integrate import find_level_crossings, find_zero_crossings
from .model import DEFAULT_LAMBDA, potential_U, potential_min
from .transforms import casimir_in_y

SPIN = 2
HYSTERESIS = 1e-6
TRANSITION_FRACTION = 0.5


@dataclass
class ReversalStats:
    """Spin-reversal statistics of a PRS trajectory.

    ``positive_spin_durations`` / ``negative_spin_durations`` are the lengths
    of complete episodes between consecutive certified crossings of S, and
    ``mean_ratio`` is mean(negative) / mean(positive). Because the flow is
    reversible under ``S -> -S, t -> -t`` these durations coincide on every
    periodic orbit, so ``mean_ratio`` stays at 1 whatever ``lam`` is.

    The chirality shows up in how fast S flips. ``pitch_transitions`` are
    the widths of the windows around +S -> -S crossings during which
    ``|S| < fraction * max|S|``; ``roll_transitions`` are the same for
    -S -> +S crossings. ``transition_ratio`` is mean(roll) / mean(pitch):
    above 1 when the pitch route is quicker.
    """

    crossing_times: list
    positive_spin_durations: list
    negative_spin_durations: list
    mean_ratio: float
    pitch_transitions: list = field(default_factory=list)
    roll_transitions: list = field(default_factory=list)
    transition_ratio: float = float("nan")

    def to_dict(self):
        return asdict(self)


def _certified_crossings(traj, component, refine_tol, hysteresis):
    raw = find_zero_crossings(traj, component, refine_tol)
    vals = traj.component(component)
    times = traj.times
    ends = raw[1:] + [times[-1]]
    kept, directions = [], []
    for t_c, t_next in zip(raw, ends):
        window = (times > t_c) & (times < t_next)
        seg = vals[window]
        if seg.size == 0 or np.max(np.abs(seg)) <= hysteresis:
            continue
        direction = 1 if seg[np.argmax(np.abs(seg))] > 0 else -1
        if directions and directions[-1] == direction:
            continue
        kept.append(t_c)
        directions.append(direction)
    return kept, directions


def _transition_windows(traj, component, crossings, directions, level):
    up = find_level_crossings(traj, component, level)
    down = find_level_crossings(traj, component, -level)
    edges = np.array(sorted(up + down))
    pitch, roll = [], []
    for t_c, d in zip(crossings, directions):
        i = np.searchsorted(edges, t_c)
        if i == 0 or i == len(edges):
            continue
        width = edges[i] - edges[i - 1]
        (roll if d > 0 else pitch).append(float(width))
    return pitch, roll


def reversal_stats(traj, component=SPIN, refine_tol=1e-10, hysteresis=HYSTERESIS,
                   transition_fraction=TRANSITION_FRACTION):
    """Reversal statistics of the spin component of ``traj``.

    A zero crossing is certified only if ``|S|`` exceeds ``hysteresis``
    before the next crossing and it reverses the previous certified
    direction. Partial first and last episodes are discarded.

    Raises
    ------
    InsufficientDataError
        If fewer than two certified crossings are found, or if the complete
        episodes do not include both spin senses.
    """
    crossings, directions = _certified_crossings(traj, component, refine_tol, hysteresis)
    if len(crossings) < 2:
        raise InsufficientDataError(
            f"need at least 2 certified spin reversals, found {len(crossings)}"
        )
    pos, neg = [], []
    for (t_a, d), t_b in zip(zip(crossings, directions), crossings[1:]):
        (pos if d > 0 else neg).append(t_b - t_a)
    if not pos or not neg:
        raise InsufficientDataError("complete episodes of both spin senses are required")
    ratio = float(np.mean(neg) / np.mean(pos))
    level = transition_fraction * float(np.max(np.abs(traj.component(component))))
    pitch, roll = _transition_windows(traj, component, crossings, directions, level)
    t_ratio = float(np.mean(roll) / np.mean(pitch)) if pitch and roll else float("nan")
    return ReversalStats(crossings, pos, neg, ratio, pitch, roll, t_ratio)


@dataclass
class DriftReport:
    max_rel_drift_H: float
    max_rel_drift_C: float
    time_of_max: float

    def to_dict(self):
        return asdict(self)


def _rel_drift(q, floor):
    scale = max(abs(q[0]), floor)
    d = np.abs(q - q[0]) / scale
    return d


def _invariants(states, lam, coords):
    if coords == "x":
        p, r = states[:, 0], states[:, 1]
        if np.any(r < 0) and not is_integer_valued(lam):
            raise DomainError("C = P R**lam is not real for R < 0 with non-integer lambda")
        return 0.5 * np.einsum("ij,ij->i", states, states), p * r**lam
    if coords == "z":
        z1, z2, z3 = states[:, 0], states[:, 1], states[:, 2]
        return 0.5 * z2**2 + potential_U(z1, z3, lam), z3.copy()
    if coords == "y":
        H = 0.5 * np.einsum("ij,ij->i", states, states)
        C = np.array([casimir_in_y(y, lam) for y in states])
        return H, C
    raise ParameterError(f"coords must be 'x', 'z' or 'y', got {coords!r}")


def conservation_drift(traj, lam=DEFAULT_LAMBDA, floor=1e-300, coords="x"):
    """Max relative drift of ``H`` and ``C`` over the samples of a trajectory.

    ``coords`` names the coordinates of ``traj``: ``"x"`` for ``(P, R, S)``,
    ``"z"`` for Darboux and ``"y"`` for so(3) coordinates. In each case the
    invariants are evaluated in those coordinates, without mapping back.
    """
    H, C = _invariants(traj.states, lam, coords)
    dH, dC = _rel_drift(H, floor), _rel_drift(C, floor)
    both = np.maximum(dH, dC)
    i = int(np.argmax(both))
    return DriftReport(float(dH.max()), float(dC.max()), float(traj.times[i]))


def extended_energy_drift(traj, epsilon, lam=DEFAULT_LAMBDA, floor=1e-300):
    """Max relative drift of the 4D Hamiltonian along an extended trajectory."""
    Z = traj.states
    z1, z2, z3, z4 = Z.T
    E = (
        0.5 * (z3**2 * np.exp(2.0 * lam * z1) + np.exp(-2.0 * z1) + z2**2)
        + 0.5 * epsilon * (z3**2 + z4**2)
    )
    return float(_rel_drift(E, floor).max())


@dataclass
class WanderingReport:
    z3_min: float
    z3_max: float
    sign_change: bool

    @property
    def width(self):
        return self.z3_max - self.z3_min

    def to_dict(self):
        d = asdict(self)
        d["width"] = self.width
        return d


def casimir_wandering(traj):
    """Range of the (no longer frozen) Casimir ``Z3`` along an extended trajectory."""
    z3 = traj.component(2)
    lo, hi = float(z3.min()), float(z3.max())
    return WanderingReport(lo, hi, bool(lo < 0 < hi))


# ---------------------------------------------------------------------------
# figure data


def leaf_mesh(C_value, lam=DEFAULT_LAMBDA, r_range=(0.05, 2.0), s_range=(-1.5, 1.5),
              resolution=(40, 40)):
    """Sample the Casimir leaf ``P R**lam = C_value`` on an (R, S) grid.

    Returns an ``(n, 3)`` array of ``(P, R, S)`` rows with ``P = C R**-lam``.
    ``r_range`` must not contain 0; negative R needs integer ``lam``.
    """
    nr, ns = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nr < 2 or ns < 2:
        raise ParameterError("resolution must be at least 2 per axis")
    r0, r1 = r_range
    if r0 * r1 <= 0:
        raise ParameterError(f"R range {r_range} must exclude 0")
    if r0 < 0 and not is_integer_valued(lam):
        raise DomainError("negative R requires integer lambda")
    R, S = np.meshgrid(np.linspace(r0, r1, nr), np.linspace(*s_range, ns), indexing="ij")
    P = C_value * R ** (-lam)
    return np.column_stack([P.ravel(), R.ravel(), S.ravel()])


def sphere_mesh(H_level, resolution=(40, 40)):
    """Sample the energy sphere ``(P**2 + R**2 + S**2) / 2 = H_level``."""
    if H_level <= 0:
        raise ParameterError("H_level must be positive")
    nt, nph = (resolution, resolution) if np.isscalar(resolution) else resolution
    rad = np.sqrt(2.0 * H_level)
    th, ph = np.meshgrid(np.linspace(0, np.pi, nt), np.linspace(0, 2 * np.pi, nph), indexing="ij")
    return rad * np.column_stack([
        (np.sin(th) * np.cos(ph)).ravel(), (np.sin(th) * np.sin(ph)).ravel(), np.cos(th).ravel(),
    ])


@dataclass
class PotentialProfile:
    z1: np.ndarray
    C_values: list
    U: np.ndarray  # shape (len(z1), len(C_values))
    minima: list  # (Z1*, U*) per C, None when C = 0

    def sampled_minima(self):
        return [float(self.z1[np.argmin(self.U[:, j])]) for j in range(len(self.C_values))]


def potential_profile(C_list, z1_range=(-2.0, 2.5), resolution=401, lam=DEFAULT_LAMBDA):
    """Tabulate the effective potential for each Casimir value."""
    if resolution < 2:
        raise ParameterError("resolution must be at least 2")
    z = np.linspace(*z1_range, resolution)
    U = np.column_stack([potential_U(z, C, lam) for C in C_list])
    minima = [potential_min(C, lam) if C != 0 else None for C in C_list]
    return PotentialProfile(z, list(C_list), U, minima)


def potential_asymmetry(C, lam=DEFAULT_LAMBDA, d=0.5):
    """``U(Z1* + d) - U(Z1* - d)``: positive when the cliff is on the positive side."""
    z, _ = potential_min(C, lam)
    return potential_U(z + d, C, lam) - potential_U(z - d, C, lam)
