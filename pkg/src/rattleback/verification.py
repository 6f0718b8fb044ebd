"""Verification suite behind ``rattleback verify``.

Every check returns a :class:`CheckRecord`; records flagged
``informational`` document known basis or typo discrepancies and never
affect the overall verdict.
"""

import zlib
from dataclasses import asdict, dataclass

import numpy as np

from . import lie_poisson as lp
from .model import (
    DEFAULT_LAMBDA, casimir_C, dual_structure, energy_H, prs_field, prs_structure,
)
from .transforms import (
    casimir_in_y, casimir_in_y_grad, casimir_in_y_printed, dual_matrix_in_y, energy_in_z,
    so3_matrix, x_to_y, x_to_z, y_angle_in_branch, y_to_x, z_to_x,
)

DEFAULT_POINTS = 100
DEFAULT_TOL = 1e-8
COMPOSITION_POINTS = 1000
# finite-difference checks cannot reach the analytic tolerances
FD_TOL = 1e-8

CATALOG = (
    lp.BianchiSpec("I"), lp.BianchiSpec("II"), lp.BianchiSpec("III"),
    lp.BianchiSpec("IV"), lp.BianchiSpec("V"), lp.BianchiSpec("VI_minus1"),
    lp.BianchiSpec("VI_h", -4.0), lp.BianchiSpec("VI_h", 0.5),
    lp.BianchiSpec("VII_0"),
    lp.BianchiSpec("VII_h", 1.5), lp.BianchiSpec("VII_h", -0.5),
    lp.BianchiSpec("VII_h", 2.0), lp.BianchiSpec("VII_h", -2.0),
    lp.BianchiSpec("VII_h", 3.0), lp.BianchiSpec("VII_h", -3.0),
    lp.BianchiSpec("VIII"), lp.BianchiSpec("IX"),
)


@dataclass
class CheckRecord:
    type: str
    check: str
    max_residual: float
    points: int
    seed: int
    tol: float
    informational: bool = False

    @property
    def passed(self):
        return bool(self.max_residual <= self.tol)

    def to_dict(self):
        d = asdict(self)
        d["pass"] = self.passed
        return d


def _rng(seed, label):
    # per-check stream so records do not depend on evaluation order
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


def sample_points(n, seed, label, accept=lambda X: True, low=-2.0, high=2.0):
    """``n`` seeded uniform points in ``[low, high]**3`` passing ``accept``."""
    rng = _rng(seed, label)
    out = []
    while len(out) < n:
        X = rng.uniform(low, high, size=3)
        if accept(X):
            out.append(X)
    return out


def _max(values):
    return float(max(values)) if values else 0.0


def check_bianchi_row(spec, points, seed, tol):
    """Casimir annihilation and Jacobi residuals of one catalog row."""
    ps = lp.bianchi_structure(spec)
    Xs = sample_points(points, seed, spec.label, ps.domain_guard)
    ann = _max([lp.casimir_annihilation_residual(ps, X) for X in Xs])
    jac = _max([lp.jacobi_residual(ps, X) for X in Xs])
    return [
        CheckRecord(spec.label, "casimir_annihilation", ann, points, seed, tol),
        CheckRecord(spec.label, "jacobi", jac, points, seed, tol),
    ]


def _killing_signature(sc):
    # B_ab = c^i_aj c^j_bi
    B = np.einsum("iaj,jbi->ab", sc.c, sc.c)
    ev = np.linalg.eigvalsh(B)
    scale = max(1.0, np.max(np.abs(ev)))
    return tuple(sorted(int(np.sign(v)) if abs(v) > 1e-12 * scale else 0 for v in ev))


def check_structure_constants(spec, points, seed, tol):
    """Compare the structure-constant construction with the catalog matrix.

    Class A rows must agree exactly. For class B rows the comparison is
    informational, while Jacobi, antisymmetry and annihilation of a
    Casimir by the assembled matrix are asserted.
    """
    sc = lp.structure_constants_for(spec)
    label = spec.label
    records = [CheckRecord(label, "constants_jacobi", sc.jacobi_residual(), 0, seed, tol)]
    Xs = sample_points(points, seed, "sc:" + label)
    diff = _max([
        np.max(np.abs(lp.matrix_from_structure_constants(sc, X) - lp.bianchi_poisson_matrix(spec, X)))
        for X in Xs
    ])
    anti = _max([lp.antisymmetry_residual(lp.matrix_from_structure_constants(sc, X)) for X in Xs])
    records.append(CheckRecord(label, "constants_antisymmetry", anti, points, seed, tol))
    if spec.bianchi_class == "A":
        records.append(CheckRecord(label, "constants_match_catalog", diff, points, seed, tol))
        return records
    records.append(
        CheckRecord(label, "constants_match_catalog", diff, points, seed, tol, informational=True)
    )
    # Casimir of the assembled class B matrix; only VI_h needs the reparametrized row
    if spec.type_tag == "VI_h":
        target = lp.BianchiSpec("VI_h", spec.h / (2.0 - spec.h))
    else:
        target = spec
    ps = lp.structure_from_constants(
        sc,
        casimir_grad=lambda X: lp.bianchi_casimir_grad(target, X),
        domain_guard=lambda X: lp.in_domain(target, X),
    )
    Xs = sample_points(points, seed, "scC:" + label, ps.domain_guard)
    ann = _max([lp.casimir_annihilation_residual(ps, X) for X in Xs])
    records.append(CheckRecord(label, "constants_casimir_annihilation", ann, points, seed, tol))
    return records


def check_literal_viii(seed, tol):
    """The classical ``m = diag(-1, 1, 1)`` row: catalog mismatch and algebra isomorphism."""
    spec = lp.BianchiSpec("VIII")
    lit = lp.structure_constants_for(spec, literal=True)
    Xs = sample_points(DEFAULT_POINTS, seed, "VIII-literal")
    diff = _max([
        np.max(np.abs(lp.matrix_from_structure_constants(lit, X) - lp.bianchi_poisson_matrix(spec, X)))
        for X in Xs
    ])
    same = _killing_signature(lit) == _killing_signature(lp.structure_constants_for(spec))
    return [
        CheckRecord("VIII(literal)", "constants_match_catalog", diff, len(Xs), seed, tol,
                    informational=True),
        CheckRecord("VIII(literal)", "killing_signature_matches", 0.0 if same else 1.0, 0, seed, tol),
    ]


def _unit_normal(h, X, ref=None):
    g = lp.bianchi_casimir_grad(lp.BianchiSpec("VII_h", h), X)
    n = g / np.linalg.norm(g)
    if ref is not None and n @ ref < 0:
        n = -n
    return n


def vii_boundary_gap(sign, X, deltas=(1e-4, 2e-4)):
    """Gap between the |h| = 2 leaf normal and its neighbours extrapolated to |h| = 2.

    Casimirs are only defined up to reparametrization, so continuity across
    the branch point is measured on the unit gradient (leaf normal).
    """
    h0 = 2.0 * sign
    n0 = _unit_normal(h0, X)
    d1, d2 = deltas
    gap = 0.0
    for side in (1.0, -1.0):
        n1 = _unit_normal(h0 + side * d1, X, n0)
        n2 = _unit_normal(h0 + side * d2, X, n0)
        # linear extrapolation from h0 + d1, h0 + 2 d1 back to h0
        est = (d2 * n1 - d1 * n2) / (d2 - d1)
        gap = max(gap, float(np.max(np.abs(est - n0))))
    return gap


def check_vii_continuity(points, seed, tol=1e-6):
    records = []
    for sign in (1.0, -1.0):
        label = f"VII_h(h={2 * sign:+g})"
        specs = [lp.BianchiSpec("VII_h", 2 * sign + s * d)
                 for s in (1, -1) for d in (0, 1e-4, 2e-4)]
        accept = lambda X: all(lp.in_domain(s, X) for s in specs)
        Xs = sample_points(points, seed, "cont:" + label, accept)
        gap = _max([vii_boundary_gap(sign, X) for X in Xs])
        records.append(CheckRecord(label, "branch_continuity", gap, points, seed, tol))
    return records


def _prs_points(n, seed, label, lam):
    return sample_points(
        n, seed, label, lambda X: X[0] > 0.05 and X[1] > 0.2 and y_angle_in_branch(X, lam),
    )


def check_compositions(seed, lam=DEFAULT_LAMBDA, points=COMPOSITION_POINTS):
    """Coordinate-change identities, including both forms of the Y-space Casimir."""
    Xs = _prs_points(points, seed, "compositions", lam)

    def rel(a, b):
        return abs(a - b) / max(1.0, abs(b))

    product = _max([rel(casimir_in_y(x_to_y(X, lam), lam), casimir_C(X, lam)) for X in Xs])
    printed = _max([rel(casimir_in_y_printed(x_to_y(X, lam), lam), casimir_C(X, lam)) for X in Xs])
    z_trip = _max([np.max(np.abs(z_to_x(x_to_z(X, lam), lam) - X)) / max(1.0, np.max(np.abs(X)))
                   for X in Xs])
    y_trip = _max([np.max(np.abs(y_to_x(x_to_y(X, lam), lam) - X)) / max(1.0, np.max(np.abs(X)))
                   for X in Xs])
    e_z = _max([rel(energy_in_z(x_to_z(X, lam), lam), energy_H(X)) for X in Xs])
    fields = _max([np.max(np.abs(prs_structure(lam).matrix_at(X) @ X - prs_field(X, lam)))
                   for X in Xs])
    n = len(Xs)
    tag = f"PRS(lambda={lam:g})"
    return [
        CheckRecord(tag, "casimir_in_y_product_form", product, n, seed, 1e-10),
        CheckRecord(tag, "casimir_in_y_printed_form", printed, n, seed, 1e-10, informational=True),
        CheckRecord(tag, "x_z_round_trip", z_trip, n, seed, 1e-13),
        CheckRecord(tag, "x_y_round_trip", y_trip, n, seed, 1e-12),
        CheckRecord(tag, "energy_in_darboux", e_z, n, seed, 1e-13),
        CheckRecord(tag, "hamiltonian_field_matches", fields, n, seed, 1e-12),
    ]


def _pushforward_gap(X, lam, matrix):
    h = 1e-6
    Jac = np.empty((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h * max(1.0, abs(X[k]))
        Jac[:, k] = (x_to_y(X + e, lam) - x_to_y(X - e, lam)) / (2 * e[k])
    y = x_to_y(X, lam)
    lhs = Jac @ prs_field(X, lam)
    rhs = matrix(y) @ casimir_in_y_grad(y, lam)
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(lhs))))


def check_dual(seed, lam=DEFAULT_LAMBDA, points=DEFAULT_POINTS):
    """Poisson property of the dual matrix and its so(3) image."""
    ds = dual_structure(lam)
    Xs = _prs_points(points, seed, "dual", lam)
    jac = _max([lp.jacobi_residual(ds, X, lp.default_probe_step(X)) for X in Xs])
    ann = _max([lp.casimir_annihilation_residual(ds, X) for X in Xs])
    push = _max([_pushforward_gap(X, lam, lambda y: dual_matrix_in_y(y, lam)) for X in Xs])
    bare = _max([_pushforward_gap(X, lam, so3_matrix) for X in Xs])
    tag = f"PRS-K(lambda={lam:g})"
    return [
        CheckRecord(tag, "jacobi_fd", jac, len(Xs), seed, FD_TOL),
        CheckRecord(tag, "casimir_annihilation", ann, len(Xs), seed, 1e-12),
        CheckRecord(tag, "pushforward_conformal_so3", push, len(Xs), seed, FD_TOL),
        CheckRecord(tag, "pushforward_bare_so3", bare, len(Xs), seed, FD_TOL,
                    informational=lam != 1.0),
    ]


def run_verification(seed=0, points=DEFAULT_POINTS, tol=DEFAULT_TOL, lam=DEFAULT_LAMBDA):
    """Run the whole suite and return ``(all_passed, records)``.

    ``tol`` applies to the catalog checks; composition and
    finite-difference records carry their own tolerances.
    """
    if points < 1:
        raise ValueError("points must be at least 1")
    records = []
    for spec in CATALOG:
        records += check_bianchi_row(spec, points, seed, tol)
        records += check_structure_constants(spec, points, seed, tol)
    records += check_literal_viii(seed, tol)
    records += check_vii_continuity(points, seed)
    records += check_compositions(seed, lam)
    records += check_dual(seed, lam, points)
    ok = all(r.passed for r in records if not r.informational)
    return ok, records


def report(records, seed, ok):
    return {
        "seed": seed,
        "pass": ok,
        "records": [r.to_dict() for r in records],
    }
