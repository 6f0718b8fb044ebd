"""Lie-Poisson machinery for three-dimensional Lie algebras.

Contains the Bianchi catalog of Poisson matrices and Casimirs, the
structure-constant construction ``J_ij = c^k_ij X_k``, and numerical
verifiers for antisymmetry, the Jacobi identity and Casimir annihilation.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import DomainError, ParameterError, check_vec

BIANCHI_TYPES = (
    "I", "II", "III", "IV", "V", "VI_minus1", "VI_h", "VII_0", "VII_h", "VIII", "IX",
)
CLASS_A = ("I", "II", "VI_minus1", "VII_0", "VIII", "IX")
CLASS_B = ("III", "IV", "V", "VI_h", "VII_h")

# singular-locus exclusion radii used by the domain guards
X1_GUARD = 1e-6
PLANE_GUARD = 1e-6
LOG_GUARD = 1e-9


@dataclass(frozen=True)
class BianchiSpec:
    """A Bianchi type tag, plus the real parameter ``h`` for VI_h and VII_h."""

    type_tag: str
    h: Optional[float] = None

    def __post_init__(self):
        if self.type_tag not in BIANCHI_TYPES:
            raise ParameterError(
                f"unknown Bianchi type {self.type_tag!r}; expected one of {BIANCHI_TYPES}"
            )
        if self.type_tag in ("VI_h", "VII_h"):
            if self.h is None or not math.isfinite(self.h):
                raise ParameterError(f"type {self.type_tag} requires a finite h")
            if self.type_tag == "VI_h" and self.h == -1:
                raise ParameterError("VI_h requires h != -1 (use VI_minus1)")
            if self.type_tag == "VII_h" and self.h == 0:
                raise ParameterError("VII_h requires h != 0 (use VII_0)")
        elif self.h is not None:
            raise ParameterError(f"type {self.type_tag} takes no parameter h")

    @property
    def bianchi_class(self):
        return "A" if self.type_tag in CLASS_A else "B"

    @property
    def label(self):
        return self.type_tag if self.h is None else f"{self.type_tag}(h={self.h:g})"

    @classmethod
    def parse(cls, text):
        """Parse ``"IX"`` or ``"VII_h:1.5"``."""
        tag, _, h = text.partition(":")
        return cls(tag, float(h) if h else None)


def antisym(j12, j13, j23):
    """Assemble an antisymmetric 3x3 matrix from its upper-triangle entries."""
    return np.array(
        [[0.0, j12, j13],
         [-j12, 0.0, j23],
         [-j13, -j23, 0.0]]
    )


def axial_vector(M):
    """Vector ``w`` with ``M v = w x v`` for antisymmetric ``M``; spans its kernel."""
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


# ---------------------------------------------------------------------------
# Table of Poisson matrices and Casimirs


def _upper_entries(spec, X):
    x1, x2, x3 = X
    t = spec.type_tag
    if t == "I":
        return 0.0, 0.0, 0.0
    if t == "II":
        return 0.0, 0.0, x1
    if t == "III":
        return 0.0, x1, 0.0
    if t == "IV":
        return 0.0, x1, x1 + x2
    if t == "V":
        return 0.0, x1, x2
    if t == "VI_minus1":
        return 0.0, x1, -x2
    if t == "VI_h":
        return 0.0, x1, spec.h * x2
    if t == "VII_0":
        return 0.0, x2, -x1
    if t == "VII_h":
        return 0.0, x2, -x1 + spec.h * x2
    if t == "VIII":
        return x3, x2, -x1
    if t == "IX":
        return x3, -x2, x1
    raise ParameterError(t)  # pragma: no cover


def bianchi_poisson_matrix(spec, X):
    """Poisson matrix of the given Bianchi type evaluated at ``X``.

    Every matrix in the catalog is linear in ``X``.
    """
    X = check_vec(X, name="X")
    return antisym(*_upper_entries(spec, X))


def vii_branch(h):
    """Casimir branch for VII_h: ``"hyperbolic"`` (|h|>2), ``"degenerate"`` (|h|=2), ``"elliptic"``."""
    if abs(h) > 2:
        return "hyperbolic"
    if abs(h) == 2:
        return "degenerate"
    return "elliptic"


def vii_roots(h):
    """Roots of ``mu**2 + h*mu + 1 = 0`` used by the VII_h Casimirs.

    Returns ``(lam_plus, lam_minus)`` with ``lam_plus >= lam_minus`` when
    |h| > 2, and ``(a, omega)`` with roots ``a +/- i*omega`` when |h| < 2.
    """
    disc = h * h / 4.0 - 1.0
    if disc > 0:
        r = math.sqrt(disc)
        return -h / 2.0 + r, -h / 2.0 - r
    if disc < 0:
        return -h / 2.0, math.sqrt(-disc)
    return -h / 2.0, 0.0


def _domain_violation(spec, X):
    """Describe why ``X`` is outside the Casimir's domain, or return None."""
    x1, x2, _ = X
    t = spec.type_tag
    if t in ("IV", "V", "VI_h") and abs(x1) < X1_GUARD:
        return f"{spec.label}: singular locus X1 = 0 (|X1| < {X1_GUARD:g})"
    if t == "VII_h":
        if math.hypot(x1, x2) < PLANE_GUARD:
            return f"{spec.label}: singular locus X1 = X2 = 0"
        branch = vii_branch(spec.h)
        if branch == "hyperbolic":
            lp, lm = vii_roots(spec.h)
            if abs(lp * x1 + x2) <= LOG_GUARD or abs(lm * x1 + x2) <= LOG_GUARD:
                return f"{spec.label}: log argument vanishes on an eigenline"
        elif branch == "degenerate":
            s = 1.0 if spec.h > 0 else -1.0
            if abs(x1 - s * x2) <= LOG_GUARD:
                return f"{spec.label}: log argument X1 - ({s:+g})X2 vanishes"
        elif abs(x1) < X1_GUARD:
            return f"{spec.label}: arctan argument undefined at X1 = 0"
    return None


def in_domain(spec, X):
    return _domain_violation(spec, np.asarray(X, dtype=float)) is None


def _require_domain(spec, X):
    msg = _domain_violation(spec, X)
    if msg is not None:
        raise DomainError(msg)


def bianchi_casimir(spec, X):
    """Casimir of the given Bianchi type at ``X``.

    Raises
    ------
    DomainError
        If ``X`` lies on (or numerically next to) the singular locus of
        the Casimir formula.
    """
    X = check_vec(X, name="X")
    _require_domain(spec, X)
    x1, x2, x3 = X
    t = spec.type_tag
    if t in ("I", "II"):
        return x1
    if t == "III":
        return x2
    if t == "IV":
        return x2 / x1 - math.log(abs(x1))
    if t == "V":
        return x2 / x1
    if t == "VI_minus1":
        return x1 * x2
    if t == "VI_h":
        return x2 / abs(x1) ** spec.h
    if t == "VII_0":
        return x1 * x1 + x2 * x2
    if t == "VII_h":
        return _vii_casimir(spec.h, x1, x2)
    if t == "VIII":
        return x1 * x1 + x2 * x2 - x3 * x3
    return x1 * x1 + x2 * x2 + x3 * x3


def _vii_casimir(h, x1, x2):
    branch = vii_branch(h)
    if branch == "hyperbolic":
        lp, lm = vii_roots(h)
        return lm * math.log(abs(-lm * x1 - x2)) - lp * math.log(abs(lp * x1 + x2))
    if branch == "degenerate":
        s = 1.0 if h > 0 else -1.0
        d = x1 - s * x2
        return s * x2 / d + math.log(abs(d))
    a, w = vii_roots(h)
    u, v = a * x1 + x2, w * x1
    return 2 * a * math.atan(u / v) - w * math.log(u * u + v * v)


def bianchi_casimir_grad(spec, X):
    """Analytic gradient of :func:`bianchi_casimir`."""
    X = check_vec(X, name="X")
    _require_domain(spec, X)
    x1, x2, x3 = X
    t = spec.type_tag
    if t in ("I", "II"):
        return np.array([1.0, 0.0, 0.0])
    if t == "III":
        return np.array([0.0, 1.0, 0.0])
    if t == "IV":
        return np.array([-x2 / x1**2 - 1.0 / x1, 1.0 / x1, 0.0])
    if t == "V":
        return np.array([-x2 / x1**2, 1.0 / x1, 0.0])
    if t == "VI_minus1":
        return np.array([x2, x1, 0.0])
    if t == "VI_h":
        h = spec.h
        p = abs(x1) ** -h
        return np.array([-h * x2 * p / x1, p, 0.0])
    if t == "VII_0":
        return np.array([2 * x1, 2 * x2, 0.0])
    if t == "VII_h":
        return _vii_casimir_grad(spec.h, x1, x2)
    if t == "VIII":
        return np.array([2 * x1, 2 * x2, -2 * x3])
    return 2.0 * X


def _vii_casimir_grad(h, x1, x2):
    branch = vii_branch(h)
    if branch == "hyperbolic":
        lp, lm = vii_roots(h)
        ep, em = lp * x1 + x2, lm * x1 + x2
        return np.array([lm * lm / em - lp * lp / ep, lm / em - lp / ep, 0.0])
    if branch == "degenerate":
        s = 1.0 if h > 0 else -1.0
        d = x1 - s * x2
        return np.array([(x1 - 2 * s * x2) / d**2, x2 / d**2, 0.0])
    a, w = vii_roots(h)
    u, v = a * x1 + x2, w * x1
    r2 = u * u + v * v
    g1 = 2 * a * (v * a - u * w) / r2 - 2 * w * (u * a + v * w) / r2
    g2 = 2 * a * v / r2 - 2 * w * u / r2
    return np.array([g1, g2, 0.0])


# ---------------------------------------------------------------------------
# Structure constants

_ALPHA = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
_E3 = np.array([0.0, 0.0, 1.0])


def levi_civita():
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


@dataclass(frozen=True)
class StructureConstants:
    """Bianchi parametrization ``c^i_jk = eps_jks m^si + delta^i_k a_j - delta^i_j a_k``.

    ``c[i, j, k]`` holds ``c^i_jk`` (upper index first).
    """

    m: np.ndarray
    a: np.ndarray
    label: str = ""
    c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        a = np.asarray(self.a, dtype=float)
        if m.shape != (3, 3) or not np.array_equal(m, m.T):
            raise ParameterError("m must be a symmetric 3x3 matrix")
        if a.shape != (3,):
            raise ParameterError("a must be a 3-vector")
        d = np.eye(3)
        c = (
            np.einsum("jks,si->ijk", levi_civita(), m)
            + np.einsum("ik,j->ijk", d, a)
            - np.einsum("ij,k->ijk", d, a)
        )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)

    def jacobi_residual(self):
        """Max |c^l_ij c^m_lk + c^l_jk c^m_li + c^l_ki c^m_lj| over all index tuples."""
        c = self.c
        t = np.einsum("lij,mlk->ijkm", c, c)
        r = t + np.einsum("jkim->ijkm", t) + np.einsum("kijm->ijkm", t)
        return float(np.max(np.abs(r)))


# The printed VIII row, diag(-1, 1, 1), yields J_13 = -X2 while the catalog
# matrix has J_13 = +X2; diag(-1, -1, 1) is the same algebra in the basis
# that reproduces the catalog matrix.
_TABLE2_VIII_LITERAL = np.diag([-1.0, 1.0, 1.0])


def structure_constants_for(spec, literal=False):
    """Structure constants ``(m, a)`` for a Bianchi type.

    Parameters
    ----------
    spec : BianchiSpec
    literal : bool, default False
        Only affects type VIII. By default ``m = diag(-1, -1, 1)`` is
        returned so that ``J_ij = c^k_ij X_k`` reproduces
        :func:`bianchi_poisson_matrix`; ``literal=True`` returns the
        classical ``diag(-1, 1, 1)``, an isomorphic copy in another basis.
    """
    t = spec.type_tag
    zero = np.zeros(3)
    if t == "I":
        m, a = np.zeros((3, 3)), zero
    elif t == "II":
        m, a = np.diag([1.0, 0.0, 0.0]), zero
    elif t == "VI_minus1":
        m, a = -_ALPHA, zero
    elif t == "VII_0":
        m, a = np.diag([-1.0, -1.0, 0.0]), zero
    elif t == "VIII":
        m, a = (_TABLE2_VIII_LITERAL if literal else np.diag([-1.0, -1.0, 1.0])), zero
    elif t == "IX":
        m, a = np.eye(3), zero
    elif t == "III":
        m, a = -0.5 * _ALPHA, -0.5 * _E3
    elif t == "IV":
        m, a = np.diag([1.0, 0.0, 0.0]), -_E3
    elif t == "V":
        m, a = np.zeros((3, 3)), -_E3
    elif t == "VI_h":
        m, a = 0.5 * (spec.h - 1.0) * _ALPHA, -0.5 * _E3
    else:  # VII_h
        m, a = np.diag([-1.0, -1.0, 0.0]) + 0.5 * spec.h * _ALPHA, -0.5 * spec.h * _E3
    return StructureConstants(m, a, label=spec.label)


def matrix_from_structure_constants(sc, X):
    """Lie-Poisson matrix ``J_ij = c^k_ij X_k``."""
    X = check_vec(X, name="X")
    return np.einsum("kij,k->ij", sc.c, X)


# ---------------------------------------------------------------------------
# Poisson structures and verifiers


@dataclass
class PoissonStructure:
    """A point-dependent antisymmetric matrix together with one of its Casimirs.

    ``matrix_derivative`` (optional) returns ``D`` with ``D[l, i, j] =
    d J_ij / d X_l``; when absent, :func:`jacobi_residual` falls back to
    central differences.
    """

    matrix_at: Callable
    casimir: Optional[Callable] = None
    casimir_grad: Optional[Callable] = None
    domain_guard: Callable = lambda X: True
    matrix_derivative: Optional[Callable] = None
    name: str = ""

    def check_domain(self, X):
        if not self.domain_guard(X):
            raise DomainError(f"{self.name or 'structure'}: point {X} outside domain")


def _linear_derivative(matrix_at):
    basis = np.eye(3)
    D = np.stack([matrix_at(e) for e in basis])
    return lambda X: D


def bianchi_structure(spec):
    """:class:`PoissonStructure` for a row of the Bianchi catalog."""
    mat = lambda X: bianchi_poisson_matrix(spec, X)
    return PoissonStructure(
        matrix_at=mat,
        casimir=lambda X: bianchi_casimir(spec, X),
        casimir_grad=lambda X: bianchi_casimir_grad(spec, X),
        domain_guard=lambda X: in_domain(spec, X),
        matrix_derivative=_linear_derivative(mat),
        name=spec.label,
    )


def structure_from_constants(sc, casimir=None, casimir_grad=None, domain_guard=None):
    """:class:`PoissonStructure` assembled from structure constants."""
    mat = lambda X: matrix_from_structure_constants(sc, X)
    return PoissonStructure(
        matrix_at=mat,
        casimir=casimir,
        casimir_grad=casimir_grad,
        domain_guard=domain_guard or (lambda X: True),
        matrix_derivative=_linear_derivative(mat),
        name=f"constants[{sc.label}]",
    )


def default_probe_step(X):
    return 1e-6 * (1.0 + float(np.linalg.norm(X)))


def matrix_gradient_fd(matrix_at, X, probe_step=None):
    """Central-difference ``D[l, i, j] = d J_ij / d X_l``."""
    X = np.asarray(X, dtype=float)
    step = default_probe_step(X) if probe_step is None else probe_step
    D = np.empty((3, 3, 3))
    for l in range(3):
        e = np.zeros(3)
        e[l] = step
        D[l] = (matrix_at(X + e) - matrix_at(X - e)) / (2 * step)
    return D


def jacobi_residual(ps, X, probe_step=None):
    """Max over (i, j, k) of the cyclic Jacobi sum for the matrix of ``ps`` at ``X``.

    Uses ``ps.matrix_derivative`` when available and central differences
    with ``probe_step`` (default ``1e-6 * (1 + |X|)``) otherwise.
    """
    X = check_vec(X, name="X")
    ps.check_domain(X)
    if probe_step is not None and probe_step <= 0:
        raise ValueError("probe_step must be positive")
    J = ps.matrix_at(X)
    if ps.matrix_derivative is not None and probe_step is None:
        D = ps.matrix_derivative(X)
    else:
        D = matrix_gradient_fd(ps.matrix_at, X, probe_step)
    T = np.einsum("li,ljk->ijk", J, D)
    R = T + np.einsum("jki->ijk", T) + np.einsum("kij->ijk", T)
    return float(np.max(np.abs(R)))


def casimir_annihilation_residual(ps, X):
    """``|J(X) grad C(X)| / (1 + |grad C(X)|)``."""
    X = check_vec(X, name="X")
    ps.check_domain(X)
    g = np.asarray(ps.casimir_grad(X), dtype=float)
    return float(np.linalg.norm(ps.matrix_at(X) @ g) / (1.0 + np.linalg.norm(g)))


def bracket_eval(grad_f, grad_g, ps, X):
    """Poisson bracket ``<grad F, J(X) grad G>``."""
    X = check_vec(X, name="X")
    ps.check_domain(X)
    return float(np.asarray(grad_f, dtype=float) @ ps.matrix_at(X) @ np.asarray(grad_g, dtype=float))


def antisymmetry_residual(M):
    return float(np.max(np.abs(M + M.T)))
