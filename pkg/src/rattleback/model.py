"""Prototypical rattleback system (PRS) and its canonical extension.

State conventions
-----------------
``x = (P, R, S)``
    pitch, roll and spin intensities.
``z = (Z1, Z2, Z3)``
    Darboux coordinates ``(-log R, S, P R**lam)``; ``Z3`` is the Casimir.
``z = (Z1, Z2, Z3, Z4)``
    four-dimensional canonical extension; ``Z4`` is conjugate to ``Z3``.

All functions take the aspect-ratio parameter as ``lam`` (default 4).
"""

import math

import numpy as np

from ._validation import DomainError, ParameterError, check_lambda, check_vec, is_integer_valued
from .lie_poisson import PoissonStructure, antisym

DEFAULT_LAMBDA = 4.0
DEFAULT_EPSILON = 2e-7


def prs_field(x, lam=DEFAULT_LAMBDA):
    """Right-hand side ``(lam P S, -R S, R**2 - lam P**2)``."""
    p, r, s = x
    return np.array([lam * p * s, -r * s, r * r - lam * p * p])


def energy_H(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ x)


def grad_H(x):
    return np.asarray(x, dtype=float).copy()


def _check_roll(r, lam):
    if r < 0 and not is_integer_valued(lam):
        raise DomainError(
            f"R = {r} < 0 with non-integer lambda = {lam}: P R**lambda is not real"
        )


def casimir_C(x, lam=DEFAULT_LAMBDA):
    """Casimir ``P R**lam``; negative ``R`` is allowed only for integer ``lam``."""
    lam = check_lambda(lam)
    p, r, _ = check_vec(x)
    _check_roll(r, lam)
    return p * r**lam


def grad_C(x, lam=DEFAULT_LAMBDA):
    lam = check_lambda(lam)
    p, r, _ = check_vec(x)
    _check_roll(r, lam)
    return np.array([r**lam, lam * p * r ** (lam - 1), 0.0])


def poisson_J(x, lam=DEFAULT_LAMBDA):
    """Lie-Poisson matrix of the PRS (Bianchi VI_h with h = -lam)."""
    p, r, _ = check_vec(x)
    return antisym(0.0, lam * p, -r)


def poisson_K(x, lam=DEFAULT_LAMBDA):
    """Dual Poisson matrix for which ``C`` is the Hamiltonian and ``H`` the Casimir."""
    p, r, s = check_vec(x)
    if r <= 0:
        raise DomainError(f"poisson_K requires R > 0, got R = {r}")
    r1 = r ** (1.0 - lam)
    return antisym(r1 * s, -(r ** (2.0 - lam)), p * r1)


def prs_structure(lam=DEFAULT_LAMBDA):
    """:class:`PoissonStructure` of ``J`` with Casimir ``C``."""
    lam = check_lambda(lam)
    D = np.stack([poisson_J(e, lam) for e in np.eye(3)])
    return PoissonStructure(
        matrix_at=lambda X: poisson_J(X, lam),
        casimir=lambda X: casimir_C(X, lam),
        casimir_grad=lambda X: grad_C(X, lam),
        domain_guard=lambda X: X[1] >= 0 or is_integer_valued(lam),
        matrix_derivative=lambda X: D,
        name=f"PRS J (lambda={lam:g})",
    )


def dual_structure(lam=DEFAULT_LAMBDA):
    """:class:`PoissonStructure` of the nonlinear matrix ``K`` with Casimir ``H``."""
    lam = check_lambda(lam)
    return PoissonStructure(
        matrix_at=lambda X: poisson_K(X, lam),
        casimir=energy_H,
        casimir_grad=grad_H,
        domain_guard=lambda X: X[1] > 0,
        name=f"PRS K (lambda={lam:g})",
    )


def dual_field(x, lam=DEFAULT_LAMBDA):
    """PRS vector field computed as ``K(x) grad C(x)``."""
    return poisson_K(x, lam) @ grad_C(x, lam)


def hamiltonian_field(x, lam=DEFAULT_LAMBDA):
    """PRS vector field computed as ``J(x) grad H(x)``."""
    return poisson_J(x, lam) @ grad_H(x)


def linearized_spectrum(S_e, lam=DEFAULT_LAMBDA):
    """Eigenvalues ``(lam*S_e, -S_e, 0)`` of the linearization at ``(0, 0, S_e)``."""
    return (lam * S_e, -S_e, 0.0 * S_e)


def linearization_matrix(S_e, lam=DEFAULT_LAMBDA):
    """Jacobian of :func:`prs_field` at the spinning equilibrium ``(0, 0, S_e)``."""
    return np.diag([lam * S_e, -S_e, 0.0])


def is_singular_equilibrium(x, atol=0.0):
    """True on the S-axis, where ``J`` vanishes and every point is an equilibrium."""
    p, r, _ = x
    return abs(p) <= atol and abs(r) <= atol


def rocking_equilibria(H_level, lam=DEFAULT_LAMBDA):
    """The four zero-spin equilibria ``(+-P*, +-sqrt(lam) P*, 0)`` on the sphere ``H = H_level``."""
    lam = check_lambda(lam)
    if not H_level > 0:
        raise ParameterError(f"H_level must be positive, got {H_level}")
    p = math.sqrt(2.0 * H_level / (1.0 + lam))
    r = math.sqrt(lam) * p
    return [np.array([sp * p, sr * r, 0.0]) for sp in (1, -1) for sr in (1, -1)]


# ---------------------------------------------------------------------------
# Darboux coordinates


def potential_U(Z1, C, lam=DEFAULT_LAMBDA):
    """Effective potential ``(exp(-2 Z1) + C**2 exp(2 lam Z1)) / 2``; vectorized over ``Z1``."""
    Z1 = np.asarray(Z1, dtype=float)
    out = 0.5 * (np.exp(-2.0 * Z1) + C * C * np.exp(2.0 * lam * Z1))
    return float(out) if out.ndim == 0 else out


def potential_dU(Z1, C, lam=DEFAULT_LAMBDA):
    return -math.exp(-2.0 * Z1) + lam * C * C * math.exp(2.0 * lam * Z1)


def potential_min(C, lam=DEFAULT_LAMBDA):
    """Location and value ``(Z1*, U*)`` of the potential minimum.

    ``Z1* = -log(lam C**2) / (2 lam + 2)``, which is the rocking
    equilibrium. For ``C = 0`` the potential is monotone and has no minimum.
    """
    lam = check_lambda(lam)
    if C == 0:
        raise ParameterError("C = 0: potential is monotone, no minimum")
    z = -math.log(lam * C * C) / (2.0 * lam + 2.0)
    return z, potential_U(z, C, lam)


def darboux_energy(z, lam=DEFAULT_LAMBDA):
    z1, z2, z3 = z[:3]
    return 0.5 * z2 * z2 + potential_U(z1, z3, lam)


def darboux_field(z, lam=DEFAULT_LAMBDA):
    """Canonical flow ``(Z2, -dU/dZ1, 0)`` in Darboux coordinates."""
    z1, z2, z3 = z
    return np.array([
        z2,
        math.exp(-2.0 * z1) - lam * z3 * z3 * math.exp(2.0 * lam * z1),
        0.0,
    ])


J_DARBOUX = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
J_CANONICAL_4D = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


def extended_energy(z, epsilon=DEFAULT_EPSILON, lam=DEFAULT_LAMBDA):
    """Hamiltonian of the 4D extension, including the ``epsilon (Z3**2 + Z4**2) / 2`` term."""
    z1, z2, z3, z4 = z
    return (
        0.5 * (z3 * z3 * math.exp(2.0 * lam * z1) + math.exp(-2.0 * z1) + z2 * z2)
        + 0.5 * epsilon * (z3 * z3 + z4 * z4)
    )


def extended_energy_grad(z, epsilon=DEFAULT_EPSILON, lam=DEFAULT_LAMBDA):
    z1, z2, z3, z4 = z
    e = math.exp(2.0 * lam * z1)
    return np.array([
        lam * z3 * z3 * e - math.exp(-2.0 * z1),
        z2,
        z3 * e + epsilon * z3,
        epsilon * z4,
    ])


def extended_field(z, epsilon=DEFAULT_EPSILON, lam=DEFAULT_LAMBDA):
    """Canonical flow of :func:`extended_energy` with the 4x4 cosymplectic matrix."""
    z1, z2, z3, z4 = z
    e = math.exp(2.0 * lam * z1)
    return np.array([
        z2,
        math.exp(-2.0 * z1) - lam * z3 * z3 * e,
        epsilon * z4,
        -z3 * e - epsilon * z3,
    ])
