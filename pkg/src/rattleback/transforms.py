"""Coordinate changes between the X, Z (Darboux) and Y (so(3)) formulations.

Point-wise functions operate on single states; :class:`DarbouxTransformer`
and :class:`SO3Transformer` wrap them as scikit-learn transformers acting
on ``(n_samples, 3)`` arrays so they can be used inside pipelines.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import DomainError, check_lambda, check_states, check_vec
from .lie_poisson import antisym
from .model import DEFAULT_LAMBDA, potential_U

EXP_OVERFLOW = 700.0


def x_to_z(x, lam=DEFAULT_LAMBDA):
    """``(P, R, S) -> (-log R, S, P R**lam)``, defined for ``R > 0``."""
    p, r, s = check_vec(x)
    if r <= 0:
        raise DomainError(f"x_to_z requires R > 0, got R = {r}")
    return np.array([-math.log(r), s, p * r**lam])


def z_to_x(z, lam=DEFAULT_LAMBDA):
    """Inverse of :func:`x_to_z`: ``(Z3 exp(lam Z1), exp(-Z1), Z2)``."""
    z1, z2, z3 = check_vec(z[:3], name="z")
    if lam * z1 > EXP_OVERFLOW or -z1 > EXP_OVERFLOW:
        raise DomainError(f"exp overflow mapping Z1 = {z1} back to X")
    return np.array([z3 * math.exp(lam * z1), math.exp(-z1), z2])


def _y_angle_domain(p, r):
    if r <= 0 or p <= 0:
        raise DomainError(f"Y-coordinates require P > 0 and R > 0, got P = {p}, R = {r}")


def x_to_y(x, lam=DEFAULT_LAMBDA):
    """Map to the coordinates in which the dual bracket becomes so(3).

    The (P, S) plane is rotated by ``R**(1 - lam) * arctan(S / P)``; the
    principal arctan branch is used, hence ``P > 0``.
    """
    p, r, s = check_vec(x)
    _y_angle_domain(p, r)
    rho = math.hypot(p, s)
    phi = r ** (1.0 - lam) * math.atan(s / p)
    return np.array([rho * math.cos(phi), r, rho * math.sin(phi)])


def y_to_x(y, lam=DEFAULT_LAMBDA):
    """Inverse of :func:`x_to_y` on ``Y1 > 0``, ``Y2 > 0`` with the unrotated angle in (-pi/2, pi/2)."""
    y1, y2, y3 = check_vec(y, name="y")
    if y2 <= 0 or y1 <= 0:
        raise DomainError(f"y_to_x requires Y1 > 0 and Y2 > 0, got {y}")
    rho = math.hypot(y1, y3)
    theta = y2 ** (lam - 1.0) * math.atan(y3 / y1)
    if abs(theta) >= math.pi / 2:
        raise DomainError(f"unrotated angle {theta} leaves the principal branch")
    return np.array([rho * math.cos(theta), y2, rho * math.sin(theta)])


def y_angle_in_branch(x, lam=DEFAULT_LAMBDA):
    """True when the rotated angle stays in (-pi/2, pi/2), so ``x -> y -> x`` is single-valued."""
    p, r, s = x
    return p > 0 and r > 0 and abs(r ** (1.0 - lam) * math.atan(s / p)) < math.pi / 2


def _check_y(y):
    y1, y2, y3 = check_vec(y, name="y")
    if y2 <= 0 or y1 <= 0:
        raise DomainError(f"casimir_in_y requires Y1 > 0 and Y2 > 0, got {y}")
    return y1, y2, y3


def casimir_in_y(y, lam=DEFAULT_LAMBDA):
    """``C`` in Y-coordinates: ``Y2**lam * sqrt(Y1**2 + Y3**2) * cos(Y2**(lam-1) arctan(Y3/Y1))``.

    The cosine multiplies; dividing by it (as in some printed versions of
    this formula) does not reproduce ``P R**lam`` under :func:`x_to_y`.
    See :func:`casimir_in_y_printed`.
    """
    y1, y2, y3 = _check_y(y)
    return y2**lam * math.hypot(y1, y3) * math.cos(y2 ** (lam - 1.0) * math.atan(y3 / y1))


def casimir_in_y_printed(y, lam=DEFAULT_LAMBDA):
    """The variant with the cosine in the denominator, kept for comparison reports."""
    y1, y2, y3 = _check_y(y)
    return y2**lam * math.hypot(y1, y3) / math.cos(y2 ** (lam - 1.0) * math.atan(y3 / y1))


def casimir_in_y_grad(y, lam=DEFAULT_LAMBDA):
    y1, y2, y3 = _check_y(y)
    rho2 = y1 * y1 + y3 * y3
    rho = math.sqrt(rho2)
    psi = math.atan(y3 / y1)
    k = y2 ** (lam - 1.0)
    g = k * psi
    cg, sg = math.cos(g), math.sin(g)
    yl = y2**lam
    d1 = yl * (y1 / rho * cg + rho * sg * k * y3 / rho2)
    d3 = yl * (y3 / rho * cg - rho * sg * k * y1 / rho2)
    d2 = lam * y2 ** (lam - 1.0) * rho * cg - yl * rho * sg * (lam - 1.0) * y2 ** (lam - 2.0) * psi
    return np.array([d1, d2, d3])


def so3_matrix(y):
    """so(3) Poisson matrix with rows ``(0, Y3, -Y2), (-Y3, 0, Y1), (Y2, -Y1, 0)``."""
    y1, y2, y3 = y
    return antisym(y3, -y2, y1)


def dual_matrix_in_y(y, lam=DEFAULT_LAMBDA):
    """Image of the dual matrix ``K`` under :func:`x_to_y`.

    This is ``Y2**(2 - 2 lam) * L(Y)``: a conformally rescaled so(3)
    matrix. The factor is identically 1 only for ``lam = 1``; it does not
    affect the Casimir ``|Y|**2`` or the Jacobi identity.
    """
    return y[1] ** (2.0 - 2.0 * lam) * so3_matrix(y)


def y_field(y, lam=DEFAULT_LAMBDA):
    """PRS flow in Y-coordinates, ``Y2**(2 - 2 lam) L(Y) grad_Y C(Y)``."""
    return dual_matrix_in_y(y, lam) @ casimir_in_y_grad(y, lam)


def energy_in_z(z, lam=DEFAULT_LAMBDA):
    """``Z2**2 / 2 + U(Z1; Z3)``, the energy expressed in Darboux coordinates."""
    return 0.5 * z[1] ** 2 + potential_U(z[0], z[2], lam)


def _apply_rows(fn, X, lam):
    return np.array([fn(row, lam) for row in X]).reshape(-1, 3)


class DarbouxTransformer(TransformerMixin, BaseEstimator):
    """Map rows ``(P, R, S)`` to Darboux coordinates ``(Z1, Z2, Z3)``.

    Parameters
    ----------
    lam : float, default 4.0
        Aspect-ratio parameter.

    Attributes
    ----------
    n_features_in_ : int
        Always 3.
    """

    def __init__(self, lam=DEFAULT_LAMBDA):
        self.lam = lam

    def fit(self, X, y=None):
        check_lambda(self.lam)
        X = check_states(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_states(X)
        if np.any(X[:, 1] <= 0):
            raise DomainError("DarbouxTransformer requires R > 0 in every row")
        return _apply_rows(x_to_z, X, self.lam)

    def inverse_transform(self, Z):
        check_is_fitted(self, "n_features_in_")
        return _apply_rows(z_to_x, check_states(Z), self.lam)

    def get_feature_names_out(self, input_features=None):
        return np.array(["Z1", "Z2", "Z3"], dtype=object)


class SO3Transformer(TransformerMixin, BaseEstimator):
    """Map rows ``(P, R, S)`` with ``P, R > 0`` to so(3) coordinates ``(Y1, Y2, Y3)``."""

    def __init__(self, lam=DEFAULT_LAMBDA):
        self.lam = lam

    def fit(self, X, y=None):
        check_lambda(self.lam)
        X = check_states(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return _apply_rows(x_to_y, check_states(X), self.lam)

    def inverse_transform(self, Y):
        check_is_fitted(self, "n_features_in_")
        return _apply_rows(y_to_x, check_states(Y), self.lam)

    def get_feature_names_out(self, input_features=None):
        return np.array(["Y1", "Y2", "Y3"], dtype=object)
