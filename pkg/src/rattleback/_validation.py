"""Input validation helpers and exception types shared across the package."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


class DomainError(ValueError):
    """A point lies outside the region where a formula is defined."""


class ParameterError(ValueError):
    """An invalid model or algebra parameter was supplied."""


class IntegrationError(RuntimeError):
    """Time integration could not proceed.

    Attributes
    ----------
    t : float
        Last time reached successfully.
    y : ndarray
        State at ``t``.
    """

    def __init__(self, message, t=None, y=None):
        super().__init__(message)
        self.t = t
        self.y = y


class InsufficientDataError(ValueError):
    """Not enough events in a trajectory to compute statistics."""


def check_vec(x, n=3, name="x"):
    """Return ``x`` as a finite float64 vector of length ``n``."""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values: {arr}")
    return arr


def check_states(X, n_features=3):
    """Validate a batch of states of shape (n_samples, n_features)."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != n_features:
        raise ValueError(
            f"expected {n_features} columns (state components), got {X.shape[1]}"
        )
    return X


def check_lambda(lam):
    if not isinstance(lam, numbers.Real) or not np.isfinite(lam) or lam <= 0:
        raise ParameterError(f"lambda must be a finite positive real, got {lam!r}")
    return float(lam)


def is_integer_valued(v):
    return float(v).is_integer()
