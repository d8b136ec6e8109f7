"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_radii(r, name: str = "r", allow_zero: bool = False) -> np.ndarray:
    """1-d, finite, strictly increasing radii."""
    r = check_array(np.atleast_1d(np.asarray(r, dtype=float)), ensure_2d=False,
                    input_name=name)
    if r.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.any(r < 0) or (not allow_zero and np.any(r == 0)):
        raise ValueError(f"{name} must be positive")
    if np.any(np.diff(r) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return r


def check_profile_table(X, log_volumes: bool = False):
    """Split an ``(n, 2)`` table of ``(r, vol)`` into radii and log-volumes.

    With ``log_volumes=True`` the second column already holds ``log vol``,
    which is how super-exponential profiles are passed without overflow.
    """
    X = check_array(X, ensure_min_samples=2, input_name="X")
    if X.shape[1] != 2:
        raise ValueError(f"expected columns (r, vol), got {X.shape[1]} columns")
    r = check_radii(X[:, 0])
    if log_volumes:
        return r, X[:, 1].copy()
    if np.any(X[:, 1] < 0):
        raise ValueError("volumes must be non-negative")
    with np.errstate(divide="ignore"):
        return r, np.log(X[:, 1])


def check_tail_fraction(x) -> float:
    x = check_scalar(x, "tail_fraction")
    if not 0 < x <= 0.5:
        raise ValueError(f"tail_fraction must lie in (0, 0.5], got {x}")
    return x


def check_scalar(x, name: str, positive: bool = False) -> float:
    if isinstance(x, bool) or not isinstance(x, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite")
    if positive and not x > 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x


def check_dimension(m) -> int:
    if isinstance(m, bool) or not isinstance(m, numbers.Integral) or m < 1:
        raise ValueError(f"dimension must be a positive integer, got {m!r}")
    return int(m)
