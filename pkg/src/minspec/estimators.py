"""Estimator-style wrappers over tabulated volume profiles.

Both estimators take ``X`` as an ``(n, 2)`` array of ``(r, vol)`` rows (or
``(r, log vol)`` with ``log_volumes=True``) so that profiles from files,
closed forms or quadrature go through the same path.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import corollary1_check, ins_bound, theorem1_bound
from .growth import GrowthProfile, growth_exponents, growth_sequences
from .model_manifold import euclidean
from .test_functions import rayleigh_bound
from .validation import check_dimension, check_profile_table, check_radii, check_tail_fraction


def _profile(X, m, log_volumes, min_t=0.0) -> GrowthProfile:
    r, logv = check_profile_table(X, log_volumes)
    return GrowthProfile(r, logv, check_dimension(m), min_t=min_t)


class GrowthExponentEstimator(TransformerMixin, BaseEstimator):
    """Tail growth exponents of a volume profile and the bounds built on them.

    Parameters
    ----------
    m : int
        Dimension of the submanifold.
    tail_fraction : float
        Fraction of the grid read as the tail when taking liminfs.
    log_volumes : bool
        Whether the second column of ``X`` holds ``log vol``.

    Attributes
    ----------
    mu_tail_, beta_tail_ : float
        Tail minima of ``log vol / r`` and ``log vol / r^2``.
    theorem1_bound_, ins_bound_ : float
        ``m * beta_tail_`` and ``mu_tail_**2 / 4``.
    theta_exponent_ : float
        Tail minimum of ``log Theta / r^2``.
    """

    def __init__(self, m=2, tail_fraction=0.25, log_volumes=False):
        self.m = m
        self.tail_fraction = tail_fraction
        self.log_volumes = log_volumes

    def fit(self, X, y=None):
        tf = check_tail_fraction(self.tail_fraction)
        prof = _profile(X, self.m, self.log_volumes)
        ex = growth_exponents(prof, tf)
        self.profile_ = prof
        self.mu_tail_ = ex.mu_tail
        self.beta_tail_ = ex.beta_tail
        self.theorem1_bound_ = theorem1_bound(prof, tf)
        self.ins_bound_ = ins_bound(prof, tf)
        self.theta_exponent_ = corollary1_check(prof, tf).tail
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        """Per-row ``(mu_hat, beta_hat)``."""
        check_is_fitted(self)
        mu, beta = growth_sequences(_profile(X, self.m, self.log_volumes))
        return np.column_stack([mu, beta])


class RayleighBoundEstimator(RegressorMixin, BaseEstimator):
    """Predicts the Rayleigh-quotient bound ``(m/2)(h'/h)(F'/F)`` from a fitted profile.

    Only the Euclidean warping ``h(s) = s`` is used here, which is the case
    relevant to submanifolds of Euclidean space.
    """

    def __init__(self, m=2, min_t=0.0, log_volumes=False):
        self.m = m
        self.min_t = min_t
        self.log_volumes = log_volumes

    def fit(self, X, y=None):
        self.profile_ = _profile(X, self.m, self.log_volumes, self.min_t)
        self.warping_ = euclidean(float(self.profile_.r_grid[-1]) * 1.01)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self)
        r = check_radii(np.ravel(np.asarray(X, dtype=float)), "X")
        return np.array([rayleigh_bound(self.profile_, self.warping_, x) for x in r])
